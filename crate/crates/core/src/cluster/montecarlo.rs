use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graphs::{enumerate_connected_graphs, pair_list};
use crate::error::{Error, Result};
use crate::spaces::RadialFunction;

/// Budget and seeding of a coefficient integration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples_per_chain: usize,
    pub chains: usize,
    pub seed: u64,
    /// Relative standard error the run is expected to reach; missing it is
    /// reported, not an error.
    pub target_rel_error: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples_per_chain: 20_000,
            chains: 4,
            seed: 0x5eed,
            target_rel_error: 0.05,
        }
    }
}

impl McConfig {
    pub fn budget(&self) -> usize {
        self.samples_per_chain * self.chains
    }
}

/// Which function of the graph sum is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSum {
    /// `sum_C prod f`.
    Signed,
    /// `|sum_C prod f|`.
    Absolute,
}

/// Which labeled graphs on `1..=n` enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    /// All connected graphs.
    Connected,
    /// Connected graphs without the bond `(1, 2)`; their integral is the
    /// cavity coefficient.
    Cavity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub r: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub reached_target: bool,
}

/// Log record of one run: `{n, seed, budget, estimates}`.
#[derive(Debug, Clone, Serialize)]
pub struct McRun {
    pub n: usize,
    pub seed: u64,
    pub budget: usize,
    pub chains: usize,
    pub estimates: Vec<McEstimate>,
}

/// Isotropic density `p(x) = h(|x|) / Z` with `h` piecewise constant on the
/// grid cells and a power tail, bounded below by a small floor so that every
/// region where some bond can be nonzero is reachable.
pub(crate) struct RadialProposal {
    edges: Vec<f64>,
    h: Vec<f64>,
    cum: Vec<f64>,
    tail_amp: f64,
    tail_exp: f64,
    total: f64,
}

impl RadialProposal {
    pub(crate) fn from_abs(f: &RadialFunction) -> Result<Self> {
        let p = if f.tail_exponent().is_finite() { f.tail_exponent() } else { 6.0 };
        if p <= 3.0 {
            return Err(Error::Precondition(format!(
                "bond function tail exponent {p} must exceed 3 for integrability"
            )));
        }
        let nodes = f.nodes();
        let v = f.values();
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let floor = 1e-2 * peak;
        let decay = |r: f64| floor * (1.0 + r * r).powf(-0.5 * p);

        let mut edges = vec![0.0];
        let mut h = vec![v[0].abs() + decay(nodes[0])];
        for i in 0..nodes.len() - 1 {
            edges.push(nodes[i]);
            h.push(v[i].abs().max(v[i + 1].abs()) + decay(nodes[i + 1]));
        }
        let r_max = *nodes.last().unwrap();
        edges.push(r_max);
        let tail_amp = f.tail_amplitude().abs() + floor;

        let mut cum = vec![0.0];
        for k in 0..h.len() {
            let (a, b) = (edges[k], edges[k + 1]);
            cum.push(cum[k] + h[k] * 4.0 * PI / 3.0 * (b.powi(3) - a.powi(3)));
        }
        let tail_mass = 4.0 * PI * tail_amp * r_max.powf(3.0 - p) / (p - 3.0);
        let total = cum.last().unwrap() + tail_mass;
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Precondition("proposal density is degenerate".into()));
        }
        Ok(Self { edges, h, cum, tail_amp, tail_exp: p, total })
    }

    /// Normalized density at distance `r`.
    pub(crate) fn density(&self, r: f64) -> f64 {
        let r_max = *self.edges.last().unwrap();
        let h = if r >= r_max {
            self.tail_amp * r.powf(-self.tail_exp)
        } else {
            let k = self.edges.partition_point(|&e| e <= r) - 1;
            self.h[k]
        };
        h / self.total
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        let mass = rng.gen::<f64>() * self.total;
        let bulk = *self.cum.last().unwrap();
        let r = if mass >= bulk {
            let r_max = *self.edges.last().unwrap();
            let u: f64 = rng.gen();
            r_max * (1.0 - u).powf(-1.0 / (self.tail_exp - 3.0))
        } else {
            let k = (self.cum.partition_point(|&c| c <= mass) - 1).min(self.h.len() - 1);
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            let u: f64 = rng.gen();
            (a.powi(3) + u * (b.powi(3) - a.powi(3))).cbrt()
        };
        let ct = 2.0 * rng.gen::<f64>() - 1.0;
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        let ph = 2.0 * PI * rng.gen::<f64>();
        [r * st * ph.cos(), r * st * ph.sin(), r * ct]
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

struct Sampler<'a> {
    n: usize,
    f: &'a RadialFunction,
    proposal: RadialProposal,
    pairs: Vec<(usize, usize)>,
    masks: Vec<u32>,
    mode: GraphSum,
}

impl Sampler<'_> {
    /// One importance weight for `R_1 = (r, 0, 0)`, `R_2 = 0`.
    fn draw(&self, r: f64, rng: &mut ChaCha8Rng, pos: &mut Vec<[f64; 3]>, bonds: &mut [f64]) -> f64 {
        pos.clear();
        pos.push([r, 0.0, 0.0]);
        pos.push([0.0; 3]);
        let mut inv_q = 1.0;
        for k in 2..self.n {
            let parent = rng.gen_range(0..k);
            let x = self.proposal.sample(rng);
            let p = pos[parent];
            let new = [p[0] + x[0], p[1] + x[1], p[2] + x[2]];
            let q: f64 = pos.iter().map(|pj| self.proposal.density(dist(&new, pj))).sum::<f64>() / k as f64;
            inv_q /= q;
            pos.push(new);
        }
        for (b, &(i, j)) in bonds.iter_mut().zip(&self.pairs) {
            *b = self.f.eval(dist(&pos[i - 1], &pos[j - 1]));
        }
        let phi: f64 = self
            .masks
            .iter()
            .map(|&m| {
                let mut prod = 1.0;
                let mut bits = m;
                while bits != 0 {
                    prod *= bonds[bits.trailing_zeros() as usize];
                    bits &= bits - 1;
                }
                prod
            })
            .sum();
        let phi = match self.mode {
            GraphSum::Signed => phi,
            GraphSum::Absolute => phi.abs(),
        };
        phi * inv_q
    }

    fn chain(&self, r: f64, samples: usize, mut rng: ChaCha8Rng) -> (f64, f64) {
        let mut pos = Vec::with_capacity(self.n);
        let mut bonds = vec![0.0; self.pairs.len()];
        let (mut mean, mut m2) = (0.0, 0.0);
        for i in 0..samples {
            let x = self.draw(r, &mut rng, &mut pos, &mut bonds);
            let d = x - mean;
            mean += d / (i + 1) as f64;
            m2 += d * (x - mean);
        }
        let var_mean = if samples > 1 { m2 / ((samples - 1) as f64 * samples as f64) } else { f64::INFINITY };
        (mean, var_mean)
    }
}

/// Inverse-variance merge of `(mean, variance of the mean)` pairs.
pub(crate) fn merge_inverse_variance(chains: &[(f64, f64)]) -> (f64, f64) {
    if chains.iter().any(|&(_, v)| v <= 0.0) {
        let mean = chains.iter().map(|c| c.0).sum::<f64>() / chains.len() as f64;
        let spread = chains.iter().map(|c| (c.0 - mean).abs()).fold(0.0, f64::max);
        return (mean, spread);
    }
    let wsum: f64 = chains.iter().map(|c| 1.0 / c.1).sum();
    let mean = chains.iter().map(|c| c.0 / c.1).sum::<f64>() / wsum;
    (mean, (1.0 / wsum).sqrt())
}

/// Monte Carlo estimate of the order-`n` coefficient
/// `a_n(R) = 1/(n-2)! int sum_C prod f dR_3..dR_n` at each radius, or of the
/// integral of its absolute graph sum (without the factorial) in
/// [`GraphSum::Absolute`] mode.
pub fn an_monte_carlo(
    n: usize,
    f: &RadialFunction,
    radii: &[f64],
    cfg: &McConfig,
    mode: GraphSum,
) -> Result<McRun> {
    graph_monte_carlo(n, f, radii, cfg, GraphFamily::Connected, mode)
}

/// Like [`an_monte_carlo`] over a chosen graph family; the signed result
/// carries the `1/(n-2)!` factor.
pub fn graph_monte_carlo(
    n: usize,
    f: &RadialFunction,
    radii: &[f64],
    cfg: &McConfig,
    family: GraphFamily,
    mode: GraphSum,
) -> Result<McRun> {
    if !(3..=4).contains(&n) {
        return Err(Error::Unsupported(format!("Monte Carlo coefficients support n = 3, 4; got {n}")));
    }
    if cfg.chains == 0 || cfg.samples_per_chain < 2 {
        return Err(Error::Input("Monte Carlo budget needs >= 1 chain and >= 2 samples".into()));
    }
    let make = |r: f64, samples| McEstimate {
        r,
        mean: 0.0,
        stderr: 0.0,
        samples,
        reached_target: true,
    };
    if f.max_abs() == 0.0 {
        return Ok(McRun {
            n,
            seed: cfg.seed,
            budget: cfg.budget(),
            chains: cfg.chains,
            estimates: radii.iter().map(|&r| make(r, cfg.budget())).collect(),
        });
    }
    let pairs = pair_list(n);
    let masks = enumerate_connected_graphs(n)?
        .iter()
        .map(|g| g.edge_mask())
        .filter(|m| family == GraphFamily::Connected || m & 1 == 0)
        .collect();
    let sampler = Sampler {
        n,
        f,
        proposal: RadialProposal::from_abs(f)?,
        pairs,
        masks,
        mode,
    };
    let norm = match mode {
        GraphSum::Signed => 1.0 / factorial(n - 2),
        GraphSum::Absolute => 1.0,
    };
    let jobs: Vec<(usize, usize)> = (0..radii.len()).flat_map(|i| (0..cfg.chains).map(move |c| (i, c))).collect();
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(i, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(((i as u64) << 20) | c as u64);
            sampler.chain(radii[i], cfg.samples_per_chain, rng)
        })
        .collect();
    let estimates = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let (mean, se) = merge_inverse_variance(&results[i * cfg.chains..(i + 1) * cfg.chains]);
            let (mean, stderr) = (mean * norm, se * norm);
            McEstimate {
                r,
                mean,
                stderr,
                samples: cfg.budget(),
                reached_target: stderr <= cfg.target_rel_error * mean.abs(),
            }
        })
        .collect();
    Ok(McRun {
        n,
        seed: cfg.seed,
        budget: cfg.budget(),
        chains: cfg.chains,
        estimates,
    })
}
