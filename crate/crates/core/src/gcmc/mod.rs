//! Grand canonical Monte Carlo in a periodic cubic box: insertion, deletion
//! and displacement moves, pair-distance histograms and the estimated radial
//! distribution function, cavity function and density.

mod chain;
mod checkpoint;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use chain::{Block, Chain, MoveCounter};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use crate::error::{Error, Result};
use crate::forward::{Backend, ForwardDiagnostics, ForwardResult};
use crate::potentials::Potential;
use crate::spaces::{RadialFunction, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveMix {
    pub insert: f64,
    pub delete: f64,
    pub displace: f64,
}

impl Default for MoveMix {
    fn default() -> Self {
        Self {
            insert: 0.25,
            delete: 0.25,
            displace: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GCMCConfig {
    pub box_side: f64,
    pub beta: f64,
    pub z: f64,
    pub move_mix: MoveMix,
    /// Moves per chain before sampling starts.
    pub n_equilibrate: u64,
    /// Moves per chain during sampling.
    pub n_sample: u64,
    /// Moves between histogram samples.
    pub sample_interval: u64,
    pub bin_width: f64,
    /// Interactions beyond this distance are dropped (no shift).
    pub r_cut: f64,
    pub max_displacement: f64,
    pub seed: u64,
    pub n_chains: usize,
    /// Blocks per chain for the jackknife error estimate.
    pub n_blocks: usize,
}

impl Default for GCMCConfig {
    fn default() -> Self {
        Self {
            box_side: 12.0,
            beta: 1.0,
            z: 0.0,
            move_mix: MoveMix::default(),
            n_equilibrate: 100_000,
            n_sample: 1_000_000,
            sample_interval: 50,
            bin_width: 0.05,
            r_cut: 5.0,
            max_displacement: 0.5,
            seed: 0x5eed,
            n_chains: 8,
            n_blocks: 8,
        }
    }
}

impl GCMCConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Input(m));
        if !(self.box_side > 0.0) || !self.box_side.is_finite() {
            return bad(format!("box side must be positive, got {}", self.box_side));
        }
        if !(self.r_cut > 0.0) || self.r_cut > 0.5 * self.box_side {
            return bad(format!(
                "cutoff {} must lie in (0, box_side/2 = {}] for the minimum-image convention",
                self.r_cut,
                0.5 * self.box_side
            ));
        }
        if !(self.beta > 0.0) || !(self.z >= 0.0) || !self.z.is_finite() {
            return bad(format!("need beta > 0 and z >= 0, got beta = {}, z = {}", self.beta, self.z));
        }
        let m = self.move_mix;
        if [m.insert, m.delete, m.displace].iter().any(|p| !(*p >= 0.0)) || ((m.insert + m.delete + m.displace) - 1.0).abs() > 1e-12
        {
            return bad(format!("move mix must be probabilities summing to 1, got {m:?}"));
        }
        if m.insert != m.delete {
            return bad(format!("insert and delete probabilities must be equal, got {} and {}", m.insert, m.delete));
        }
        if !(self.bin_width > 0.0) || self.bin_width > self.box_side / 50.0 {
            return bad(format!("bin width must lie in (0, box_side/50], got {}", self.bin_width));
        }
        if self.n_chains == 0 || self.n_blocks == 0 || self.sample_interval == 0 {
            return bad("chains, blocks and sample interval must be positive".into());
        }
        if self.n_sample < self.sample_interval * self.n_blocks as u64 {
            return bad(format!(
                "n_sample = {} leaves a block without samples (interval {}, {} blocks)",
                self.n_sample, self.sample_interval, self.n_blocks
            ));
        }
        if !(self.max_displacement > 0.0) {
            return bad("max displacement must be positive".into());
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.box_side.powi(3)
    }

    pub fn histogram_range(&self) -> f64 {
        self.n_bins() as f64 * self.bin_width
    }

    pub fn n_bins(&self) -> usize {
        ((0.5 * self.box_side) / self.bin_width + 1e-9).floor() as usize
    }
}

/// `min(1, z V / (N + 1) e^{-beta dU})` for adding a particle to `n`.
pub fn insert_acceptance(z: f64, volume: f64, n: usize, beta: f64, du: f64) -> f64 {
    clamp_ratio(z * volume / (n + 1) as f64 * (-beta * du).exp())
}

/// `min(1, N / (z V) e^{-beta dU})` for removing one of `n` particles.
pub fn delete_acceptance(z: f64, volume: f64, n: usize, beta: f64, du: f64) -> f64 {
    clamp_ratio(n as f64 / (z * volume) * (-beta * du).exp())
}

pub fn displace_acceptance(beta: f64, du: f64) -> f64 {
    clamp_ratio((-beta * du).exp())
}

fn clamp_ratio(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.min(1.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AcceptanceRates {
    pub insert: f64,
    pub delete: f64,
    pub displace: f64,
}

#[derive(Debug, Clone)]
pub struct GCMCResult {
    pub config: GCMCConfig,
    /// Estimated `g` at the bin centers; zero on missing bins.
    pub g_hist: RadialFunction,
    pub g_stderr: RadialFunction,
    pub counts: Vec<u64>,
    /// Bins with no recorded pair.
    pub missing: Vec<bool>,
    pub rho0_mean: f64,
    pub rho0_err: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub acceptance_rates: AcceptanceRates,
    /// Samples of each particle number, indexed by `N`.
    pub n_distribution: Vec<u64>,
    pub samples: u64,
}

impl GCMCResult {
    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = self.config.bin_width;
        (k as f64 * w, (k + 1) as f64 * w)
    }

    pub fn diagnostics(&self) -> GcmcDiagnostics {
        GcmcDiagnostics {
            rho0_mean: self.rho0_mean,
            rho0_err: self.rho0_err,
            mean_n: self.mean_n,
            var_n: self.var_n,
            dispersion: if self.mean_n > 0.0 { self.var_n / self.mean_n } else { f64::NAN },
            acceptance_rates: self.acceptance_rates,
            samples: self.samples,
            missing_bins: self.missing.iter().filter(|m| **m).count(),
            error_method: format!(
                "delete-one-block jackknife over {} chains x {} blocks",
                self.config.n_chains, self.config.n_blocks
            ),
            truncation: format!("pair potential cut at r = {} without shift; the tail bias is not corrected", self.config.r_cut),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GcmcDiagnostics {
    pub rho0_mean: f64,
    pub rho0_err: f64,
    pub mean_n: f64,
    pub var_n: f64,
    pub dispersion: f64,
    pub acceptance_rates: AcceptanceRates,
    pub samples: u64,
    pub missing_bins: usize,
    pub error_method: String,
    pub truncation: String,
}

/// All chains of one simulation; can be advanced in stages and
/// checkpointed between them.
#[derive(Debug, Clone)]
pub struct GcmcRun {
    pub config: GCMCConfig,
    pub chains: Vec<Chain>,
}

impl GcmcRun {
    pub fn new(cfg: GCMCConfig) -> Result<Self> {
        cfg.validate()?;
        let chains = (0..cfg.n_chains as u64).map(|i| Chain::new(&cfg, i)).collect();
        Ok(Self { config: cfg, chains })
    }

    /// Advances every chain to at most `until` moves.
    pub fn advance(&mut self, u: &Potential, until: u64) {
        let cfg = &self.config;
        self.chains.par_iter_mut().for_each(|c| c.advance(u, cfg, until));
    }

    pub fn is_done(&self) -> bool {
        self.chains.iter().all(|c| c.is_done(&self.config))
    }

    pub fn finish(&self) -> Result<GCMCResult> {
        if !self.is_done() {
            return Err(Error::Precondition("simulation has not completed its move budget".into()));
        }
        estimate(&self.config, &self.chains)
    }
}

/// Runs every chain to completion and merges them.
pub fn run_gcmc(u: &Potential, cfg: &GCMCConfig) -> Result<GCMCResult> {
    let mut run = GcmcRun::new(cfg.clone())?;
    run.advance(u, u64::MAX);
    run.finish()
}

struct Totals {
    samples: f64,
    n_sum: f64,
    pairs: Vec<f64>,
}

fn g_from(t: &Totals, cfg: &GCMCConfig, shells: &[f64]) -> (Vec<f64>, f64) {
    let mean_n = t.n_sum / t.samples;
    let v = cfg.volume();
    let g = t
        .pairs
        .iter()
        .zip(shells)
        .map(|(&p, &s)| if mean_n > 0.0 { 2.0 * p / t.samples * v / (mean_n * mean_n * s) } else { 0.0 })
        .collect();
    (g, mean_n / v)
}

fn estimate(cfg: &GCMCConfig, chains: &[Chain]) -> Result<GCMCResult> {
    let bins = cfg.n_bins();
    let w = cfg.bin_width;
    let shells: Vec<f64> = (0..bins)
        .map(|k| 4.0 / 3.0 * PI * (((k + 1) as f64 * w).powi(3) - (k as f64 * w).powi(3)))
        .collect();
    let blocks: Vec<&Block> = chains.iter().flat_map(|c| c.blocks.iter()).collect();
    let mut total = Totals {
        samples: 0.0,
        n_sum: 0.0,
        pairs: vec![0.0; bins],
    };
    let mut n_sq = 0.0;
    for b in &blocks {
        total.samples += b.samples as f64;
        total.n_sum += b.n_sum as f64;
        n_sq += b.n_sq_sum as f64;
        for (t, &p) in total.pairs.iter_mut().zip(&b.pairs) {
            *t += p as f64;
        }
    }
    if blocks.iter().any(|b| b.samples == 0) {
        return Err(Error::Precondition("a sampling block recorded no samples".into()));
    }
    let (g, rho0) = g_from(&total, cfg, &shells);

    // Delete-one-block jackknife.
    let m = blocks.len() as f64;
    let loo: Vec<(Vec<f64>, f64)> = blocks
        .iter()
        .map(|b| {
            let t = Totals {
                samples: total.samples - b.samples as f64,
                n_sum: total.n_sum - b.n_sum as f64,
                pairs: total.pairs.iter().zip(&b.pairs).map(|(&a, &p)| a - p as f64).collect(),
            };
            g_from(&t, cfg, &shells)
        })
        .collect();
    #[allow(clippy::type_complexity)]
    let jk = |vals: &dyn Fn(&(Vec<f64>, f64)) -> f64| {
        let mean = loo.iter().map(vals).sum::<f64>() / m;
        ((m - 1.0) / m * loo.iter().map(|x| (vals(x) - mean).powi(2)).sum::<f64>()).sqrt()
    };
    let g_err: Vec<f64> = (0..bins).map(|k| jk(&|x| x.0[k])).collect();
    let rho0_err = jk(&|x| x.1);

    let counts: Vec<u64> = (0..bins).map(|k| blocks.iter().map(|b| b.pairs[k]).sum()).collect();
    let missing: Vec<bool> = counts.iter().map(|&c| c == 0).collect();
    let grid = Arc::new(RadialGrid::from_nodes((0..bins).map(|k| (k as f64 + 0.5) * w).collect())?);
    let mean_n = total.n_sum / total.samples;
    let var_n = n_sq / total.samples - mean_n * mean_n;
    let mut n_distribution = Vec::new();
    for c in chains {
        if n_distribution.len() < c.n_hist.len() {
            n_distribution.resize(c.n_hist.len(), 0);
        }
        for (d, &h) in n_distribution.iter_mut().zip(&c.n_hist) {
            *d += h;
        }
    }
    let sum = |f: fn(&Chain) -> MoveCounter| {
        chains.iter().map(f).fold(MoveCounter::default(), |a, b| MoveCounter {
            attempted: a.attempted + b.attempted,
            accepted: a.accepted + b.accepted,
        })
    };
    Ok(GCMCResult {
        config: cfg.clone(),
        g_hist: RadialFunction::new(grid.clone(), g, f64::INFINITY)?,
        g_stderr: RadialFunction::new(grid, g_err, f64::INFINITY)?,
        counts,
        missing,
        rho0_mean: rho0,
        rho0_err,
        mean_n,
        var_n,
        acceptance_rates: AcceptanceRates {
            insert: sum(|c| c.insert).rate(),
            delete: sum(|c| c.delete).rate(),
            displace: sum(|c| c.displace).rate(),
        },
        n_distribution,
        samples: total.samples as u64,
    })
}

/// Cavity function `e^{beta u} g` per bin with its standard error. Missing
/// bins carry zero and are flagged in `missing`.
#[derive(Debug, Clone)]
pub struct CavityEstimate {
    pub y: RadialFunction,
    pub y_stderr: RadialFunction,
    pub missing: Vec<bool>,
}

pub fn estimate_cavity(result: &GCMCResult, u: &Potential, beta: f64) -> CavityEstimate {
    let g = &result.g_hist;
    let boltz_inv: Vec<f64> = g.nodes().iter().map(|&r| (beta * u.eval(r)).exp()).collect();
    let pick = |vals: &[f64]| {
        let v = vals
            .iter()
            .zip(&boltz_inv)
            .zip(&result.missing)
            .map(|((&x, &b), &m)| if m || !(x * b).is_finite() { 0.0 } else { x * b })
            .collect();
        RadialFunction::new(g.grid().clone(), v, f64::INFINITY).expect("finite by construction")
    };
    let missing = result
        .missing
        .iter()
        .zip(&boltz_inv)
        .map(|(&m, &b)| m || !b.is_finite())
        .collect();
    CavityEstimate {
        y: pick(g.values()),
        y_stderr: pick(result.g_stderr.values()),
        missing,
    }
}

/// The simulation result in the form produced by the expansion backend.
pub fn to_forward_result(result: &GCMCResult, u: &Potential) -> ForwardResult {
    let cav = estimate_cavity(result, u, result.config.beta);
    ForwardResult {
        h: result.g_hist.map(|g| g - 1.0),
        g: result.g_hist.clone(),
        dy: cav.y.map(|y| y - 1.0),
        y: cav.y,
        rho0: result.rho0_mean,
        backend: Backend::Gcmc,
        g_stderr: Some(result.g_stderr.clone()),
        y_stderr: Some(cav.y_stderr),
        missing: cav.missing,
        diagnostics: ForwardDiagnostics {
            beta: result.config.beta,
            z: result.config.z,
            order: None,
            rho0_err: Some(result.rho0_err),
            mc: None,
        },
    }
}

/// Volume average of `f` over the shell `lo <= r < hi` (composite Simpson).
pub fn shell_average(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 32;
    let h = (hi - lo) / n as f64;
    let mut num = 0.0;
    for i in 0..=n {
        let r = lo + i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        num += w * r * r * f(r);
    }
    num * h / 3.0 / ((hi.powi(3) - lo.powi(3)) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::LjTypeParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small(z: f64) -> GCMCConfig {
        GCMCConfig {
            box_side: 6.0,
            z,
            n_equilibrate: 2_000,
            n_sample: 20_000,
            sample_interval: 10,
            bin_width: 0.1,
            r_cut: 3.0,
            n_chains: 2,
            n_blocks: 4,
            ..GCMCConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small(0.1).validate().is_ok());
        let mut c = small(0.1);
        c.box_side = 0.0;
        assert!(c.validate().is_err());
        let mut c = small(0.1);
        c.r_cut = 3.5;
        assert!(c.validate().is_err());
        let mut c = small(0.1);
        c.move_mix = MoveMix { insert: 0.3, delete: 0.2, displace: 0.5 };
        assert!(c.validate().is_err());
        let mut c = small(0.1);
        c.move_mix = MoveMix { insert: 0.3, delete: 0.3, displace: 0.5 };
        assert!(c.validate().is_err());
        let mut c = small(0.1);
        c.bin_width = 0.2;
        assert!(c.validate().is_err());
        assert_eq!(small(0.1).n_bins(), 30);
    }

    // For insertion/deletion pairs with uniform position proposals and a
    // uniformly chosen particle, pi(x) P(x -> x') = pi(x') P(x' -> x) with
    // pi = z^N e^{-beta U} the weight of an unordered configuration.
    #[test]
    fn detailed_balance_audit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let n: usize = rng.gen_range(0..40);
            let z = 10f64.powf(rng.gen_range(-4.0..0.0));
            let v: f64 = rng.gen_range(10.0..2000.0);
            let beta = rng.gen_range(0.1..2.0);
            let u_old = rng.gen_range(-5.0..5.0);
            let du = rng.gen_range(-3.0..3.0);
            let ln_pi = |n: usize, u: f64| n as f64 * z.ln() - beta * u;
            // insertion x -> x' (N -> N+1) and the reverse deletion
            let fwd = ln_pi(n, u_old) - v.ln() + insert_acceptance(z, v, n, beta, du).ln();
            let rev = ln_pi(n + 1, u_old + du) - ((n + 1) as f64).ln() + delete_acceptance(z, v, n + 1, beta, -du).ln();
            assert!((fwd - rev).abs() <= 1e-12 * fwd.abs().max(1.0), "{fwd} vs {rev}");
            let a = displace_acceptance(beta, du) * (-beta * u_old).exp();
            let b = displace_acceptance(beta, -du) * (-beta * (u_old + du)).exp();
            assert!((a - b).abs() <= 1e-14 * a.max(b));
        }
    }

    #[test]
    fn infinite_energy_is_rejected() {
        assert_eq!(insert_acceptance(1.0, 10.0, 0, 1.0, f64::INFINITY), 0.0);
        assert_eq!(displace_acceptance(1.0, f64::INFINITY), 0.0);
        assert_eq!(displace_acceptance(1.0, -1.0), 1.0);
    }

    #[test]
    fn deterministic_and_staged_runs_agree() {
        let u = Potential::zero(LjTypeParams::reference_lj());
        let cfg = small(0.05);
        let a = run_gcmc(&u, &cfg).unwrap();
        let mut staged = GcmcRun::new(cfg.clone()).unwrap();
        staged.advance(&u, 7_777);
        assert!(staged.finish().is_err());
        staged.advance(&u, u64::MAX);
        let b = staged.finish().unwrap();
        assert_eq!(a.g_hist.values(), b.g_hist.values());
        assert_eq!(a.n_distribution, b.n_distribution);
    }

    #[test]
    fn shell_average_of_polynomial() {
        let avg = shell_average(|r| r, 1.0, 2.0);
        // int r^3 / int r^2 over [1, 2] = (15/4) / (7/3)
        assert!((avg - 45.0 / 28.0).abs() < 1e-12);
    }

    #[test]
    fn minimum_image() {
        let d = chain::min_image_dist(&[0.1, 0.0, 0.0], &[5.9, 0.0, 0.0], 6.0);
        assert!((d - 0.2).abs() < 1e-12);
    }
}
