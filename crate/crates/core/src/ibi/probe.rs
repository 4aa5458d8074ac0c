use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cluster::{autoconvolution_derivative, mayer_derivative, require_small_perturbation, ClusterCoefficients};
use crate::error::{Error, Result};
use crate::forward::{rdf_expansion, ForwardResult};
use crate::potentials::{EnsembleParams, Potential};
use crate::spaces::{norm_linf_rho, norm_vu, RadialFunction, RadialGrid};

/// `Phi'(u) v = v + gamma F'(u)v / F(u)`, evaluated in cavity form as
/// `(1 - gamma beta) v + gamma z (f * df + df * f) / y` at order 3 and
/// `(1 - gamma beta) v` at order 2.
pub fn phi_derivative(
    coeffs: &ClusterCoefficients,
    u: &Potential,
    v: &RadialFunction,
    z: f64,
    gamma: f64,
    n_max: usize,
    delta0: f64,
) -> Result<RadialFunction> {
    if !(2..=3).contains(&n_max) {
        return Err(Error::Unsupported(format!("derivative of Phi supports order 2 or 3, got {n_max}")));
    }
    require_small_perturbation(coeffs.grid(), u, v, delta0)?;
    let beta = coeffs.beta;
    let v = v.resample(coeffs.grid());
    let lead = v.scale(1.0 - gamma * beta);
    if n_max == 2 {
        return Ok(lead);
    }
    let ff = coeffs.mayer_autoconvolution()?;
    if let Some(i) = ff.values().iter().position(|&x| !(1.0 + z * x > 0.0)) {
        let r = ff.nodes()[i];
        return Err(Error::NegativeRdf { r, g: 1.0 + z * ff.values()[i] });
    }
    let (df, _) = mayer_derivative(coeffs, &v)?;
    let dff = autoconvolution_derivative(&coeffs.f, &df)?;
    let vals = (0..v.values().len())
        .map(|k| lead.values()[k] + gamma * z * dff.values()[k] / (1.0 + z * ff.values()[k]))
        .collect();
    RadialFunction::new(coeffs.grid().clone(), vals, v.tail_exponent())
}

/// `Phi(u + v) - Phi(u) = (1 - gamma beta) v + gamma log(y(u + v) / y(u))`,
/// the target cancelling. `log` of the ratio uses `y - 1` to avoid cancellation.
pub fn phi_difference(base: &ForwardResult, moved: &ForwardResult, v: &RadialFunction, gamma: f64) -> RadialFunction {
    let beta = base.diagnostics.beta;
    let v = v.resample(base.dy.grid());
    let dy = moved.dy.resample(base.dy.grid());
    let vals = (0..v.values().len())
        .map(|k| {
            let (a, b) = (base.dy.values()[k], dy.values()[k]);
            (1.0 - gamma * beta) * v.values()[k] + gamma * ((b - a) / (1.0 + a)).ln_1p()
        })
        .collect();
    RadialFunction::new(base.dy.grid().clone(), vals, v.tail_exponent()).expect("finite for positive y")
}

/// Fixed data of a probe: the base potential, its grid and ensemble.
#[derive(Debug, Clone)]
pub struct ProbeContext {
    pub u: Potential,
    pub grid: Arc<RadialGrid>,
    pub ens: EnsembleParams,
    pub gamma: f64,
    pub n_max: usize,
    pub delta0: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeConfig {
    pub n_samples: usize,
    /// Largest perturbation size in the perturbation norm; halved twice.
    pub magnitude: f64,
    pub halvings: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_samples: 4,
            magnitude: 0.1,
            halvings: 2,
            seed: 0x9e0be,
        }
    }
}

/// One random direction evaluated at every magnitude.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeSample {
    /// `v(r) = (a e^{-k r} + b sin(k r)/(1 + r)) (1 + r^2)^{-alpha/2}`, normalized.
    pub a: f64,
    pub b: f64,
    pub k: f64,
    /// `||Phi(u+v) - Phi(u)||_{V_u}` per magnitude.
    pub difference: Vec<f64>,
    /// `||Phi(u+v) - Phi(u) - Phi'(u)v||_{V_u}` per magnitude.
    pub remainder: Vec<f64>,
    pub difference_linf: Vec<f64>,
    pub remainder_linf: Vec<f64>,
    pub difference_slope: f64,
    pub remainder_slope: f64,
    pub difference_slope_linf: f64,
    pub remainder_slope_linf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub magnitudes: Vec<f64>,
    pub samples: Vec<ProbeSample>,
    /// `max ||Phi(u+v) - Phi(u)|| / ||v||`, an estimate of the Lipschitz constant.
    pub lipschitz_ratio: f64,
    /// `max ||Phi(u+v) - Phi(u) - Phi'(u)v|| / ||v||^2`.
    pub remainder_ratio: f64,
    pub lipschitz_ratio_linf: f64,
    pub remainder_ratio_linf: f64,
}

impl ProbeReport {
    fn slopes(&self, f: impl Fn(&ProbeSample) -> f64) -> (f64, f64) {
        self.samples
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)))
    }

    /// Range of the per-direction difference slopes.
    pub fn difference_slope_range(&self) -> (f64, f64) {
        self.slopes(|s| s.difference_slope)
    }

    pub fn remainder_slope_range(&self) -> (f64, f64) {
        self.slopes(|s| s.remainder_slope)
    }
}

fn log_slope(values: &[f64], mags: &[f64]) -> f64 {
    let n = values.len() - 1;
    (values[0] / values[n]).ln() / (mags[0] / mags[n]).ln()
}

/// Samples random directions of size `magnitude` and records difference and
/// remainder norms of `Phi` over magnitude halvings, in the perturbation norm
/// and in the weighted sup-norm.
pub fn lipschitz_probe(ctx: &ProbeContext, cfg: &ProbeConfig) -> Result<ProbeReport> {
    if !(cfg.magnitude > 0.0) || cfg.magnitude > 0.5 * ctx.delta0 {
        return Err(Error::Precondition(format!(
            "probe magnitude {} must lie in (0, delta0/2 = {}]",
            cfg.magnitude,
            0.5 * ctx.delta0
        )));
    }
    if cfg.halvings == 0 || cfg.n_samples == 0 {
        return Err(Error::Input("probe needs at least one sample and one halving".into()));
    }
    let alpha = ctx.u.params.alpha;
    let r0 = ctx.u.params.r0;
    let u_grid = ctx.u.on_grid(&ctx.grid);
    let base_c = ClusterCoefficients::new(&ctx.u, ctx.ens.beta, &ctx.grid)?;
    let base = rdf_expansion(&base_c, &ctx.ens, ctx.n_max, true)?;
    let mags: Vec<f64> = (0..=cfg.halvings).map(|h| cfg.magnitude / 2f64.powi(h as i32)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let (a, b, k) = loop {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            if a.abs() + b.abs() > 0.2 {
                break (a, b, rng.gen_range(0.5..3.0));
            }
        };
        let shape = RadialFunction::from_fn(&ctx.grid, alpha, |r| {
            (a * (-k * r).exp() + b * (k * r).sin() / (1.0 + r)) / (1.0 + r * r).powf(0.5 * alpha)
        });
        let unit = shape.scale(1.0 / norm_vu(&shape, &u_grid, r0, alpha)?);
        let d_unit = phi_derivative(&base_c, &ctx.u, &unit.scale(mags[0]), ctx.ens.z, ctx.gamma, ctx.n_max, ctx.delta0)?
            .scale(1.0 / mags[0]);
        let mut s = ProbeSample {
            a,
            b,
            k,
            difference: Vec::new(),
            remainder: Vec::new(),
            difference_linf: Vec::new(),
            remainder_linf: Vec::new(),
            difference_slope: f64::NAN,
            remainder_slope: f64::NAN,
            difference_slope_linf: f64::NAN,
            remainder_slope_linf: f64::NAN,
        };
        for &m in &mags {
            let v = unit.scale(m);
            let c = ClusterCoefficients::new(&ctx.u.perturbed(&v), ctx.ens.beta, &ctx.grid)?;
            let moved = rdf_expansion(&c, &ctx.ens, ctx.n_max, true)?;
            let diff = phi_difference(&base, &moved, &v, ctx.gamma);
            let rem = diff.axpy(-m, &d_unit);
            s.difference.push(norm_vu(&diff, &u_grid, r0, alpha)?);
            s.remainder.push(norm_vu(&rem, &u_grid, r0, alpha)?);
            s.difference_linf.push(norm_linf_rho(&diff, alpha));
            s.remainder_linf.push(norm_linf_rho(&rem, alpha));
        }
        s.difference_slope = log_slope(&s.difference, &mags);
        s.remainder_slope = log_slope(&s.remainder, &mags);
        s.difference_slope_linf = log_slope(&s.difference_linf, &mags);
        s.remainder_slope_linf = log_slope(&s.remainder_linf, &mags);
        samples.push(s);
    }
    let ratio = |f: &dyn Fn(&ProbeSample) -> &Vec<f64>, p: i32| {
        samples
            .iter()
            .flat_map(|s| f(s).iter().zip(&mags).map(|(x, m)| x / m.powi(p)).collect::<Vec<_>>())
            .fold(0.0f64, f64::max)
    };
    Ok(ProbeReport {
        lipschitz_ratio: ratio(&|s| &s.difference, 1),
        remainder_ratio: ratio(&|s| &s.remainder, 2),
        lipschitz_ratio_linf: ratio(&|s| &s.difference_linf, 1),
        remainder_ratio_linf: ratio(&|s| &s.remainder_linf, 2),
        magnitudes: mags,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::GridSpec;

    #[test]
    fn phi_derivative_vanishes_at_order_two_with_natural_relaxation() {
        let u = Potential::reference_lj();
        let grid = Arc::new(RadialGrid::hybrid(&GridSpec::for_core_radius(0.95)).unwrap());
        let c = ClusterCoefficients::new(&u, 0.5, &grid).unwrap();
        let v = RadialFunction::from_fn(&grid, 6.0, |r| 1e-4 * (-r).exp() / (1.0 + r * r).powi(3));
        let d = phi_derivative(&c, &u, &v, 1e-3, 2.0, 2, 1.0).unwrap();
        assert_eq!(d.max_abs(), 0.0);
        let d = phi_derivative(&c, &u, &v, 1e-3, 1.0, 2, 1.0).unwrap();
        assert!(d.sub(&v.scale(0.5)).max_abs() <= 1e-18);
        let zero = RadialFunction::zeros(&grid, 6.0);
        assert_eq!(phi_derivative(&c, &u, &zero, 1e-3, 1.0, 3, 1.0).unwrap().max_abs(), 0.0);
    }
}
