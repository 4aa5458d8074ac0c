//! Iterative Boltzmann inversion: the target data, the potential-of-mean-force
//! initializer, the update `u + gamma log(F(u)/g)` and the iteration driver.

mod probe;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use probe::{lipschitz_probe, phi_derivative, phi_difference, ProbeConfig, ProbeContext, ProbeReport, ProbeSample};

use crate::cluster::ClusterCoefficients;
use crate::error::{Error, Result};
use crate::forward::{rdf_expansion, Backend, ForwardResult};
use crate::gcmc::{run_gcmc, to_forward_result, GCMCConfig};
use crate::potentials::{certify_lj_type, CertificationReport, EnsembleParams, LjTypeParams, Potential};
use crate::spaces::{norm_vu, rho_weight, RadialFunction, RadialGrid};

/// Bins where the target falls below this are left to the core continuation.
pub const DEFAULT_G_FLOOR: f64 = 1e-8;

/// Target radial distribution function, stored as `log g`, with the mask of
/// bins the update may touch.
#[derive(Debug, Clone)]
pub struct TargetRdf {
    pub log_g: RadialFunction,
    pub mask: Vec<bool>,
    pub beta: f64,
}

impl TargetRdf {
    /// From tabulated `g`; bins below `floor` or flagged missing are masked out.
    pub fn from_g(g: &RadialFunction, missing: &[bool], beta: f64, floor: f64) -> Result<Self> {
        if let Some(i) = g.values().iter().position(|&x| x < 0.0) {
            return Err(Error::Input(format!("negative target g at r = {}", g.nodes()[i])));
        }
        let mask: Vec<bool> = g
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| x >= floor && !missing.get(i).copied().unwrap_or(false))
            .collect();
        let log_g = g.map(|x| x.max(floor).ln());
        Self::checked(log_g, mask, beta)
    }

    /// From a cavity function and a core model: `log g = -beta u + log y`,
    /// finite even where `g` underflows.
    pub fn from_cavity(y: &RadialFunction, u: &Potential, beta: f64, missing: &[bool], floor: f64) -> Result<Self> {
        let u_grid = u.on_grid(y.grid());
        let mut log_g = Vec::with_capacity(y.values().len());
        let mut mask = Vec::with_capacity(y.values().len());
        for (i, (&yv, &uv)) in y.values().iter().zip(u_grid.values()).enumerate() {
            let miss = missing.get(i).copied().unwrap_or(false);
            if !miss && !(yv > 0.0) {
                return Err(Error::Input(format!("non-positive target cavity function at r = {}", y.nodes()[i])));
            }
            let lg = -beta * uv + yv.max(f64::MIN_POSITIVE).ln();
            mask.push(!miss && lg >= floor.ln());
            log_g.push(lg.max(floor.ln()));
        }
        let log_g = RadialFunction::new(y.grid().clone(), log_g, f64::INFINITY)?;
        Self::checked(log_g, mask, beta)
    }

    /// Synthetic target `F(u)` in cavity form.
    pub fn from_forward(res: &ForwardResult, u: &Potential, floor: f64) -> Result<Self> {
        Self::from_cavity(&res.y, u, res.diagnostics.beta, &res.missing, floor)
    }

    fn checked(log_g: RadialFunction, mask: Vec<bool>, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::Input(format!("beta must be positive, got {beta}")));
        }
        if !mask.iter().any(|m| *m) {
            return Err(Error::Input("target has no bin above the floor".into()));
        }
        Ok(Self { log_g, mask, beta })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.log_g.grid()
    }

    pub fn g(&self) -> RadialFunction {
        self.log_g.map(f64::exp)
    }

    /// Index of the innermost bin inside the mask.
    pub fn first_reliable(&self) -> usize {
        self.mask.iter().position(|m| *m).expect("checked on construction")
    }
}

/// `u0 = -(1/beta) log g` on reliable bins. Below the innermost reliable bin
/// `r_m` the core is continued by `u0(r_m) (r_m/r)^alpha`; isolated unreliable
/// bins further out are interpolated linearly. The result is certified.
pub fn pmf_initial_guess(target: &TargetRdf, params: &LjTypeParams) -> Result<Potential> {
    let beta = target.beta;
    let r = target.grid().nodes();
    let lg = target.log_g.values();
    let mut u: Vec<Option<f64>> = target.mask.iter().zip(lg).map(|(&m, &l)| m.then(|| -l / beta)).collect();
    let m = target.first_reliable();
    let um = u[m].unwrap();
    for i in 0..m {
        u[i] = Some(um * (r[m] / r[i]).powf(params.alpha));
    }
    let values = fill_gaps(r, &u);
    let pot = Potential::tabulated(RadialFunction::new(target.grid().clone(), values, params.alpha)?, *params);
    certify(&pot, params, target.grid())?.into_result()?;
    Ok(pot)
}

/// Linear interpolation across `None` entries; zero beyond the last value.
fn fill_gaps(r: &[f64], u: &[Option<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    let mut last: Option<usize> = None;
    for i in 0..u.len() {
        if let Some(v) = u[i] {
            if let Some(j) = last {
                if j + 1 < i {
                    let uj = u[j].unwrap();
                    for k in j + 1..i {
                        out[k] = uj + (v - uj) * (r[k] - r[j]) / (r[i] - r[j]);
                    }
                }
            }
            out[i] = v;
            last = Some(i);
        }
    }
    out
}

fn certify(u: &Potential, params: &LjTypeParams, grid: &Arc<RadialGrid>) -> Result<CertificationReport> {
    certify_lj_type(u, params, grid)
}

/// `log F(u)` at the target nodes: cavity form `-beta u + log y` for the
/// expansion backend, `log g` interpolated between bins for the simulation.
/// `None` marks nodes without data.
pub fn log_forward(res: &ForwardResult, u: &Potential, target: &TargetRdf) -> Vec<Option<f64>> {
    let beta = target.beta;
    let nodes = target.grid().nodes();
    match res.backend {
        Backend::Expansion => {
            let u_grid = u.on_grid(target.grid());
            let y = res.y.resample(target.grid());
            nodes
                .iter()
                .enumerate()
                .map(|(i, _)| Some(-beta * u_grid.values()[i] + y.values()[i].ln()))
                .collect()
        }
        Backend::Gcmc => {
            let bins = res.g.nodes();
            let g = res.g.values();
            nodes
                .iter()
                .map(|&r| {
                    if r < bins[0] || r > *bins.last().unwrap() {
                        return None;
                    }
                    let i = res.g.grid().cell(r);
                    if res.is_missing(i) || res.is_missing(i + 1) {
                        return None;
                    }
                    let t = (r - bins[i]) / (bins[i + 1] - bins[i]);
                    Some((g[i] + t * (g[i + 1] - g[i])).ln())
                })
                .collect()
        }
    }
}

/// One update `u + gamma (log F(u) - log g)` on masked bins with data;
/// every other bin keeps its value. A non-positive `F` on a masked bin is an
/// error naming the bin.
pub fn ibi_step(u_k: &Potential, log_g_k: &[Option<f64>], target: &TargetRdf, gamma: f64) -> Result<Potential> {
    let grid = target.grid();
    if log_g_k.len() != grid.len() {
        return Err(Error::Input(format!("{} model values for {} target bins", log_g_k.len(), grid.len())));
    }
    let mut values = u_k.on_grid(grid).into_values();
    for (i, lk) in log_g_k.iter().enumerate() {
        if !target.mask[i] {
            continue;
        }
        if let Some(lk) = lk {
            if lk.is_nan() || *lk == f64::NEG_INFINITY {
                return Err(Error::NonPositiveRatio { r: grid.nodes()[i], index: i });
            }
            values[i] += gamma * (lk - target.log_g.values()[i]);
        }
    }
    let tail = u_k.tail_exponent().min(u_k.params.alpha);
    Ok(Potential::tabulated(RadialFunction::new(grid.clone(), values, tail)?, u_k.params))
}

/// `sup rho |log(F(u)/g)|` over masked bins with data.
pub fn residual_norm(log_g_k: &[Option<f64>], target: &TargetRdf, alpha: f64) -> f64 {
    let nodes = target.grid().nodes();
    let mut sup = 0.0f64;
    for (i, ((lk, &m), &lt)) in log_g_k.iter().zip(&target.mask).zip(target.log_g.values()).enumerate() {
        if let (true, Some(lk)) = (m, lk) {
            let d = (lk - lt).abs();
            if !d.is_finite() {
                return f64::INFINITY;
            }
            sup = sup.max(rho_weight(nodes[i], alpha) * d);
        }
    }
    sup
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IBIConfig {
    /// Relaxation parameter; `None` means `1/beta`.
    pub gamma: Option<f64>,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub backend: Backend,
    /// Truncation order of the expansion backend.
    pub order: usize,
    /// Simulation settings for the simulation backend (`beta`, `z` are
    /// overwritten by the ensemble).
    pub gcmc: Option<GCMCConfig>,
    /// Bins with target `g` below this are excluded from the update.
    pub g_floor: f64,
}

impl Default for IBIConfig {
    fn default() -> Self {
        Self {
            gamma: None,
            max_iters: 20,
            residual_tol: 1e-6,
            backend: Backend::Expansion,
            order: 3,
            gcmc: None,
            g_floor: DEFAULT_G_FLOOR,
        }
    }
}

impl IBIConfig {
    pub fn gamma(&self, beta: f64) -> f64 {
        self.gamma.unwrap_or(1.0 / beta)
    }

    pub fn validate(&self, beta: f64) -> Result<()> {
        let g = self.gamma(beta);
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::Input(format!("gamma must be nonnegative, got {g}")));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Input("residual tolerance must be positive".into()));
        }
        if self.backend == Backend::Gcmc && self.gcmc.is_none() {
            return Err(Error::Input("simulation backend needs a simulation config".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    CertificationFailed,
}

#[derive(Debug, Clone)]
pub struct IBITrace {
    pub iterates: Vec<Potential>,
    pub residuals: Vec<f64>,
    /// `||u_k - u_true||` in the perturbation norm of `u_true`, when known.
    pub errors: Vec<Option<f64>>,
    /// The same norm restricted to the update mask; the core continuation
    /// is excluded.
    pub errors_reliable: Vec<Option<f64>>,
    pub certifications: Vec<CertificationReport>,
    /// Every iterate passed certification.
    pub certified: bool,
    /// Report of the first iterate that failed, which is not in `iterates`.
    pub failure: Option<CertificationReport>,
    pub gamma: f64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub gamma: f64,
    pub residuals: Vec<f64>,
    pub errors: Vec<Option<f64>>,
    pub errors_reliable: Vec<Option<f64>>,
    pub certified_iterates: Vec<bool>,
    pub certified: bool,
    pub failure: Option<String>,
    pub stop: StopReason,
}

impl IBITrace {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            gamma: self.gamma,
            residuals: self.residuals.clone(),
            errors: self.errors.clone(),
            errors_reliable: self.errors_reliable.clone(),
            certified_iterates: self.certifications.iter().map(|c| c.pass).collect(),
            certified: self.certified,
            failure: self.failure.as_ref().map(|c| c.summary()),
            stop: self.stop,
        }
    }
}

/// `F(u)` with the configured backend.
pub fn evaluate_forward(u: &Potential, ens: &EnsembleParams, grid: &Arc<RadialGrid>, cfg: &IBIConfig) -> Result<ForwardResult> {
    match cfg.backend {
        Backend::Expansion => {
            let c = ClusterCoefficients::new(u, ens.beta, grid)?;
            rdf_expansion(&c, ens, cfg.order, false)
        }
        Backend::Gcmc => {
            let mut g = cfg.gcmc.clone().expect("validated");
            g.beta = ens.beta;
            g.z = ens.z;
            Ok(to_forward_result(&run_gcmc(u, &g)?, u))
        }
    }
}

/// Iterates from `u0` until the residual drops below the tolerance, the
/// iteration budget is spent, or an iterate fails certification.
pub fn run_ibi(
    u0: &Potential,
    target: &TargetRdf,
    ens: &EnsembleParams,
    cfg: &IBIConfig,
    u_true: Option<&Potential>,
) -> Result<IBITrace> {
    cfg.validate(ens.beta)?;
    if (ens.beta - target.beta).abs() > 1e-12 * ens.beta {
        return Err(Error::Input(format!("ensemble beta {} differs from target beta {}", ens.beta, target.beta)));
    }
    let grid = target.grid().clone();
    let params = u0.params;
    let gamma = cfg.gamma(ens.beta);
    let true_grid = u_true.map(|t| t.on_grid(&grid));
    let error_of = |u: &Potential, masked: bool| -> Result<Option<f64>> {
        match (u_true, &true_grid) {
            (Some(t), Some(tg)) => {
                let mut diff = u.on_grid(&grid).sub(tg);
                if masked {
                    for (d, &m) in diff.values_mut().iter_mut().zip(&target.mask) {
                        if !m {
                            *d = 0.0;
                        }
                    }
                }
                Ok(Some(norm_vu(&diff, tg, t.params.r0, t.params.alpha)?))
            }
            _ => Ok(None),
        }
    };
    let first = certify(u0, &params, &grid)?;
    if !first.pass {
        return Err(Error::Certification(first.summary()));
    }
    let mut trace = IBITrace {
        iterates: vec![u0.clone()],
        residuals: Vec::new(),
        errors: vec![error_of(u0, false)?],
        errors_reliable: vec![error_of(u0, true)?],
        certifications: vec![first],
        certified: true,
        failure: None,
        gamma,
        stop: StopReason::MaxIters,
    };
    let mut u = u0.clone();
    loop {
        let res = evaluate_forward(&u, ens, &grid, cfg)?;
        let lg = log_forward(&res, &u, target);
        let resid = residual_norm(&lg, target, params.alpha);
        trace.residuals.push(resid);
        if resid <= cfg.residual_tol {
            trace.stop = StopReason::Converged;
            break;
        }
        if trace.iterates.len() > cfg.max_iters {
            break;
        }
        let next = ibi_step(&u, &lg, target, gamma)?;
        let rep = certify(&next, &params, &grid)?;
        if !rep.pass {
            trace.certified = false;
            trace.failure = Some(rep);
            trace.stop = StopReason::CertificationFailed;
            break;
        }
        trace.errors.push(error_of(&next, false)?);
        trace.errors_reliable.push(error_of(&next, true)?);
        trace.certifications.push(rep);
        trace.iterates.push(next.clone());
        u = next;
    }
    Ok(trace)
}
