use std::f64::consts::E;
use std::sync::Arc;

use serde::Serialize;

use super::certify::certify_values;
use super::potential::Potential;
use crate::error::{Error, Result};
use crate::spaces::{embedding_constant_c_rho, rho_weight, RadialFunction, RadialGrid};

/// Safety factor between `int |f|` and `c_beta`.
pub const C_BETA_MARGIN: f64 = 1.01;

/// `e^{-beta u(r)} - 1`, equal to `-1` at the origin.
#[inline]
pub fn mayer_at(u: &Potential, beta: f64, r: f64) -> f64 {
    if r == 0.0 {
        return -1.0;
    }
    mayer_value(beta, u.eval(r))
}

#[inline]
pub(crate) fn mayer_value(beta: f64, u: f64) -> f64 {
    // exp_m1 keeps the weak tail accurate.
    (-beta * u).exp_m1()
}

/// Mayer function on the grid; the tail inherits the decay exponent of `u`.
pub fn mayer_function(u: &Potential, beta: f64, grid: &Arc<RadialGrid>) -> RadialFunction {
    let uv = u.on_grid(grid);
    uv.map(|x| mayer_value(beta, x))
}

/// `1.01 * int |f|`, including the analytic tail beyond the grid.
///
/// Returns `0` for `f = 0`; such a value is degenerate and rejected by
/// [`super::gas_phase_bounds`].
pub fn c_beta_bound(f: &RadialFunction) -> Result<f64> {
    Ok(C_BETA_MARGIN * abs_integral(f)?)
}

/// `int |f|`, taking the larger of the exact integral of the interpolant's
/// modulus and the integral of the interpolated nodal moduli, so that
/// tabulated weights built from `|f|` never integrate to more.
pub(crate) fn abs_integral(f: &RadialFunction) -> Result<f64> {
    Ok(f.l1_norm()?.max(f.map(f64::abs).l1_norm()?))
}

/// Constant `C_beta` of the perturbation weight at radius `delta`: the
/// smallest simple constant with `|f~ - f| <= c_beta C_beta delta / rho` on
/// both the core (`delta / (e (1 - delta))`) and the tail
/// (`beta e^{2 beta B} delta / rho`), times the 1% margin.
pub fn weight_constant(beta: f64, b: f64, c_beta: f64, r0: f64, alpha: f64, delta: f64) -> f64 {
    let tail = beta * (2.0 * beta * b).exp();
    let core = rho_weight(r0, alpha) / (E * (1.0 - delta));
    C_BETA_MARGIN * tail.max(core) / c_beta
}

/// `q = int w` for `w = |f|/c_beta + c_weight delta / rho`.
pub fn q_of(delta: f64, c_weight: f64, abs_f_integral: f64, c_beta: f64, c_rho: f64) -> f64 {
    abs_f_integral / c_beta + c_weight * delta * c_rho
}

/// Tabulated `w = |f|/c_beta + c_weight delta / rho` (decay exponent `alpha`).
pub fn perturbation_weight(f: &RadialFunction, c_beta: f64, c_weight: f64, delta: f64, alpha: f64) -> RadialFunction {
    let mut w = RadialFunction::from_fn(f.grid(), alpha, |r| c_weight * delta / rho_weight(r, alpha));
    for (wi, fi) in w.values_mut().iter_mut().zip(f.values()) {
        *wi += fi.abs() / c_beta;
    }
    w
}

/// Admissible perturbation radius and the quantities it was checked with.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationRadius {
    pub delta0: f64,
    /// `C_beta` at `delta0`.
    pub c_weight: f64,
    pub q: f64,
    pub abs_f_integral: f64,
    pub c_beta: f64,
    pub c_rho: f64,
    /// `(delta, q(delta), u +- v admissible)` on a coarse scan, for diagnostics.
    pub curve: Vec<(f64, f64, bool)>,
}

/// Extreme perturbation `v = delta u` on the core and `delta / rho` beyond.
fn extreme_perturbations_admissible(u: &Potential, delta: f64, grid: &RadialGrid) -> bool {
    let p = u.params;
    let env = u.tail_envelope(p.alpha) + delta;
    [1.0, -1.0].iter().all(|&s| {
        let shifted = |r: f64| {
            let ur = u.eval(r);
            let v = if r <= p.r0 { delta * ur } else { delta / rho_weight(r, p.alpha) };
            ur + s * v
        };
        certify_values(shifted, env, &p, grid).is_ok_and(|rep| rep.pass)
    })
}

/// Largest `delta0 in (0, 1)`, to relative tolerance 1e-3, such that the
/// extreme perturbations of size `delta0` keep `u` in its class and the
/// perturbation weight has `q < 1`.
pub fn perturbation_radius(
    u: &Potential,
    beta: f64,
    c_beta: f64,
    b: f64,
    grid: &Arc<RadialGrid>,
) -> Result<PerturbationRadius> {
    let p = u.params;
    let f = mayer_function(u, beta, grid);
    let abs_f_integral = abs_integral(&f)?;
    if !(c_beta > abs_f_integral) {
        return Err(Error::Precondition(format!(
            "c_beta = {c_beta} does not exceed int |f| = {abs_f_integral}"
        )));
    }
    // The tabulated inverse weight overestimates its integral slightly.
    let inv_rho = RadialFunction::from_fn(grid, p.alpha, |r| 1.0 / rho_weight(r, p.alpha));
    let c_rho = embedding_constant_c_rho(p.alpha)?.max(inv_rho.l1_norm()?);
    let q = |d: f64| q_of(d, weight_constant(beta, b, c_beta, p.r0, p.alpha, d), abs_f_integral, c_beta, c_rho);
    let feasible = |d: f64| q(d) < 1.0 && extreme_perturbations_admissible(u, d, grid);

    let curve: Vec<(f64, f64, bool)> = [1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.95]
        .iter()
        .map(|&d| (d, q(d), extreme_perturbations_admissible(u, d, grid)))
        .collect();

    let mut lo = 1e-9;
    if !feasible(lo) {
        return Err(Error::NoPerturbationRadius(format!(
            "infeasible already at delta = {lo:e}; q(delta) scan: {curve:?}"
        )));
    }
    let mut hi = 1.0;
    while hi - lo > 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c_weight = weight_constant(beta, b, c_beta, p.r0, p.alpha, lo);
    Ok(PerturbationRadius {
        delta0: lo,
        c_weight,
        q: q(lo),
        abs_f_integral,
        c_beta,
        c_rho,
        curve,
    })
}
