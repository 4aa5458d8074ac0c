use serde::Serialize;

use super::params::LjTypeParams;
use super::potential::Potential;
use crate::error::{Error, Result};
use crate::spaces::RadialGrid;

/// Outcome of checking both branches of the Lennard-Jones type bounds on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    /// `min_{r <= r0} u(r) r^alpha`, the tightest admissible `c`.
    pub c_observed: f64,
    /// Node attaining `c_observed`.
    pub r_c: f64,
    /// `sup_{r >= r0} |u(r)| r^alpha`, the tightest admissible `C`,
    /// including the analytic tail beyond the grid.
    pub big_c_observed: f64,
    pub r_big_c: f64,
    pub lower_pass: bool,
    pub upper_pass: bool,
    pub pass: bool,
}

impl CertificationReport {
    pub fn into_result(self) -> Result<Self> {
        if self.pass {
            Ok(self)
        } else {
            Err(Error::Certification(self.summary()))
        }
    }

    pub fn summary(&self) -> String {
        format!(
            "lower branch {} (c = {:.6e} at r = {:.4}), upper branch {} (C = {:.6e} at r = {:.4})",
            if self.lower_pass { "ok" } else { "violated" },
            self.c_observed,
            self.r_c,
            if self.upper_pass { "ok" } else { "violated" },
            self.big_c_observed,
            self.r_big_c
        )
    }
}

/// Checks `u(r) >= c r^-alpha` on `(0, r0]` and `|u(r)| <= C r^-alpha` on
/// `[r0, inf)` at the grid nodes, passing iff `c > c0` and `C < C0`.
pub fn certify_lj_type(u: &Potential, p: &LjTypeParams, grid: &RadialGrid) -> Result<CertificationReport> {
    certify_values(|r| u.eval(r), u.tail_envelope(p.alpha), p, grid)
}

/// Same check for an arbitrary profile with a given tail envelope
/// `lim sup |u| r^alpha` beyond the grid.
pub fn certify_values(
    u: impl Fn(f64) -> f64,
    tail_envelope: f64,
    p: &LjTypeParams,
    grid: &RadialGrid,
) -> Result<CertificationReport> {
    p.validate()?;
    if !grid.covers_core(p.r0) {
        return Err(Error::Input(format!(
            "grid (first node {:e}) does not resolve the core (0, r0 = {}]",
            grid.r_min(),
            p.r0
        )));
    }
    if grid.r_max() < 10.0 * p.r0 * (1.0 - 1e-12) {
        return Err(Error::Input(format!(
            "grid r_max = {} below 10 r0 = {}",
            grid.r_max(),
            10.0 * p.r0
        )));
    }
    let tol = 1e-12 * p.r0;
    let mut c_obs = f64::INFINITY;
    let mut r_c = f64::NAN;
    let mut big_c = 0.0f64;
    let mut r_big_c = f64::NAN;
    for &r in grid.nodes() {
        let v = u(r);
        let ra = r.powf(p.alpha);
        if r <= p.r0 + tol {
            let c = v * ra;
            if !(c >= c_obs) {
                c_obs = c;
                r_c = r;
            }
        }
        if r >= p.r0 - tol {
            let cc = v.abs() * ra;
            if !(cc <= big_c) {
                big_c = cc;
                r_big_c = r;
            }
        }
    }
    if tail_envelope > big_c || tail_envelope.is_nan() {
        big_c = tail_envelope;
        r_big_c = f64::INFINITY;
    }
    let lower_pass = c_obs > p.c0;
    let upper_pass = big_c < p.big_c0;
    Ok(CertificationReport {
        c_observed: c_obs,
        r_c,
        big_c_observed: big_c,
        r_big_c,
        lower_pass,
        upper_pass,
        pass: lower_pass && upper_pass,
    })
}
