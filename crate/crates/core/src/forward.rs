//! The forward map from a pair potential to its radial distribution function,
//! evaluated through the truncated activity expansion, plus the cavity
//! function, the density and the directional derivative.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::cluster::{autoconvolution_derivative, mayer_derivative, require_small_perturbation, ClusterCoefficients, McRun};
use crate::convolution::CHECK_TOL;
use crate::error::{Error, Result};
use crate::potentials::{EnsembleParams, Potential};
use crate::report::InequalityReport;
use crate::spaces::RadialFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Expansion,
    Gcmc,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ForwardDiagnostics {
    pub beta: f64,
    pub z: f64,
    /// Truncation order of the activity series (expansion backend).
    pub order: Option<usize>,
    pub rho0_err: Option<f64>,
    /// Log of the sampled fourth-order cavity coefficient, when used.
    pub mc: Option<McRun>,
}

#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub g: RadialFunction,
    /// `g - 1`, formed without cancellation where the backend allows it;
    /// differences of `F` should be taken on this field.
    pub h: RadialFunction,
    pub y: RadialFunction,
    /// `y - 1` without cancellation; differences of `log y` should use it.
    pub dy: RadialFunction,
    pub rho0: f64,
    pub backend: Backend,
    /// Per-node standard errors of `g` and `y` (simulation backend).
    pub g_stderr: Option<RadialFunction>,
    pub y_stderr: Option<RadialFunction>,
    /// Nodes without data; their `y` is not meaningful.
    pub missing: Vec<bool>,
    pub diagnostics: ForwardDiagnostics,
}

impl ForwardResult {
    pub fn is_missing(&self, i: usize) -> bool {
        self.missing.get(i).copied().unwrap_or(false)
    }
}

/// Activity expansion of the number density truncated at `order` 1, 2 or 3:
/// `z`, `+ z^2 I_1`, `+ z^3 d_3`.
pub fn density_rho0(coeffs: &ClusterCoefficients, ens: &EnsembleParams, order: usize, force: bool) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(Error::Unsupported(format!("density order must be 1, 2 or 3, got {order}")));
    }
    if ens.z != 0.0 {
        ens.require_gas_phase(force)?;
    }
    let z = ens.z;
    let mut rho = z;
    if order >= 2 {
        rho += z * z * coeffs.i1;
    }
    if order >= 3 {
        rho += z.powi(3) * coeffs.d3()?;
    }
    Ok(rho)
}

/// Radial distribution function from the activity expansion at truncation
/// order `n_max` (2, 3 or 4).
///
/// `omega / rho0^2` is expanded in `z` to the order both series support; every
/// term beyond the first carries the Boltzmann factor exactly, so the cavity
/// function `y = 1 + z (f*f) + z^2 (C_4 - 2 I_1 f*f)` is formed directly
/// (`C_4` the sampled cavity coefficient) and `g = e^{-beta u} y`.
pub fn rdf_expansion(
    coeffs: &ClusterCoefficients,
    ens: &EnsembleParams,
    n_max: usize,
    force: bool,
) -> Result<ForwardResult> {
    if !(2..=4).contains(&n_max) {
        return Err(Error::Unsupported(format!("truncation order must be 2, 3 or 4, got {n_max}")));
    }
    let z = ens.z;
    let rho0 = density_rho0(coeffs, ens, n_max - 1, force)?;
    let f = &coeffs.f;
    // y - 1
    let mut dy = RadialFunction::zeros(coeffs.grid(), f.tail_exponent());
    let mut mc = None;
    if n_max >= 3 {
        dy = dy.axpy(z, coeffs.mayer_autoconvolution()?);
    }
    if n_max >= 4 {
        let (c4, run) = coeffs.cavity4()?;
        let second = c4.axpy(-2.0 * coeffs.i1, coeffs.mayer_autoconvolution()?);
        dy = dy.axpy(z * z, &second);
        mc = Some(run.clone());
    }
    if let Some((i, &v)) = dy.values().iter().enumerate().find(|(_, v)| **v < -1.0) {
        let r = dy.nodes()[i];
        return Err(Error::NegativeRdf { r, g: (1.0 + f.values()[i]) * (1.0 + v) });
    }
    let h = f.zip_with(&dy, |fv, d| fv + (1.0 + fv) * d);
    // g and y tend to 1, so they carry no power tail of their own.
    let y = dy.map(|d| 1.0 + d).with_tail_exponent(f64::INFINITY);
    let g = f.zip_with(&y, |fv, yv| (1.0 + fv) * yv).with_tail_exponent(f64::INFINITY);
    let n = g.values().len();
    Ok(ForwardResult {
        g,
        h,
        y,
        dy,
        rho0,
        backend: Backend::Expansion,
        g_stderr: None,
        y_stderr: None,
        missing: vec![false; n],
        diagnostics: ForwardDiagnostics {
            beta: coeffs.beta,
            z,
            order: Some(n_max),
            rho0_err: None,
            mc,
        },
    })
}

/// `y >= (z^2/rho0^2) (1 - z e c_beta e^{2 beta B + 1} / (1 - z c_beta e^{2 beta B + 1}))`
/// on every node with data; simulated nodes pass within three standard
/// errors. Requires `z <= z_max_strict`.
pub fn cavity_lower_bound_check(result: &ForwardResult, ens: &EnsembleParams) -> Result<InequalityReport> {
    let z = ens.z;
    if z > ens.z_max_strict {
        return Err(Error::Precondition(format!(
            "cavity bound is only claimed for z <= z_max_strict = {:e}, got {z:e}",
            ens.z_max_strict
        )));
    }
    let x = z * ens.gas_rate();
    let bound = (z / result.rho0).powi(2) * (1.0 - E * x / (1.0 - x));
    let mut worst = (f64::INFINITY, f64::NAN);
    for (i, (&r, &yv)) in result.y.nodes().iter().zip(result.y.values()).enumerate() {
        if result.is_missing(i) || !yv.is_finite() {
            continue;
        }
        let allowance = result.y_stderr.as_ref().map_or(0.0, |s| 3.0 * s.values()[i]);
        let lhs = yv + allowance;
        if lhs < worst.0 {
            worst = (lhs, r);
        }
    }
    Ok(InequalityReport::le(
        format!("cavity lower bound at r = {:.4}", worst.1),
        bound,
        worst.0,
        CHECK_TOL,
    ))
}

/// Directional derivative of the expansion-backend `F` at order 2 or 3:
/// `-beta e^{-beta u} v y + e^{-beta u} z (f * df + df * f)` with
/// `df = -beta e^{-beta u} v`. Requires `||v||_{V_u} <= delta0 / 2`.
pub fn frechet_f(
    coeffs: &ClusterCoefficients,
    u: &Potential,
    v: &RadialFunction,
    z: f64,
    n_max: usize,
    delta0: f64,
) -> Result<RadialFunction> {
    if !(2..=3).contains(&n_max) {
        return Err(Error::Unsupported(format!("derivative of F supports order 2 or 3, got {n_max}")));
    }
    require_small_perturbation(coeffs.grid(), u, v, delta0)?;
    let (df, _) = mayer_derivative(coeffs, v)?;
    if n_max == 2 {
        return Ok(df);
    }
    let ff = coeffs.mayer_autoconvolution()?;
    let dff = autoconvolution_derivative(&coeffs.f, &df)?;
    let vals = (0..df.values().len())
        .map(|k| {
            let boltz = 1.0 + coeffs.f.values()[k];
            let y = 1.0 + z * ff.values()[k];
            df.values()[k] * y + boltz * z * dff.values()[k]
        })
        .collect();
    RadialFunction::new(coeffs.grid().clone(), vals, df.tail_exponent())
}
