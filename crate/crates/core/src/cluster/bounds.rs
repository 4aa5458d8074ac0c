use std::sync::Arc;

use serde::Serialize;

use super::expansion::{ClusterCoefficients, ClusterExpansion};
use super::montecarlo::{an_monte_carlo, GraphSum, McConfig};
use crate::convolution::{build_ladder, series_w_sigma, WSigma, CHECK_TOL};
use crate::error::{Error, Result};
use crate::potentials::{c_beta_bound, mayer_function, perturbation_radius, perturbation_weight, EnsembleParams, Potential};
use crate::report::InequalityReport;
use crate::spaces::{norm_linf_rho, RadialFunction, RadialGrid};

/// Constants entering the bounds on the cluster coefficients: `c_beta`, `B`,
/// the perturbation radius and a partial sum of the autoconvolution series of
/// the perturbation weight `w`.
///
/// The partial sum is a lower bound of the full series, so a bound that holds
/// with it holds a fortiori with the full series.
#[derive(Debug, Clone, Serialize)]
pub struct BoundConstants {
    pub beta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub c_beta: f64,
    pub alpha: f64,
    pub delta0: f64,
    pub q: f64,
    pub w_sigma: WSigma,
}

impl BoundConstants {
    pub fn new(u: &Potential, beta: f64, b: f64, grid: &Arc<RadialGrid>, max_terms: usize) -> Result<Self> {
        let alpha = u.params.alpha;
        let f = mayer_function(u, beta, grid);
        let c_beta = c_beta_bound(&f)?;
        let pr = perturbation_radius(u, beta, c_beta, b, grid)?;
        let w = perturbation_weight(&f, c_beta, pr.c_weight, pr.delta0, alpha);
        let mut ladder = build_ladder(&w, 1, None, alpha)?;
        let w_sigma = series_w_sigma(&mut ladder, 1e-8, max_terms)?;
        Ok(Self {
            beta,
            b,
            c_beta,
            alpha,
            delta0: pr.delta0,
            q: ladder.q,
            w_sigma,
        })
    }

    pub fn w_sigma_at(&self, r: f64) -> f64 {
        self.w_sigma.sum.eval(r)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundPoint {
    pub r: f64,
    pub lhs: f64,
    pub stderr: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeGraphCheck {
    pub n: usize,
    /// Worst point: `lhs - 3 stderr` against `rhs`.
    pub report: InequalityReport,
    pub points: Vec<BoundPoint>,
}

/// `int |phi_n| dR_3..dR_n <= e^{n beta B} n^{n-2} c_beta^{n-1} W_Sigma(R)`
/// at each radius, with the left side by Monte Carlo. A point passes when
/// the estimate minus three standard errors lies below the right side.
pub fn check_tree_graph_bound(
    coeffs: &ClusterCoefficients,
    consts: &BoundConstants,
    n: usize,
    radii: &[f64],
    mc: &McConfig,
) -> Result<TreeGraphCheck> {
    let prefactor = (n as f64 * consts.beta * consts.b).exp()
        * (n as f64).powi(n as i32 - 2)
        * consts.c_beta.powi(n as i32 - 1);
    let lhs: Vec<(f64, f64)> = match n {
        2 => radii.iter().map(|&r| (coeffs.f.eval(r).abs(), 0.0)).collect(),
        3 | 4 => an_monte_carlo(n, &coeffs.f, radii, mc, GraphSum::Absolute)?
            .estimates
            .iter()
            .map(|e| (e.mean, e.stderr))
            .collect(),
        _ => return Err(Error::Unsupported(format!("tree-graph check supports n = 2, 3, 4; got {n}"))),
    };
    let points: Vec<BoundPoint> = radii
        .iter()
        .zip(lhs)
        .map(|(&r, (l, se))| BoundPoint {
            r,
            lhs: l,
            stderr: se,
            rhs: prefactor * consts.w_sigma_at(r),
        })
        .collect();
    let worst = points
        .iter()
        .min_by(|a, b| slack_ratio(a).total_cmp(&slack_ratio(b)))
        .ok_or_else(|| Error::Input("no radii given".into()))?;
    let lo = worst.lhs - 3.0 * worst.stderr;
    let report = InequalityReport::le(
        format!("int |phi_{n}|(R = {:.4}) <= e^(n beta B) n^(n-2) c_beta^(n-1) W_Sigma(R)", worst.r),
        lo,
        worst.rhs,
        CHECK_TOL,
    );
    Ok(TreeGraphCheck { n, report, points })
}

fn slack_ratio(p: &BoundPoint) -> f64 {
    (p.rhs - (p.lhs - 3.0 * p.stderr)) / p.rhs
}

#[derive(Debug, Clone, Serialize)]
pub struct UrsellDecayCheck {
    /// `sup_r (1 + r^2)^{alpha/2} |omega(r)|`.
    pub c_omega: f64,
    /// Worst grid point of `|omega| <= z^2 K W_Sigma`, reported as the ratio
    /// `|omega| / (z^2 K W_Sigma)` against `1`.
    pub envelope: InequalityReport,
    pub worst_r: f64,
    pub pass: bool,
}

/// Weighted sup-norm of the truncated Ursell function, and the pointwise
/// envelope `|omega| <= z^2 c_beta e^{2(beta B + 1)} / (1 - z c_beta e^{beta B + 1}) W_Sigma`.
pub fn check_ursell_decay(
    expansion: &ClusterExpansion,
    consts: &BoundConstants,
    ens: &EnsembleParams,
) -> Result<UrsellDecayCheck> {
    let c_omega = norm_linf_rho(&expansion.omega, consts.alpha);
    let z = expansion.z;
    let denom = 1.0 - z * ens.ursell_rate();
    if !(denom > 0.0) {
        return Err(Error::Precondition(format!(
            "z = {z:e} makes 1 - z c_beta e^(beta B + 1) = {denom} nonpositive"
        )));
    }
    let k = consts.c_beta * (2.0 * (consts.beta * consts.b + 1.0)).exp() / denom;
    let ws: &RadialFunction = &consts.w_sigma.sum;
    let (mut worst, mut worst_r) = (0.0f64, expansion.omega.nodes()[0]);
    for (&r, &om) in expansion.omega.nodes().iter().zip(expansion.omega.values()) {
        let env = z * z * k * ws.eval(r);
        let ratio = if om == 0.0 { 0.0 } else { om.abs() / env };
        if ratio > worst {
            worst = ratio;
            worst_r = r;
        }
    }
    let envelope = InequalityReport::le("|omega| / (z^2 K W_Sigma)", worst, 1.0, CHECK_TOL);
    let pass = c_omega.is_finite() && envelope.pass;
    Ok(UrsellDecayCheck {
        c_omega,
        envelope,
        worst_r,
        pass,
    })
}
