use serde::Serialize;

use super::radial::radial_convolve;
use crate::error::{Error, Result};
use crate::report::InequalityReport;
use crate::spaces::{embedding_constant_c_rho, norm_linf_rho, RadialFunction};

/// Relative tolerance absorbing quadrature error in inequality checks.
pub const CHECK_TOL: f64 = 1e-6;

/// Relative quadrature tolerance per convolution level for `L^1` identities.
/// On the default grid the dominant error is the power-law tail model beyond
/// `r_max`, which overestimates the mass of slowly settling tails.
pub const L1_QUAD_TOL: f64 = 1e-4;

/// Autoconvolutions `W_1 = w`, `W_{n+1} = w * W_n` with their norms.
#[derive(Debug, Clone)]
pub struct AutoconvolutionLadder {
    pub w: RadialFunction,
    pub levels: Vec<RadialFunction>,
    /// `int |w|`.
    pub q: f64,
    pub q_bar: f64,
    pub alpha: f64,
    pub l1_norms: Vec<f64>,
    pub linf_rho_norms: Vec<f64>,
}

impl AutoconvolutionLadder {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `W_n`, 1-based.
    pub fn level(&self, n: usize) -> &RadialFunction {
        &self.levels[n - 1]
    }

    /// Appends `W_{n+1} = w * W_n`.
    pub fn extend(&mut self) -> Result<()> {
        let next = radial_convolve(&self.w, self.levels.last().unwrap())?;
        self.l1_norms.push(next.l1_norm()?);
        self.linf_rho_norms.push(norm_linf_rho(&next, self.alpha));
        self.levels.push(next);
        Ok(())
    }
}

/// Builds `W_1..W_{n_max}`; `q_bar` defaults to `(1 + q)/2`.
pub fn build_ladder(w: &RadialFunction, n_max: usize, q_bar: Option<f64>, alpha: f64) -> Result<AutoconvolutionLadder> {
    let q = w.l1_norm()?;
    if !(q < 1.0) {
        return Err(Error::Precondition(format!(
            "q = int w = {q} must be < 1 for the autoconvolution series to converge"
        )));
    }
    let q_bar = q_bar.unwrap_or(0.5 * (1.0 + q));
    if !(q < q_bar && q_bar < 1.0) && q > 0.0 {
        return Err(Error::Precondition(format!("q_bar = {q_bar} must lie in (q, 1) = ({q}, 1)")));
    }
    let mut ladder = AutoconvolutionLadder {
        w: w.clone(),
        levels: vec![w.clone()],
        q,
        q_bar,
        alpha,
        l1_norms: vec![q],
        linf_rho_norms: vec![norm_linf_rho(w, alpha)],
    };
    for _ in 1..n_max.max(1) {
        ladder.extend()?;
    }
    Ok(ladder)
}

/// Partial sum of the autoconvolution series with its stopping data.
#[derive(Debug, Clone, Serialize)]
pub struct WSigma {
    #[serde(skip)]
    pub sum: RadialFunction,
    pub terms: usize,
    /// The term cap was reached before the stopping rule fired; the sum is
    /// then only a lower bound of the series for nonnegative `w`.
    pub truncated: bool,
    /// Bound on the weighted sup-norm of the omitted terms from the explicit
    /// geometric envelope.
    pub remainder_linf_rho: f64,
}

/// `sum_{n>=1} W_n`, stopping once `||W_n||_{L^inf_rho} < tol (1 - q_bar)` or
/// after `max_terms` terms. The ladder is extended as needed.
pub fn series_w_sigma(ladder: &mut AutoconvolutionLadder, tol: f64, max_terms: usize) -> Result<WSigma> {
    let mut sum = ladder.level(1).clone();
    let mut n = 1;
    let stop = tol * (1.0 - ladder.q_bar);
    let mut converged = ladder.linf_rho_norms[0] < stop;
    while !converged && n < max_terms {
        if ladder.len() <= n {
            ladder.extend()?;
        }
        n += 1;
        sum = sum.add(ladder.level(n));
        converged = ladder.linf_rho_norms[n - 1] < stop;
    }
    let env = envelope(ladder);
    let remainder = if ladder.q == 0.0 {
        0.0
    } else {
        // sum_{k>n} eps^-alpha ||w|| q_bar^{k-1} / (1 - q/q_bar)
        env.prefactor * ladder.q_bar.powi(n as i32) / ((1.0 - env.ratio) * (1.0 - ladder.q_bar))
    };
    Ok(WSigma {
        sum,
        terms: n,
        truncated: !converged,
        remainder_linf_rho: remainder,
    })
}

struct Envelope {
    ratio: f64,
    epsilon: f64,
    /// `eps^-alpha ||w||_{L^inf_rho}`.
    prefactor: f64,
}

fn envelope(l: &AutoconvolutionLadder) -> Envelope {
    let ratio = l.q / l.q_bar;
    let epsilon = 1.0 - ratio.powf(1.0 / l.alpha);
    Envelope {
        ratio,
        epsilon,
        prefactor: epsilon.powf(-l.alpha) * l.linf_rho_norms[0],
    }
}

/// `eps = 1 - (q/q_bar)^{1/alpha}`.
pub fn epsilon_alpha(q: f64, q_bar: f64, alpha: f64) -> f64 {
    1.0 - (q / q_bar).powf(1.0 / alpha)
}

/// `eps^-alpha ||w|| (1 - (q/q_bar)^n)/(1 - q/q_bar) q_bar^{n-1}`.
pub fn geometric_envelope(n: usize, q: f64, q_bar: f64, alpha: f64, w_norm: f64) -> f64 {
    let ratio = q / q_bar;
    let eps = epsilon_alpha(q, q_bar, alpha);
    let sum = if ratio == 0.0 { 1.0 } else { (1.0 - ratio.powi(n as i32)) / (1.0 - ratio) };
    eps.powf(-alpha) * w_norm * sum * q_bar.powi(n as i32 - 1)
}

/// Per-level decay checks of a ladder.
#[derive(Debug, Clone, Serialize)]
pub struct GeometricDecayReport {
    pub epsilon: f64,
    /// `max_n envelope_n / q_bar^n`, the constant of the plain geometric bound.
    pub c_star: f64,
    pub explicit: Vec<InequalityReport>,
    pub geometric: Vec<InequalityReport>,
    pub l1: Vec<InequalityReport>,
    pub pass: bool,
}

/// Checks `||W_n||_{L^inf_rho}` against the explicit envelope and the plain
/// `C* q_bar^n` bound, and `||W_n||_{L^1} <= q^n` to `(n - 1) L1_QUAD_TOL`,
/// for every level.
pub fn check_geometric_decay(l: &AutoconvolutionLadder) -> GeometricDecayReport {
    let env = envelope(l);
    let w_norm = l.linf_rho_norms[0];
    let rhs: Vec<f64> = (1..=l.len())
        .map(|n| geometric_envelope(n, l.q, l.q_bar, l.alpha, w_norm))
        .collect();
    let c_star = rhs
        .iter()
        .enumerate()
        .map(|(k, r)| r / l.q_bar.powi(k as i32 + 1))
        .fold(0.0, f64::max);
    let explicit: Vec<InequalityReport> = rhs
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            InequalityReport::le(
                format!("||W_{}||_Linf_rho <= eps^-alpha ||w|| (1-(q/qb)^n)/(1-q/qb) qb^(n-1)", k + 1),
                l.linf_rho_norms[k],
                r,
                CHECK_TOL,
            )
        })
        .collect();
    let geometric: Vec<InequalityReport> = (0..l.len())
        .map(|k| {
            InequalityReport::le(
                format!("||W_{}||_Linf_rho <= C* qb^n", k + 1),
                l.linf_rho_norms[k],
                c_star * l.q_bar.powi(k as i32 + 1),
                CHECK_TOL,
            )
        })
        .collect();
    let l1: Vec<InequalityReport> = (0..l.len())
        .map(|k| {
            InequalityReport::le(
                format!("||W_{}||_L1 <= q^n", k + 1),
                l.l1_norms[k],
                l.q.powi(k as i32 + 1),
                CHECK_TOL + k as f64 * L1_QUAD_TOL,
            )
        })
        .collect();
    let pass = explicit.iter().chain(&geometric).chain(&l1).all(|r| r.pass);
    GeometricDecayReport {
        epsilon: env.epsilon,
        c_star,
        explicit,
        geometric,
        l1,
        pass,
    }
}

/// `||w * w2||_{L^inf_rho} <= c_rho 2^{alpha+1} ||w||_{L^inf_rho} ||w2||_{L^inf_rho}`.
pub fn check_banach_algebra(w: &RadialFunction, w2: &RadialFunction, alpha: f64) -> Result<InequalityReport> {
    let c_rho = embedding_constant_c_rho(alpha)?;
    let lhs = norm_linf_rho(&radial_convolve(w, w2)?, alpha);
    let rhs = c_rho * 2f64.powf(alpha + 1.0) * norm_linf_rho(w, alpha) * norm_linf_rho(w2, alpha);
    Ok(InequalityReport::le(
        "||w*w'||_Linf_rho <= c_rho 2^(alpha+1) ||w||_Linf_rho ||w'||_Linf_rho",
        lhs,
        rhs,
        CHECK_TOL,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{rho_weight, RadialGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// `q` times the normalised unit-ball indicator on a uniform grid with
    /// spacing `1/m` up to `r_max`, with a doubled node at the jump.
    fn scaled_ball_on(q: f64, m: usize, r_max: usize) -> RadialFunction {
        let mut nodes: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
        nodes.push(1.0 + 1e-9);
        nodes.extend((1..=m * (r_max - 1)).map(|k| 1.0 + k as f64 / m as f64));
        let g = Arc::new(RadialGrid::from_nodes(nodes).unwrap());
        let h = q * 3.0 / (4.0 * PI);
        RadialFunction::from_fn(&g, f64::INFINITY, |r| if r <= 1.0 { h } else { 0.0 })
    }

    #[test]
    fn epsilon_formula() {
        assert!((epsilon_alpha(0.5, 0.8, 6.0) - (1.0 - 0.625f64.powf(1.0 / 6.0))).abs() < 1e-15);
        assert!((epsilon_alpha(0.5, 0.8, 6.0) - 0.075344).abs() < 1e-6);
        // eps = 1/2 split reproduces the Banach-algebra factor.
        let e = 0.5f64;
        assert_eq!((1.0 - e).powi(-6) + e.powi(-6), 2f64.powi(7));
    }

    #[test]
    fn ladder_of_zero_and_base_case() {
        let g = Arc::new(RadialGrid::uniform(10.0, 100).unwrap());
        let z = RadialFunction::zeros(&g, 6.0);
        let l = build_ladder(&z, 4, None, 6.0).unwrap();
        assert!(l.levels.iter().all(|w| w.max_abs() == 0.0));
        let mut l1 = build_ladder(&scaled_ball_on(0.5, 50, 4), 1, None, 6.0).unwrap();
        assert_eq!(l1.len(), 1);
        assert_eq!(l1.level(1).values(), scaled_ball_on(0.5, 50, 4).values());
        let ws = series_w_sigma(&mut build_ladder(&z, 1, None, 6.0).unwrap(), 1e-8, 50).unwrap();
        assert_eq!(ws.sum.max_abs(), 0.0);
        assert!(!ws.truncated);
        let _ = &mut l1;
    }

    /// Composite Simpson for `4 pi int r^2 W` on the two uniform pieces of
    /// the ball grid, independent of the piecewise-linear integral.
    fn simpson_l1(w: &RadialFunction, m: usize) -> f64 {
        let v = w.values();
        let h = 1.0 / m as f64;
        let piece = |h: f64, ys: &[f64], r0: f64| {
            let f = |k: usize| (r0 + h * k as f64).powi(2) * ys[k];
            let n = ys.len() - 1;
            let mut acc = f(0) + f(n);
            for k in 1..n {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
            }
            acc * h / 3.0
        };
        let mut inner = vec![0.0];
        inner.extend_from_slice(&v[..m]);
        4.0 * PI * (piece(h, &inner, 0.0) + piece(h, &v[m..], 1.0))
    }

    #[test]
    fn l1_norms_multiply() {
        let l = build_ladder(&scaled_ball_on(0.5, 400, 6), 5, None, 6.0).unwrap();
        for (n, lvl) in l.levels.iter().enumerate() {
            let v = simpson_l1(lvl, 400);
            assert!(l.l1_norms[n] <= 0.5f64.powi(n as i32 + 1) * (1.0 + 1e-3));
            let expect = 0.5f64.powi(n as i32 + 1);
            assert!((v - expect).abs() < 1e-6, "n = {}: {v} vs {expect}", n + 1);
        }
    }

    #[test]
    fn series_sums_to_geometric_value() {
        let mut l = build_ladder(&scaled_ball_on(0.5, 200, 7), 1, None, 6.0).unwrap();
        let ws = series_w_sigma(&mut l, 1e-6, 60).unwrap();
        assert!(ws.terms >= 17, "{}", ws.terms);
        assert!(!ws.truncated);
        let total = simpson_l1(&ws.sum, 200);
        assert!((total - 1.0).abs() < 1e-5, "{total}");
        for n in 1..=l.len() {
            for (a, b) in ws.sum.values().iter().zip(l.level(n).values()) {
                assert!(a >= b);
            }
        }
    }

    #[test]
    fn algebra_bound_zero_case() {
        let g = Arc::new(RadialGrid::uniform(10.0, 200).unwrap());
        let w = RadialFunction::from_fn(&g, 6.0, |r| rho_weight(r, 6.0).recip());
        let r = check_banach_algebra(&w, &RadialFunction::zeros(&g, 6.0), 6.0).unwrap();
        assert!(r.pass && r.lhs == 0.0 && r.rhs == 0.0);
        assert!(check_banach_algebra(&w, &w, 6.0).unwrap().pass);
    }
}
