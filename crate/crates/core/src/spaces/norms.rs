use std::f64::consts::PI;

use super::function::{poly_eval, RadialFunction};
use super::quad::integrate_half_line;
use crate::error::{Error, Result};

/// Weight `(1 + r^2)^{alpha/2}` of the weighted sup-norm.
#[inline]
pub fn rho_weight(r: f64, alpha: f64) -> f64 {
    (1.0 + r * r).powf(0.5 * alpha)
}

/// Sup of `weight(r) |w(r)|` over nodes and cubic-model midpoints of the
/// nodes selected by `keep`. Cells whose samples come within 1% of the sup are resampled
/// finely with the cubic model, so a smooth maximum between nodes is found
/// to high order.
fn weighted_sup(w: &RadialFunction, weight: impl Fn(f64) -> f64, keep: impl Fn(f64) -> bool) -> f64 {
    const FINE: usize = 32;
    let r = w.nodes();
    let v = w.values();
    let mut sup = 0.0f64;
    let mut cell_peak = vec![0.0f64; r.len().saturating_sub(1)];
    for i in 0..r.len() {
        if keep(r[i]) {
            sup = sup.max(weight(r[i]) * v[i].abs());
        }
        if i + 1 < r.len() && keep(r[i]) && keep(r[i + 1]) {
            let h = r[i + 1] - r[i];
            let at = |x: f64, y: f64| weight(x) * y.abs();
            let mid = poly_eval(&w.cell_cubic(i), 0.5 * h);
            let peak = at(r[i] + 0.5 * h, mid).max(at(r[i], v[i])).max(at(r[i + 1], v[i + 1]));
            cell_peak[i] = peak;
            sup = sup.max(peak);
        }
    }
    let coarse = sup;
    for (i, &peak) in cell_peak.iter().enumerate() {
        if peak < 0.99 * coarse {
            continue;
        }
        let c = w.cell_cubic(i);
        let h = r[i + 1] - r[i];
        for k in 1..FINE {
            let t = h * k as f64 / FINE as f64;
            sup = sup.max(weight(r[i] + t) * poly_eval(&c, t).abs());
        }
    }
    sup
}

/// Whether `rho(r) |w(r)|` stays bounded beyond the last node.
fn tail_bounded(w: &RadialFunction, alpha: f64) -> bool {
    w.tail_amplitude() == 0.0 || w.tail_exponent() >= alpha
}

/// `sup_r (1+r^2)^{alpha/2} |w(r)|`; `+inf` when the tail decays slower than `r^{-alpha}`.
///
/// For a tail `A r^{-p}` with `p >= alpha` the weighted tail is nonincreasing,
/// so its sup is attained at `r_max` and is already covered by the grid.
pub fn norm_linf_rho(w: &RadialFunction, alpha: f64) -> f64 {
    if !tail_bounded(w, alpha) {
        return f64::INFINITY;
    }
    // r = 0 carries the constant extension of the first node.
    let sup = w.values()[0].abs();
    sup.max(weighted_sup(w, |r| rho_weight(r, alpha), |_| true))
}

/// Perturbation norm `max( sup_{(0,r0]} |v/u|, sup_{[r0,inf)} rho |v| )`.
///
/// `u` is the reference potential tabulated on the same grid as `v`
/// (resampled otherwise).
pub fn norm_vu(v: &RadialFunction, u: &RadialFunction, r0: f64, alpha: f64) -> Result<f64> {
    let v = if v.same_grid(u) {
        std::borrow::Cow::Borrowed(v)
    } else {
        std::borrow::Cow::Owned(v.resample(u.grid()))
    };
    let r = u.nodes();
    let (uv, vv) = (u.values(), v.values());
    let eps = 1e-12 * r0;
    let mut core = 0.0f64;
    for i in 0..r.len() {
        if r[i] > r0 + eps {
            break;
        }
        if uv[i] == 0.0 {
            if vv[i] == 0.0 {
                continue;
            }
            return Err(Error::VanishingPotential { r: r[i], index: i });
        }
        core = core.max((vv[i] / uv[i]).abs());
        if i + 1 < r.len() && r[i + 1] <= r0 + eps {
            let um = 0.5 * (uv[i] + uv[i + 1]);
            let vm = 0.5 * (vv[i] + vv[i + 1]);
            if um != 0.0 {
                core = core.max((vm / um).abs());
            }
        }
    }
    let tail = if tail_bounded(&v, alpha) {
        weighted_sup(&v, |x| rho_weight(x, alpha), |x| x >= r0 - eps)
    } else {
        f64::INFINITY
    };
    Ok(core.max(tail))
}

/// `c_rho = int_{R^3} (1+|R|^2)^{-alpha/2} dR`, the constant of the embedding
/// of the weighted sup-norm space into L¹.
pub fn embedding_constant_c_rho(alpha: f64) -> Result<f64> {
    if !(alpha > 3.0) {
        return Err(Error::Divergent(format!(
            "alpha = {alpha} <= 3: (1+r^2)^(-alpha/2) is not integrable over 3-space"
        )));
    }
    let radial = integrate_half_line(|r| r * r * (1.0 + r * r).powf(-0.5 * alpha), 1e-13)?;
    Ok(4.0 * PI * radial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::RadialGrid;
    use std::sync::Arc;

    #[test]
    fn rho_weight_values() {
        assert_eq!(rho_weight(0.0, 6.0), 1.0);
        assert!((rho_weight(1.0, 6.0) - 8.0).abs() < 1e-12);
        assert!((rho_weight(3.0, 4.0) - 100.0).abs() < 1e-10);
    }

    #[test]
    fn c_rho_closed_forms() {
        // int r^2 (1+r^2)^-3 = pi/16 and int r^2 (1+r^2)^-2 = pi/4.
        assert!((embedding_constant_c_rho(6.0).unwrap() - PI * PI / 4.0).abs() < 1e-9);
        assert!((embedding_constant_c_rho(4.0).unwrap() - PI * PI).abs() < 1e-8);
        assert!(embedding_constant_c_rho(3.0).is_err());
        let a = embedding_constant_c_rho(8.0).unwrap();
        let b = embedding_constant_c_rho(12.0).unwrap();
        assert!(a > b);
    }

    #[test]
    fn linf_rho_of_inverse_weight_is_one() {
        let g = Arc::new(RadialGrid::uniform(20.0, 1000).unwrap());
        let w = RadialFunction::from_fn(&g, 6.0, |r| rho_weight(r, 6.0).recip());
        // Midpoints see the interpolation error of the convex profile.
        assert!((norm_linf_rho(&w, 6.0) - 1.0).abs() < 5e-3);
        let zero = RadialFunction::zeros(&g, 6.0);
        assert_eq!(norm_linf_rho(&zero, 6.0), 0.0);
        let slow = w.clone().with_tail_exponent(4.0);
        assert!(norm_linf_rho(&slow, 6.0).is_infinite());
    }

    #[test]
    fn vu_norm_of_inverse_power() {
        let spec = crate::spaces::GridSpec::for_core_radius(1.0);
        let g = Arc::new(RadialGrid::hybrid(&spec).unwrap());
        let u = RadialFunction::from_fn(&g, 6.0, |r| r.powi(-6));
        // (1+r^2)^3 / r^6 is decreasing for r >= 1, value 8 at r = 1.
        let n = norm_vu(&u, &u, 1.0, 6.0).unwrap();
        assert!((n - 8.0).abs() < 1e-9);
        let half = norm_vu(&u.scale(0.5), &u, 1.0, 6.0).unwrap();
        assert!((half - 4.0).abs() < 1e-9);
        let zero = RadialFunction::zeros(&g, 6.0);
        assert_eq!(norm_vu(&zero, &u, 1.0, 6.0).unwrap(), 0.0);
    }

    #[test]
    fn vanishing_core_potential_is_reported() {
        let g = Arc::new(RadialGrid::uniform(5.0, 50).unwrap());
        let u = RadialFunction::from_fn(&g, 6.0, |r| if (r - 0.5).abs() < 1e-9 { 0.0 } else { 1.0 });
        let v = RadialFunction::from_fn(&g, 6.0, |_| 0.1);
        match norm_vu(&v, &u, 1.0, 6.0) {
            Err(Error::VanishingPotential { index, .. }) => assert_eq!(index, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
