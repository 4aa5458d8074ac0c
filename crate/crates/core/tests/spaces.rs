use std::sync::{Arc, OnceLock};

use ibi_core::potentials::Potential;
use ibi_core::spaces::*;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| Arc::new(RadialGrid::hybrid(&GridSpec::for_core_radius(0.95)).unwrap()))
        .clone()
}

fn lj_on_grid() -> RadialFunction {
    Potential::reference_lj().on_grid(&grid())
}

/// Random smooth profile with a power tail of exponent `p`.
fn sample(a: f64, b: f64, k: f64, c: f64, p: f64) -> RadialFunction {
    RadialFunction::from_fn(&grid(), p, |r| {
        a * (-b * r * r).exp() * (k * r).cos() + c * (1.0 + r * r).powf(-0.5 * p)
    })
}

fn profile() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (-2.0f64..2.0, 0.2f64..3.0, 0.0f64..4.0, -1.0f64..1.0, 0.0f64..3.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn weighted_sup_embeds_in_l1((a, b, k, c, extra) in profile(), alpha_idx in 0usize..3) {
        let alpha = [4.0, 6.0, 12.0][alpha_idx];
        let w = sample(a, b, k, c, alpha + extra);
        let c_rho = embedding_constant_c_rho(alpha).unwrap();
        let l1 = w.l1_norm().unwrap();
        let sup = norm_linf_rho(&w, alpha);
        prop_assert!(l1 <= c_rho * sup * (1.0 + 1e-5), "{l1} vs {c_rho} * {sup}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn norms_are_seminorms(p in profile(), q in profile(), lambda in -5.0f64..5.0) {
        let (v, w) = (sample(p.0, p.1, p.2, p.3, 6.0 + p.4), sample(q.0, q.1, q.2, q.3, 6.0 + q.4));
        let u = lj_on_grid();
        let sum = v.add(&w);
        let tol = 1e-12;
        let (nv, nw, ns) = (norm_linf_rho(&v, 6.0), norm_linf_rho(&w, 6.0), norm_linf_rho(&sum, 6.0));
        prop_assert!(ns <= (nv + nw) * (1.0 + tol));
        prop_assert!((norm_linf_rho(&v.scale(lambda), 6.0) - lambda.abs() * nv).abs() <= tol * nv.max(1e-300));
        let vu = |x: &RadialFunction| norm_vu(x, &u, 0.95, 6.0).unwrap();
        prop_assert!(vu(&sum) <= (vu(&v) + vu(&w)) * (1.0 + tol));
        prop_assert!((vu(&v.scale(lambda)) - lambda.abs() * vu(&v)).abs() <= tol * vu(&v).max(1e-300));
    }

    #[test]
    fn tail_supported_perturbation_uses_tail_branch(a in 0.1f64..3.0, k in 0.3f64..2.0, core_scale in 0.5f64..4.0) {
        let r0 = 0.95;
        let v = RadialFunction::from_fn(&grid(), 6.0, |r| {
            if r <= r0 { 0.0 } else { a * (r - r0).powi(2) * (-k * r).exp() }
        });
        let u = lj_on_grid();
        let tail_only = norm_vu(&v, &u, r0, 6.0).unwrap();
        // Changing the potential on the core does not change the norm.
        let other = u.map(|x| core_scale * x);
        prop_assert_eq!(tail_only, norm_vu(&v, &other, r0, 6.0).unwrap());
        let sup = norm_linf_rho(&v, 6.0);
        prop_assert!((tail_only - sup).abs() <= 1e-9 * sup, "{tail_only} vs {sup}");
    }
}

#[test]
fn slow_tail_has_infinite_weighted_norm() {
    let w = sample(1.0, 1.0, 0.0, 0.5, 5.0);
    assert_eq!(norm_linf_rho(&w, 6.0), f64::INFINITY);
    assert!(norm_linf_rho(&w, 5.0).is_finite());
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let w = sample(1.0, 0.5, 1.0, 0.2, 7.0);
    w.write_with_sidecar(&path, 6.0).unwrap();
    let (back, side) = RadialFunction::read_csv(&path, 4.0).unwrap();
    assert_eq!(back.values(), w.values());
    assert_eq!(back.nodes(), w.nodes());
    assert_eq!(back.tail_exponent(), 7.0);
    assert_eq!(side.unwrap().alpha, 6.0);
}
