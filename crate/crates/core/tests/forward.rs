use std::sync::Arc;

use ibi_core::cluster::{ClusterCoefficients, McConfig};
use ibi_core::forward::*;
use ibi_core::potentials::*;
use ibi_core::spaces::*;
use ibi_core::Error;
use proptest::prelude::*;

struct Setup {
    u: Potential,
    grid: Arc<RadialGrid>,
    ens: EnsembleParams,
    delta0: f64,
}

fn setup(beta: f64) -> Setup {
    let u = Potential::reference_lj();
    let grid = Arc::new(RadialGrid::hybrid(&GridSpec::for_core_radius(u.params.r0)).unwrap());
    let b = estimate_stability_constant(&u, &StabilityConfig::default()).b_hat;
    let c_beta = c_beta_bound(&mayer_function(&u, beta, &grid)).unwrap();
    let delta0 = perturbation_radius(&u, beta, c_beta, b, &grid).unwrap().delta0;
    let ens = EnsembleParams::new(beta, 0.0, c_beta, b).unwrap();
    Setup { u, grid, ens, delta0 }
}

fn forward(s: &Setup, u: &Potential, z: f64, n_max: usize) -> ForwardResult {
    let c = ClusterCoefficients::new(u, s.ens.beta, &s.grid).unwrap();
    rdf_expansion(&c, &s.ens.with_z(z).unwrap(), n_max, false).unwrap()
}

fn direction(s: &Setup, a: f64, k: f64) -> RadialFunction {
    let alpha = s.u.params.alpha;
    let shape = RadialFunction::from_fn(&s.grid, alpha, |r| {
        (a * (-k * r).exp() + (1.0 - a.abs()) * (k * r).cos()) / (1.0 + r * r).powf(0.5 * alpha)
    });
    let norm = norm_vu(&shape, &s.u.on_grid(&s.grid), s.u.params.r0, alpha).unwrap();
    shape.scale(1.0 / norm)
}

#[test]
fn result_invariants() {
    let s = setup(0.2);
    let res = forward(&s, &s.u, 0.25 * s.ens.z_max_gas, 3);
    let f = mayer_function(&s.u, 0.2, &s.grid);
    for i in 0..res.g.values().len() {
        let (g, y) = (res.g.values()[i], res.y.values()[i]);
        assert!(g >= 0.0);
        assert!((g - (1.0 + f.values()[i]) * y).abs() <= 1e-15 * y.abs());
        assert!((res.h.values()[i] + 1.0 - g).abs() <= 1e-14);
    }
    assert!((res.g.values().last().unwrap() - 1.0).abs() < 1e-5);
    let c_g = norm_linf_rho(&res.h, s.u.params.alpha);
    assert!(c_g.is_finite() && c_g > 0.0);
    assert_eq!(res.backend, Backend::Expansion);
    assert_eq!(res.diagnostics.order, Some(3));
}

#[test]
fn dilute_limit_recovers_boltzmann_factor() {
    let s = setup(0.2);
    let boltz = mayer_function(&s.u, 0.2, &s.grid).map(|f| 1.0 + f);
    let dev: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|k| {
            let res = forward(&s, &s.u, k * s.ens.z_max_gas, 3);
            res.g.sub(&boltz).max_abs().max(res.y.map(|y| y - 1.0).max_abs())
        })
        .collect();
    assert!(dev[2] < 1e-2);
    for w in dev.windows(2) {
        assert!((w[0] / w[1] - 2.0).abs() < 0.05, "{dev:?}");
    }
}

#[test]
fn fourth_order_is_a_small_correction() {
    let s = setup(0.2);
    let z = 0.1 * s.ens.z_max_gas;
    let c = ClusterCoefficients::new(&s.u, 0.2, &s.grid).unwrap().with_mc(McConfig {
        samples_per_chain: 10_000,
        chains: 2,
        ..McConfig::default()
    });
    let ens = s.ens.with_z(z).unwrap();
    let third = rdf_expansion(&c, &ens, 3, false).unwrap();
    let fourth = rdf_expansion(&c, &ens, 4, false).unwrap();
    let first_order = third.y.map(|y| y - 1.0).max_abs();
    let second_order = fourth.y.sub(&third.y).max_abs();
    assert!(second_order < 0.2 * first_order, "{second_order} vs {first_order}");
    assert!(fourth.diagnostics.mc.is_some());
    assert!((fourth.rho0 - third.rho0).abs() < 1e-2 * third.rho0);
}

#[test]
fn cavity_bound_holds_below_strict_activity() {
    let s = setup(1.0);
    let z = 0.5 * s.ens.z_max_strict;
    let res = forward(&s, &s.u, z, 3);
    let ens = s.ens.with_z(z).unwrap();
    let rep = cavity_lower_bound_check(&res, &ens).unwrap();
    assert!(rep.pass && rep.slack > 0.0, "{rep:?}");
    let above = s.ens.with_z(1.01 * s.ens.z_max_strict).unwrap();
    assert!(matches!(cavity_lower_bound_check(&res, &above), Err(Error::Precondition(_))));
    // The bracket stays positive strictly below the strict activity.
    let x = 0.999 * s.ens.z_max_strict * s.ens.gas_rate();
    assert!(1.0 - std::f64::consts::E * x / (1.0 - x) > 0.0);
}

#[test]
fn derivative_limits_and_linearity() {
    let s = setup(0.2);
    let c = ClusterCoefficients::new(&s.u, 0.2, &s.grid).unwrap();
    let v = direction(&s, 0.5, 1.0).scale(0.1 * s.delta0);
    let w = direction(&s, -0.3, 2.0).scale(0.1 * s.delta0);
    let zero = RadialFunction::zeros(&s.grid, 6.0);
    assert_eq!(frechet_f(&c, &s.u, &zero, 1e-3, 3, s.delta0).unwrap().max_abs(), 0.0);
    let z = 1e-6 * s.ens.z_max_gas;
    let dilute = frechet_f(&c, &s.u, &v, z, 3, s.delta0).unwrap();
    let leading = c.f.zip_with(&v, |f, vv| -0.2 * (1.0 + f) * vv);
    assert!(dilute.sub(&leading).max_abs() <= 1e-5 * leading.max_abs());
    let z = 0.25 * s.ens.z_max_gas;
    let lhs = frechet_f(&c, &s.u, &v.scale(2.0).axpy(-0.5, &w), z, 3, s.delta0).unwrap();
    let rhs = frechet_f(&c, &s.u, &v, z, 3, s.delta0)
        .unwrap()
        .scale(2.0)
        .axpy(-0.5, &frechet_f(&c, &s.u, &w, z, 3, s.delta0).unwrap());
    assert!(lhs.sub(&rhs).max_abs() <= 1e-8 * rhs.max_abs());
    assert!(frechet_f(&c, &s.u, &v.scale(10.0), z, 3, s.delta0).is_err());
}

#[test]
fn derivative_remainder_scaling() {
    let s = setup(0.2);
    let alpha = s.u.params.alpha;
    let z = 0.25 * s.ens.z_max_gas;
    let c = ClusterCoefficients::new(&s.u, 0.2, &s.grid).unwrap();
    let base = rdf_expansion(&c, &s.ens.with_z(z).unwrap(), 3, false).unwrap();
    let dir = direction(&s, 0.7, 1.5);
    let d = frechet_f(&c, &s.u, &dir.scale(0.1 * s.delta0), z, 3, s.delta0).unwrap();
    let hs = [0.1, 0.05, 0.025];
    let mut rem = Vec::new();
    let mut diff = Vec::new();
    for h in hs {
        let v = dir.scale(h * s.delta0);
        let res = forward(&s, &s.u.perturbed(&v), z, 3);
        let delta = res.h.sub(&base.h);
        diff.push(norm_linf_rho(&delta, alpha));
        rem.push(norm_linf_rho(&delta.axpy(-h / 0.1, &d), alpha));
    }
    let slope = |x: &[f64]| (x[0] / x[2]).ln() / (hs[0] / hs[2]).ln();
    assert!((slope(&rem) - 2.0).abs() < 0.1, "remainder slope {} {rem:?}", slope(&rem));
    assert!((slope(&diff) - 1.0).abs() < 0.05, "difference slope {} {diff:?}", slope(&diff));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10, ..ProptestConfig::default() })]

    // ||F(u+v) - F(u)|| / ||v|| is stable under halving v.
    #[test]
    fn forward_map_is_lipschitz(a in -1.0f64..1.0, k in 0.3f64..3.0) {
        static S: std::sync::OnceLock<(Setup, ForwardResult)> = std::sync::OnceLock::new();
        let (s, base) = S.get_or_init(|| {
            let s = setup(0.2);
            let base = forward(&s, &s.u, 0.25 * s.ens.z_max_gas, 3);
            (s, base)
        });
        let z = 0.25 * s.ens.z_max_gas;
        let dir = direction(s, a, k);
        let ratio = |m: f64| {
            let res = forward(s, &s.u.perturbed(&dir.scale(m)), z, 3);
            norm_linf_rho(&res.h.sub(&base.h), s.u.params.alpha) / m
        };
        let m = 0.25 * s.delta0;
        let (r1, r2) = (ratio(m), ratio(0.5 * m));
        prop_assert!(r1.is_finite() && r1 > 0.0);
        prop_assert!((r1 / r2 - 1.0).abs() < 0.1, "{r1} vs {r2}");
    }
}
