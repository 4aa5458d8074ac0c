//! Adaptive Simpson quadrature on finite and half-infinite intervals.

use crate::error::{Error, Result};

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `int_a^b f` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Pre-split so that narrow features are not skipped by the first estimate.
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|k| {
            let (x0, x1) = (a + h * k as f64, a + h * (k + 1) as f64);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = h / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_step(&f, x0, x1, f0, fm, f1, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

/// `int_0^inf f` via the substitution `r = t / (1 - t)`.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        f(t / s) / (s * s)
    };
    let v = adaptive_simpson(g, 0.0, 1.0, tol);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergent("half-line quadrature produced a non-finite value".into()))
    }
}
