use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaces::{poly_moment, RadialFunction};

/// Geometric extension of the outer quadrature beyond `r_max`.
const EXT_RATIO: f64 = 1.05;
const EXT_FACTOR: f64 = 100.0;

/// `G(x) = int_0^x t w(t) dt` for the local cubic model of `w`
/// (constant below the first node, power tail beyond the last).
struct Primitive<'a> {
    w: &'a RadialFunction,
    cum: Vec<f64>,
    cubic: Vec<[f64; 4]>,
    amp: f64,
}

impl<'a> Primitive<'a> {
    fn new(w: &'a RadialFunction) -> Self {
        let (r, v) = (w.nodes(), w.values());
        let cubic: Vec<[f64; 4]> = (0..r.len() - 1).map(|i| w.cell_cubic(i)).collect();
        let mut cum = Vec::with_capacity(r.len());
        cum.push(0.5 * v[0] * r[0] * r[0]);
        for i in 0..r.len() - 1 {
            cum.push(cum[i] + poly_moment(&cubic[i], r[i], r[i + 1] - r[i], 1));
        }
        Self {
            w,
            cum,
            cubic,
            amp: w.tail_amplitude(),
        }
    }

    #[cfg(test)]
    fn eval(&self, x: f64) -> f64 {
        let mut hint = 0;
        self.eval_from(x, &mut hint)
    }

    /// Evaluation with a cell cursor; cheap when successive arguments are close.
    #[inline]
    fn eval_from(&self, x: f64, hint: &mut usize) -> f64 {
        let (r, v) = (self.w.nodes(), self.w.values());
        if x <= 0.0 {
            return 0.0;
        }
        if x <= r[0] {
            return 0.5 * v[0] * x * x;
        }
        let n = r.len();
        let r_max = r[n - 1];
        if x <= r_max {
            let mut i = (*hint).min(n - 2);
            let mut steps = 0;
            while i > 0 && r[i] > x && steps < 32 {
                i -= 1;
                steps += 1;
            }
            while i + 2 < n && r[i + 1] <= x && steps < 32 {
                i += 1;
                steps += 1;
            }
            if !(r[i] <= x && (x < r[i + 1] || i + 2 == n)) {
                i = self.w.grid().cell(x);
            }
            *hint = i;
            return self.cum[i] + poly_moment(&self.cubic[i], r[i], x - r[i], 1);
        }
        let p = self.w.tail_exponent();
        let tail = if self.amp == 0.0 {
            0.0
        } else if p == 2.0 {
            self.amp * (x / r_max).ln()
        } else {
            self.amp * (x.powf(2.0 - p) - r_max.powf(2.0 - p)) / (2.0 - p)
        };
        self.cum[n - 1] + tail
    }
}

fn check_tail(w: &RadialFunction) -> Result<()> {
    if w.tail_amplitude() != 0.0 && !(w.tail_exponent() > 3.0) {
        return Err(Error::Input(format!(
            "tail exponent {} <= 3: convolution integral diverges",
            w.tail_exponent()
        )));
    }
    Ok(())
}

/// Outer quadrature panels `[s_k, s_{k+1}]`: the origin, the grid nodes and a
/// geometric extension to `100 r_max`.
fn outer_nodes(w: &RadialFunction) -> Vec<f64> {
    let mut s = Vec::with_capacity(w.nodes().len() + 100);
    s.push(0.0);
    s.extend_from_slice(w.nodes());
    let r_max = w.grid().r_max();
    if w.tail_amplitude() != 0.0 {
        let mut x = r_max * EXT_RATIO;
        while x < EXT_FACTOR * r_max {
            s.push(x);
            x *= EXT_RATIO;
        }
        s.push(EXT_FACTOR * r_max);
    }
    s
}

struct Convolver<'a> {
    w: &'a RadialFunction,
    w2: &'a RadialFunction,
    g2: Primitive<'a>,
    s: Vec<f64>,
    /// `s w(s)` at panel ends and midpoints.
    sw: Vec<f64>,
    sw_mid: Vec<f64>,
    far: f64,
}

impl<'a> Convolver<'a> {
    fn new(w: &'a RadialFunction, w2: &'a RadialFunction) -> Self {
        let s = outer_nodes(w);
        let sw = s.iter().map(|&x| x * w.eval_cubic(x)).collect();
        let sw_mid = s
            .windows(2)
            .map(|p| {
                let m = 0.5 * (p[0] + p[1]);
                m * w.eval_cubic(m)
            })
            .collect();
        // Beyond the extension: (w * w2)(r) -> 4 pi int s^2 w w2 with both in their power tails.
        let s_end = *s.last().unwrap();
        let (a, a2) = (w.tail_amplitude(), w2.tail_amplitude());
        let far = if a == 0.0 || a2 == 0.0 {
            0.0
        } else {
            let e = w.tail_exponent() + w2.tail_exponent() - 3.0;
            4.0 * PI * a * a2 * s_end.powf(-e) / e
        };
        Self {
            w,
            w2,
            g2: Primitive::new(w2),
            s,
            sw,
            sw_mid,
            far,
        }
    }

    fn at(&self, r: f64) -> f64 {
        if r == 0.0 {
            return self.at_origin();
        }
        // Cursors for G(r + s) and G(|r - s|); both arguments move by about
        // one cell per panel.
        let (mut hp, mut hm) = (0usize, 0usize);
        let mut kernel = |s: f64| self.g2.eval_from(r + s, &mut hp) - self.g2.eval_from((r - s).abs(), &mut hm);
        let mut acc = 0.0;
        let mut ka = kernel(self.s[0]);
        for k in 0..self.s.len() - 1 {
            let (a, b) = (self.s[k], self.s[k + 1]);
            if a < r && r < b {
                // Split at the kink of the kernel.
                let sw = |x: f64| x * self.w.eval_cubic(x);
                let (m1, m2) = (0.5 * (a + r), 0.5 * (r + b));
                let (k1, kr) = (kernel(m1), kernel(r));
                let (k2, kb) = (kernel(m2), kernel(b));
                acc += (r - a) / 6.0 * (self.sw[k] * ka + 4.0 * sw(m1) * k1 + sw(r) * kr);
                acc += (b - r) / 6.0 * (sw(r) * kr + 4.0 * sw(m2) * k2 + self.sw[k + 1] * kb);
                ka = kb;
            } else {
                let km = kernel(0.5 * (a + b));
                let kb = kernel(b);
                acc += (b - a) / 6.0 * (self.sw[k] * ka + 4.0 * self.sw_mid[k] * km + self.sw[k + 1] * kb);
                ka = kb;
            }
        }
        2.0 * PI / r * acc + self.far
    }

    fn at_origin(&self) -> f64 {
        let f = |x: f64| x * x * self.w.eval_cubic(x) * self.w2.eval_cubic(x);
        let mut acc = 0.0;
        for p in self.s.windows(2) {
            let m = 0.5 * (p[0] + p[1]);
            acc += (p[1] - p[0]) / 6.0 * (f(p[0]) + 4.0 * f(m) + f(p[1]));
        }
        4.0 * PI * acc + self.far
    }
}

/// `(w * w2)(r)` at a single radius; `r = 0` uses `4 pi int s^2 w w2`.
pub fn convolve_at(w: &RadialFunction, w2: &RadialFunction, r: f64) -> Result<f64> {
    check_tail(w)?;
    check_tail(w2)?;
    Ok(Convolver::new(w, w2).at(r))
}

/// Radial profile of the 3D convolution of two radial functions, on the grid
/// of `w` (`w2` is resampled when the grids differ).
///
/// Uses `(w * w2)(r) = (2 pi / r) int_0^inf s w(s) [G(r+s) - G(|r-s|)] ds`
/// with `G(x) = int_0^x t w2(t) dt` exact for the tabulated model and the
/// outer integral by panelwise Simpson. The result decays with the slower of
/// the two tail exponents.
pub fn radial_convolve(w: &RadialFunction, w2: &RadialFunction) -> Result<RadialFunction> {
    check_tail(w)?;
    check_tail(w2)?;
    let w2 = if w.same_grid(w2) {
        std::borrow::Cow::Borrowed(w2)
    } else {
        std::borrow::Cow::Owned(w2.resample(w.grid()))
    };
    let conv = Convolver::new(w, &w2);
    let values: Vec<f64> = w.nodes().par_iter().map(|&r| conv.at(r)).collect();
    let p = w.tail_exponent().min(w2.tail_exponent());
    RadialFunction::new(w.grid().clone(), values, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::RadialGrid;
    use std::sync::Arc;

    fn ball_grid() -> Arc<RadialGrid> {
        let mut nodes: Vec<f64> = (1..=400).map(|k| k as f64 / 400.0).collect();
        nodes.push(1.0 + 1e-9);
        nodes.extend((1..=400).map(|k| 1.0 + k as f64 / 100.0));
        Arc::new(RadialGrid::from_nodes(nodes).unwrap())
    }

    fn ball(g: &Arc<RadialGrid>) -> RadialFunction {
        RadialFunction::from_fn(g, f64::INFINITY, |r| if r <= 1.0 { 1.0 } else { 0.0 })
    }

    /// Overlap volume of two unit balls at distance r.
    fn lens(r: f64) -> f64 {
        if r >= 2.0 {
            0.0
        } else {
            PI / 12.0 * (4.0 + r) * (2.0 - r).powi(2)
        }
    }

    #[test]
    fn primitive_is_exact_for_cubics() {
        let g = Arc::new(RadialGrid::uniform(4.0, 8).unwrap());
        let f = |r: f64| 2.0 - 0.5 * r + 0.1 * r.powi(3);
        let w = RadialFunction::from_fn(&g, f64::INFINITY, f);
        let p = Primitive::new(&w);
        let big = |t: f64| t * t - t.powi(3) / 6.0 + 0.02 * t.powi(5);
        // Constant w(0.5) below the first node, then the cubic.
        for x in [0.3f64, 0.5, 1.37, 2.0, 3.99] {
            let exact = if x <= 0.5 {
                0.5 * f(0.5) * x * x
            } else {
                0.125 * f(0.5) + big(x) - big(0.5)
            };
            assert!((p.eval(x) - exact).abs() < 1e-13, "{x}: {} vs {exact}", p.eval(x));
        }
    }

    #[test]
    fn unit_ball_self_overlap() {
        let g = ball_grid();
        let b = ball(&g);
        let c = radial_convolve(&b, &b).unwrap();
        let at0 = convolve_at(&b, &b, 0.0).unwrap();
        assert!((at0 - 4.0 * PI / 3.0).abs() < 1e-6, "{at0}");
        assert_eq!(convolve_at(&b, &b, 2.5).unwrap(), 0.0);
        for (&r, &v) in c.nodes().iter().zip(c.values()) {
            assert!((v - lens(r)).abs() < 2e-3, "r = {r}: {v} vs {}", lens(r));
        }
    }

    #[test]
    fn gaussian_identity() {
        let g = Arc::new(RadialGrid::uniform(8.0, 8000).unwrap());
        let w = RadialFunction::from_fn(&g, f64::INFINITY, |r| (-r * r).exp());
        let k = (PI / 2.0).powf(1.5);
        for &r in g.nodes().iter().step_by(97).chain([0.0, 0.0123, 3.33333].iter()) {
            let v = convolve_at(&w, &w, r).unwrap();
            let exact = k * (-r * r / 2.0).exp();
            assert!((v - exact).abs() < 1e-6, "r = {r}: {v} vs {exact}");
        }
        let coarse = Arc::new(RadialGrid::uniform(8.0, 400).unwrap());
        let wc = RadialFunction::from_fn(&coarse, f64::INFINITY, |r| (-r * r).exp());
        let c = radial_convolve(&wc, &wc).unwrap();
        for (&r, &v) in c.nodes().iter().zip(c.values()) {
            assert!((v - k * (-r * r / 2.0).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn divergent_tail_rejected() {
        let g = Arc::new(RadialGrid::uniform(8.0, 100).unwrap());
        let w = RadialFunction::from_fn(&g, 2.5, |r| 1.0 / (1.0 + r * r));
        assert!(matches!(radial_convolve(&w, &w), Err(Error::Input(_))));
    }
}
