use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use crate::error::{Error, Result};

/// Tabulated radially symmetric function of `r >= 0`.
///
/// Between nodes the function is linear; on `[0, r_min]` it is constant;
/// beyond `r_max` it follows the power law `A r^{-p}` with `p` the tail
/// exponent and `A` matched to the last node.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    tail_exponent: f64,
}

/// JSON sidecar stored next to a `r,value` CSV file.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RadialSidecar {
    pub alpha: f64,
    pub tail_exponent: f64,
    pub r_max: f64,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, tail_exponent: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at r = {}",
                grid.nodes()[i]
            )));
        }
        if !(tail_exponent > 0.0) {
            return Err(Error::Input("tail exponent must be positive".into()));
        }
        Ok(Self {
            grid,
            values,
            tail_exponent,
        })
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, tail_exponent: f64, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self {
            grid: grid.clone(),
            values,
            tail_exponent,
        }
    }

    pub fn zeros(grid: &Arc<RadialGrid>, tail_exponent: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            tail_exponent,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    pub fn with_tail_exponent(mut self, p: f64) -> Self {
        self.tail_exponent = p;
        self
    }

    /// Coefficient `A` of the tail `A r^{-p}`.
    pub fn tail_amplitude(&self) -> f64 {
        let last = *self.values.last().unwrap();
        if last == 0.0 || self.tail_exponent.is_infinite() {
            0.0
        } else {
            last * self.grid.r_max().powf(self.tail_exponent)
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        if r <= nodes[0] {
            return self.values[0];
        }
        let r_max = self.grid.r_max();
        if r >= r_max {
            if r == r_max {
                return *self.values.last().unwrap();
            }
            if self.tail_exponent.is_infinite() {
                return 0.0;
            }
            return *self.values.last().unwrap() * (r_max / r).powf(self.tail_exponent);
        }
        let i = self.grid.cell(r);
        let (a, b) = (nodes[i], nodes[i + 1]);
        let t = (r - a) / (b - a);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    /// Coefficients, in powers of `r - r_i`, of a cubic through four nodes
    /// around cell `[r_i, r_{i+1}]`.
    ///
    /// The stencil depends on the grid only, so the model is linear in the
    /// values: the centered one, else a one-sided one that avoids a collapsed
    /// cell (a tabulated jump). Collapsed cells themselves get the chord.
    pub fn cell_cubic(&self, i: usize) -> [f64; 4] {
        let (r, v) = (self.grid.nodes(), &self.values);
        let n = r.len();
        let chord = [v[i], (v[i + 1] - v[i]) / (r[i + 1] - r[i]), 0.0, 0.0];
        if n < 4 || collapsed(r, i) {
            return chord;
        }
        let centered = i.saturating_sub(1).min(n - 4);
        [centered, i.saturating_sub(2), i]
            .into_iter()
            .find(|&j| j + 4 <= n && (j..j + 3).all(|k| !collapsed(r, k)))
            .map_or(chord, |j| newton(r, v, j, i))
    }

    /// Evaluation with the local cubic model; the tail and the constant
    /// continuation below `r_min` are those of [`RadialFunction::eval`].
    pub fn eval_cubic(&self, r: f64) -> f64 {
        let nodes = self.grid.nodes();
        if r <= nodes[0] || r >= self.grid.r_max() {
            return self.eval(r);
        }
        let i = self.grid.cell(r);
        poly_eval(&self.cell_cubic(i), r - nodes[i])
    }

    /// Values of `self` at the nodes of `grid`.
    pub fn resample(&self, grid: &Arc<RadialGrid>) -> Self {
        if Arc::ptr_eq(&self.grid, grid) {
            return self.clone();
        }
        Self::from_fn(grid, self.tail_exponent, |r| self.eval(r))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            tail_exponent: self.tail_exponent,
        }
    }

    /// Pointwise combination; `other` is resampled onto `self`'s grid when needed.
    /// The tail exponent of the result is the slower of the two.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let other = if self.same_grid(other) {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.resample(&self.grid))
        };
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
            tail_exponent: self.tail_exponent.min(other.tail_exponent),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `4 pi int_0^inf r^2 w(r) dr`, i.e. the integral over 3-space.
    pub fn integral(&self) -> Result<f64> {
        Ok(4.0 * PI * (self.radial_moment(false) + self.tail_moment(false)?))
    }

    /// `4 pi int_0^inf r^2 |w(r)| dr`.
    pub fn l1_norm(&self) -> Result<f64> {
        Ok(4.0 * PI * (self.radial_moment(true) + self.tail_moment(true)?))
    }

    /// L¹ norm restricted to the grid (no tail), always finite.
    pub fn l1_norm_on_grid(&self) -> f64 {
        4.0 * PI * self.radial_moment(true)
    }

    /// `int_0^{r_max} r^2 w` (or `|w|`) for the local cubic model.
    fn radial_moment(&self, abs: bool) -> f64 {
        let (nodes, v) = (self.grid.nodes(), &self.values);
        let v0 = if abs { v[0].abs() } else { v[0] };
        let mut acc = v0 * nodes[0].powi(3) / 3.0;
        let n = nodes.len();
        for i in 0..n - 1 {
            let c = self.cell_cubic(i);
            let (a, d) = (nodes[i], nodes[i + 1] - nodes[i]);
            if !abs {
                acc += poly_moment(&c, a, d, 2);
                continue;
            }
            let j = i.saturating_sub(1).min(n.saturating_sub(4));
            let stencil = &v[j..(j + 4).min(n)];
            if stencil.iter().all(|&x| x >= 0.0) {
                acc += poly_moment(&c, a, d, 2).max(0.0);
            } else if stencil.iter().all(|&x| x <= 0.0) {
                acc += (-poly_moment(&c, a, d, 2)).max(0.0);
            } else {
                acc += abs_moment_gauss(&c, a, d);
            }
        }
        acc
    }

    fn tail_moment(&self, abs: bool) -> Result<f64> {
        let a = self.tail_amplitude();
        if a == 0.0 {
            return Ok(0.0);
        }
        let p = self.tail_exponent;
        if p <= 3.0 {
            return Err(Error::Divergent(format!(
                "tail exponent {p} <= 3 makes the integral over 3-space diverge"
            )));
        }
        let a = if abs { a.abs() } else { a };
        Ok(a * self.grid.r_max().powf(3.0 - p) / (p - 3.0))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "value"])?;
        for (r, v) in self.nodes().iter().zip(&self.values) {
            w.write_record([format!("{r:.17e}"), format!("{v:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `path` (CSV) and `path.json` (sidecar).
    pub fn write_with_sidecar(&self, path: &Path, alpha: f64) -> Result<()> {
        self.write_csv(path)?;
        let sidecar = RadialSidecar {
            alpha,
            tail_exponent: self.tail_exponent,
            r_max: self.grid.r_max(),
        };
        let mut f = File::create(sidecar_path(path))?;
        f.write_all(serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
        Ok(())
    }

    /// Reads a `r,value` CSV; a radial sidecar, if present, supplies the tail exponent.
    pub fn read_csv(path: &Path, default_tail: f64) -> Result<(Self, Option<RadialSidecar>)> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || headers.get(0).map(str::trim) != Some("r") {
            return Err(Error::Input(format!(
                "{}: expected header `r,value`",
                path.display()
            )));
        }
        let mut r = Vec::new();
        let mut v = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
            };
            r.push(parse(&rec[0])?);
            v.push(parse(&rec[1])?);
        }
        let sidecar = match File::open(sidecar_path(path)) {
            Ok(mut f) => {
                let mut s = String::new();
                f.read_to_string(&mut s)?;
                // Potential CSVs carry a different sidecar; it is not ours to read.
                serde_json::from_str::<RadialSidecar>(&s).ok()
            }
            Err(_) => None,
        };
        let tail = sidecar.map_or(default_tail, |s| s.tail_exponent);
        let grid = Arc::new(RadialGrid::from_nodes(r)?);
        Ok((Self::new(grid, v, tail)?, sidecar))
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// `int_a^b r^2 w(r) dr` for `w` linear between `(a, wa)` and `(b, wb)`.
/// Whether cell `k` is negligibly narrow next to its neighbours.
fn collapsed(r: &[f64], k: usize) -> bool {
    let h = |k: usize| r[k + 1] - r[k];
    let left = if k > 0 { h(k - 1) } else { 0.0 };
    let right = if k + 2 < r.len() { h(k + 1) } else { 0.0 };
    h(k) < 1e-6 * left.max(right)
}

/// Cubic through nodes `j..j+4` in powers of `r - r_i`.
fn newton(r: &[f64], v: &[f64], j: usize, i: usize) -> [f64; 4] {
    let x = [r[j] - r[i], r[j + 1] - r[i], r[j + 2] - r[i], r[j + 3] - r[i]];
    let mut d = [v[j], v[j + 1], v[j + 2], v[j + 3]];
    for k in 1..4 {
        for m in (k..4).rev() {
            d[m] = (d[m] - d[m - 1]) / (x[m] - x[m - k]);
        }
    }
    // Horner on p = d0 + (t - x0)(d1 + (t - x1)(d2 + (t - x2) d3)).
    let mut c = [d[3], 0.0, 0.0, 0.0];
    for k in (0..3).rev() {
        for m in (0..3 - k).rev() {
            c[m + 1] += c[m];
            c[m] *= -x[k];
        }
        c[0] += d[k];
    }
    c
}

pub(crate) fn poly_eval(c: &[f64; 4], t: f64) -> f64 {
    c[0] + t * (c[1] + t * (c[2] + t * c[3]))
}

/// `int_0^d (a + t)^m p(t) dt` for the cubic `p` and `m <= 2`.
pub(crate) fn poly_moment(c: &[f64; 4], a: f64, d: f64, m: u32) -> f64 {
    let mut q = [c[0], c[1], c[2], c[3], 0.0, 0.0];
    for deg in 3..3 + m as usize {
        for k in (0..=deg).rev() {
            q[k + 1] += q[k];
            q[k] *= a;
        }
    }
    // After the loop `q[k]` is the coefficient of t^k of (a + t)^m p(t).
    let mut acc = 0.0;
    let mut dk = d;
    for (k, qk) in q.iter().enumerate() {
        acc += qk * dk / (k + 1) as f64;
        dk *= d;
    }
    acc
}

/// `int_0^d (a + t)^2 |p(t)| dt` by 5-point Gauss-Legendre on four subcells,
/// for cells where the cubic may change sign.
fn abs_moment_gauss(c: &[f64; 4], a: f64, d: f64) -> f64 {
    const X: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let h = d / 4.0;
    let mut acc = 0.0;
    for s in 0..4 {
        let mid = h * (s as f64 + 0.5);
        for (x, w) in X.iter().zip(W) {
            let t = mid + 0.5 * h * x;
            acc += w * 0.5 * h * (a + t).powi(2) * poly_eval(c, t).abs();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::uniform(10.0, 2000).unwrap())
    }

    #[test]
    fn eval_interpolates_and_extends() {
        let g = grid();
        let f = RadialFunction::from_fn(&g, 6.0, |r| r);
        assert!((f.eval(0.0) - 0.005).abs() < 1e-15);
        assert!((f.eval(1.2345) - 1.2345).abs() < 1e-12);
        assert!((f.eval(20.0) - 10.0 * 0.5f64.powi(6)).abs() < 1e-12);
    }

    #[test]
    fn cubic_model_is_exact_for_cubics_and_linear_in_values() {
        let g = Arc::new(RadialGrid::from_nodes((1..40).map(|k| 0.1 * (k as f64).powf(1.3)).collect()).unwrap());
        let p = |r: f64| 1.0 - 2.0 * r + 0.3 * r * r - 0.05 * r.powi(3);
        let f = RadialFunction::from_fn(&g, 6.0, p);
        for x in [0.11, 0.5, 1.234, 3.0, 11.0] {
            assert!((f.eval_cubic(x) - p(x)).abs() < 1e-10, "{x}");
        }
        let h = RadialFunction::from_fn(&g, 6.0, |r| (3.0 * r).sin());
        let comb = f.scale(0.3).axpy(-2.0, &h);
        for i in 0..g.len() - 1 {
            let (a, b, c) = (f.cell_cubic(i), h.cell_cubic(i), comb.cell_cubic(i));
            for k in 0..4 {
                assert!((c[k] - (0.3 * a[k] - 2.0 * b[k])).abs() <= 1e-9 * (1.0 + c[k].abs()));
            }
        }
    }

    #[test]
    fn cubic_model_keeps_jumps_local() {
        let mut nodes: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
        nodes.push(1.0 + 1e-10);
        nodes.extend((1..=20).map(|k| 1.0 + k as f64 * 0.05));
        let g = Arc::new(RadialGrid::from_nodes(nodes).unwrap());
        let step = RadialFunction::from_fn(&g, f64::INFINITY, |r| if r <= 1.0 { 1.0 } else { 0.0 });
        for x in [0.93, 0.97, 0.999, 1.01, 1.04] {
            let want = if x <= 1.0 { 1.0 } else { 0.0 };
            assert!((step.eval_cubic(x) - want).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn integral_of_gaussian() {
        let g = grid();
        let f = RadialFunction::from_fn(&g, 50.0, |r| (-r * r).exp());
        let exact = PI.powf(1.5);
        assert!((f.integral().unwrap() - exact).abs() / exact < 1e-5);
    }

    #[test]
    fn abs_moment_splits_sign_changes() {
        let g = Arc::new(RadialGrid::from_nodes(vec![1.0, 2.0]).unwrap());
        // w = 3 - 2r on [1, 2]: root at 1.5.
        let f = RadialFunction::new(g, vec![1.0, -1.0], f64::INFINITY).unwrap();
        let exact = {
            let p = |r: f64| 3.0 * r.powi(3) / 3.0 - 2.0 * r.powi(4) / 4.0;
            (p(1.5) - p(1.0)) - (p(2.0) - p(1.5)) + 1.0 / 3.0
        };
        assert!((f.l1_norm().unwrap() / (4.0 * PI) - exact).abs() < 1e-14);
    }

    #[test]
    fn divergent_tail_is_an_error() {
        let g = grid();
        let f = RadialFunction::from_fn(&g, 3.0, |r| 1.0 / (1.0 + r.powi(3)));
        assert!(matches!(f.l1_norm(), Err(Error::Divergent(_))));
    }

    #[test]
    fn csv_roundtrip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let f = RadialFunction::from_fn(&grid(), 6.0, |r| (-r).exp());
        f.write_with_sidecar(&path, 6.0).unwrap();
        let (back, side) = RadialFunction::read_csv(&path, 1.0).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.tail_exponent(), 6.0);
        assert_eq!(side.unwrap().r_max, 10.0);
    }
}
