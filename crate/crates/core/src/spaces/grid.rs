use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layout parameters for a hybrid radial grid: geometric nodes on the core
/// `(r_min, r0]`, uniform nodes on `[r0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r0: f64,
    /// First node, as a fraction of `r0`.
    pub r_min_factor: f64,
    /// Ratio between consecutive core nodes.
    pub core_ratio: f64,
    /// Uniform spacing beyond `r0`.
    pub dr: f64,
    pub r_max: f64,
}

impl GridSpec {
    /// Default layout: first node `1e-3 r0`, core ratio 1.02, `dr = 0.02 r0`,
    /// `r_max = 20 r0`.
    pub fn for_core_radius(r0: f64) -> Self {
        Self {
            r0,
            r_min_factor: 1e-3,
            core_ratio: 1.02,
            dr: 0.02 * r0,
            r_max: 20.0 * r0,
        }
    }

    /// Same layout with both spacings halved (core ratio square-rooted).
    pub fn refined(&self) -> Self {
        Self {
            core_ratio: self.core_ratio.sqrt(),
            dr: 0.5 * self.dr,
            ..*self
        }
    }
}

/// Strictly increasing, positive radial nodes covering `(0, r_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Input("radial grid needs at least two nodes".into()));
        }
        if !(nodes[0] > 0.0) || nodes.iter().any(|r| !r.is_finite()) {
            return Err(Error::Input("radial grid nodes must be positive and finite".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Input(format!(
                "radial grid not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { nodes })
    }

    pub fn hybrid(spec: &GridSpec) -> Result<Self> {
        let GridSpec {
            r0,
            r_min_factor,
            core_ratio,
            dr,
            r_max,
        } = *spec;
        if !(r0 > 0.0 && r_min_factor > 0.0 && r_min_factor < 1.0) {
            return Err(Error::Input("grid needs r0 > 0 and 0 < r_min_factor < 1".into()));
        }
        if !(core_ratio > 1.0 && dr > 0.0 && r_max > r0) {
            return Err(Error::Input("grid needs core_ratio > 1, dr > 0, r_max > r0".into()));
        }
        let r_min = r_min_factor * r0;
        let n_core = ((r0 / r_min).ln() / core_ratio.ln()).ceil() as usize;
        let ratio = (r0 / r_min).powf(1.0 / n_core as f64);
        let mut nodes: Vec<f64> = (0..n_core).map(|k| r_min * ratio.powi(k as i32)).collect();
        let n_tail = ((r_max - r0) / dr).ceil() as usize;
        let step = (r_max - r0) / n_tail as f64;
        nodes.extend((0..=n_tail).map(|k| r0 + step * k as f64));
        Self::from_nodes(nodes)
    }

    /// Uniform nodes `r_max/n, 2 r_max/n, ..., r_max`.
    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        let h = r_max / n as f64;
        Self::from_nodes((1..=n).map(|k| h * k as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Index `i` with `nodes[i] <= r < nodes[i + 1]`, clamped to valid cells.
    /// Only meaningful for `r_min <= r <= r_max`.
    #[inline]
    pub fn cell(&self, r: f64) -> usize {
        let k = self.nodes.partition_point(|&x| x <= r);
        k.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Index of the node closest to `r` (exact matches included).
    pub fn nearest(&self, r: f64) -> usize {
        let i = self.cell(r.clamp(self.r_min(), self.r_max()));
        if (r - self.nodes[i]).abs() <= (self.nodes[i + 1] - r).abs() {
            i
        } else {
            i + 1
        }
    }

    pub fn covers_core(&self, r0: f64) -> bool {
        self.r_min() <= 1e-3 * r0 * (1.0 + 1e-9) && self.r_max() >= r0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hybrid_layout() {
        let spec = GridSpec::for_core_radius(1.0);
        let g = RadialGrid::hybrid(&spec).unwrap();
        assert!(g.r_min() <= 1e-3 + 1e-15);
        assert!((g.r_max() - 20.0).abs() < 1e-12);
        for w in g.nodes().windows(2) {
            assert!(w[1] > w[0]);
            if w[1] <= 1.0 + 1e-12 {
                assert!(w[1] / w[0] <= 1.05);
            } else {
                assert!(w[1] - w[0] <= 0.02 + 1e-12);
            }
        }
        assert!(g.nodes().iter().any(|&r| (r - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_nodes() {
        assert!(RadialGrid::from_nodes(vec![0.0, 1.0]).is_err());
        assert!(RadialGrid::from_nodes(vec![1.0, 1.0]).is_err());
        assert!(RadialGrid::from_nodes(vec![1.0]).is_err());
    }

    #[test]
    fn cell_lookup() {
        let g = RadialGrid::uniform(1.0, 10).unwrap();
        assert_eq!(g.cell(0.1), 0);
        assert_eq!(g.cell(0.15), 0);
        assert_eq!(g.cell(0.2), 1);
        assert_eq!(g.cell(1.0), 8);
        assert_eq!(g.nearest(0.34), 2);
    }
}
