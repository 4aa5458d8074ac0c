use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::params::LjTypeParams;
use crate::error::{Error, Result};
use crate::spaces::{sidecar_path, RadialFunction, RadialGrid};

/// Functional form of a pair potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialForm {
    /// `4 eps ((sigma/r)^12 - (sigma/r)^6)`.
    LennardJones { epsilon: f64, sigma: f64 },
    /// `amplitude r^-exponent`.
    InversePower { amplitude: f64, exponent: f64 },
    Zero,
    /// Tabulated values; only stored as CSV, never in the JSON form.
    #[serde(skip)]
    Tabulated(RadialFunction),
}

/// A radial pair potential together with the class constants it is
/// certified against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Potential {
    pub form: PotentialForm,
    pub params: LjTypeParams,
}

/// Sidecar of a tabulated potential CSV (`r,u`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialSidecar {
    pub params: LjTypeParams,
    pub tail_exponent: f64,
}

impl Potential {
    pub fn lennard_jones(epsilon: f64, sigma: f64, params: LjTypeParams) -> Self {
        Self {
            form: PotentialForm::LennardJones { epsilon, sigma },
            params,
        }
    }

    pub fn inverse_power(amplitude: f64, exponent: f64, params: LjTypeParams) -> Self {
        Self {
            form: PotentialForm::InversePower {
                amplitude,
                exponent,
            },
            params,
        }
    }

    pub fn zero(params: LjTypeParams) -> Self {
        Self {
            form: PotentialForm::Zero,
            params,
        }
    }

    pub fn tabulated(u: RadialFunction, params: LjTypeParams) -> Self {
        Self {
            form: PotentialForm::Tabulated(u),
            params,
        }
    }

    /// 12-6 potential with `epsilon = sigma = 1` in the reference class.
    pub fn reference_lj() -> Self {
        Self::lennard_jones(1.0, 1.0, LjTypeParams::reference_lj())
    }

    /// `u(r)`; `+inf` at `r = 0` for the parametric repulsive forms.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match &self.form {
            PotentialForm::LennardJones { epsilon, sigma } => {
                let s6 = (sigma / r).powi(6);
                4.0 * epsilon * (s6 * s6 - s6)
            }
            PotentialForm::InversePower {
                amplitude,
                exponent,
            } => amplitude * r.powf(-exponent),
            PotentialForm::Zero => 0.0,
            PotentialForm::Tabulated(t) => t.eval(r),
        }
    }

    /// Decay exponent of `|u|` at large `r`.
    pub fn tail_exponent(&self) -> f64 {
        match &self.form {
            PotentialForm::LennardJones { .. } => 6.0,
            PotentialForm::InversePower { exponent, .. } => *exponent,
            PotentialForm::Zero => f64::INFINITY,
            PotentialForm::Tabulated(t) => t.tail_exponent(),
        }
    }

    /// `lim sup_{r -> inf} |u(r)| r^alpha`; `0` when `u` decays faster.
    pub fn tail_envelope(&self, alpha: f64) -> f64 {
        let p = self.tail_exponent();
        let amplitude = match &self.form {
            PotentialForm::LennardJones { epsilon, sigma } => 4.0 * epsilon.abs() * sigma.powi(6),
            PotentialForm::InversePower { amplitude, .. } => amplitude.abs(),
            PotentialForm::Zero => 0.0,
            PotentialForm::Tabulated(t) => t.tail_amplitude().abs(),
        };
        if amplitude == 0.0 || p > alpha {
            0.0
        } else if p == alpha {
            amplitude
        } else {
            f64::INFINITY
        }
    }

    /// Values of `u` at the grid nodes.
    pub fn on_grid(&self, grid: &Arc<RadialGrid>) -> RadialFunction {
        match &self.form {
            PotentialForm::Tabulated(t) => t.resample(grid),
            _ => RadialFunction::from_fn(grid, self.tail_exponent(), |r| self.eval(r)),
        }
    }

    /// `u + v` tabulated on `v`'s grid.
    pub fn perturbed(&self, v: &RadialFunction) -> Self {
        let u = self.on_grid(v.grid());
        Self::tabulated(u.add(v), self.params)
    }

    pub fn with_params(mut self, params: LjTypeParams) -> Self {
        self.params = params;
        self
    }

    /// Loads either a JSON description (`.json`) or a tabulated `r,u` CSV with
    /// its `<file>.json` sidecar.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("potential file {} not found", path.display()),
            )));
        }
        if path.extension().is_some_and(|e| e == "json") {
            let p: Potential = serde_json::from_str(&fs::read_to_string(path)?)?;
            p.params.validate()?;
            return Ok(p);
        }
        let side_path = sidecar_path(path);
        let side: PotentialSidecar = serde_json::from_str(&fs::read_to_string(&side_path).map_err(|e| {
            Error::Input(format!(
                "potential sidecar {} unreadable: {e}",
                side_path.display()
            ))
        })?)?;
        side.params.validate()?;
        let (u, _) = RadialFunction::read_csv(path, side.tail_exponent)?;
        let u = u.with_tail_exponent(side.tail_exponent);
        Ok(Self::tabulated(u, side.params))
    }

    /// Writes `r,u` at the grid nodes plus the sidecar with class constants.
    pub fn write_csv(&self, path: &Path, grid: &Arc<RadialGrid>) -> Result<()> {
        let u = self.on_grid(grid);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "u"])?;
        for (r, v) in u.nodes().iter().zip(u.values()) {
            w.write_record([format!("{r:.17e}"), format!("{v:.17e}")])?;
        }
        w.flush()?;
        let side = PotentialSidecar {
            params: self.params,
            tail_exponent: u.tail_exponent(),
        };
        fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }
}

/// Positions of `N` particles in the cube `[-h, h]^3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    positions: Vec<[f64; 3]>,
    box_half_width: f64,
}

impl Configuration {
    pub fn new(positions: Vec<[f64; 3]>, box_half_width: f64) -> Result<Self> {
        if !(box_half_width > 0.0) {
            return Err(Error::Input("box half width must be positive".into()));
        }
        if let Some(i) = positions
            .iter()
            .position(|p| p.iter().any(|x| !(x.abs() <= box_half_width)))
        {
            return Err(Error::Input(format!(
                "particle {i} at {:?} lies outside the box of half width {box_half_width}",
                positions[i]
            )));
        }
        Ok(Self {
            positions,
            box_half_width,
        })
    }

    /// Wraps the positions in the smallest centred cube containing them.
    pub fn free(positions: Vec<[f64; 3]>) -> Self {
        let h = positions
            .iter()
            .flat_map(|p| p.iter().map(|x| x.abs()))
            .fold(1.0f64, f64::max);
        Self {
            positions,
            box_half_width: h,
        }
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn box_half_width(&self) -> f64 {
        self.box_half_width
    }
}

#[inline]
pub(crate) fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// `sum_{i<j} u(|R_i - R_j|)` in free space; `+inf` if two particles coincide.
pub fn total_energy(u: &Potential, cfg: &Configuration) -> f64 {
    energy_of(u, cfg.positions())
}

pub(crate) fn energy_of(u: &Potential, pos: &[[f64; 3]]) -> f64 {
    let mut e = 0.0;
    for i in 0..pos.len() {
        for j in i + 1..pos.len() {
            let r = dist(&pos[i], &pos[j]);
            if r == 0.0 {
                return f64::INFINITY;
            }
            e += u.eval(r);
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::GridSpec;

    #[test]
    fn energies_of_small_configurations() {
        let u = Potential::reference_lj();
        let rm = 2f64.powf(1.0 / 6.0);
        let one = Configuration::new(vec![[0.3, -0.2, 0.1]], 1.0).unwrap();
        assert_eq!(total_energy(&u, &one), 0.0);
        let pair = Configuration::free(vec![[0.0; 3], [rm, 0.0, 0.0]]);
        assert!((total_energy(&u, &pair) + 1.0).abs() < 1e-14);
        let h = rm * 3f64.sqrt() / 2.0;
        let tri = Configuration::free(vec![[0.0; 3], [rm, 0.0, 0.0], [0.5 * rm, h, 0.0]]);
        assert!((total_energy(&u, &tri) + 3.0).abs() < 1e-13);
        let clash = Configuration::free(vec![[0.1; 3], [0.1; 3]]);
        assert_eq!(total_energy(&u, &clash), f64::INFINITY);
    }

    #[test]
    fn configuration_outside_box_rejected() {
        assert!(Configuration::new(vec![[2.0, 0.0, 0.0]], 1.0).is_err());
    }

    #[test]
    fn tail_envelopes() {
        let p = LjTypeParams::reference_lj();
        assert_eq!(Potential::reference_lj().tail_envelope(6.0), 4.0);
        assert_eq!(Potential::reference_lj().tail_envelope(5.0), 0.0);
        assert!(Potential::reference_lj().tail_envelope(7.0).is_infinite());
        assert_eq!(Potential::zero(p).tail_envelope(6.0), 0.0);
        assert_eq!(Potential::inverse_power(2.0, 6.0, p).tail_envelope(6.0), 2.0);
    }

    #[test]
    fn csv_and_json_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let u = Potential::reference_lj();
        let jpath = dir.path().join("lj.json");
        fs::write(&jpath, serde_json::to_string(&u).unwrap()).unwrap();
        let back = Potential::load(&jpath).unwrap();
        assert_eq!(back.eval(1.3), u.eval(1.3));

        let grid = Arc::new(RadialGrid::hybrid(&GridSpec::for_core_radius(0.95)).unwrap());
        let cpath = dir.path().join("u.csv");
        u.write_csv(&cpath, &grid).unwrap();
        let tab = Potential::load(&cpath).unwrap();
        assert_eq!(tab.tail_exponent(), 6.0);
        for &r in grid.nodes() {
            assert_eq!(tab.eval(r), u.eval(r));
        }
        assert!(Potential::load(&dir.path().join("missing.csv")).is_err());
    }
}
