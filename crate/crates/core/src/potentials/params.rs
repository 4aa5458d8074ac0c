use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class constants of the Lennard-Jones type family:
/// `|u(r)| <= C r^-alpha` for `r >= r0` and `u(r) >= c r^-alpha` for `r <= r0`,
/// with `c0 < c < C < C0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LjTypeParams {
    pub alpha: f64,
    pub r0: f64,
    pub c0: f64,
    #[serde(rename = "C0")]
    pub big_c0: f64,
    pub c: f64,
    #[serde(rename = "C")]
    pub big_c: f64,
}

impl LjTypeParams {
    pub fn new(alpha: f64, r0: f64, c0: f64, big_c0: f64, c: f64, big_c: f64) -> Result<Self> {
        let p = Self {
            alpha,
            r0,
            c0,
            big_c0,
            c,
            big_c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Class used for the 12-6 reference potential with `epsilon = sigma = 1`.
    ///
    /// `r0 = 0.95` rather than `1`: the 12-6 potential vanishes at `sigma`,
    /// so the lower branch needs a core radius strictly inside it.
    pub fn reference_lj() -> Self {
        Self {
            alpha: 6.0,
            r0: 0.95,
            c0: 0.1,
            big_c0: 100.0,
            c: 1.0,
            big_c: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 3.0) {
            return Err(Error::Input(format!("alpha = {} must exceed 3", self.alpha)));
        }
        if !(self.r0 > 0.0) {
            return Err(Error::Input(format!("r0 = {} must be positive", self.r0)));
        }
        if !(0.0 < self.c0 && self.c0 < self.c && self.c < self.big_c && self.big_c < self.big_c0) {
            return Err(Error::Input(format!(
                "class constants must satisfy 0 < c0 < c < C < C0, got c0 = {}, c = {}, C = {}, C0 = {}",
                self.c0, self.c, self.big_c, self.big_c0
            )));
        }
        Ok(())
    }
}

/// Inverse temperature, activity and the constants derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub beta: f64,
    pub z: f64,
    pub c_beta: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub z_max_gas: f64,
    pub z_max_strict: f64,
}

impl EnsembleParams {
    pub fn new(beta: f64, z: f64, c_beta: f64, b: f64) -> Result<Self> {
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::Input(format!("activity z = {z} must be nonnegative")));
        }
        let (z_max_gas, z_max_strict) = gas_phase_bounds(c_beta, b, beta)?;
        Ok(Self {
            beta,
            z,
            c_beta,
            b,
            z_max_gas,
            z_max_strict,
        })
    }

    pub fn with_z(&self, z: f64) -> Result<Self> {
        Self::new(self.beta, z, self.c_beta, self.b)
    }

    pub fn in_gas_phase(&self) -> bool {
        self.z > 0.0 && self.z < self.z_max_gas
    }

    /// Refuses activities outside the gas-phase window unless `force`.
    pub fn require_gas_phase(&self, force: bool) -> Result<()> {
        if force || self.in_gas_phase() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "activity z = {:e} outside the gas-phase window 0 < z < {:e} = 1/(c_beta e^(2 beta B + 1))",
                self.z, self.z_max_gas
            )))
        }
    }

    /// `c_beta e^{beta B + 1}`, the denominator rate of the Ursell envelope.
    pub fn ursell_rate(&self) -> f64 {
        self.c_beta * (self.beta * self.b + 1.0).exp()
    }

    /// `c_beta e^{2 beta B + 1}`; its reciprocal is `z_max_gas`.
    pub fn gas_rate(&self) -> f64 {
        self.c_beta * (2.0 * self.beta * self.b + 1.0).exp()
    }
}

/// `(1/(c_beta e^{2 beta B + 1}), z_max_gas / (1 + e))`.
pub fn gas_phase_bounds(c_beta: f64, b: f64, beta: f64) -> Result<(f64, f64)> {
    if !(c_beta > 0.0 && c_beta.is_finite()) {
        return Err(Error::Precondition(format!(
            "c_beta = {c_beta} must be positive and finite"
        )));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Precondition(format!("stability constant B = {b} must be >= 0")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Precondition(format!("beta = {beta} must be positive")));
    }
    let gas = 1.0 / (c_beta * (2.0 * beta * b + 1.0).exp());
    Ok((gas, gas / (1.0 + E)))
}
