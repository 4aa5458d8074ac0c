use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::montecarlo::{graph_monte_carlo, GraphFamily, GraphSum, McConfig, McRun};
use crate::convolution::radial_convolve;
use crate::error::{Error, Result};
use crate::potentials::{mayer_function, EnsembleParams, Potential};
use crate::spaces::{norm_vu, RadialFunction, RadialGrid};

/// `a_3 = 2 f I_1 + (f*f)(1 + f)` with `I_1 = int f`.
pub fn a3_analytic(f: &RadialFunction) -> Result<RadialFunction> {
    let ff = radial_convolve(f, f)?;
    a3_from(f, f.integral()?, &ff)
}

fn a3_from(f: &RadialFunction, i1: f64, ff: &RadialFunction) -> Result<RadialFunction> {
    Ok(f.zip_with(ff, |fv, c| 2.0 * fv * i1 + c * (1.0 + fv)))
}

/// Samples the fourth-order graph family at `radii` and interpolates linearly
/// onto `grid`, with a power tail of exponent `tail`.
fn sampled_on_grid(
    f: &RadialFunction,
    radii: &[f64],
    mc: &McConfig,
    family: GraphFamily,
) -> Result<(RadialFunction, McRun)> {
    let run = graph_monte_carlo(4, f, radii, mc, family, GraphSum::Signed)?;
    let coarse = Arc::new(RadialGrid::from_nodes(radii.to_vec())?);
    let values = run.estimates.iter().map(|e| e.mean).collect();
    let a = RadialFunction::new(coarse, values, f.tail_exponent())?.resample(f.grid());
    Ok((a, run))
}

/// Radii at which the fourth coefficient is sampled before interpolation onto
/// the working grid: dense through the first shells, coarser beyond.
pub fn default_a4_radii() -> Vec<f64> {
    let mut r: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
    r.extend((1..=12).map(|k| 3.0 + 0.25 * k as f64));
    r
}

/// Coefficient functions of one potential at one temperature on one grid.
/// Each order is computed once, on first use, and shared afterwards.
pub struct ClusterCoefficients {
    pub beta: f64,
    pub f: RadialFunction,
    pub i1: f64,
    pub mc: McConfig,
    pub a4_radii: Vec<f64>,
    ff: OnceLock<RadialFunction>,
    a3: OnceLock<RadialFunction>,
    a4: OnceLock<(RadialFunction, McRun)>,
    cavity4: OnceLock<(RadialFunction, McRun)>,
}

impl ClusterCoefficients {
    pub fn new(u: &Potential, beta: f64, grid: &Arc<RadialGrid>) -> Result<Self> {
        Self::from_mayer(mayer_function(u, beta, grid), beta)
    }

    pub fn from_mayer(f: RadialFunction, beta: f64) -> Result<Self> {
        let i1 = f.integral()?;
        Ok(Self {
            beta,
            f,
            i1,
            mc: McConfig::default(),
            a4_radii: default_a4_radii(),
            ff: OnceLock::new(),
            a3: OnceLock::new(),
            a4: OnceLock::new(),
            cavity4: OnceLock::new(),
        })
    }

    pub fn with_mc(mut self, mc: McConfig) -> Self {
        self.mc = mc;
        self
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.f.grid()
    }

    /// `f * f`, which is also the first cavity coefficient.
    pub fn mayer_autoconvolution(&self) -> Result<&RadialFunction> {
        if let Some(a) = self.ff.get() {
            return Ok(a);
        }
        let a = radial_convolve(&self.f, &self.f)?;
        Ok(self.ff.get_or_init(|| a))
    }

    pub fn a3(&self) -> Result<&RadialFunction> {
        if let Some(a) = self.a3.get() {
            return Ok(a);
        }
        let a = a3_from(&self.f, self.i1, self.mayer_autoconvolution()?)?;
        Ok(self.a3.get_or_init(|| a))
    }

    /// Third density coefficient `(3 I_1^2 + T)/2`, `T = int (f*f) f`.
    pub fn d3(&self) -> Result<f64> {
        let t = self.mayer_autoconvolution()?.zip_with(&self.f, |a, b| a * b).integral()?;
        Ok(0.5 * (3.0 * self.i1 * self.i1 + t))
    }

    /// Fourth coefficient sampled at [`Self::a4_radii`] and linearly
    /// interpolated onto the grid, with the run log.
    pub fn a4(&self) -> Result<&(RadialFunction, McRun)> {
        if let Some(a) = self.a4.get() {
            return Ok(a);
        }
        let a = sampled_on_grid(&self.f, &self.a4_radii, &self.mc, GraphFamily::Connected)?;
        Ok(self.a4.get_or_init(|| a))
    }

    /// `1/2 int sum over connected graphs on four vertices without the bond
    /// (1, 2)`, sampled like [`Self::a4`].
    pub fn cavity4(&self) -> Result<&(RadialFunction, McRun)> {
        if let Some(a) = self.cavity4.get() {
            return Ok(a);
        }
        let a = sampled_on_grid(&self.f, &self.a4_radii, &self.mc, GraphFamily::Cavity)?;
        Ok(self.cavity4.get_or_init(|| a))
    }

    /// `a_n` for `2 <= n <= 4`.
    pub fn coefficient(&self, n: usize) -> Result<&RadialFunction> {
        match n {
            2 => Ok(&self.f),
            3 => self.a3(),
            4 => Ok(&self.a4()?.0),
            _ => Err(Error::Unsupported(format!("cluster coefficients available for 2 <= n <= 4, got {n}"))),
        }
    }
}

/// Truncated activity series of the Ursell function.
#[derive(Debug, Clone)]
pub struct ClusterExpansion {
    pub n_max: usize,
    pub z: f64,
    pub coeffs: BTreeMap<usize, RadialFunction>,
    pub omega: RadialFunction,
    /// Monte Carlo log of `a_4`, when used.
    pub a4_run: Option<McRun>,
}

/// `omega = sum_{n=2}^{n_max} a_n z^n`. Activities outside the gas-phase
/// window are refused unless `force`.
pub fn ursell_truncated(
    coeffs: &ClusterCoefficients,
    ens: &EnsembleParams,
    n_max: usize,
    force: bool,
) -> Result<ClusterExpansion> {
    if !(2..=4).contains(&n_max) {
        return Err(Error::Unsupported(format!("truncation order must be 2, 3 or 4, got {n_max}")));
    }
    if ens.z != 0.0 {
        ens.require_gas_phase(force)?;
    }
    let z = ens.z;
    let mut map = BTreeMap::new();
    let mut omega = RadialFunction::zeros(coeffs.grid(), coeffs.f.tail_exponent());
    for n in 2..=n_max {
        let a = coeffs.coefficient(n)?;
        omega = omega.axpy(z.powi(n as i32), a);
        map.insert(n, a.clone());
    }
    let a4_run = if n_max >= 4 { Some(coeffs.a4()?.1.clone()) } else { None };
    Ok(ClusterExpansion {
        n_max,
        z,
        coeffs: map,
        omega,
        a4_run,
    })
}

/// Directional derivative of the truncated Ursell function in the direction
/// `v` (tabulated on the coefficient grid), for `n_max` 2 or 3. Requires
/// `||v||_{V_u} <= delta0 / 2`.
pub fn ursell_derivative(
    coeffs: &ClusterCoefficients,
    u: &Potential,
    v: &RadialFunction,
    z: f64,
    n_max: usize,
    delta0: f64,
) -> Result<RadialFunction> {
    if !(2..=3).contains(&n_max) {
        return Err(Error::Unsupported(format!("Ursell derivative supports order 2 or 3, got {n_max}")));
    }
    require_small_perturbation(coeffs.grid(), u, v, delta0)?;
    let (df, di1) = mayer_derivative(coeffs, v)?;
    let mut d = df.scale(z * z);
    if n_max >= 3 {
        d = d.axpy(z.powi(3), &a3_derivative(coeffs, &df, di1)?);
    }
    Ok(d)
}

/// Refuses `v` with `||v||_{V_u} > delta0 / 2`.
pub(crate) fn require_small_perturbation(
    grid: &Arc<RadialGrid>,
    u: &Potential,
    v: &RadialFunction,
    delta0: f64,
) -> Result<()> {
    let size = norm_vu(v, &u.on_grid(grid), u.params.r0, u.params.alpha)?;
    if size > 0.5 * delta0 {
        return Err(Error::Precondition(format!(
            "perturbation norm {size:e} exceeds delta0/2 = {:e}",
            0.5 * delta0
        )));
    }
    Ok(())
}

/// `df = -beta e^{-beta u} v = -beta (1 + f) v` and `int df`.
pub(crate) fn mayer_derivative(coeffs: &ClusterCoefficients, v: &RadialFunction) -> Result<(RadialFunction, f64)> {
    let beta = coeffs.beta;
    let df = coeffs.f.zip_with(v, |fv, vv| -beta * (1.0 + fv) * vv);
    let di1 = df.integral()?;
    Ok((df, di1))
}

/// `f * df + df * f`, the exact derivative of the discrete autoconvolution,
/// whose quadrature is not symmetric in its arguments to rounding.
pub(crate) fn autoconvolution_derivative(f: &RadialFunction, df: &RadialFunction) -> Result<RadialFunction> {
    Ok(radial_convolve(f, df)?.add(&radial_convolve(df, f)?))
}

/// Derivative of `2 f I_1 + (f*f)(1 + f)` along `df`.
pub(crate) fn a3_derivative(coeffs: &ClusterCoefficients, df: &RadialFunction, di1: f64) -> Result<RadialFunction> {
    let f = &coeffs.f;
    let ff = coeffs.mayer_autoconvolution()?;
    let dff = autoconvolution_derivative(f, df)?;
    let i1 = coeffs.i1;
    let vals: Vec<f64> = (0..f.values().len())
        .map(|k| {
            let (fv, dv) = (f.values()[k], df.values()[k]);
            2.0 * dv * i1 + 2.0 * fv * di1 + dff.values()[k] * (1.0 + fv) + ff.values()[k] * dv
        })
        .collect();
    RadialFunction::new(f.grid().clone(), vals, f.tail_exponent().min(df.tail_exponent()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::LjTypeParams;
    use crate::spaces::norm_linf_rho;
    use std::f64::consts::PI;

    fn indicator_grid() -> Arc<RadialGrid> {
        let mut nodes: Vec<f64> = (1..=200).map(|k| 0.005 * k as f64).collect();
        nodes.push(1.0 + 1e-9);
        nodes.extend((1..=100).map(|k| 1.0 + 0.02 * k as f64));
        Arc::new(RadialGrid::from_nodes(nodes).unwrap())
    }

    #[test]
    fn a3_of_negative_unit_ball() {
        let grid = indicator_grid();
        let f = RadialFunction::from_fn(&grid, f64::INFINITY, |r| if r <= 1.0 { -1.0 } else { 0.0 });
        let a3 = a3_analytic(&f).unwrap();
        assert!((a3.eval(0.0) - 8.0 * PI / 3.0).abs() < 1e-3, "{}", a3.eval(0.0));
        assert!(a3.values().last().unwrap().abs() < 1e-12);
        let zero = RadialFunction::zeros(&grid, 6.0);
        assert_eq!(a3_analytic(&zero).unwrap().max_abs(), 0.0);
    }

    fn small_lj() -> (Potential, Arc<RadialGrid>) {
        let u = Potential::reference_lj();
        let grid = Arc::new(RadialGrid::uniform(12.0, 480).unwrap());
        (u, grid)
    }

    #[test]
    fn order_two_is_z_squared_f() {
        let (u, grid) = small_lj();
        let c = ClusterCoefficients::new(&u, 0.2, &grid).unwrap();
        let ens = EnsembleParams::new(0.2, 1e-3, 6.0, 6.2).unwrap();
        let e = ursell_truncated(&c, &ens, 2, false).unwrap();
        assert_eq!(e.omega.values(), c.f.scale(1e-6).values());
        let e0 = ursell_truncated(&c, &ens.with_z(0.0).unwrap(), 3, false).unwrap();
        assert_eq!(e0.omega.max_abs(), 0.0);
        assert!(ursell_truncated(&c, &ens.with_z(1.0).unwrap(), 3, false).is_err());
        assert!(ursell_truncated(&c, &ens.with_z(1.0).unwrap(), 3, true).is_ok());
    }

    #[test]
    fn derivative_order_two_and_linearity() {
        let (u, grid) = small_lj();
        let beta = 0.2;
        let c = ClusterCoefficients::new(&u, beta, &grid).unwrap();
        let v1 = RadialFunction::from_fn(&grid, 6.0, |r| 1e-3 * (-r).exp() * u.eval(r).abs().min(1.0));
        let v2 = RadialFunction::from_fn(&grid, 6.0, |r| 1e-3 / (1.0 + r * r).powi(3));
        let z = 1e-3;
        let d2 = ursell_derivative(&c, &u, &v1, z, 2, 1.0).unwrap();
        let expect = RadialFunction::from_fn(&grid, 6.0, |r| -z * z * beta * (-beta * u.eval(r)).exp() * v1.eval(r));
        assert!(d2.sub(&expect).max_abs() <= 1e-12 * expect.max_abs());
        let (a, b) = (0.7, -1.3);
        let comb = v1.scale(a).axpy(b, &v2);
        let lhs = ursell_derivative(&c, &u, &comb, z, 3, 1.0).unwrap();
        let rhs = ursell_derivative(&c, &u, &v1, z, 3, 1.0)
            .unwrap()
            .scale(a)
            .axpy(b, &ursell_derivative(&c, &u, &v2, z, 3, 1.0).unwrap());
        let scale = rhs.max_abs();
        assert!(lhs.sub(&rhs).max_abs() <= 1e-8 * scale);
        assert!(ursell_derivative(&c, &u, &v1.scale(1e4), z, 3, 1e-3).is_err());
        let zero = RadialFunction::zeros(&grid, 6.0);
        assert_eq!(ursell_derivative(&c, &u, &zero, z, 3, 1.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn derivative_remainder_is_quadratic() {
        let (u, grid) = small_lj();
        let beta = 0.2;
        let z = 2e-3;
        let alpha = LjTypeParams::reference_lj().alpha;
        let base = ClusterCoefficients::new(&u, beta, &grid).unwrap();
        let v = RadialFunction::from_fn(&grid, 6.0, |r| 0.5 / (1.0 + r * r).powi(3));
        let omega = |c: &ClusterCoefficients| {
            c.f.scale(z * z).axpy(z.powi(3), c.a3().unwrap())
        };
        let w0 = omega(&base);
        let d = ursell_derivative(&base, &u, &v, z, 3, 10.0).unwrap();
        let hs = [0.1, 0.05, 0.025];
        let rem: Vec<f64> = hs
            .iter()
            .map(|&h| {
                let c = ClusterCoefficients::new(&u.perturbed(&v.scale(h)), beta, &grid).unwrap();
                norm_linf_rho(&omega(&c).sub(&w0).axpy(-h, &d), alpha)
            })
            .collect();
        let slope = (rem[0] / rem[2]).ln() / (hs[0] / hs[2]).ln();
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}, remainders {rem:?}");
    }
}
