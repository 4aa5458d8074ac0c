//! Radial grids, tabulated radial functions and the two weighted norms used
//! throughout: the weighted sup-norm and the perturbation norm relative to a
//! reference potential.

mod function;
mod grid;
mod norms;
pub mod quad;

pub use function::{sidecar_path, RadialFunction, RadialSidecar};
pub(crate) use function::poly_moment;
pub use grid::{GridSpec, RadialGrid};
pub use norms::{embedding_constant_c_rho, norm_linf_rho, norm_vu, rho_weight};
