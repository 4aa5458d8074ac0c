//! Radial 3D convolution, autoconvolution ladders and their series, and the
//! weighted-norm inequalities they satisfy.

mod ladder;
mod radial;

pub use ladder::{
    build_ladder, check_banach_algebra, check_geometric_decay, epsilon_alpha, geometric_envelope, series_w_sigma,
    AutoconvolutionLadder, GeometricDecayReport, WSigma, CHECK_TOL, L1_QUAD_TOL,
};
pub use radial::{convolve_at, radial_convolve};
