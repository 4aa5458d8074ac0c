//! Benchmark fixtures shared by the criterion benches.

use std::sync::Arc;

use ibi_core::potentials::Potential;
use ibi_core::spaces::{GridSpec, RadialGrid};

/// Reference 12-6 potential on the default hybrid grid.
pub fn reference() -> (Potential, Arc<RadialGrid>) {
    let u = Potential::reference_lj();
    let grid = RadialGrid::hybrid(&GridSpec::for_core_radius(u.params.r0)).expect("grid");
    (u, Arc::new(grid))
}
