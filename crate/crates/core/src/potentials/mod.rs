//! Lennard-Jones type potentials: class constants, certification, energies,
//! the stability constant, Mayer functions and the gas-phase window.

mod certify;
mod mayer;
mod params;
mod potential;
mod stability;

pub use certify::{certify_lj_type, certify_values, CertificationReport};
pub use mayer::{
    c_beta_bound, mayer_at, mayer_function, perturbation_radius, perturbation_weight, q_of, weight_constant,
    PerturbationRadius, C_BETA_MARGIN,
};
pub use params::{gas_phase_bounds, EnsembleParams, LjTypeParams};
pub use potential::{total_energy, Configuration, Potential, PotentialForm, PotentialSidecar};
pub use stability::{estimate_stability_constant, ConfigurationKind, StabilityConfig, StabilityEstimate};
