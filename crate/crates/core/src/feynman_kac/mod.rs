//! Monte Carlo Brownian motion on model spaces: killed paths, transport
//! phases for line bundles and Feynman-Kac estimators.

mod config;
mod estimators;
mod paths;

pub use config::{Domain, PathConfig, PATH_BATCH};
pub use estimators::{
    mc_covariant_semigroup, mc_heat_expectation, mc_kato_integral, step_cap, transport_phase, ComplexEstimate,
    CovariantEstimate, Estimate, PhaseAccumulator,
};
pub use paths::{sample_paths, Walker};
