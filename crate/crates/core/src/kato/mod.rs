//! Kato-class diagnostics for radial potentials on model spaces.

mod functionals;
mod potential;
mod verdict;

pub use functionals::{
    analytic_kato_functional, form_bound_constants, heat_potential_average, kato_eta, local_mass, lp_kato_classify,
    resolvent_constant, sandwich_check, Evaluated, FormBound, KatoSettings, LpClass, Sandwich, RESOLVENT_HORIZON,
};
pub use potential::{Part, Potential, PotentialSpec, Shape};
pub use verdict::{kato_verdict, power_fit, GridValue, KatoOptions, KatoReport, LpReport, PowerFit, Verdict, MEMBER_EXPONENT};
