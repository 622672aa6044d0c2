//! Six-field maximum-entropy closure for a rarefied polyatomic gas.
//!
//! The fields are density, velocity, temperature and dynamic pressure. The
//! crate provides the closed constitutive functions, an independent kinetic
//! quadrature oracle, the characteristic structure of the balance laws and a
//! one-dimensional finite-volume solver with exact BGK relaxation.

pub mod closure;
pub mod eigen;
pub mod error;
pub mod gas;
pub mod oracle;
pub mod solver;

pub use closure::{
    closed_fluxes, entropy_parts, main_field, multipliers_from_state, nonequilibrium_entropy, production_bgk,
    state_from_multipliers, EntropyParts, FluxSet, MainField, Multipliers,
};
pub use eigen::{
    acceleration_wave, convexity_check, flux_jacobian, k_condition, wave_fan, AccelerationWave, ConvexityReport,
    KConditionReport, WaveFan, WaveTag,
};
pub use error::{Bound, Et6Error, Result};
pub use gas::{
    admissibility, conserved_from_primitive, eos_evaluate, primitive_from_conserved, Admissibility, Conserved6, GasSpec,
    State6,
};
pub use oracle::{
    mep_optimality_probe, oracle_entropy, oracle_flux_check, oracle_moment, Monomial, OracleReport, ProbeReport,
    QuadratureSpec,
};
pub use solver::{
    euler_reference, hyperbolic_step, ns_limit_diagnostic, relaxation_step_exact, run_scenario, Boundary, Grid1D,
    InitialCondition, Model, Scenario, Scheme, TimeSeries,
};
