//! Simulation and analysis of the n-dimensional BML traffic cellular
//! automaton with stochastic particle-type switching.
//!
//! Particles of type i live on an `N_1 x ... x N_n` torus and hop one cell
//! along axis i when the cell ahead is vacant; types move in ascending
//! order within each time step, and afterwards each particle switches type
//! with probability q. The crate provides:
//!
//! - [`lattice`]: shapes, cells, configurations, validation, serialization;
//! - [`generate`]: seeded random initial states and exhaustive enumeration;
//! - [`dynamics`]: the stepping engine, trajectories, observers;
//! - [`diagonal`]: gcd-based diagonal invariants, free-movement
//!   certificates, and onset detection;
//! - [`buslaev`]: the contour-network view and limit-cycle analysis of the
//!   deterministic system;
//! - [`spectrum`]: velocity spectra over initial-state ensembles;
//! - [`verify`]: the exhaustive/sampled checker for the gcd condition
//!   `m <= gcd(N_1, ..., N_n) / 2` guaranteeing self-organization.

pub mod buslaev;
pub mod diagonal;
pub mod dynamics;
pub mod generate;
pub mod lattice;
pub mod rng;
pub mod spectrum;
pub mod verify;

pub use buslaev::{contours, limit_cycle, node_membership, Contour, CycleBudget, LimitCycle, Velocity};
pub use diagonal::{
    certificate, check_cluster_monotonicity, check_phase_rule, detect_free_movement,
    diagonal_index, gcd_all, phi, profile, zero_clusters, DiagonalProfile,
    FreeMovementCertificate, OnsetReport,
};
pub use dynamics::{
    mean_velocity, simulate, step, substep, SimOptions, StepObserver, StepStats, SwitchPolicy,
    Trajectory,
};
pub use generate::{
    enumerate_configurations, random_configuration, ConfigurationEnumeration, EnumerationBudget,
};
pub use lattice::{
    neighbor, validate, CellIndex, Configuration, ConfigurationRecord, LatticeShape, Particle,
    ParticleType,
};
pub use rng::{derive_rng, master_rng, SimRng, RNG_ALGORITHM};
pub use spectrum::{spectrum, SpectrumMode, SpectrumReport};
pub use verify::{verify_self_organization, VerificationReport, VerifyError, VerifyOptions};
