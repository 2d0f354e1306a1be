//! Exact auditing and seeded simulation of reconstruction attacks against
//! differentially private mechanisms over finite record universes.
//!
//! The crate models the whole attack pipeline:
//!
//! - [`RecordUniverse`] / [`Distribution`]: a finite record space and a prior
//!   over it, with deterministic counter-seeded sampling.
//! - [`Mechanism`]: randomized maps from datasets to a finite output alphabet
//!   with exactly computable output laws, plus an empirical pure-DP meter.
//! - [`AdversaryKind`]: oblivious baselines, Bayes-optimal posterior
//!   maximizers, and the fixture adversary for the separation mechanism.
//! - [`game`]: the reconstruction games (informed and distributional), an
//!   exact success-probability evaluator and a Monte Carlo estimator with
//!   Clopper-Pearson intervals.
//! - [`bounds`]: baseline errors, DP and transfer bound audits, and the
//!   separation experiment.
//! - [`taxonomy`]: a machine-readable attack taxonomy with validation and
//!   parallel-coordinates SVG rendering.
//! - [`config`]: the JSON configuration schema shared by all tools.

pub mod adversary;
pub mod bounds;
pub mod config;
pub mod distribution;
pub mod error;
pub mod game;
pub mod loss;
pub mod mechanism;
pub mod meter;
pub mod record;
pub mod seed;
pub mod stats;
pub mod taxonomy;

/// Default ceiling on the number of states an exact computation may visit.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

pub use adversary::{
    bayes_guess, oblivious_guess, oblivious_objective, separation_adversary, AdversaryContext,
    AdversaryKind, BayesGuess,
};
pub use bounds::{
    audit_dp_bound, audit_grid_cell, audit_rero_transfer, baseline_report, compute_kappa,
    compute_kappa_bar, run_grid, separation_experiment, BaselineReport, BoundAudit, DpAuditOutcome,
    GridCellReport, SeparationReport, TheoremId,
};
pub use config::{
    universe_of_size, ConfigFile, DistributionSpec, GameSpec, GridCell, GridMechanism, GridSpec,
    RecordRef, TaxonomySpec,
};
pub use distribution::Distribution;
pub use error::{Error, Result};
pub use game::{
    estimate_gamma, exact_gamma, run_distrero_trial, run_rero_trial, EstimateOptions,
    EstimationResult, ExactResult, GameConfig, GameVariant, TrialOutcome,
};
pub use loss::{LossKind, LossSpec};
pub use mechanism::{
    separation_output, DpParameters, Mechanism, MechanismKind, OutputDistribution, OutputSymbol,
};
pub use record::{enumerate_datasets, Dataset, RecordId, RecordUniverse, UniverseKind};
pub use taxonomy::{builtin_registry, render_parallel_coordinates, AttackRegistry, AttackSpec};
