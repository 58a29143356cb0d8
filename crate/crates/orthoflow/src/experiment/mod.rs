//! Config-driven experiment orchestration and deterministic persistence.

pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod run;

pub use checkpoint::{checkpoint_read, checkpoint_write};
pub use config::{
    AbcParams, ParticleLayout, ParticlesConfig, RandomParams, RunConfig, Scenario, ThetaConfig,
};
pub use diagnostics::{read_records_csv, DiagnosticsRecord, CSV_HEADER};
pub use run::{
    analyze, extendability_summary, init_state, resume, run, sweep_epsilon, Claim, ClaimsLedger,
    ClaimStatus, RunOutcome, RunStatus,
};
