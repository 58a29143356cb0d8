use thiserror::Error;

/// Errors surfaced by field algebra, time stepping, diagnostics and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid resolution must be a power of two >= 8, got {0}")]
    InvalidResolution(usize),
    #[error("box length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("field has {got} samples, grid holds {expected}")]
    SampleCountMismatch { got: usize, expected: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("Poisson right-hand side has nonzero mean {mean:.3e}; not solvable on the torus")]
    NonZeroMean { mean: f64 },
    #[error("time step {dt:.6e} exceeds CFL bound {bound:.6e}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("numerical blow-up: non-finite velocity at t = {time:.6e} (step {step})")]
    NumericalBlowUp { time: f64, step: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("seed lies in the zero-vorticity set: |omega| = {omega_mag:.3e} <= {min_omega:.3e}")]
    SeedBelowThreshold { omega_mag: f64, min_omega: f64 },
    #[error("characteristic degenerated mid-line: |omega| = {0:.3e} below floor")]
    DegenerateCharacteristic(f64),
    #[error("vorticity field is identically zero")]
    ZeroVorticity,
    #[error("Cauchy vorticity transport is an inviscid identity; run has viscosity {0}")]
    InviscidOnly(f64),
    #[error("need at least {need} time samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
