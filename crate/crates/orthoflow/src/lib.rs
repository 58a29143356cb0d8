//! A desk-scale numerical laboratory for incompressible Euler and
//! Navier-Stokes flow on the periodic box, built to *measure* the invariants
//! that extendability arguments lean on — energy conservation along
//! streamlines, sup-norm behavior, pressure-gradient orthogonality, the
//! zero-vorticity partition, theta transport along vorticity characteristics
//! and Lagrangian flow-map structure — without assuming any of them.
//!
//! The pieces:
//! - [`grid`], [`field`], [`spectral`]: periodic-box field algebra (FFT
//!   transforms, exact spectral derivatives, Leray projection, Poisson
//!   inversion, two-thirds dealiasing).
//! - [`solver`]: rotational-form pseudo-spectral time stepping with a
//!   per-stage viscous integrating factor, plus the Taylor-Green, ABC and
//!   random-solenoidal initializers.
//! - [`pressure`]: pressure recovery and the orthogonality / Lamb-vector /
//!   BKM / pointwise-energy diagnostics.
//! - [`partition`]: the thresholded zero-vorticity set, its boundary shell,
//!   maximum-principle and subharmonicity measurements.
//! - [`theta`]: the auxiliary transport construction, solved along traced
//!   vorticity field lines and globally by regularized least squares.
//! - [`lagrangian`]: particle trajectories, deformation gradients, Cauchy
//!   vorticity transport and material derivatives along paths.
//! - [`experiment`]: config-driven runs with deterministic CSV records,
//!   binary checkpoints, resume, snapshot analysis, threshold sweeps and a
//!   measured claims ledger.
//!
//! Every quantity is reported with the caveat it deserves: the domain is the
//! flat 3-torus, thresholds are recorded, empty regions are absent rather
//! than zero, and claims that fail are published as failing.
//!
//! The `examples/` directory exercises each capability end to end; the
//! `orthoflow` binary drives configured runs (`run`, `resume`, `analyze`,
//! `sweep-epsilon`).

pub mod error;
pub mod experiment;
mod fft;
pub mod field;
pub mod grid;
pub mod interp;
pub mod lagrangian;
pub mod partition;
pub mod pressure;
pub mod solver;
pub mod spectral;
pub mod theta;

pub use error::{Error, Result};
pub use field::{ScalarField, SpectralScalarField, SpectralVectorField, VectorField};
pub use grid::Grid;
