//! A desk-scale numerical laboratory for elastodynamics under oscillating
//! skew-symmetric (Lorentz-type) magnetic fields.
//!
//! The crate simulates the oscillating problem, computes its homogenized
//! limits (increased effective mass, nonlocal force term) and verifies the
//! checkable estimates: corrector convergence, cone-localized energy bounds,
//! penalized construction of the nonlocal operator, and kernel cone support.
//!
//! Organization:
//! - [`fem`]: unit-square meshes, P1 elasticity assembly, sparse solvers;
//! - [`fields`]: the oscillating skew field families and their closed-form limits;
//! - [`dynamics`]: energy-exact implicit-midpoint time integration;
//! - [`homogenize`]: correctors, effective mass (three provenances), homogenized solvers;
//! - [`limits`]: weak-limit estimation, compactness-default measure, light cones;
//! - [`nonlocal`]: penalized runs, the nonlocal operator and its binned kernel;
//! - [`harness`]: experiment configs, presets, sweeps, reports and the CLI.
//!
//! Most capabilities have a runnable example under `examples/`; the
//! `magnetoelast` binary exposes the same pipelines as subcommands.

pub mod coarse;
pub mod dynamics;
pub mod fem;
pub mod fields;
pub mod harness;
pub mod homogenize;
pub mod la;
pub mod limits;
pub mod nonlocal;
