//! Experiment harness for UL-to-DL covariance interpolation.
//!
//! Wraps the numerical core in six reproducible experiment scenarios (see
//! [`config::Scenario`]) that emit CSV tables plus machine-checked pass/fail
//! flags, and backs the `covinterp` command-line binary. Column layouts are
//! documented in `FORMATS.md` at the repository root.

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{ExperimentConfig, PsfSpec, ResolvedConfig, Scenario};
pub use report::{fmt_float, ExperimentReport, Flag, Table};
pub use scenarios::run;
