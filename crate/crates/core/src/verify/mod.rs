//! The estimate harness. Every inequality becomes a sweep whose points
//! record a measured quantity against its bound; calibrated constants are
//! fitted on even-numbered probes and frozen before the odd-numbered
//! holdout probes are measured.
//!
//! Operator norms are measured from below (largest ratio over probe
//! families), except where the induced sup-norm is computed exactly column
//! by column.

pub mod interpolation;
pub mod minimum;
pub mod probes;
pub mod report;
pub mod resolvent;
pub mod semigroup;
pub mod sector;

pub use report::{EstimateReport, ReportPoint};

/// Slack on holdout checks against calibrated constants.
pub const HOLDOUT_SLACK: f64 = 1.25;
