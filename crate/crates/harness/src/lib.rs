//! Configuration-driven experiments over the hetlearn estimators: sweeps,
//! log-log rate fits, CSV tables and run manifests.

pub mod check;
pub mod config;
pub mod error;
pub mod fit;
pub mod manifest;
pub mod sweep;
pub mod table;

pub use check::{check_table, CheckOutcome};
pub use config::{read_config, ClassSpec, Experiment, SweepConfig};
pub use error::{HarnessError, Result};
pub use fit::{fit_rate_exponent, RateFit};
pub use manifest::Manifest;
pub use sweep::{run_complexity_sweep, run_heterogeneity_sweep, run_hyperplane_sweep, run_rate_sweep, run_sweep};
pub use table::{emit_csv, read_csv, Cell, Table};
