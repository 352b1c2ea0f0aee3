//! Driver for rank-bounded eigenvector sweeps: JSON configuration in, a
//! self-contained JSON run record out, plus an entanglement audit of the
//! resulting matrix product state.

pub mod analyze;
pub mod config;
pub mod error;
pub mod record;
pub mod run;

pub use analyze::{analyze, main_analyze, Analysis};
pub use config::RunConfig;
pub use error::CliError;
pub use record::RunRecord;
pub use run::{execute, main_run, Overrides};
