//! Objective evaluation, classical optimization and the rank sweep.

pub mod objective;
pub mod optimize;
pub mod sweep;

pub use objective::{
    certificate, certificate_direct, derive_seed, fd_gradient, log_likelihood, loss_gradient_fd,
    probabilities, Objective, ObjectiveReport, ShotNoise, DEFAULT_CLAMP,
};
pub use optimize::{minimize, Method, Minimum, OptimizerConfig, StopReason, TracePoint};
pub use sweep::{run_sweep, KResult, SweepConfig, SweepResult};
