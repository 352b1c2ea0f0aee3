//! Variational search for low-entanglement eigenvector approximations of a
//! black-box unitary, simulated on an exact dense statevector.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the common double-precision instantiations.

// NaN must fail validation, so checks are written as `!(x <= tol)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod simulator;
pub mod tensor;
pub mod vqa;

pub use ansatz::{AnsatzCircuit, ParameterVector};
pub use error::{Error, Result};
pub use oracle::{BlackBoxUnitary, SatInstance};
pub use scalar::{Real, C};
pub use simulator::{DenseUnitary, QubitWindow, Statevector};
pub use tensor::MpsState;
pub use vqa::{run_sweep, SweepConfig, SweepResult};

pub type C64 = C<f64>;
pub type Statevector64 = Statevector<f64>;
pub type Statevector32 = Statevector<f32>;
pub type MpsState64 = MpsState<f64>;
pub type BlackBox64 = BlackBoxUnitary<f64>;
pub type Parameters64 = ParameterVector<f64>;
