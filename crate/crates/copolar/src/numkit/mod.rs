//! Numerical kernel: finite differences with Richardson extrapolation,
//! symmetric third-order tensors, deterministic cap maximization and
//! Chebyshev tensor interpolation.

pub mod cheb;
pub mod fd;
pub mod optim;
pub mod tensor;

pub use cheb::ChebInterp;
pub use fd::{grad_fd, hess_fd, third_fd, StepPolicy};
pub use optim::{maximize_on_cap, tangent_frame, CapDomain};
pub(crate) use optim::{brent_max, maximize_on_cap_coords};
pub use tensor::SymTensor3;
