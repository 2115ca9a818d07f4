//! Nonnegative Z-eigenpairs of nonnegative tensors.
//!
//! For a tensor `A` of order `m` and dimension `n`, a Z₁-eigenpair is a
//! pair `(x, λ)` with `A x^{m−1} = λ x` and `‖x‖₁ = 1`. This crate provides
//! the multilinear kernels ([`tensor`]), the dense bordered-system solver
//! ([`linalg`]), four Newton-type iterations ([`solvers`]), experiment
//! helpers ([`harness`]) and the `zeig` command-line front end ([`cli`]).
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.
//!
//! ```
//! use zeig::{solvers, Tensor64, SolverConfig64};
//!
//! let a = Tensor64::new(4, 2, vec![
//!     (vec![1, 1, 1, 1], 1.1),
//!     (vec![2, 2, 2, 2], 1.2),
//!     (vec![1, 1, 1, 2], 0.25),
//!     (vec![1, 2, 2, 2], 0.25),
//! ]).unwrap();
//! let report = solvers::run_mpni(&a, &[0.2, 0.8], &SolverConfig64::default()).unwrap();
//! assert!(report.converged());
//! assert!((report.iterate.lambda - 0.7923).abs() < 1e-4);
//! ```

// `!(a >= b)` is used on purpose so that NaN lands on the failure side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod harness;
pub mod linalg;
pub mod report;
pub mod scalar;
pub mod solvers;
pub mod tensor;

pub use scalar::Scalar;
pub use solvers::{Method, SolveReport, SolverConfig, Status};
pub use tensor::{Iterate, Tensor};

pub type Tensor64 = Tensor<f64>;
pub type Tensor32 = Tensor<f32>;
pub type Iterate64 = Iterate<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type SolveReport64 = SolveReport<f64>;
pub type SolveReport32 = SolveReport<f32>;
pub type EigenpairSet64 = harness::EigenpairSet<f64>;
