//! Double and triple tensor integrals over Hermitian tensors under the
//! Einstein product.
//!
//! Tensors of shape `I_1 x ... x I_N x I_1 x ... x I_N` are stored in their
//! square `D x D` unfolding (`D = I_1 * ... * I_N`), so every Einstein-product
//! operation is a matrix operation. On top of that sit:
//!
//! * [`spectral`]: Hermitian eigen-decomposition and spectral calculus `f(A)`.
//! * [`kernels`]: scalar functions, divided differences, two-variable means,
//!   polygamma functions and the `Omega` constants that bound divided differences.
//! * [`dti`]: double/triple tensor integrals, perturbation and quasi-commutator
//!   formulas, Fréchet derivatives.
//! * [`norms`]: unitarily invariant norms (Schatten, Ky Fan, k-trace, operator).
//! * [`ensembles`]: seeded random Hermitian / positive-definite tensors.
//! * [`harness`]: Markov-type tail bounds and their Monte Carlo certification.

pub mod dti;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod norms;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use nalgebra::{Complex, DMatrix};
pub use tensor::{EinsteinTensor, TensorShape, C64};
