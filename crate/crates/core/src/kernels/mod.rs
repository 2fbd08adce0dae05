//! Scalar functions, divided differences, mean kernels and `Omega` constants.

mod divided;
mod function;
mod kernel;
mod omega;
mod polygamma;
mod polynomial;

pub use divided::{divided_difference_1, divided_difference_2, DIAGONAL_BAND, SECOND_DIFFERENCE_QUADRATURE_SPREAD};
pub use function::{CustomFunction, Domain, ScalarFunction};
pub use kernel::{mean_kernel, CustomKernel, Kernel, MeanKind};
pub use omega::{identric_mean, omega_polygamma_bound, omega_polynomial_bound, polynomial_divided_difference_sup};
pub use polygamma::{digamma, polygamma, MAX_POLYGAMMA_ORDER};
pub use polynomial::Polynomial;
