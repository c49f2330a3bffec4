//! Numerical building blocks: symmetric eigensolvers, a complex
//! eigenvalue routine, special functions and scalar root finders.

mod complex_eigen;
mod generalized;
mod roots;
mod special;
mod tridiag;

pub use complex_eigen::{complex_eigenvalues, hessenberg_reduce};
pub use generalized::{cholesky_lower, generalized_symmetric_eigen, reduce_to_standard, solve_complex};
pub use roots::{brent_root, muller_find_root, BrentReport, RootFindReport};
pub use special::{hyp2f1_terminating, log_gamma_complex};
pub use tridiag::{sym_tridiag_eigen, SymmetricEigen, TridiagonalSymmetric};
