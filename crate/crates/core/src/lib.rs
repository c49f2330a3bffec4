//! J-matrix solver for bound states and resonances of screened Coulomb
//! potentials in a Laguerre basis.
//!
//! The pipeline is: a [`basis::BasisSpec`] fixes the Laguerre basis, a
//! [`potentials::PotentialModel`] fixes the interaction, the
//! [`hamiltonian`] module assembles the finite matrices, the
//! [`kinematics`] module supplies the analytic outer-region solutions, and
//! [`spectra`] turns both into S-matrix values and poles.

// `!(x > 0.0)` style guards are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod hamiltonian;
pub mod kernels;
pub mod kinematics;
pub mod potentials;
pub mod spectra;
pub mod tables;

pub use error::{Error, Result};
pub use num_complex::Complex64;
