//! Quantum Fisher information of Gaussian probe states sent through
//! Bogoliubov channels, with a perturbative evaluation in a small channel
//! parameter and an accelerated-cavity channel model.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub type C64 = num_complex::Complex64;

pub mod bogoliubov;
pub mod cavity;
pub mod error;
pub mod fidelity;
pub mod gaussian;
pub mod qfi;
pub mod quadrature;

pub use error::{Error, Result};
