//! Sweeps, validation suites and file formats on top of `fieldqfi_core`.

pub mod compare;
pub mod config;
pub mod error;
pub mod io;
pub mod sweep;
pub mod validate;

pub use error::{Error, Result};
pub use fieldqfi_core as core_lib;
