//! Spectral analysis and sampling for q-Dirac systems on a geometric lattice.

pub mod cli;
pub mod dirac;
pub mod dual;
pub mod error;
pub mod funcspec;
pub mod presets;
pub mod qcore;
pub mod qtrig;
pub mod sampling;
pub mod spectrum;
pub mod sum;

pub use error::{Error, Result};
