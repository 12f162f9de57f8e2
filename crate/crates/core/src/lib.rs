//! Simulation kernels for Majorana zero-mode braiding with projective
//! parity measurements.
//!
//! The crate is `no_std` (it needs `alloc`). It contains:
//!
//! - [`monomial`], [`stabilizer`], [`logical`]: symbolic Majorana algebra and a
//!   stabilizer tracker for braid/projection sequences;
//! - [`fock`]: a brute-force many-body oracle on small Fock spaces;
//! - [`bdg`], [`device`]: Kitaev wire networks, keyboard-style parameter
//!   schedules and their Bogoliubov–de Gennes matrices;
//! - [`evolution`]: time-dependent BdG propagation and Bogoliubov matrices;
//! - [`pfaffian`], [`bloch_messiah`], [`overlap`]: Gaussian-state overlaps;
//! - [`protocol`]: transition matrices with time-evolved projectors.
//!
//! Units are dimensionless: ħ = 1, energies in units of the hopping.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bdg;
pub mod bloch_messiah;
pub mod device;
mod error;
pub mod evolution;
pub mod fock;
pub mod linalg;
pub mod logical;
pub mod monomial;
pub mod overlap;
pub mod pfaffian;
pub mod protocol;
pub mod stabilizer;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
pub use monomial::{MajoranaMonomial, Phase};
