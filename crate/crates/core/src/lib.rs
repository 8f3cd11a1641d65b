//! Exact finite-level models of the compact p-adic rotation groups
//! `SO(2)_{p,kappa}` and `SO(3)_p`, their Haar measure on cylinder sets,
//! Hensel lifting between levels, and the integral form of the measure
//! on `SO(2)`.

pub mod error;
pub mod forms;
pub mod haar;
pub mod hensel;
pub mod integral;
pub mod json;
pub mod matrix;
pub mod padic;
pub mod quotient;
pub mod rotation;
pub mod verify;

pub use error::{Error, Result};
pub use forms::{form_matrix, Descriptor, DiagonalForm, KappaLabel};
pub use matrix::ResidueMatrix;
pub use padic::{find_constants, FormConstants, OddPrime, PadicTower, ResidueInt, ResidueRing};
