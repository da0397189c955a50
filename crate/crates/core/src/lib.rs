//! Weight shifting, admissible complexes and favorable resolutions for
//! mod p^m Hilbert modular forms, with exact verification in a monomial toy
//! model, and a checker for pseudo-representations of finite groups.

pub mod complexes;
pub mod error;
pub mod pseudo_rep;
pub mod resolution;
pub mod snf;
pub mod terms;
pub mod toy_model;
pub mod weight_lattice;
pub mod zpm;

pub use error::{Error, Result};
pub use terms::{Term, VanishingTuple};
pub use weight_lattice::{DeltaModel, IndexSet, Params, ThresholdModel, Weight};
pub use zpm::{ModMatrix, Zpm};
