//! Stabilizer simulation of gauge-Higgs measurement-only circuits.

pub mod analysis;
pub mod circuits;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod gf2;
pub mod harness;
pub mod lattice;
pub mod mbqc;
pub mod par;
pub mod pauli;
pub mod percolation;
#[cfg(feature = "plot")]
pub mod plot;
pub mod rng;
pub mod tableau;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString};
pub use tableau::{MeasureOutcome, Membership, OutcomePolicy, Tableau};
