//! Exact transition probabilities of identical particles in linear
//! multimode scattering, and the suppression laws that follow from
//! permutation symmetries of the input state.
//!
//! ```
//! use interference::fock::{ModeOccupation, ParticleType};
//! use interference::suppression::verdict_table;
//! use interference::unitaries::{build_unitary, UnitarySpec};
//!
//! let spec = UnitarySpec::new("(1 2 3)(4 5 6)(7 8)".parse().unwrap()).with_rotation_seed(1);
//! let u = build_unitary(&spec).unwrap();
//! let r = ModeOccupation::new(vec![1, 1, 1, 0, 0, 0, 1, 1]);
//! let rows = verdict_table(&u, &r, ParticleType::Boson).unwrap();
//! assert_eq!(rows.len(), 792);
//! for v in rows.iter().filter(|v| v.law_suppressed_boson) {
//!     assert!(v.p_boson.unwrap() < 1e-20);
//! }
//! ```

pub mod error;
pub mod experiments;
pub mod fock;
pub mod numerics;
pub mod permutations;
pub mod scattering;
pub mod suppression;
pub mod unitaries;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/permutations.md")]
    mod permutations {}
    #[doc = include_str!("../../../book/src/probabilities.md")]
    mod probabilities {}
    #[doc = include_str!("../../../book/src/unitaries.md")]
    mod unitaries {}
    #[doc = include_str!("../../../book/src/suppression.md")]
    mod suppression {}
    #[doc = include_str!("../../../book/src/fourier.md")]
    mod fourier {}
    #[doc = include_str!("../../../book/src/robustness.md")]
    mod robustness {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
