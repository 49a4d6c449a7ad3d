//! Fiberization of signal spaces on finite abelian groups.
//!
//! Concrete, finite-dimensional realizations of shift-invariant subspaces,
//! range functions, and the operators that preserve them, for an ambient
//! group `R = Z_{N1} x ... x Z_{Nd}`, a lattice of shifts, and a group of
//! dilating automorphisms. Every object is a finite matrix and every
//! structural claim is checkable by exhaustive computation.

pub mod automorphism;
pub mod cli;
pub mod error;
pub mod fiber;
pub mod group;
pub mod lattice;
pub mod linalg;
pub mod sampling;
pub mod spaces;
pub mod tolerances;

pub use automorphism::{automorphism_group_units, generate_group, Automorphism};
pub use error::{Error, Result};
pub use fiber::{FiberedSignal, Signal};
pub use group::{pairing, pairing_is_trivial, pairing_phase, FiniteAbelianGroup, GroupElement, Side};
pub use lattice::Lattice;
pub use spaces::{RangeFunction, Subspace};
