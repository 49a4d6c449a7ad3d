//! Default numeric tolerances, graded by how many floating-point stages feed
//! the quantity being compared.

/// Single-transform identities (DFT round trips, unitarity).
pub const TRANSFORM: f64 = 1e-10;

/// Operator-level identities (commutation relations, conjugations).
pub const OPERATOR: f64 = 1e-9;

/// Multi-stage pipelines (extract, conjugate, resynthesize).
pub const PIPELINE: f64 = 1e-8;

/// Relative cutoff below which a pivot counts as numerically zero.
pub const RANK: f64 = 1e-10;
