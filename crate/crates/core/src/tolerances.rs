//! Tolerance gates shared by every module.
//!
//! Hermiticity and positivity gates are hard errors. The rest are default
//! bounds for checks that callers may tighten.

/// Entrywise `max |M - M†|` allowed for a Hermitian matrix built exactly.
pub const HERMITIAN: f64 = 1e-12;

/// Hermiticity gate for matrices assembled by finite differences.
pub const HERMITIAN_NUMERIC: f64 = 1e-8;

/// Smallest admissible eigenvalue of a density matrix.
pub const POSITIVITY: f64 = -1e-10;

/// Entrywise `max |U U† - 1|` allowed for a unitary.
pub const UNITARY: f64 = 1e-12;

/// Imaginary part tolerated in an expectation value.
pub const REAL_RESIDUAL: f64 = 1e-10;

/// Slices of a composite state with smaller squared norm are dropped from
/// Weinberg sums; their contribution vanishes by (1,1)-homogeneity.
pub const SLICE_NORM_FLOOR: f64 = 1e-14;

/// Radius of the excluded disk around `⟨σ3⟩ = 0` for the singular catalog entry.
pub const SINGULAR_GUARD: f64 = 1e-6;

/// Projective fidelity above which two eigenstates are the same point.
pub const DEDUP_FIDELITY: f64 = 1.0 - 1e-8;

/// Residual `‖∂H/∂ψ̄ − λψ‖` required of an accepted eigenstate.
pub const EIGEN_RESIDUAL: f64 = 1e-9;

/// Relative step of the central-difference Wirtinger derivatives.
pub const WIRTINGER_STEP: f64 = 1e-5;

/// Default per-step norm-drift budget for nonlinear Schrödinger integration.
pub const NORM_DRIFT_PER_STEP: f64 = 1e-6;

/// Conservation check for the density-matrix reduced flows.
pub const REDUCED_FLOW_INVARIANT: f64 = 1e-9;

/// Top-Fock-level population that flags a truncation leak.
pub const TRUNCATION_LEAK: f64 = 1e-8;
