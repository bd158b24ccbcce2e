//! Numerical tolerances used across the toolkit.
//!
//! Every comparison against an absolute threshold goes through a constant
//! defined here, so the contract between synthesis, validation, and the
//! command line tools stays in one place.

/// Max-abs achievability residual accepted for a synthesized or loaded
/// response. Constraints are linear in the response, so a correct solve
/// lands many orders of magnitude below this.
pub const ACHIEVABILITY_TOL: f64 = 1e-8;

/// Least-squares residual of the per-column constraint system above which
/// the support mask is declared infeasible rather than ill-conditioned.
pub const INFEASIBILITY_TOL: f64 = 1e-8;

/// Agreement required between independently computed optimal responses
/// (e.g. the columnwise solver against a joint solve of all columns).
pub const COLUMN_EQUIVALENCE_TOL: f64 = 1e-9;

/// Max-abs error accepted when the controller's internal disturbance
/// estimate is replayed against the disturbances actually applied.
pub const DELTA_RECONSTRUCTION_TOL: f64 = 1e-10;

/// Fixed-point residual at which the Riccati iteration is converged.
pub const DARE_TOL: f64 = 1e-12;

/// Iteration cap for the Riccati fixed-point loop.
pub const DARE_MAX_ITER: usize = 100_000;

/// Relative residual accepted from a KKT solve before the solver falls
/// back to eliminating dependent constraint rows.
pub const KKT_RESIDUAL_TOL: f64 = 1e-9;

/// Eigenvalues of a nominally PSD matrix may dip this far below zero
/// before validation rejects the matrix.
pub const PSD_SLACK: f64 = 1e-10;
