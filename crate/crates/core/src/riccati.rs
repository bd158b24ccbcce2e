//! Centralized infinite-horizon LQG reference via the discrete algebraic
//! Riccati equation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Stabilizing DARE solution `P` with its gain `K` (for `u = -K x`),
/// along with how the fixed-point iteration terminated.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    pub p: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves `P = Q + A'PA - A'PB (R + B'PB)^-1 B'PA` by value iteration from
/// `P = Q`, stopping once successive iterates agree to `tol` in max-abs.
///
/// Converges linearly for stabilizable `(A, B)` with detectable `(A, Q)`;
/// unstabilizable systems blow up or stall and are reported as divergence.
pub fn dare_solve(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<RiccatiSolution> {
    let n = a.nrows();
    if a.ncols() != n
        || b.nrows() != n
        || q.shape() != (n, n)
        || r.shape() != (b.ncols(), b.ncols())
    {
        return Err(Error::DimensionMismatch(format!(
            "dare with A {}x{}, B {}x{}, Q {}x{}, R {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    if max_iter == 0 || tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "dare needs max_iter >= 1 and tol > 0".into(),
        ));
    }
    linalg::check_psd("Q", q)?;
    linalg::check_pd("R", r)?;

    let gain = |p: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let g = r + b.transpose() * p * b;
        let chol = g.clone().cholesky().ok_or_else(|| {
            Error::Numerical("R + B'PB lost positive definiteness in dare iteration".into())
        })?;
        Ok(chol.solve(&(b.transpose() * p * a)))
    };

    let mut p = q.clone();
    let mut residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let k = gain(&p)?;
        let mut next = q + a.transpose() * &p * a - (b.transpose() * &p * a).transpose() * &k;
        next = (&next + next.transpose()) * 0.5;
        residual = linalg::max_abs(&(&next - &p));
        p = next;
        if !residual.is_finite() || linalg::max_abs(&p) > 1e100 {
            return Err(Error::RiccatiDiverged {
                iterations: iter,
                residual,
            });
        }
        if residual <= tol {
            let k = gain(&p)?;
            return Ok(RiccatiSolution {
                p,
                k,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::RiccatiDiverged {
        iterations: max_iter,
        residual,
    })
}

/// Stationary per-step cost `trace(P sigma_w)` of the centralized LQG
/// controller under disturbance covariance `sigma_w`.
pub fn lqg_infinite_cost(solution: &RiccatiSolution, sigma_w: &DMatrix<f64>) -> Result<f64> {
    if sigma_w.shape() != solution.p.shape() {
        return Err(Error::DimensionMismatch(format!(
            "sigma_w must be {}x{}, got {}x{}",
            solution.p.nrows(),
            solution.p.ncols(),
            sigma_w.nrows(),
            sigma_w.ncols()
        )));
    }
    linalg::check_psd("sigma_w", sigma_w)?;
    Ok((&solution.p * sigma_w).trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    fn scalar(a: f64, b: f64, q: f64, r: f64) -> Result<RiccatiSolution> {
        dare_solve(
            &dmatrix![a],
            &dmatrix![b],
            &dmatrix![q],
            &dmatrix![r],
            tol::DARE_MAX_ITER,
            tol::DARE_TOL,
        )
    }

    #[test]
    fn scalar_unit_system_reaches_the_golden_ratio() {
        // p = 1 + p - p^2/(1+p) reduces to p^2 - p - 1 = 0.
        let sol = scalar(1.0, 1.0, 1.0, 1.0).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(sol.p[(0, 0)], phi, epsilon = 1e-11);
        assert_abs_diff_eq!(sol.k[(0, 0)], 1.0 / phi, epsilon = 1e-11);
        assert!(sol.residual <= tol::DARE_TOL);
        assert!(sol.iterations < 200);
    }

    #[test]
    fn scalar_solutions_match_the_quadratic_formula() {
        // With b = q = r = 1 the fixed point solves p^2 = 1 + a^2 p.
        for a in [0.0, 0.5, 0.9, 1.5] {
            let sol = scalar(a, 1.0, 1.0, 1.0).unwrap();
            let p = (a * a + (a.powi(4) + 4.0).sqrt()) / 2.0;
            assert_abs_diff_eq!(sol.p[(0, 0)], p, epsilon = 1e-11);
            assert_abs_diff_eq!(sol.k[(0, 0)], a * p / (1.0 + p), epsilon = 1e-11);
        }
    }

    #[test]
    fn zero_dynamics_give_p_equal_q() {
        let a = DMatrix::zeros(3, 3);
        let b = DMatrix::identity(3, 3);
        let q = dmatrix![2.0, 0.5, 0.0; 0.5, 1.0, 0.0; 0.0, 0.0, 3.0];
        let r = DMatrix::identity(3, 3);
        let sol = dare_solve(&a, &b, &q, &r, 100, tol::DARE_TOL).unwrap();
        assert_abs_diff_eq!(sol.p, q, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.k, DMatrix::zeros(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn block_diagonal_systems_decouple() {
        let a = dmatrix![0.5, 0.0; 0.0, 0.9];
        let b = DMatrix::identity(2, 2);
        let q = DMatrix::identity(2, 2);
        let r = DMatrix::identity(2, 2);
        let sol = dare_solve(&a, &b, &q, &r, tol::DARE_MAX_ITER, tol::DARE_TOL).unwrap();
        for (i, a) in [0.5, 0.9].into_iter().enumerate() {
            let p = (a * a + (a * a * a * a + 4.0f64).sqrt()) / 2.0;
            assert_abs_diff_eq!(sol.p[(i, i)], p, epsilon = 1e-11);
        }
        assert_abs_diff_eq!(sol.p[(0, 1)], 0.0, epsilon = 1e-13);
    }

    #[test]
    fn closed_loop_is_stable_for_unstable_stabilizable_plants() {
        let sol = scalar(1.5, 1.0, 1.0, 1.0).unwrap();
        let closed = dmatrix![1.5] - dmatrix![1.0] * &sol.k;
        assert!(crate::linalg::spectral_radius(&closed) < 1.0);
    }

    #[test]
    fn uncontrollable_unstable_mode_diverges() {
        let r = scalar(2.0, 0.0, 1.0, 1.0);
        assert!(matches!(r, Err(Error::RiccatiDiverged { .. })));
    }

    #[test]
    fn infinite_cost_weights_by_covariance() {
        let sol = scalar(0.5, 1.0, 1.0, 1.0).unwrap();
        let cost = lqg_infinite_cost(&sol, &dmatrix![4.0]).unwrap();
        assert_abs_diff_eq!(cost, 4.0 * sol.p[(0, 0)], epsilon = 1e-12);
        assert!(lqg_infinite_cost(&sol, &dmatrix![-1.0]).is_err());
        assert!(lqg_infinite_cost(&sol, &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn input_validation() {
        let ok = dmatrix![1.0];
        assert!(dare_solve(&ok, &ok, &ok, &dmatrix![0.0], 10, 1e-9).is_err()); // R not PD
        assert!(dare_solve(&ok, &ok, &dmatrix![-1.0], &ok, 10, 1e-9).is_err()); // Q not PSD
        assert!(dare_solve(&ok, &ok, &ok, &ok, 0, 1e-9).is_err());
        assert!(dare_solve(&ok, &ok, &ok, &ok, 10, 0.0).is_err());
        assert!(dare_solve(&ok, &DMatrix::zeros(2, 1), &ok, &ok, 10, 1e-9).is_err());
    }
}
