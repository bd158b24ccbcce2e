//! Small dense linear-algebra checks shared by the model and solver code.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;

/// Largest absolute entry; 0.0 for empty matrices.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Rejects matrices that are not symmetric up to a scale-relative slack.
pub fn check_symmetric(name: &'static str, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = max_abs(m).max(1.0);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol::PSD_SLACK * scale {
                return Err(Error::InvalidArgument(format!("{name} is not symmetric")));
            }
        }
    }
    Ok(())
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        // 0x0 matrices are vacuously definite.
        return f64::INFINITY;
    }
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Symmetric positive semidefinite check via the full symmetric
/// eigendecomposition (the matrices involved are small).
pub fn check_psd(name: &'static str, m: &DMatrix<f64>) -> Result<()> {
    check_symmetric(name, m)?;
    let scale = max_abs(m).max(1.0);
    let min_eig = min_eigenvalue(m);
    if min_eig < -tol::PSD_SLACK * scale {
        return Err(Error::NotPsd { name, min_eig });
    }
    Ok(())
}

/// Symmetric positive definite check; the smallest eigenvalue must clear the
/// slack with margin rather than merely touching zero.
pub fn check_pd(name: &'static str, m: &DMatrix<f64>) -> Result<()> {
    check_symmetric(name, m)?;
    let scale = max_abs(m).max(1.0);
    let min_eig = min_eigenvalue(m);
    if min_eig <= tol::PSD_SLACK * scale {
        return Err(Error::NotPd { name, min_eig });
    }
    Ok(())
}

/// Spectral radius of a (generally nonsymmetric) real matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    #[test]
    fn psd_accepts_gram_matrices() {
        let g = dmatrix![1.0, 2.0; 0.5, -1.0; 0.0, 3.0];
        let gram = g.transpose() * &g;
        assert!(check_psd("gram", &gram).is_ok());
    }

    #[test]
    fn pd_rejects_singular_matrices() {
        let singular = dmatrix![1.0, 1.0; 1.0, 1.0]; // eigenvalues 2, 0
        assert!(check_psd("s", &singular).is_ok());
        assert!(matches!(check_pd("s", &singular), Err(Error::NotPd { .. })));
    }

    #[test]
    fn asymmetry_is_rejected() {
        let m = dmatrix![1.0, 0.5; -0.5, 1.0];
        assert!(check_psd("m", &m).is_err());
    }

    #[test]
    fn spectral_radius_handles_complex_spectra() {
        // Rotation by 90 degrees scaled by 0.8: eigenvalues +-0.8i.
        let m = dmatrix![0.0, -0.8; 0.8, 0.0];
        assert_abs_diff_eq!(spectral_radius(&m), 0.8, epsilon = 1e-12);
        let tri = dmatrix![0.5, 100.0; 0.0, 0.25];
        assert_abs_diff_eq!(spectral_radius(&tri), 0.5, epsilon = 1e-12);
    }
}
