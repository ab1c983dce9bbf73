use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative pivot floor: a pivot at or below `PIVOT_TOL * max diagonal`
/// marks the matrix as singular.
pub(crate) const PIVOT_TOL: f64 = 1e-12;

/// Lower Cholesky factor of a symmetric matrix (only the lower triangle is
/// read). Reports the first pivot that falls below the floor.
pub(crate) fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = m.nrows();
    debug_assert_eq!(p, m.ncols());
    let max_diag = (0..p).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let floor = PIVOT_TOL * max_diag;
    let mut l = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::SingularCovariance { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..p {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor,
/// symmetrized to remove rounding asymmetry.
pub(crate) fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let l = cholesky_lower(m)?;
    let p = m.nrows();
    let l_inv = l
        .solve_lower_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::SingularCovariance { pivot: 0, value: 0.0 })?;
    let inv = l_inv.transpose() * &l_inv;
    Ok((&inv + inv.transpose()) * 0.5)
}
