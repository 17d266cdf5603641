//! Small dense linear algebra helpers shared by the geometry and f-structure
//! code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Smallest eigenvalue a metric may have before it is rejected.
pub const SPD_EPS: f64 = 1e-10;

/// Bound on `|g g^-1 - I|`, scaled by the condition number.
pub const INVERSE_TOL: f64 = 1e-12;

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &RMat) -> f64 {
    m.iter().map(|c| c.abs()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Validates a real symmetric positive definite matrix and returns its inverse.
pub fn spd_inverse(g: &RMat) -> Result<RMat> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric components"));
    }
    let eig = SymmetricEigen::new(g.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= SPD_EPS {
        return Err(Error::MetricNotSpd {
            min_eigenvalue: min,
        });
    }
    let inv = g
        .clone()
        .cholesky()
        .ok_or(Error::MetricNotSpd {
            min_eigenvalue: min,
        })?
        .inverse();
    let n = g.nrows();
    let residual = max_abs_real(&(g * &inv - RMat::identity(n, n)));
    if residual > INVERSE_TOL * (max / min).max(1.0) {
        return Err(Error::InverseCheckFailed { residual });
    }
    Ok(inv)
}

/// Validates a Hermitian positive definite matrix and returns its inverse.
pub fn hpd_inverse(h: &CMat) -> Result<CMat> {
    if h.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("hermitian metric components"));
    }
    let scale = max_abs(h).max(1.0);
    let asymmetry = max_abs(&(h - h.adjoint()));
    if asymmetry > 1e-12 * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    let herm = (h + h.adjoint()).map(|c| c * 0.5);
    let eig = SymmetricEigen::new(herm.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    if min <= SPD_EPS {
        return Err(Error::MetricNotPd {
            min_eigenvalue: min,
        });
    }
    let inv = herm
        .cholesky()
        .ok_or(Error::MetricNotPd {
            min_eigenvalue: min,
        })?
        .inverse();
    let n = h.nrows();
    let residual = max_abs(&(h * &inv - CMat::identity(n, n)));
    if residual > INVERSE_TOL * (max / min).max(1.0) {
        return Err(Error::InverseCheckFailed { residual });
    }
    Ok(inv)
}

/// Outcome of a pivoted Gram-Schmidt pass.
#[derive(Debug, Clone)]
pub struct GramSchmidt {
    pub basis: Vec<CVec>,
    /// Residual norm of every accepted pivot, in acceptance order.
    pub pivots: Vec<f64>,
    /// Largest residual norm left once the basis was complete.
    pub dropped: f64,
}

/// Pivoted Gram-Schmidt with respect to the sesquilinear product `inner`
/// (linear in the first argument, conjugate-linear in the second).
///
/// At each step the remaining vector with largest residual norm is taken.
/// Pivots at or above `rank_tol` are accepted; pivots below `rank_tol / 10`
/// end the pass; anything in between is reported as ambiguous.
pub fn pivoted_gram_schmidt(
    vectors: &[CVec],
    inner: impl Fn(&CVec, &CVec) -> Complex64,
    rank_tol: f64,
) -> Result<GramSchmidt> {
    let norm = |v: &CVec| inner(v, v).re.max(0.0).sqrt();
    let mut rest: Vec<CVec> = vectors.to_vec();
    let mut basis: Vec<CVec> = Vec::new();
    let mut pivots = Vec::new();
    loop {
        let best = rest
            .iter()
            .enumerate()
            .map(|(k, v)| (k, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((k, pivot)) = best else {
            return Ok(GramSchmidt {
                basis,
                pivots,
                dropped: 0.0,
            });
        };
        if pivot < rank_tol / 10.0 {
            return Ok(GramSchmidt {
                basis,
                pivots,
                dropped: pivot,
            });
        }
        if pivot < rank_tol {
            return Err(Error::RankDeficiencyAmbiguous { pivot, rank_tol });
        }
        let e = rest.swap_remove(k) / Complex64::new(pivot, 0.0);
        // two projection passes keep the basis orthonormal to rounding
        for _ in 0..2 {
            for v in rest.iter_mut() {
                let c = inner(v, &e);
                *v -= &e * c;
            }
        }
        basis.push(e);
        pivots.push(pivot);
    }
}

/// Euclidean orthonormal basis of the column span of `vectors`.
pub fn euclidean_orthonormal(vectors: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &basis {
                let c = e.dotc(&w);
                w -= e * c;
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w / Complex64::new(n, 0.0));
        }
    }
    basis
}

/// Sine of the largest principal angle between two subspaces given by
/// Euclidean orthonormal bases of equal size; `1.0` when the sizes differ.
pub fn max_principal_angle_sine(a: &[CVec], b: &[CVec]) -> f64 {
    if a.len() != b.len() {
        return 1.0;
    }
    if a.is_empty() {
        return 0.0;
    }
    // largest singular value of (I - Q_a Q_a^H) Q_b
    let dim = a[0].len();
    let mut proj = CMat::zeros(dim, b.len());
    for (j, v) in b.iter().enumerate() {
        let mut r = v.clone();
        for e in a {
            let c = e.dotc(v);
            r -= e * c;
        }
        proj.set_column(j, &r);
    }
    proj.svd(false, false).singular_values.max()
}

/// Orthonormal basis of `{x : m x = 0}` from the singular vectors whose
/// singular value is below `tol`.
pub fn null_space(m: &CMat, tol: f64) -> Vec<CVec> {
    let n = m.ncols();
    // pad to square so that the SVD returns a full set of right singular vectors
    let rows = m.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    (0..n)
        .filter(|&k| svd.singular_values[k] < tol)
        .map(|k| v_t.row(k).adjoint())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_inverse_rejects_indefinite() {
        let g = RMat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(spd_inverse(&g), Err(Error::MetricNotSpd { .. })));
        let g = RMat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let inv = spd_inverse(&g).unwrap();
        assert!(max_abs_real(&(&g * inv - RMat::identity(2, 2))) < 1e-15);
    }

    #[test]
    fn hpd_inverse_rejects_non_hermitian() {
        let h = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.0, 0.5),
                Complex64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(hpd_inverse(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn gram_schmidt_drops_parallel_vectors() {
        let v = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let w = &v * Complex64::new(0.0, 2.0);
        let gs = pivoted_gram_schmidt(&[v, w], |a, b| b.dotc(a), 1e-8).unwrap();
        assert_eq!(gs.basis.len(), 1);
        assert!((gs.basis[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_ambiguity_band() {
        let v = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let w = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(5e-9, 0.0)]);
        let r = pivoted_gram_schmidt(&[v, w], |a, b| b.dotc(a), 1e-8);
        assert!(matches!(r, Err(Error::RankDeficiencyAmbiguous { .. })));
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = CMat::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.len(), 1);
        assert!((&m * &ns[0]).norm() < 1e-14);
    }
}
