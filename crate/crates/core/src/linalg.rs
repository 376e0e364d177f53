//! Complex dense linear algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Thin singular value decomposition `A = U diag(sigma) V^H`.
///
/// Singular values are sorted in decreasing order. Each pair of singular
/// vectors is rotated by a common phase so that the largest-magnitude entry
/// of the right singular vector is real and positive, which makes results
/// reproducible independent of the underlying bidiagonalization.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

impl SvdFactors {
    pub fn thin(a: &CMat) -> SvdFactors {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return SvdFactors {
                u: CMat::zeros(rows, 0),
                sigma: Vec::new(),
                v: CMat::zeros(cols, 0),
            };
        }
        let svd = nalgebra::SVD::new(a.clone(), true, true);
        let mut u = svd.u.expect("u requested");
        let mut v = svd.v_t.expect("v_t requested").adjoint();
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();

        for j in 0..sigma.len() {
            let mut pivot = C64::new(0.0, 0.0);
            let mut best = -1.0;
            for z in v.column(j).iter() {
                let m = z.norm();
                if m > best {
                    best = m;
                    pivot = *z;
                }
            }
            if best > 0.0 {
                // v_j <- v_j * conj(p)/|p| makes the pivot real positive
                let rot = pivot.conj() / best;
                for z in v.column_mut(j).iter_mut() {
                    *z *= rot;
                }
                for z in u.column_mut(j).iter_mut() {
                    *z *= rot;
                }
            }
        }
        SvdFactors { u, sigma, v }
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.sigma.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > rel_tol * top).count()
    }

    pub fn reconstruct(&self) -> CMat {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            for z in us.column_mut(j).iter_mut() {
                *z *= *s;
            }
        }
        us * self.v.adjoint()
    }
}

/// Orthonormal basis (as columns) of the null space of `a`.
///
/// The numerical rank is decided with a relative tolerance on the singular
/// values. The complement is recovered from the SVD of the orthogonal
/// projector `I - V_r V_r^H`, whose leading left singular vectors span it.
pub fn null_space(a: &CMat, rel_tol: f64) -> CMat {
    let n = a.ncols();
    if a.nrows() == 0 {
        return CMat::identity(n, n);
    }
    let svd = SvdFactors::thin(a);
    let rank = svd.rank(rel_tol);
    let dim = n - rank;
    if dim == 0 {
        return CMat::zeros(n, 0);
    }
    let vr = svd.v.columns(0, rank).into_owned();
    let projector = CMat::identity(n, n) - &vr * vr.adjoint();
    let proj_svd = SvdFactors::thin(&projector);
    proj_svd.u.columns(0, dim).into_owned()
}

pub fn frobenius_sq(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `‖A^H A − I‖_max`, the deviation from orthonormal columns.
pub fn column_orthonormality_error(a: &CMat) -> f64 {
    let g = a.adjoint() * a;
    max_abs_diff(&g, &CMat::identity(g.nrows(), g.ncols()))
}

/// `‖A A^H − I‖_max`, the deviation from orthonormal rows.
pub fn row_orthonormality_error(a: &CMat) -> f64 {
    let g = a * a.adjoint();
    max_abs_diff(&g, &CMat::identity(g.nrows(), g.ncols()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `log2 det(A)` for a Hermitian positive definite matrix via Cholesky.
/// Returns `None` when the factorization fails.
pub fn log2_det_hpd(a: &CMat) -> Option<f64> {
    let chol = nalgebra::Cholesky::new(a.clone())?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        let d = l[(i, i)].re;
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        acc += d.log2();
    }
    Some(2.0 * acc)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}
