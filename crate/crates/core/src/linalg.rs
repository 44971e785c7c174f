//! Small dense helpers shared by the analytic star engines and the Gram
//! analysis: branch-correct Gaussian integrals of complex symmetric forms and
//! Hermitian eigendecompositions.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// det(M)^{1/2} for complex symmetric M with positive-definite real part,
/// on the branch reached continuously from real positive-definite matrices.
///
/// Factor M = L (I + i T) L^T with R = Re(M) = L L^T and T = L^-1 Im(M) L^-T
/// real symmetric. Every eigenvalue factor (1 + i t_j) lies in the right half
/// plane, so the principal square root per factor is the continuous branch.
pub fn sqrt_det_branch(m: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Linalg("sqrt_det_branch needs a square matrix".into()));
    }
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    let chol = nalgebra::Cholesky::new(re).ok_or_else(|| {
        Error::Linalg("real part of quadratic form is not positive definite".into())
    })?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(&im)
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    let t = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Linalg("singular Cholesky factor".into()))?;
    // Symmetrize against rounding before the symmetric eigensolver.
    let t = (&t + t.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(t);

    let mut det_sqrt = Complex64::new(1.0, 0.0);
    for i in 0..n {
        det_sqrt *= Complex64::new(l[(i, i)], 0.0);
    }
    for &tj in eig.eigenvalues.iter() {
        det_sqrt *= Complex64::new(1.0, tj).sqrt();
    }
    Ok(det_sqrt)
}

/// Result of integrating exp(-1/2 z^T M z + w^T z) over R^n.
pub struct GaussianIntegral {
    /// The integral value: (2 pi)^{n/2} det(M)^{-1/2} exp(1/2 w^T M^-1 w).
    pub value: Complex64,
    /// M^-1 w.
    pub m_inv_w: DVector<Complex64>,
    /// M^-1, symmetrized.
    pub m_inv: DMatrix<Complex64>,
}

/// Evaluates the n-dimensional Gaussian integral of exp(-1/2 z^T M z + w^T z)
/// for complex symmetric M with Re(M) positive definite.
pub fn gaussian_integral(m: &DMatrix<Complex64>, w: &DVector<Complex64>) -> Result<GaussianIntegral> {
    let n = m.nrows();
    let det_sqrt = sqrt_det_branch(m)?;
    let m_inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Linalg("quadratic form is numerically singular".into()))?;
    let m_inv = (&m_inv + m_inv.transpose()) * Complex64::new(0.5, 0.0);
    let m_inv_w = &m_inv * w;
    let quad = w.dot(&m_inv_w); // plain bilinear w^T M^-1 w, no conjugation
    let value = Complex64::new(2.0 * std::f64::consts::PI, 0.0).powf(n as f64 / 2.0) / det_sqrt
        * (quad * 0.5).exp();
    Ok(GaussianIntegral { value, m_inv_w, m_inv })
}

/// Eigendecomposition of a complex Hermitian matrix: real eigenvalues in
/// ascending order, unitary eigenvector columns.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

/// Cyclic-sweep Jacobi eigensolver for complex Hermitian matrices.
///
/// Desk-scale matrices only (Gram sizes up to a few hundred); deterministic
/// and free of the sign/ordering ambiguities a generic solver may introduce.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Linalg("hermitian_eigen needs a square matrix".into()));
    }
    let herm_defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)].conj()).norm())
        .fold(0.0f64, f64::max);
    let scale = h.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
    if herm_defect > 1e-8 * scale {
        return Err(Error::Linalg(format!(
            "matrix is not Hermitian: defect {herm_defect:.3e} at scale {scale:.3e}"
        )));
    }
    let mut a = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = DMatrix::<Complex64>::identity(n, n);

    let off = |a: &DMatrix<Complex64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let tol = 1e-14 * scale * (n as f64);
    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                // Unitary 2x2 rotation zeroing a[(p,q)]: diagonalize the
                // Hermitian block [[app, apq], [conj(apq), aqq]].
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let abs_apq = apq.norm();
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_abs = t * c;
                // phase so that the rotation stays unitary with complex apq
                let phase = apq / abs_apq;
                let s = phase * s_abs;

                // A <- J^H A J with J = [[c, s], [-conj(s), c]] acting on (p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s.conj();
                    a[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s.conj() + aqk * c;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s.conj();
                    v[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    let values: Vec<f64> = pairs.iter().map(|&(val, _)| val).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &(_, src)) in pairs.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// Number of eigenvalues with |value| > rel_tol * max(|value|).
pub fn numerical_rank(values: &[f64], rel_tol: f64) -> usize {
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return 0;
    }
    values.iter().filter(|v| v.abs() > rel_tol * max_abs).count()
}
