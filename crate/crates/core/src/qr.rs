//! Dense reference solvers: Householder QR least squares and a Cholesky
//! normal-equations solve used to cross-check it.

use crate::error::{check_len, Result, SolveError};
use crate::linalg::{dot_unchecked, DenseMatrix, DenseVector, Scalar};

/// Householder factorization `x = Q·R` in packed LAPACK-style storage.
///
/// Column `j < min(rows, cols)` of `packed` holds `R[0..j, j]` above the
/// diagonal and the reflector tail `v[j+1..]` below it (`v[j] = 1` is
/// implicit). The diagonal of `R` lives in `r_diag`.
#[derive(Debug, Clone)]
pub struct QrFactors<T> {
    pub packed: DenseMatrix<T>,
    pub r_diag: DenseVector<T>,
    tau: Vec<T>,
}

impl<T: Scalar> QrFactors<T> {
    pub fn factor(x: &DenseMatrix<T>) -> Self {
        let m = x.rows();
        let n = x.cols();
        let k = m.min(n);
        let mut packed = x.clone();
        let mut r_diag = DenseVector::zeros(k);
        let mut tau = vec![T::zero(); k];

        for j in 0..k {
            let (head, tail) = packed.data_mut().split_at_mut((j + 1) * m);
            let col = &mut head[j * m + j..];
            let alpha = col[0];
            let tail_sq = dot_unchecked(&col[1..], &col[1..]);
            if tail_sq == T::zero() {
                // Already upper-triangular in this column; H = I.
                r_diag[j] = alpha;
                continue;
            }
            let norm = (alpha * alpha + tail_sq).sqrt();
            let beta = if alpha > T::zero() { -norm } else { norm };
            tau[j] = (beta - alpha) / beta;
            let scale = T::one() / (alpha - beta);
            for v in col[1..].iter_mut() {
                *v = *v * scale;
            }
            col[0] = T::one();
            r_diag[j] = beta;

            let v: &[T] = col;
            for c in tail.chunks_exact_mut(m) {
                apply_reflector(v, tau[j], &mut c[j..]);
            }
            col[0] = beta;
        }

        QrFactors { packed, r_diag, tau }
    }

    /// Overwrites `b` with `Qᵀ·b`.
    pub fn apply_qt(&self, b: &mut [T]) {
        let m = self.packed.rows();
        for (j, &t) in self.tau.iter().enumerate() {
            if t == T::zero() {
                continue;
            }
            let col = self.packed.col(j);
            // Reflector with the implicit unit head restored.
            let w = b[j] + dot_unchecked(&col[j + 1..m], &b[j + 1..]);
            let s = t * w;
            b[j] = b[j] - s;
            for (bi, &vi) in b[j + 1..].iter_mut().zip(&col[j + 1..]) {
                *bi = *bi - s * vi;
            }
        }
    }

    /// Rank tolerance `max(rows, cols) · ε · max|R_jj|`.
    pub fn rank_tolerance(&self) -> T {
        let big = self.r_diag.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let dim = T::from_usize(self.packed.rows().max(self.packed.cols())).unwrap_or_else(T::one);
        dim * T::epsilon() * big
    }
}

fn apply_reflector<T: Scalar>(v: &[T], tau: T, c: &mut [T]) {
    let s = tau * dot_unchecked(v, c);
    for (ci, &vi) in c.iter_mut().zip(v) {
        *ci = *ci - s * vi;
    }
}

/// Least-squares coefficients from [`qr_least_squares`].
#[derive(Debug, Clone)]
pub struct LeastSquaresSolution<T> {
    pub coeffs: DenseVector<T>,
    /// Number of columns with `|R_jj|` above the rank tolerance.
    pub rank: usize,
    /// Some leading column had `|R_jj|` at or below the tolerance and its coefficient was set to zero.
    pub rank_deficient: bool,
}

/// Minimizes `|y − x·a|₂` via Householder QR.
///
/// For wide or rank-deficient inputs this returns the basic solution: every
/// coefficient whose `|R_jj|` falls at or below the rank tolerance, and every
/// column past `rows`, is set to zero.
pub fn qr_least_squares<T: Scalar>(x: &DenseMatrix<T>, y: &[T]) -> Result<LeastSquaresSolution<T>> {
    check_len("qr target length vs matrix rows", x.rows(), y.len())?;
    let qr = QrFactors::factor(x);
    let mut qty = y.to_vec();
    qr.apply_qt(&mut qty);

    let k = qr.r_diag.len();
    let tol = qr.rank_tolerance();
    let mut coeffs = DenseVector::zeros(x.cols());
    let mut rank = 0;
    for j in (0..k).rev() {
        let d = qr.r_diag[j];
        if d.abs() <= tol {
            continue;
        }
        rank += 1;
        let mut acc = qty[j];
        for l in j + 1..k {
            acc = acc - qr.packed.get(j, l) * coeffs[l];
        }
        coeffs[j] = acc / d;
    }
    Ok(LeastSquaresSolution {
        coeffs,
        rank,
        rank_deficient: rank < k,
    })
}

/// Solves `(xᵀx)·a = xᵀy` by Cholesky factorization.
pub fn normal_equations_solve<T: Scalar>(x: &DenseMatrix<T>, y: &[T]) -> Result<DenseVector<T>> {
    check_len("normal equations target vs matrix rows", x.rows(), y.len())?;
    let n = x.cols();
    // Lower triangle of the Gram matrix, column-major n×n.
    let mut g = vec![T::zero(); n * n];
    for j in 0..n {
        for i in j..n {
            g[j * n + i] = dot_unchecked(x.col(i), x.col(j));
        }
    }
    let mut b: Vec<T> = x.columns().map(|c| dot_unchecked(c, y)).collect();

    // In-place Cholesky: G = L·Lᵀ.
    for j in 0..n {
        let mut d = g[j * n + j];
        for p in 0..j {
            d = d - g[p * n + j] * g[p * n + j];
        }
        if !(d > T::zero()) {
            return Err(SolveError::Factorization("Gram matrix is not positive definite"));
        }
        let d = d.sqrt();
        g[j * n + j] = d;
        for i in j + 1..n {
            let mut s = g[j * n + i];
            for p in 0..j {
                s = s - g[p * n + i] * g[p * n + j];
            }
            g[j * n + i] = s / d;
        }
    }

    // L·z = b
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s = s - g[p * n + i] * b[p];
        }
        b[i] = s / g[i * n + i];
    }
    // Lᵀ·a = z
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in i + 1..n {
            s = s - g[i * n + p] * b[p];
        }
        b[i] = s / g[i * n + i];
    }
    Ok(DenseVector::from_vec(b))
}
