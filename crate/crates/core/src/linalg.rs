//! Sparse storage and the eigen/linear solvers used throughout the crate.
//!
//! Assembly happens in a small CSR type ([`CsrMatrix`]); dense factorizations and
//! sparse Cholesky are delegated to `faer`.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    ///
    /// Duplicates are summed in input order, so the result is bit-reproducible for a
    /// fixed triplet sequence.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let slot = next[i];
            cols[slot] = j;
            vals[slot] = v;
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..nrows {
            let (lo, hi) = (counts[i], counts[i + 1]);
            order.clear();
            order.extend(lo..hi);
            // stable sort keeps the summation order of duplicates deterministic
            order.sort_by_key(|&s| cols[s]);
            let mut last: Option<usize> = None;
            for &s in &order {
                if last == Some(cols[s]) {
                    *values.last_mut().unwrap() += vals[s];
                } else {
                    indices.push(cols[s]);
                    values.push(vals[s]);
                    last = Some(cols[s]);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over the stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    /// Iterates over all stored entries as `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// Computes `selfᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut out = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (j, v) in self.row(i) {
                    out[j] += v * xi;
                }
            }
        }
        out
    }

    /// Bilinear form `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        (0..self.nrows)
            .map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>())
            .sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        CsrMatrix::from_triplets(self.ncols, self.nrows, &t)
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: other.ncols, indptr, indices, values }
    }

    /// `self + alpha · other`.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, &t)
    }

    pub fn scale_rows(&self, s: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.values[p] *= s[i];
            }
        }
        out
    }

    /// Principal or rectangular submatrix picking `rows` × `cols` (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (p, &c) in cols.iter().enumerate() {
            col_pos[c] = p;
        }
        let mut t = Vec::new();
        for (p, &r) in rows.iter().enumerate() {
            for (j, v) in self.row(r) {
                if col_pos[j] != usize::MAX {
                    t.push((p, col_pos[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &t)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let mut m = Mat::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// Symmetry defect `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets().fold(0.0, |m, (i, j, v)| m.max((v - self.get(j, i)).abs()))
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| Error::Numerical(format!("sparse conversion: {e:?}")))
    }
}

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct SparseCholesky {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols());
        let llt = a
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Numerical(format!("sparse Cholesky failed: {e:?}")))?;
        Ok(SparseCholesky { n: a.nrows(), llt })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.llt.solve_in_place(rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }

    pub fn solve_mat(&self, b: &Mat<f64>) -> Mat<f64> {
        let mut rhs = b.clone();
        self.llt.solve_in_place(rhs.as_mut());
        rhs
    }
}

/// Symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let e = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let vals = e.S().column_vector().iter().copied().collect();
    Ok((vals, e.U().to_owned()))
}

pub fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigenvalue computation failed: {e:?}")))
}

/// Lower Cholesky factor of an SPD matrix, `None` when the matrix is not positive definite.
pub fn cholesky_lower(b: &Mat<f64>) -> Option<Mat<f64>> {
    b.llt(Side::Lower).ok().map(|l| l.L().to_owned())
}

/// Solves `A x = λ B x` for symmetric `A` and SPD `B`; eigenvectors are `B`-orthonormal.
pub fn generalized_sym_eigen(a: &Mat<f64>, b: &Mat<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<Mat<f64>>)> {
    let l = cholesky_lower(b).ok_or(Error::MassNotPD)?;
    // S = L⁻¹ A L⁻ᵀ
    let mut x = a.clone();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut s = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(s.as_mut());
    let s = symmetrize(&s);
    if !want_vectors {
        return Ok((sym_eigenvalues(&s)?, None));
    }
    let (vals, mut y) = sym_eigen(&s)?;
    l.transpose().solve_upper_triangular_in_place(y.as_mut());
    Ok((vals, Some(y)))
}

/// Largest eigenvalue of the symmetric-definite pencil `(A, B)`, computed densely.
pub fn top_generalized_eigenvalue_dense(a: &Mat<f64>, b: &Mat<f64>) -> Result<f64> {
    let (vals, _) = generalized_sym_eigen(a, b, false)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

pub fn symmetrize(a: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Dense LU solve of `A x = b`.
pub fn solve_dense(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

pub fn singular_values(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::Numerical(format!("SVD failed: {e:?}")))
}

/// Frobenius norm.
pub fn frobenius(a: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

/// Largest eigenvalue of `A x = θ B x` with `A` symmetric positive semidefinite (given
/// as an operator) and `B` sparse SPD, via Lanczos in the `B` inner product with full
/// reorthogonalization.
///
/// Ritz values increase monotonically towards the true value, so the result never
/// overshoots the supremum (up to rounding).
pub fn top_generalized_eigenvalue<F>(apply_a: F, b: &CsrMatrix, seed: u64, rel_tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let chol = SparseCholesky::new(b)?;
    let mut rng = seeded_rng(seed);
    let mut q = random_vector(&mut rng, n);
    let bq = b.mul_vec(&q);
    let nb = dot(&q, &bq).sqrt();
    q.iter_mut().for_each(|x| *x /= nb);

    let max_steps = n.min(400);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut bbasis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut theta_prev = f64::NAN;
    let mut theta = 0.0;

    for step in 0..max_steps {
        let bq = b.mul_vec(&q);
        let z = apply_a(&q);
        let alpha = dot(&q, &z);
        let mut w = chol.solve(&z);
        basis.push(q.clone());
        bbasis.push(bq);
        alphas.push(alpha);
        // two passes of Gram–Schmidt in the B inner product
        for _ in 0..2 {
            for (v, bv) in basis.iter().zip(&bbasis) {
                let c = dot(&w, bv);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let beta = dot(&w, &b.mul_vec(&w)).max(0.0).sqrt();

        let k = alphas.len();
        let t = Mat::from_fn(k, k, |i, j| {
            if i == j {
                alphas[i]
            } else if i == j + 1 {
                betas[j]
            } else if j == i + 1 {
                betas[i]
            } else {
                0.0
            }
        });
        let (vals, vecs) = sym_eigen(&t)?;
        theta = *vals.last().unwrap();
        let resid = (beta * vecs[(k - 1, k - 1)]).abs();
        let scale = theta.abs().max(f64::MIN_POSITIVE);
        let settled = (theta - theta_prev).abs() <= rel_tol * scale;
        if beta <= 1e-14 * scale || resid <= rel_tol * scale || (step > 8 && settled && resid <= 1e-6 * scale) {
            return Ok(theta);
        }
        theta_prev = theta;
        betas.push(beta);
        q = w.iter().map(|x| x / beta).collect();
    }
    Ok(theta)
}

/// Result of a partial symmetric eigen-solve with a diagonal mass.
pub struct PartialEigen {
    pub values: Vec<f64>,
    /// Columns are mass-orthonormal eigenvectors.
    pub vectors: Mat<f64>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Smallest `k` eigenpairs of `C v = λ diag(mass) v` by shift-invert subspace iteration.
///
/// `C` must be symmetric positive semidefinite. The shift `σ < 0` keeps `C - σ D`
/// positive definite so a sparse Cholesky factorization can be reused every step.
/// A block larger than `k` captures eigenvalue multiplicities, which Lanczos with a
/// single starting vector would miss.
pub fn smallest_eigen_shift_invert(
    c: &CsrMatrix,
    mass: &[f64],
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<PartialEigen> {
    let n = c.nrows();
    assert_eq!(mass.len(), n);
    assert!(k >= 1 && k <= n);
    let sq: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();

    // Gershgorin bound on the spectrum of D^{-1/2} C D^{-1/2}
    let lam_max = (0..n)
        .map(|i| c.row(i).map(|(_, v)| v.abs()).sum::<f64>() / mass[i])
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let shift = 1e-6 * lam_max;
    let shifted = c.add_scaled(&CsrMatrix::from_diagonal(mass), shift);
    let chol = SparseCholesky::new(&shifted)?;

    let p = n.min((2 * k).max(k + 10));
    let mut rng = seeded_rng(seed);
    // y-coordinates: y = D^{1/2} x, operator (S + s I)^{-1} = D^{1/2} K^{-1} D^{1/2}
    let mut y = Mat::from_fn(n, p, |_, _| rng.random::<f64>() - 0.5);
    orthonormalize(&mut y);

    let apply_s = |v: &Mat<f64>| -> Mat<f64> {
        let mut out = Mat::zeros(n, v.ncols());
        for col in 0..v.ncols() {
            let x: Vec<f64> = (0..n).map(|i| v[(i, col)] / sq[i]).collect();
            let cx = c.mul_vec(&x);
            for i in 0..n {
                out[(i, col)] = cx[i] / sq[i];
            }
        }
        out
    };

    let max_iter = 1000;
    let mut last_resid = f64::INFINITY;
    for iter in 1..=max_iter {
        let mut rhs = Mat::from_fn(n, p, |i, j| y[(i, j)] * sq[i]);
        rhs = chol.solve_mat(&rhs);
        let mut z = Mat::from_fn(n, p, |i, j| rhs[(i, j)] * sq[i]);
        orthonormalize(&mut z);

        // Rayleigh–Ritz on span(z)
        let sz = apply_s(&z);
        let proj = symmetrize(&(z.transpose() * &sz));
        let (theta, w) = sym_eigen(&proj)?;
        y = &z * &w;
        let sy = &sz * &w;

        let mut resids = Vec::with_capacity(k);
        for j in 0..k {
            // ‖C x − λ D x‖ / ‖x‖ with x = D^{-1/2} y
            let mut r2 = 0.0;
            let mut x2 = 0.0;
            for i in 0..n {
                let r = (sy[(i, j)] - theta[j] * y[(i, j)]) * sq[i];
                r2 += r * r;
                let x = y[(i, j)] / sq[i];
                x2 += x * x;
            }
            resids.push((r2 / x2).sqrt());
        }
        last_resid = resids.iter().cloned().fold(0.0, f64::max);
        if last_resid <= tol {
            let vectors = Mat::from_fn(n, k, |i, j| y[(i, j)] / sq[i]);
            return Ok(PartialEigen {
                values: theta[..k].to_vec(),
                vectors,
                residuals: resids,
                iterations: iter,
            });
        }
    }
    Err(Error::ConvergenceFailure { residual: last_resid, tolerance: tol })
}

/// In-place orthonormalization of the columns (modified Gram–Schmidt, two passes).
fn orthonormalize(y: &mut Mat<f64>) {
    let (n, p) = (y.nrows(), y.ncols());
    for j in 0..p {
        for _ in 0..2 {
            for i in 0..j {
                let mut c = 0.0;
                for r in 0..n {
                    c += y[(r, i)] * y[(r, j)];
                }
                for r in 0..n {
                    let v = y[(r, i)];
                    y[(r, j)] -= c * v;
                }
            }
        }
        let mut nrm = 0.0;
        for r in 0..n {
            nrm += y[(r, j)] * y[(r, j)];
        }
        let nrm = nrm.sqrt();
        if nrm > 0.0 {
            for r in 0..n {
                y[(r, j)] /= nrm;
            }
        }
    }
}
