#![allow(dead_code)]

use fractal_spectra::linalg::CsrMatrix;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; a.ncols()]; a.nrows()];
    for (i, j, v) in a.triplets() {
        d[i][j] += v;
    }
    d
}

/// Eliminates every index not in `keep` by plain Gaussian elimination.
pub fn schur_by_elimination(a: &[Vec<f64>], keep: &[usize]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut gone = vec![false; n];
    for p in 0..n {
        if keep.contains(&p) {
            continue;
        }
        let piv = m[p][p];
        for i in 0..n {
            if i == p || gone[i] || m[i][p] == 0.0 {
                continue;
            }
            let f = m[i][p] / piv;
            for j in 0..n {
                m[i][j] -= f * m[p][j];
            }
        }
        gone[p] = true;
    }
    keep.iter().map(|&i| keep.iter().map(|&j| m[i][j]).collect()).collect()
}

pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
}

/// Interval graph eigenvalues `2·4^m (1 − cos(jπ/2^m))`; Neumann for `j = 0..=2^m`,
/// Dirichlet for `j = 1..2^m`.
pub fn interval_eigenvalue(m: usize, j: usize) -> f64 {
    let n = (1u64 << m) as f64;
    2.0 * n * n * (1.0 - (j as f64 * std::f64::consts::PI / n).cos())
}

/// Vertex count from counting identifications: `N_0 N^m − b (N^m − 1)/(N − 1)`.
pub fn counted_vertices(n: usize, n0: usize, b: usize, m: usize) -> usize {
    let nm = n.pow(m as u32);
    n0 * nm - b * (nm - 1) / (n - 1)
}
