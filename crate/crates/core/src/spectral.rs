//! Laplacian eigenproblems on `G_m`, eigenvalue brackets and convergence tables.

use std::ops::{Range, RangeInclusive};

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix};
use crate::model::Model;
use crate::quasiuni;

/// Largest problem solved by full dense decomposition.
pub const DENSE_LIMIT: usize = 6000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub k: usize,
    pub want_vectors: bool,
    pub solver: SolverChoice,
    /// Residual target of the iterative solver.
    pub tol: f64,
    pub seed: u64,
}

impl EigenOptions {
    pub fn new(k: usize) -> Self {
        EigenOptions { k, want_vectors: false, solver: SolverChoice::Auto, tol: 1e-9, seed: 0 }
    }

    pub fn vectors(mut self) -> Self {
        self.want_vectors = true;
        self
    }

    pub fn solver(mut self, solver: SolverChoice) -> Self {
        self.solver = solver;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// The `k` smallest eigenpairs of a generalized problem.
#[derive(Clone, Debug)]
pub struct SpectralResult {
    pub generation: usize,
    /// Ascending, repeated according to multiplicity.
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal eigenvectors as columns, when requested.
    pub eigenvectors: Option<Mat<f64>>,
    pub solver: SolverKind,
    /// `‖C v − λ M v‖ / ‖v‖`; empty when vectors were neither requested nor needed.
    pub residuals: Vec<f64>,
}

impl SpectralResult {
    pub fn eigenvector(&self, i: usize) -> Option<Vec<f64>> {
        self.eigenvectors.as_ref().map(|v| (0..v.nrows()).map(|r| v[(r, i)]).collect())
    }

    /// Index ranges of eigenvalue clusters (gap tolerance `1e-7 (1 + λ)`).
    pub fn clusters(&self) -> Vec<Range<usize>> {
        clusters(&self.eigenvalues)
    }
}

pub fn clusters(values: &[f64]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > 1e-7 * (1.0 + values[i - 1].abs()) {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn residual_norms(c: &CsrMatrix, mass: &[f64], vals: &[f64], vecs: &Mat<f64>) -> Vec<f64> {
    (0..vals.len())
        .map(|j| {
            let v: Vec<f64> = (0..vecs.nrows()).map(|i| vecs[(i, j)]).collect();
            let cv = c.mul_vec(&v);
            let r: Vec<f64> = cv.iter().zip(&v).zip(mass).map(|((a, x), m)| a - vals[j] * m * x).collect();
            linalg::norm(&r) / linalg::norm(&v)
        })
        .collect()
}

/// Smallest `k` eigenpairs of `C v = λ diag(mass) v`.
pub fn solve_diagonal_mass(c: &CsrMatrix, mass: &[f64], generation: usize, opts: &EigenOptions) -> Result<SpectralResult> {
    let n = c.nrows();
    if mass.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: mass.len() });
    }
    if opts.k > n {
        return Err(Error::TooManyEigenpairs { requested: opts.k, dimension: n });
    }
    if mass.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::MassNotPD);
    }
    let dense = match opts.solver {
        SolverChoice::Auto => n <= DENSE_LIMIT,
        SolverChoice::Dense if n > DENSE_LIMIT => {
            return Err(Error::DenseLimitExceeded { size: n, limit: DENSE_LIMIT });
        }
        SolverChoice::Dense => true,
        SolverChoice::Iterative => false,
    };
    let k = opts.k;
    if dense {
        let sq: Vec<f64> = mass.iter().map(|m| m.sqrt()).collect();
        let mut s = Mat::<f64>::zeros(n, n);
        for (i, j, v) in c.triplets() {
            s[(i, j)] = v / (sq[i] * sq[j]);
        }
        if !opts.want_vectors {
            let vals = linalg::sym_eigenvalues(&s)?;
            return Ok(SpectralResult {
                generation,
                eigenvalues: vals[..k].to_vec(),
                eigenvectors: None,
                solver: SolverKind::Dense,
                residuals: Vec::new(),
            });
        }
        let (vals, u) = linalg::sym_eigen(&s)?;
        let vecs = Mat::from_fn(n, k, |i, j| u[(i, j)] / sq[i]);
        let vals = vals[..k].to_vec();
        let residuals = residual_norms(c, mass, &vals, &vecs);
        Ok(SpectralResult { generation, eigenvalues: vals, eigenvectors: Some(vecs), solver: SolverKind::Dense, residuals })
    } else {
        let res = linalg::smallest_eigen_shift_invert(c, mass, k, opts.tol, opts.seed)?;
        Ok(SpectralResult {
            generation,
            eigenvalues: res.values,
            eigenvectors: opts.want_vectors.then_some(res.vectors),
            solver: SolverKind::Iterative,
            residuals: res.residuals,
        })
    }
}

/// Neumann spectrum of the weighted graph Laplacian on `G_m`.
pub fn eigensolve(model: &Model, m: usize, opts: &EigenOptions) -> Result<SpectralResult> {
    let c = model.energy(m)?;
    let mu = model.vertex_measure(m)?;
    solve_diagonal_mass(c.matrix(), &mu.values, m, opts)
}

/// Spectrum with zero values on `boundary_set`; eigenvectors are returned on all of
/// `V_m`, vanishing on `boundary_set`.
pub fn dirichlet_eigensolve(model: &Model, m: usize, boundary_set: &[usize], opts: &EigenOptions) -> Result<SpectralResult> {
    let n = model.graph(m).n_vertices();
    let mut fixed = vec![false; n];
    for &v in boundary_set {
        if v >= n {
            return Err(Error::UnknownVertex(v));
        }
        fixed[v] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let c = model.energy(m)?.matrix().submatrix(&interior, &interior);
    let mu = model.vertex_measure(m)?;
    let mass: Vec<f64> = interior.iter().map(|&v| mu.values[v]).collect();
    let mut res = solve_diagonal_mass(&c, &mass, m, opts)?;
    if let Some(v) = res.eigenvectors.take() {
        let mut full = Mat::zeros(n, v.ncols());
        for (p, &row) in interior.iter().enumerate() {
            for j in 0..v.ncols() {
                full[(row, j)] = v[(p, j)];
            }
        }
        res.eigenvectors = Some(full);
    }
    Ok(res)
}

/// Smallest Dirichlet eigenvalue on `G_m` with the boundary points fixed.
pub fn dirichlet_ground_state(model: &Model, m: usize) -> Result<f64> {
    let g = model.graph(m);
    let res = dirichlet_eigensolve(model, m, g.boundary_vertices(), &EigenOptions::new(1))?;
    Ok(res.eigenvalues[0])
}

/// Finite-element problem `C f = λ G f` with the consistent mass matrix.
pub fn fem_eigensolve(c: &CsrMatrix, g: &CsrMatrix, k: usize, want_vectors: bool) -> Result<SpectralResult> {
    let n = c.nrows();
    if g.nrows() != n || c.ncols() != n || g.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: g.nrows() });
    }
    if k > n {
        return Err(Error::TooManyEigenpairs { requested: k, dimension: n });
    }
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimitExceeded { size: n, limit: DENSE_LIMIT });
    }
    let (vals, vecs) = linalg::generalized_sym_eigen(&c.to_dense(), &g.to_dense(), want_vectors)?;
    let vecs = vecs.map(|v| Mat::from_fn(n, k, |i, j| v[(i, j)]));
    let residuals = match &vecs {
        Some(v) => (0..k)
            .map(|j| {
                let x: Vec<f64> = (0..n).map(|i| v[(i, j)]).collect();
                let r: Vec<f64> = c.mul_vec(&x).iter().zip(g.mul_vec(&x)).map(|(a, b)| a - vals[j] * b).collect();
                linalg::norm(&r) / linalg::norm(&x)
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(SpectralResult {
        generation: 0,
        eigenvalues: vals[..k].to_vec(),
        eigenvectors: vecs,
        solver: SolverKind::Dense,
        residuals,
    })
}

/// Two-sided estimate of a limit eigenvalue from its generation-`m` approximation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EwBracket {
    pub lower: f64,
    /// `f64::INFINITY` when `δ (1 + λ_{k,+}) ≥ 1`.
    pub upper: f64,
    pub bounded: bool,
    pub delta: f64,
    pub lambda_plus: f64,
}

impl EwBracket {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lower - tol && x <= self.upper + tol
    }
}

/// `[(1−δ)/(1+δλ₊) λ, λ/(1 − δ(1+λ₊))]`.
pub fn ew_bracket(lambda: f64, delta: f64, lambda_plus: f64) -> EwBracket {
    let lower = (1.0 - delta) / (1.0 + delta * lambda_plus) * lambda;
    let denom = 1.0 - delta * (1.0 + lambda_plus);
    let bounded = denom > 0.0;
    let upper = if lambda == 0.0 {
        0.0
    } else if bounded {
        lambda / denom
    } else {
        f64::INFINITY
    };
    EwBracket { lower, upper, bounded, delta, lambda_plus }
}

/// `1 / (1 − (λ₊ / λ_1^Dir) (μ_+ r_−)^m)`, where `λ_1^Dir` is the generation-1 Dirichlet
/// ground state, so that `λ_k(G_m) ≤ factor · λ_k(G_{m+1})`.
pub fn subseq_factor(model: &Model, m: usize, lambda_plus: f64) -> Result<f64> {
    let dir = dirichlet_ground_state(model, 1)?;
    let q = (model.measure().spec().max() * model.spec().renorm_min()).powi(m as i32);
    let denominator = 1.0 - lambda_plus / dir * q;
    if denominator <= 0.0 {
        return Err(Error::FactorUndefined { denominator });
    }
    Ok(1.0 / denominator)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub vertices: usize,
    pub delta: f64,
    /// `λ_1..λ_k`, truncated when `|V_m| < k`.
    pub eigenvalues: Vec<f64>,
    /// `|λ_k^{(m)} − λ_k^{(M)}| / |λ_k^{(m−1)} − λ_k^{(M)}|` against the reference generation.
    pub observed_ratio: Option<f64>,
    /// `δ_m / δ_{m−1}`.
    pub theoretical_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub k: usize,
    pub reference_generation: usize,
    pub rows: Vec<ConvergenceRow>,
}

pub fn convergence_table(model: &Model, gens: RangeInclusive<usize>, opts: &EigenOptions) -> Result<ConvergenceTable> {
    let k = opts.k;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for m in gens.clone() {
        let n = model.graph(m).n_vertices();
        let o = EigenOptions { k: k.min(n), want_vectors: false, ..*opts };
        let res = eigensolve(model, m, &o)?;
        rows.push(ConvergenceRow {
            m,
            vertices: n,
            delta: quasiuni::delta_bound(model, m)?.general,
            eigenvalues: res.eigenvalues,
            observed_ratio: None,
            theoretical_ratio: None,
        });
    }
    let reference = *gens.end();
    let lam_ref = rows.last().and_then(|r| r.eigenvalues.get(k - 1).copied());
    for i in 1..rows.len() {
        rows[i].theoretical_ratio = Some(rows[i].delta / rows[i - 1].delta);
        if rows[i].m < reference {
            if let (Some(r), Some(a), Some(b)) =
                (lam_ref, rows[i].eigenvalues.get(k - 1), rows[i - 1].eigenvalues.get(k - 1))
            {
                let den = (b - r).abs();
                if den > 0.0 {
                    rows[i].observed_ratio = Some((a - r).abs() / den);
                }
            }
        }
    }
    Ok(ConvergenceTable { k, reference_generation: reference, rows })
}
