//! Identification operators between `ℓ²(V_m, μ_m)` and the fractal, measured
//! quasi-unitarity defects, and the theoretical bounds `δ_m`.
//!
//! The fractal side is represented by the `M`-harmonic splines (mass `G_M`, stiffness
//! `C_M`) for a reference generation `M > m`. With `H` the harmonic prolongation:
//!
//! * `J f = J_M (H f)`,
//! * `J' u = diag(μ_m)⁻¹ Hᵀ G_M g` for `u = J_M g`,
//! * `J'¹ u = g|V_m`.
//!
//! Suprema over the spline space are lower bounds for the suprema over the full energy
//! domain; they are compared with their theoretical upper bounds.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CsrMatrix, SparseCholesky};
use crate::model::Model;
use crate::spectral::{self, EigenOptions, DENSE_LIMIT};

const LANCZOS_TOL: f64 = 1e-12;

/// Theoretical defect bounds at generation `m`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaBound {
    pub m: usize,
    /// `(1 + √N_0) (μ_{+,m} / τ_{−,m})^{1/2}`.
    pub general: f64,
    /// Same with `μ_{+,m} ≤ 1`.
    pub corollary: f64,
    /// Closed form for symmetric fractals with symmetric measure.
    pub symmetric: Option<f64>,
    pub mu_plus: f64,
    pub tau_minus: f64,
}

fn all_equal(x: &[f64], tol: f64) -> bool {
    x.iter().all(|v| (v - x[0]).abs() <= tol * x[0].abs().max(1.0))
}

/// Whether the fractal and its measure are symmetric in the sense needed for the
/// closed-form `δ_m`: equal renormalisation factors, equal measure weights and (when
/// geometry is given) equal contraction ratios.
pub fn is_symmetric(model: &Model) -> bool {
    let spec = model.spec();
    all_equal(&spec.renorm, 1e-14)
        && all_equal(model.measure().spec().weights(), 1e-14)
        && model.info().contraction_ratios.as_deref().is_none_or(|t| all_equal(t, 1e-12))
}

pub fn delta_bound(model: &Model, m: usize) -> Result<DeltaBound> {
    let spec = model.spec();
    let info = model.info();
    let n0 = info.n_boundary as f64;
    let tau0 = spec.tau_min();
    let mu_plus = model.vertex_measure(m)?.mu_plus;
    let tau_minus = model.tau_minus(m);
    let general = (1.0 + n0.sqrt()) * (mu_plus / tau_minus).sqrt();
    let corollary = (1.0 + n0.sqrt()) / tau0.sqrt() * spec.renorm_max().powf(m as f64 / 2.0);
    let symmetric = is_symmetric(model).then(|| {
        let r0 = spec.renorm[0];
        let n = info.n_maps as f64;
        let n1 = info.max_cells_per_vertex as f64;
        let a = &model.measure().boundary_weights().values;
        let boundary_symmetric = all_equal(a, 1e-12);
        let scale = if boundary_symmetric { tau0 * n0 } else { tau0 };
        (1.0 + n0.sqrt()) * n1.sqrt() / scale.sqrt() * (r0 / n).powf(m as f64 / 2.0)
    });
    Ok(DeltaBound { m, general, corollary, symmetric, mu_plus, tau_minus })
}

/// `(μ_{+,m} / τ_{−,m})^{1/2}`, the bound for the first two defects.
pub fn bound_b(model: &Model, m: usize) -> Result<f64> {
    Ok((model.vertex_measure(m)?.mu_plus / model.tau_minus(m)).sqrt())
}

/// `(N_0 μ_{+,m} / τ_{−,m})^{1/2}`.
pub fn bound_c(model: &Model, m: usize) -> Result<f64> {
    Ok((model.info().n_boundary as f64 * model.vertex_measure(m)?.mu_plus / model.tau_minus(m)).sqrt())
}

fn check_pair(m: usize, big_m: usize) -> Result<()> {
    if big_m <= m {
        return Err(Error::GenerationOrder { lower: m, upper: big_m });
    }
    Ok(())
}

/// `‖(1 − J'J)(Δ_m + 1)^{−1/2}‖`, computed exactly with dense linear algebra.
pub fn measured_defect_b1(model: &Model, m: usize) -> Result<f64> {
    let n = model.graph(m).n_vertices();
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimitExceeded { size: n, limit: DENSE_LIMIT });
    }
    let c = model.energy(m)?.matrix().to_dense();
    let g = model.gram(m)?.to_dense();
    let mu = model.vertex_measure(m)?.values;
    // P = I − D⁻¹ G
    let p = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - g[(i, j)] / mu[i]);
    let dp = Mat::from_fn(n, n, |i, j| mu[i] * p[(i, j)]);
    let a = linalg::symmetrize(&(p.transpose() * dp));
    let b = Mat::from_fn(n, n, |i, j| c[(i, j)] + if i == j { mu[i] } else { 0.0 });
    Ok(linalg::top_generalized_eigenvalue_dense(&a, &b)?.max(0.0).sqrt())
}

/// `sup ‖u − J J'¹ u‖ / ‖u‖₁` over the `M`-harmonic splines.
pub fn measured_defect_b2(model: &Model, m: usize, big_m: usize, seed: u64) -> Result<f64> {
    check_pair(m, big_m)?;
    let h = model.prolongation(m, big_m)?;
    let emb = model.embedding(m, big_m)?;
    let gm = model.gram(big_m)?;
    let b = model.energy(big_m)?.matrix().add_scaled(&gm, 1.0);
    let project = |g: &[f64]| -> Vec<f64> {
        let coarse: Vec<f64> = emb.iter().map(|&v| g[v]).collect();
        let hg = h.mul_vec(&coarse);
        g.iter().zip(&hg).map(|(x, y)| x - y).collect()
    };
    let apply = |g: &[f64]| -> Vec<f64> {
        let pg = project(g);
        let w = gm.mul_vec(&pg);
        // Pᵀ w = w − Rᵀ Hᵀ w
        let htw = h.tr_mul_vec(&w);
        let mut out = w;
        for (x, &v) in emb.iter().enumerate() {
            out[v] -= htw[x];
        }
        out
    };
    Ok(linalg::top_generalized_eigenvalue(apply, &b, seed, LANCZOS_TOL)?.max(0.0).sqrt())
}

/// `sup ‖J'u − J'¹u‖_{ℓ²(μ_m)} / E(u)^{1/2}` over the `M`-harmonic splines.
pub fn measured_defect_c(model: &Model, m: usize, big_m: usize, seed: u64) -> Result<f64> {
    check_pair(m, big_m)?;
    let cross = model.cross_gram(m, big_m)?;
    let emb = model.embedding(m, big_m)?;
    let mu = model.vertex_measure(m)?.values;
    let cm = model.energy(big_m)?;
    let n = cm.dim();
    // both sides vanish on constants, so pin vertex 0 to make the energy definite
    let free: Vec<usize> = (1..n).collect();
    let b = cm.matrix().submatrix(&free, &free);
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; n];
        g[1..].copy_from_slice(x);
        let cg = cross.mul_vec(&g);
        // Q g = D⁻¹ Hᵀ G_M g − g|V_m ; return Qᵀ D Q g
        let q: Vec<f64> = (0..mu.len()).map(|i| cg[i] / mu[i] - g[emb[i]]).collect();
        let dq: Vec<f64> = q.iter().zip(&mu).map(|(a, b)| a * b).collect();
        let mut out = cross.tr_mul_vec(&q);
        for (i, &v) in emb.iter().enumerate() {
            out[v] -= dq[i];
        }
        out[1..].to_vec()
    };
    if n == 1 {
        return Ok(0.0);
    }
    Ok(linalg::top_generalized_eigenvalue(apply, &b, seed, LANCZOS_TOL)?.max(0.0).sqrt())
}

/// `max |Hᵀ C_M − C_m R| / max |C_m|` where `R` restricts `V_M` to `V_m`; the energies
/// agree exactly on harmonic extensions, so this is rounding only.
pub fn closeness_residual(model: &Model, m: usize, big_m: usize) -> Result<f64> {
    check_pair(m, big_m)?;
    let h = model.prolongation(m, big_m)?;
    let emb = model.embedding(m, big_m)?;
    let cm = model.energy(m)?;
    let lhs = h.transpose().matmul(model.energy(big_m)?.matrix());
    let t: Vec<_> = cm.matrix().triplets().map(|(x, y, v)| (x, emb[y], v)).collect();
    let rhs = CsrMatrix::from_triplets(lhs.nrows(), lhs.ncols(), &t);
    Ok(lhs.add_scaled(&rhs, -1.0).max_abs() / cm.matrix().max_abs())
}

/// `(adjointness, contraction)`.
///
/// Adjointness compares `⟨J e_x, J_M e_y⟩` from the assembled `Hᵀ G_M` with
/// `⟨e_x, J' J_M e_y⟩_{μ_m}` evaluated cell by cell. Contraction is the largest
/// eigenvalue of `(G_m, diag μ_m)` minus one, i.e. how far `‖Jf‖ ≤ ‖f‖` fails.
pub fn adjointness_and_contraction(model: &Model, m: usize, big_m: usize, seed: u64) -> Result<(f64, f64)> {
    check_pair(m, big_m)?;
    let h = model.prolongation(m, big_m)?;
    let direct = h.transpose().matmul(&model.gram(big_m)?);

    let fine = model.graph(big_m);
    let cells = crate::measure::CellMeasure::cell_masses(model.measure(), big_m);
    let b = &model.measure().cell_gram().matrix;
    let mu = model.vertex_measure(m)?.values;
    let mut t = Vec::new();
    for (w, mw) in cells.iter().enumerate() {
        let vs = fine.cell_vertices(w);
        for (c, &y) in vs.iter().enumerate() {
            for (d, &z) in vs.iter().enumerate() {
                let coef = mw * b[(c, d)];
                for (x, hx) in h.row(z) {
                    t.push((x, y, coef * hx));
                }
            }
        }
    }
    let integrals = CsrMatrix::from_triplets(h.ncols(), fine.n_vertices(), &t);
    // J' J_M e_y = D⁻¹ (column y of the integrals), then pair with e_x in ℓ²(μ_m)
    let inv: Vec<f64> = mu.iter().map(|x| 1.0 / x).collect();
    let adjoint = integrals.scale_rows(&inv).scale_rows(&mu);
    let adjointness = direct.add_scaled(&adjoint, -1.0).max_abs();

    let gm = model.gram(m)?;
    let top = linalg::top_generalized_eigenvalue(|x| gm.mul_vec(x), &CsrMatrix::from_diagonal(&mu), seed, LANCZOS_TOL)?;
    Ok((adjointness, top - 1.0))
}

/// Energy-norm distance between the prolonged generation-`m` eigenfunction `Φ_m` and
/// the nearest unit vector in the generation-`M` eigenspace of `λ_k`.
///
/// The eigenspace is the cluster of `λ_k(G_M)`; `λ_k(G_m)` must be closer to it than to
/// the neighbouring clusters.
pub fn eigenfunction_distance(model: &Model, m: usize, big_m: usize, k: usize, opts: &EigenOptions) -> Result<f64> {
    check_pair(m, big_m)?;
    let coarse = spectral::eigensolve(model, m, &EigenOptions { k, want_vectors: true, ..*opts })?;
    let phi = coarse.eigenvector(k - 1).expect("vectors requested");
    let lambda = coarse.eigenvalues[k - 1];

    let n_fine = model.graph(big_m).n_vertices();
    let mut kf = (k + 8).min(n_fine);
    let (fine, cluster) = loop {
        let fine = spectral::eigensolve(model, big_m, &EigenOptions { k: kf, want_vectors: true, ..*opts })?;
        let cl = fine.clusters().into_iter().find(|r| r.contains(&(k - 1))).expect("k within range");
        if cl.end < kf || kf == n_fine {
            break (fine, cl);
        }
        kf = (2 * kf).min(n_fine);
    };
    let ev = &fine.eigenvalues;
    let target = ev[cluster.start];
    let gap = (lambda - target).abs();
    if cluster.start > 0 && (lambda - ev[cluster.start - 1]).abs() < gap {
        return Err(Error::ClusterOverlap {
            k,
            detail: format!("λ_k(G_{m}) = {lambda} is nearer the cluster below {}", ev[cluster.start - 1]),
        });
    }
    if cluster.end < ev.len() && (ev[cluster.end] - lambda).abs() < gap {
        return Err(Error::ClusterOverlap {
            k,
            detail: format!("λ_k(G_{m}) = {lambda} is nearer the cluster above {}", ev[cluster.end]),
        });
    }

    let u = model.extend(&phi, m, big_m)?;
    let mu = model.vertex_measure(big_m)?.values;
    let vecs = fine.eigenvectors.as_ref().expect("vectors requested");
    let mu_u: Vec<f64> = u.iter().zip(&mu).map(|(a, b)| a * b).collect();
    let coef: Vec<f64> = cluster.clone().map(|i| (0..n_fine).map(|r| vecs[(r, i)] * mu_u[r]).sum()).collect();
    let norm = linalg::norm(&coef);
    if norm == 0.0 {
        return Err(Error::ClusterOverlap { k, detail: "prolonged eigenfunction is orthogonal to the eigenspace".into() });
    }
    let target_vec: Vec<f64> = (0..n_fine)
        .map(|r| cluster.clone().zip(&coef).map(|(i, c)| c * vecs[(r, i)]).sum::<f64>() / norm)
        .collect();
    let d: Vec<f64> = u.iter().zip(&target_vec).map(|(a, b)| a - b).collect();
    let cm = model.energy(big_m)?;
    let gm = model.gram(big_m)?;
    Ok((cm.matrix().bilinear(&d, &d) + gm.bilinear(&d, &d)).max(0.0).sqrt())
}

/// Galerkin proxy for `‖(Δ̃ + 1)⁻¹ J − J (Δ_m + 1)⁻¹‖`.
///
/// `Δ̃` is replaced by the `M`-spline Galerkin operator (stiffness `C_M`, mass `G_M`),
/// `J` by the prolongation; the norm is taken from `ℓ²(μ_m)` into the `G_M` norm.
pub fn projected_resolvent_defect(model: &Model, m: usize, big_m: usize) -> Result<f64> {
    check_pair(m, big_m)?;
    let n_fine = model.graph(big_m).n_vertices();
    let n = model.graph(m).n_vertices();
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimitExceeded { size: n, limit: DENSE_LIMIT });
    }
    let h = model.prolongation(m, big_m)?;
    let gm = model.gram(big_m)?;
    let fine_op = SparseCholesky::new(&model.energy(big_m)?.matrix().add_scaled(&gm, 1.0))?;
    let mu = model.vertex_measure(m)?.values;
    let mut cd = model.energy(m)?.matrix().to_dense();
    for i in 0..n {
        cd[(i, i)] += mu[i];
    }
    let rhs = Mat::from_fn(n, n, |i, j| if i == j { mu[i] } else { 0.0 });
    use faer::linalg::solvers::Solve;
    let coarse = cd.llt(faer::Side::Lower).map_err(|_| Error::MassNotPD)?.solve(&rhs);

    // X = (C_M + G_M)⁻¹ G_M H − H (C_m + D)⁻¹ D
    let hd = h.to_dense();
    let ghd = Mat::from_fn(n_fine, n, |i, j| gm.row(i).map(|(k, v)| v * hd[(k, j)]).sum::<f64>());
    let x = fine_op.solve_mat(&ghd) - &hd * &coarse;
    let gx = Mat::from_fn(n_fine, n, |i, j| gm.row(i).map(|(k, v)| v * x[(k, j)]).sum::<f64>());
    let a = linalg::symmetrize(&(x.transpose() * gx));
    let d = Mat::from_fn(n, n, |i, j| if i == j { mu[i] } else { 0.0 });
    Ok(linalg::top_generalized_eigenvalue_dense(&a, &d)?.max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct QueCheck {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

/// All measured defects at `(m, M)` against their bounds.
#[derive(Clone, Debug, Serialize)]
pub struct QueReport {
    pub m: usize,
    pub reference_generation: usize,
    pub delta: DeltaBound,
    pub bound_b: f64,
    pub bound_c: f64,
    pub adjointness: f64,
    pub contraction: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub closeness: f64,
    pub resolvent: f64,
    pub checks: Vec<QueCheck>,
    pub pass: bool,
}

pub fn que_report(model: &Model, m: usize, big_m: usize, seed: u64) -> Result<QueReport> {
    check_pair(m, big_m)?;
    let delta = delta_bound(model, m)?;
    let bb = bound_b(model, m)?;
    let bc = bound_c(model, m)?;
    let (adjointness, contraction) = adjointness_and_contraction(model, m, big_m, seed)?;
    let b1 = measured_defect_b1(model, m)?;
    let b2 = measured_defect_b2(model, m, big_m, seed)?;
    let c = measured_defect_c(model, m, big_m, seed)?;
    let closeness = closeness_residual(model, m, big_m)?;
    let resolvent = projected_resolvent_defect(model, m, big_m)?;
    let check = |name, measured: f64, bound: f64| QueCheck { name, measured, bound, pass: measured <= bound };
    let checks = vec![
        check("adjointness", adjointness, 1e-12),
        check("contraction", contraction, 1e-12),
        check("b1", b1, bb),
        check("b2", b2, bb),
        check("c", c, bc),
        check("closeness", closeness, 1e-10),
        check("resolvent", resolvent, 2.0 * delta.general),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(QueReport {
        m,
        reference_generation: big_m,
        delta,
        bound_b: bb,
        bound_c: bc,
        adjointness,
        contraction,
        b1,
        b2,
        c,
        closeness,
        resolvent,
        checks,
        pass,
    })
}
