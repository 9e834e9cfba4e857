//! Graph energies `E_m`, harmonic extension and the level-0 compatibility check.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{build_graph, ApproxGraph, FractalSpec};
use crate::linalg::{self, CsrMatrix};

/// Products `x_{w_1} ⋯ x_{w_m}` for all words of length `m`, indexed by word index.
pub fn cell_products(x: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..m {
        out = out.iter().flat_map(|p| x.iter().map(move |xj| p * xj)).collect();
    }
    out
}

/// Stiffness matrix `C_m` together with the edge conductances it was built from.
#[derive(Clone, Debug)]
pub struct EnergyForm {
    generation: usize,
    matrix: CsrMatrix,
    conductances: Vec<f64>,
}

impl EnergyForm {
    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Conductance of each graph edge, in the order of [`ApproxGraph::edges`].
    pub fn conductances(&self) -> &[f64] {
        &self.conductances
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_shape(spec: &FractalSpec, graph: &ApproxGraph) -> Result<()> {
    if graph.n_maps() != spec.n_maps || graph.n_corners() != spec.n_boundary() {
        return Err(Error::MalformedSpec("graph was built from a different fractal".into()));
    }
    let expected = spec.n_maps.pow(graph.generation() as u32);
    if graph.n_cells() != expected {
        return Err(Error::GenerationMismatch { expected, actual: graph.n_cells() });
    }
    Ok(())
}

/// Assembles `C_m` with conductance `τ_{e0} / r_w` on the copy of `e0` in cell `w`.
pub fn assemble_energy(spec: &FractalSpec, graph: &ApproxGraph) -> Result<EnergyForm> {
    check_shape(spec, graph)?;
    let rw = cell_products(&spec.renorm, graph.generation());
    let n = graph.n_vertices();
    let mut conductances = Vec::with_capacity(graph.edges().len());
    let mut t = Vec::with_capacity(4 * graph.edges().len());
    for e in graph.edges() {
        let tau = spec.conductances0[e.base_edge].tau / rw[e.word];
        conductances.push(tau);
        t.push((e.u, e.u, tau));
        t.push((e.v, e.v, tau));
        t.push((e.u, e.v, -tau));
        t.push((e.v, e.u, -tau));
    }
    Ok(EnergyForm { generation: graph.generation(), matrix: CsrMatrix::from_triplets(n, n, &t), conductances })
}

/// `fᵀ C g`, or the quadratic value `fᵀ C f` when `g` is `None`.
pub fn energy_value(form: &EnergyForm, f: &[f64], g: Option<&[f64]>) -> Result<f64> {
    let n = form.dim();
    for v in std::iter::once(f).chain(g) {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
        }
    }
    Ok(form.matrix.bilinear(f, g.unwrap_or(f)))
}

/// Schur complement of `c` onto the index set `keep` (in the given order).
pub fn schur_complement(c: &Mat<f64>, keep: &[usize]) -> Result<Mat<f64>> {
    let n = c.nrows();
    let mut is_kept = vec![false; n];
    keep.iter().for_each(|&k| is_kept[k] = true);
    let drop: Vec<usize> = (0..n).filter(|&i| !is_kept[i]).collect();
    let (nk, nd) = (keep.len(), drop.len());
    let ckk = Mat::from_fn(nk, nk, |i, j| c[(keep[i], keep[j])]);
    if nd == 0 {
        return Ok(ckk);
    }
    let cdd = Mat::from_fn(nd, nd, |i, j| c[(drop[i], drop[j])]);
    let cdk = Mat::from_fn(nd, nk, |i, j| c[(drop[i], keep[j])]);
    let x = solve_interior(&cdd, &cdk)?;
    Ok(linalg::symmetrize(&(ckk - cdk.transpose() * x)))
}

fn solve_interior(cdd: &Mat<f64>, rhs: &Mat<f64>) -> Result<Mat<f64>> {
    let sv = linalg::singular_values(cdd)?;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 1e-12 * max) {
        return Err(Error::SingularInterior);
    }
    use faer::linalg::solvers::Solve;
    Ok(cdd.partial_piv_lu().solve(rhs))
}

/// Level-1 harmonic extension matrices `A_j`.
///
/// Row `c` of `A_j` gives the value at corner `c` of cell `j` as a combination of the
/// boundary values.
#[derive(Clone, Debug)]
pub struct HarmonicExtension {
    pub maps: Vec<Mat<f64>>,
}

impl HarmonicExtension {
    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn n_corners(&self) -> usize {
        self.maps[0].nrows()
    }
}

pub fn harmonic_extension_maps(spec: &FractalSpec) -> Result<HarmonicExtension> {
    let g1 = build_graph(spec, 1);
    let c1 = assemble_energy(spec, &g1)?.matrix.to_dense();
    let n0 = spec.n_boundary();
    let bnd = g1.boundary_vertices();
    let mut is_bnd = vec![false; g1.n_vertices()];
    bnd.iter().for_each(|&v| is_bnd[v] = true);
    let interior: Vec<usize> = (0..g1.n_vertices()).filter(|&v| !is_bnd[v]).collect();

    // ext[v][a]: value at v of the harmonic extension of the indicator of boundary point a
    let mut ext = Mat::<f64>::zeros(g1.n_vertices(), n0);
    for (a, &v) in bnd.iter().enumerate() {
        ext[(v, a)] = 1.0;
    }
    if !interior.is_empty() {
        let ni = interior.len();
        let cii = Mat::from_fn(ni, ni, |i, j| c1[(interior[i], interior[j])]);
        let cib = Mat::from_fn(ni, n0, |i, a| -c1[(interior[i], bnd[a])]);
        let x = solve_interior(&cii, &cib)?;
        for (i, &v) in interior.iter().enumerate() {
            for a in 0..n0 {
                ext[(v, a)] = x[(i, a)];
            }
        }
    }
    let maps = (0..spec.n_maps)
        .map(|j| Mat::from_fn(n0, n0, |c, a| ext[(g1.vertex_of(j, c), a)]))
        .collect();
    Ok(HarmonicExtension { maps })
}

/// One-step harmonic prolongation `V_m → V_{m+1}` as a sparse `|V_{m+1}| × |V_m|` matrix.
pub fn prolongation_step(harm: &HarmonicExtension, coarse: &ApproxGraph, fine: &ApproxGraph) -> Result<CsrMatrix> {
    if fine.generation() != coarse.generation() + 1 {
        return Err(Error::GenerationMismatch { expected: coarse.generation() + 1, actual: fine.generation() });
    }
    let n = harm.n_maps();
    let n0 = harm.n_corners();
    let mut done = vec![false; fine.n_vertices()];
    let mut t = Vec::new();
    for w in 0..coarse.n_cells() {
        let parent = coarse.cell_vertices(w);
        for j in 0..n {
            for c in 0..n0 {
                let v = fine.vertex_of(w * n + j, c);
                if done[v] {
                    continue;
                }
                done[v] = true;
                for b in 0..n0 {
                    let a = harm.maps[j][(c, b)];
                    if a != 0.0 {
                        t.push((v, parent[b], a));
                    }
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(fine.n_vertices(), coarse.n_vertices(), &t))
}

/// Result of the level-0 compatibility check.
#[derive(Clone, Debug, Serialize)]
pub struct CompatReport {
    /// `‖trace(C_1) − C_0‖_F / ‖C_0‖_F`.
    pub residual: f64,
    pub tolerance: f64,
    pub compatible: bool,
}

/// Compares the trace of `C_1` on `V_0` with `C_0`.
pub fn check_compatibility(spec: &FractalSpec, tol: f64) -> Result<CompatReport> {
    let g1 = build_graph(spec, 1);
    let c1 = assemble_energy(spec, &g1)?.matrix.to_dense();
    let trace = schur_complement(&c1, g1.boundary_vertices())?;
    let c0 = assemble_energy(spec, &build_graph(spec, 0))?.matrix.to_dense();
    let residual = linalg::frobenius(&(trace - &c0)) / linalg::frobenius(&c0);
    Ok(CompatReport { residual, tolerance: tol, compatible: residual <= tol })
}

/// Largest ratio `|u(x) − u(y)|² / ((r_w / τ_{−,0}) E_{K_w}(u))` over all `m`-cells `w` and
/// corner pairs `x, y` of `w`; the Hölder estimate says this is at most 1.
pub fn hoelder_check(spec: &FractalSpec, m: usize, fine: &ApproxGraph, u: &[f64]) -> Result<f64> {
    let big_m = fine.generation();
    if big_m < m {
        return Err(Error::GenerationOrder { lower: m, upper: big_m });
    }
    if u.len() != fine.n_vertices() {
        return Err(Error::DimensionMismatch { expected: fine.n_vertices(), actual: u.len() });
    }
    let form = assemble_energy(spec, fine)?;
    let n0 = spec.n_boundary();
    let depth = big_m - m;
    let sub = spec.n_maps.pow(depth as u32);
    let ends: Vec<(usize, usize)> = (0..n0).map(|c| spec.boundary_address(c, depth)).collect();
    let rw = cell_products(&spec.renorm, m);
    let tau_min = spec.tau_min();
    let n_edges0 = spec.conductances0.len();

    let mut worst: f64 = 0.0;
    for w in 0..spec.n_maps.pow(m as u32) {
        // edges of the fine graph are grouped by cell word in ascending order
        let edges = &fine.edges()[w * sub * n_edges0..(w + 1) * sub * n_edges0];
        let taus = &form.conductances()[w * sub * n_edges0..(w + 1) * sub * n_edges0];
        let local: f64 = edges.iter().zip(taus).map(|(e, t)| t * (u[e.u] - u[e.v]).powi(2)).sum();
        let bound = rw[w] / tau_min * local;
        let corners: Vec<usize> = ends.iter().map(|&(bw, c)| fine.vertex_of(w * sub + bw, c)).collect();
        for x in 0..n0 {
            for y in x + 1..n0 {
                let diff = (u[corners[x]] - u[corners[y]]).powi(2);
                if diff == 0.0 {
                    continue;
                }
                worst = worst.max(if bound > 0.0 { diff / bound } else { f64::INFINITY });
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn interval_stiffness() {
        let spec = presets::interval();
        let g = build_graph(&spec, 1);
        let c = assemble_energy(&spec, &g).unwrap().matrix.to_dense();
        let expected = [[2.0, -2.0, 0.0], [-2.0, 4.0, -2.0], [0.0, -2.0, 2.0]];
        // vertex order by canonical address: 0:0, 0:1 (midpoint), 1:1
        let order = [g.vertex_of(0, 0), g.vertex_of(0, 1), g.vertex_of(1, 1)];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c[(order[i], order[j])], expected[i][j]);
            }
        }
        let form = assemble_energy(&spec, &g).unwrap();
        let mut f = vec![0.0; 3];
        f[order[1]] = 0.5;
        f[order[2]] = 1.0;
        assert!((energy_value(&form, &f, None).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            energy_value(&form, &[1.0], None),
            Err(Error::DimensionMismatch { expected: 3, actual: 1 })
        );
    }

    #[test]
    fn sg_conductances_are_five_thirds() {
        let spec = presets::sg();
        let form = assemble_energy(&spec, &build_graph(&spec, 1)).unwrap();
        assert_eq!(form.conductances().len(), 9);
        assert!(form.conductances().iter().all(|t| (t - 5.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn interval_extension_matrices() {
        let h = harmonic_extension_maps(&presets::interval()).unwrap();
        let a1 = [[1.0, 0.0], [0.5, 0.5]];
        let a2 = [[0.5, 0.5], [0.0, 1.0]];
        for (m, e) in h.maps.iter().zip([a1, a2]) {
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m[(i, j)] - e[i][j]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn sg_two_fifths_rule() {
        let h = harmonic_extension_maps(&presets::sg()).unwrap();
        // corner 1 of cell 0 is the midpoint of q0 q1
        let row: Vec<f64> = (0..3).map(|a| h.maps[0][(1, a)]).collect();
        for (x, e) in row.iter().zip([0.4, 0.4, 0.2]) {
            assert!((x - e).abs() < 1e-14);
        }
    }

    #[test]
    fn extension_rows_sum_to_one() {
        for spec in presets::all() {
            let h = harmonic_extension_maps(&spec).unwrap();
            for a in &h.maps {
                for i in 0..a.nrows() {
                    let s: f64 = (0..a.ncols()).map(|j| a[(i, j)]).sum();
                    assert!((s - 1.0).abs() < 1e-13);
                    assert!((0..a.ncols()).all(|j| a[(i, j)] >= -1e-15 && a[(i, j)] <= 1.0 + 1e-15));
                }
            }
        }
    }

    #[test]
    fn compatibility_of_presets() {
        for spec in presets::all() {
            let r = check_compatibility(&spec, 1e-10).unwrap();
            assert!(r.compatible, "{:?}: {}", spec.name, r.residual);
        }
        let mut s = presets::sg();
        s.renorm = vec![0.5; 3];
        let r = check_compatibility(&s, 1e-10).unwrap();
        assert!(!r.compatible && r.residual > 0.1);
    }
}
