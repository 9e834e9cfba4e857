//! Self-similar measures, vertex masses `μ_m` and Gram matrices of the spline basis.

use faer::Mat;
use serde::Serialize;

use crate::energy::{cell_products, harmonic_extension_maps, HarmonicExtension};
use crate::error::{Error, Result};
use crate::ifs::{ApproxGraph, FractalSpec};
use crate::linalg::{self, CsrMatrix};

/// Weights `μ_j` of a self-similar probability measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSpec {
    weights: Vec<f64>,
}

impl MeasureSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::BadMeasure("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::BadMeasure(format!("weight {w} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(MeasureSpec { weights })
    }

    pub fn uniform(n: usize) -> Self {
        MeasureSpec { weights: vec![1.0 / n as f64; n] }
    }

    /// The measure a spec asks for, uniform when it names none.
    pub fn for_spec(spec: &FractalSpec) -> Result<Self> {
        let m = match &spec.measure_weights {
            Some(w) => Self::new(w.clone())?,
            None => Self::uniform(spec.n_maps),
        };
        if m.weights.len() != spec.n_maps {
            return Err(Error::BadMeasure(format!("{} weights for {} maps", m.weights.len(), spec.n_maps)));
        }
        Ok(m)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }
}

/// `a_x = ∫ ψ_{x,0} dμ` for the boundary points.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryWeights {
    pub values: Vec<f64>,
    pub residual: f64,
}

/// `B_0[a][b] = ∫ ψ_{a,0} ψ_{b,0} dμ`.
#[derive(Clone, Debug)]
pub struct CellGram {
    pub matrix: Mat<f64>,
    pub residual: f64,
}

/// Solves `(I − T) x = 0`, `Σ x = 1` with `T` given densely.
fn normalized_fixed_point(t: &Mat<f64>) -> Result<(Vec<f64>, f64)> {
    let n = t.nrows();
    let mut a = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - t[(i, j)]);
    let sv = linalg::singular_values(&a)?;
    let scale = sv.iter().cloned().fold(1.0, f64::max);
    let null = sv.iter().filter(|&&s| s <= 1e-10 * scale).count();
    if null > 1 {
        return Err(Error::NonUniqueFixedPoint(null));
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let x = linalg::solve_dense(&a, &rhs);
    let residual = (0..n)
        .map(|i| (x[i] - (0..n).map(|j| t[(i, j)] * x[j]).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    Ok((x, residual))
}

fn boundary_weights_from(harm: &HarmonicExtension, measure: &MeasureSpec) -> Result<BoundaryWeights> {
    let n0 = harm.n_corners();
    let mu = measure.weights();
    // a = Σ μ_j A_jᵀ a
    let t = Mat::from_fn(n0, n0, |i, k| harm.maps.iter().zip(mu).map(|(a, m)| m * a[(k, i)]).sum());
    let (values, residual) = normalized_fixed_point(&t)?;
    Ok(BoundaryWeights { values, residual })
}

fn cell_gram_from(harm: &HarmonicExtension, measure: &MeasureSpec) -> Result<CellGram> {
    let n0 = harm.n_corners();
    let mu = measure.weights();
    // vec(B) index a*n0 + b; (Aᵀ B A)[a][b] = Σ_{c,d} A[c][a] B[c][d] A[d][b]
    let t = Mat::from_fn(n0 * n0, n0 * n0, |row, col| {
        let (a, b) = (row / n0, row % n0);
        let (c, d) = (col / n0, col % n0);
        harm.maps.iter().zip(mu).map(|(m, w)| w * m[(c, a)] * m[(d, b)]).sum()
    });
    let (x, residual) = normalized_fixed_point(&t)?;
    let b = Mat::from_fn(n0, n0, |i, j| 0.5 * (x[i * n0 + j] + x[j * n0 + i]));
    Ok(CellGram { matrix: b, residual })
}

pub fn boundary_weights(spec: &FractalSpec, measure: &MeasureSpec) -> Result<BoundaryWeights> {
    boundary_weights_from(&harmonic_extension_maps(spec)?, measure)
}

pub fn cell_gram(spec: &FractalSpec, measure: &MeasureSpec) -> Result<CellGram> {
    cell_gram_from(&harmonic_extension_maps(spec)?, measure)
}

/// What the assembly routines need from a measure: masses of cells and the integrals
/// of level-0 splines over a cell, relative to the cell's mass.
pub trait CellMeasure {
    fn n_maps(&self) -> usize;
    /// `μ(K_w)` for every word of length `m`, by word index.
    fn cell_masses(&self, m: usize) -> Vec<f64>;
    /// `∫ ψ_{a,0} dμ` per boundary corner.
    fn corner_weights(&self) -> &[f64];
    /// `∫ ψ_{a,0} ψ_{b,0} dμ`.
    fn corner_gram(&self) -> &Mat<f64>;
}

/// A self-similar measure with its level-0 integrals precomputed.
#[derive(Clone, Debug)]
pub struct SelfSimilarMeasure {
    spec: MeasureSpec,
    weights: BoundaryWeights,
    gram: CellGram,
}

impl SelfSimilarMeasure {
    pub fn new(harm: &HarmonicExtension, spec: MeasureSpec) -> Result<Self> {
        if spec.weights().len() != harm.n_maps() {
            return Err(Error::BadMeasure(format!("{} weights for {} maps", spec.weights().len(), harm.n_maps())));
        }
        let weights = boundary_weights_from(harm, &spec)?;
        let gram = cell_gram_from(harm, &spec)?;
        Ok(SelfSimilarMeasure { spec, weights, gram })
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn boundary_weights(&self) -> &BoundaryWeights {
        &self.weights
    }

    pub fn cell_gram(&self) -> &CellGram {
        &self.gram
    }
}

impl CellMeasure for SelfSimilarMeasure {
    fn n_maps(&self) -> usize {
        self.spec.weights().len()
    }

    fn cell_masses(&self, m: usize) -> Vec<f64> {
        cell_products(self.spec.weights(), m)
    }

    fn corner_weights(&self) -> &[f64] {
        &self.weights.values
    }

    fn corner_gram(&self) -> &Mat<f64> {
        &self.gram.matrix
    }
}

/// Vertex masses `μ_m(x) = ∫ ψ_{x,m} dμ`.
#[derive(Clone, Debug, Serialize)]
pub struct VertexMeasure {
    pub generation: usize,
    pub values: Vec<f64>,
    /// `max(max_x μ_m(x), max_w μ(K_w))`.
    pub mu_plus: f64,
    /// `(min_j μ_j)^m`.
    pub mu_minus: f64,
    pub max_cell_mass: f64,
}

fn check_measure_shape(measure: &dyn CellMeasure, graph: &ApproxGraph) -> Result<()> {
    if measure.n_maps() != graph.n_maps() {
        return Err(Error::DimensionMismatch { expected: graph.n_maps(), actual: measure.n_maps() });
    }
    if measure.corner_weights().len() != graph.n_corners() {
        return Err(Error::DimensionMismatch { expected: graph.n_corners(), actual: measure.corner_weights().len() });
    }
    Ok(())
}

pub fn vertex_measures(measure: &dyn CellMeasure, graph: &ApproxGraph) -> Result<VertexMeasure> {
    check_measure_shape(measure, graph)?;
    let m = graph.generation();
    let cells = measure.cell_masses(m);
    let a = measure.corner_weights();
    let mut values = vec![0.0; graph.n_vertices()];
    for (w, mw) in cells.iter().enumerate() {
        for (c, &v) in graph.cell_vertices(w).iter().enumerate() {
            values[v] += mw * a[c];
        }
    }
    let max_cell_mass = cells.iter().cloned().fold(0.0, f64::max);
    let min_weight = measure.cell_masses(1).iter().cloned().fold(f64::INFINITY, f64::min).powi(m as i32);
    let mu_plus = values.iter().cloned().fold(max_cell_mass, f64::max);
    Ok(VertexMeasure { generation: m, values, mu_plus, mu_minus: min_weight, max_cell_mass })
}

/// Gram matrix `G_m[x][y] = ⟨ψ_{x,m}, ψ_{y,m}⟩`, assembled cell by cell.
pub fn gram_matrix(measure: &dyn CellMeasure, graph: &ApproxGraph) -> Result<CsrMatrix> {
    check_measure_shape(measure, graph)?;
    let cells = measure.cell_masses(graph.generation());
    let b = measure.corner_gram();
    let n0 = graph.n_corners();
    let mut t = Vec::with_capacity(cells.len() * n0 * n0);
    for (w, mw) in cells.iter().enumerate() {
        let vs = graph.cell_vertices(w);
        for c in 0..n0 {
            for d in 0..n0 {
                t.push((vs[c], vs[d], mw * b[(c, d)]));
            }
        }
    }
    let n = graph.n_vertices();
    Ok(CsrMatrix::from_triplets(n, n, &t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::build_graph;
    use crate::presets;

    fn measure_for(spec: &FractalSpec) -> SelfSimilarMeasure {
        let h = harmonic_extension_maps(spec).unwrap();
        SelfSimilarMeasure::new(&h, MeasureSpec::for_spec(spec).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(MeasureSpec::new(vec![0.5, 0.6]), Err(Error::BadMeasure(_))));
        assert!(matches!(MeasureSpec::new(vec![1.5, -0.5]), Err(Error::BadMeasure(_))));
    }

    #[test]
    fn interval_cell_gram_is_p1_mass() {
        let g = cell_gram(&presets::interval(), &MeasureSpec::uniform(2)).unwrap();
        let e = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.matrix[(i, j)] - e[i][j]).abs() < 1e-14);
            }
        }
        assert!(g.residual < 1e-14);
    }

    #[test]
    fn boundary_weights_sum_to_one() {
        for spec in presets::all() {
            let m = measure_for(&spec);
            let a = &m.boundary_weights().values;
            assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-13);
            assert!(a.iter().all(|&x| x > 0.0));
            assert!(m.boundary_weights().residual < 1e-12);
            let b = &m.cell_gram().matrix;
            for i in 0..a.len() {
                let row: f64 = (0..a.len()).map(|j| b[(i, j)]).sum();
                assert!((row - a[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sg_generation_one_masses() {
        let spec = presets::sg();
        let g = build_graph(&spec, 1);
        let vm = vertex_measures(&measure_for(&spec), &g).unwrap();
        for v in 0..g.n_vertices() {
            let e = if g.cell_count(v) == 1 { 1.0 / 9.0 } else { 2.0 / 9.0 };
            assert!((vm.values[v] - e).abs() < 1e-15);
        }
    }

    #[test]
    fn interval_gram_generation_one() {
        let spec = presets::interval();
        let g = build_graph(&spec, 1);
        let gm = gram_matrix(&measure_for(&spec), &g).unwrap();
        let (l, mid, r) = (g.vertex_of(0, 0), g.vertex_of(0, 1), g.vertex_of(1, 1));
        assert!((gm.get(l, l) - 1.0 / 6.0).abs() < 1e-15);
        assert!((gm.get(mid, mid) - 1.0 / 3.0).abs() < 1e-15);
        assert!((gm.get(r, r) - 1.0 / 6.0).abs() < 1e-15);
        assert!((gm.get(l, mid) - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(gm.get(l, r), 0.0);
    }
}
