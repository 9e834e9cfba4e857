//! A validated fractal with its measure, plus lazily built graphs.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::energy::{self, EnergyForm, HarmonicExtension};
use crate::error::{Error, Result};
use crate::ifs::{self, ApproxGraph, FractalInfo, FractalSpec};
use crate::linalg::CsrMatrix;
use crate::measure::{self, MeasureSpec, SelfSimilarMeasure, VertexMeasure};
use crate::presets;

/// Everything derived from a [`FractalSpec`] and a self-similar measure.
///
/// Graphs are cached per generation; all other quantities are recomputed on demand.
pub struct Model {
    spec: FractalSpec,
    info: FractalInfo,
    harmonic: HarmonicExtension,
    measure: SelfSimilarMeasure,
    graphs: Mutex<BTreeMap<usize, Arc<ApproxGraph>>>,
}

impl Model {
    /// Validates `spec` and uses its `measure_weights` (uniform when absent).
    pub fn new(spec: FractalSpec) -> Result<Self> {
        let info = ifs::validate_spec(&spec)?;
        let weights = MeasureSpec::for_spec(&spec)?;
        Self::build(spec, info, weights)
    }

    pub fn with_measure(spec: FractalSpec, weights: MeasureSpec) -> Result<Self> {
        let info = ifs::validate_spec(&spec)?;
        Self::build(spec, info, weights)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::new(presets::by_name(name)?)
    }

    fn build(spec: FractalSpec, info: FractalInfo, weights: MeasureSpec) -> Result<Self> {
        let harmonic = energy::harmonic_extension_maps(&spec)?;
        let measure = SelfSimilarMeasure::new(&harmonic, weights)?;
        Ok(Model { spec, info, harmonic, measure, graphs: Mutex::new(BTreeMap::new()) })
    }

    pub fn spec(&self) -> &FractalSpec {
        &self.spec
    }

    pub fn info(&self) -> &FractalInfo {
        &self.info
    }

    pub fn harmonic(&self) -> &HarmonicExtension {
        &self.harmonic
    }

    pub fn measure(&self) -> &SelfSimilarMeasure {
        &self.measure
    }

    pub fn graph(&self, m: usize) -> Arc<ApproxGraph> {
        let mut cache = self.graphs.lock().expect("graph cache poisoned");
        cache.entry(m).or_insert_with(|| Arc::new(ifs::build_graph(&self.spec, m))).clone()
    }

    /// `|V_m|` from the closed form, without building the graph.
    pub fn predicted_vertex_count(&self, m: usize) -> usize {
        self.info.vertex_count.count(m)
    }

    pub fn energy(&self, m: usize) -> Result<EnergyForm> {
        energy::assemble_energy(&self.spec, &self.graph(m))
    }

    pub fn vertex_measure(&self, m: usize) -> Result<VertexMeasure> {
        measure::vertex_measures(&self.measure, &self.graph(m))
    }

    pub fn gram(&self, m: usize) -> Result<CsrMatrix> {
        measure::gram_matrix(&self.measure, &self.graph(m))
    }

    /// `τ_{−,m} = τ_{−,0} / r_+^m`.
    pub fn tau_minus(&self, m: usize) -> f64 {
        self.spec.tau_min() / self.spec.renorm_max().powi(m as i32)
    }

    fn check_order(m: usize, big_m: usize) -> Result<()> {
        if big_m < m {
            return Err(Error::GenerationOrder { lower: m, upper: big_m });
        }
        Ok(())
    }

    /// Harmonic prolongation `H: V_m → V_M`; column `x` samples `ψ_{x,m}` on `V_M`.
    pub fn prolongation(&self, m: usize, big_m: usize) -> Result<CsrMatrix> {
        Self::check_order(m, big_m)?;
        let mut h = CsrMatrix::identity(self.graph(m).n_vertices());
        for k in m..big_m {
            let step = energy::prolongation_step(&self.harmonic, &self.graph(k), &self.graph(k + 1))?;
            h = step.matmul(&h);
        }
        Ok(h)
    }

    /// Harmonic extension of `values` from `V_m` to `V_target`.
    pub fn extend(&self, values: &[f64], m: usize, target: usize) -> Result<Vec<f64>> {
        if target < m {
            return Err(Error::GenerationOrder { lower: m, upper: target });
        }
        let n = self.graph(m).n_vertices();
        if values.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: values.len() });
        }
        let mut v = values.to_vec();
        for k in m..target {
            v = energy::prolongation_step(&self.harmonic, &self.graph(k), &self.graph(k + 1))?.mul_vec(&v);
        }
        Ok(v)
    }

    /// Index in `V_M` of each vertex of `V_m`.
    pub fn embedding(&self, m: usize, big_m: usize) -> Result<Vec<usize>> {
        Self::check_order(m, big_m)?;
        let coarse = self.graph(m);
        let fine = self.graph(big_m);
        let depth = big_m - m;
        let sub = self.spec.n_maps.pow(depth as u32);
        let ends: Vec<(usize, usize)> =
            (0..self.spec.n_boundary()).map(|c| self.spec.boundary_address(c, depth)).collect();
        Ok((0..coarse.n_vertices())
            .map(|v| {
                let cell = coarse.cells_of_vertex(v).expect("vertex in range")[0];
                let (bw, c) = ends[cell.corner];
                fine.vertex_of(cell.word * sub + bw, c)
            })
            .collect())
    }

    /// `Hᵀ G_M`; entry `(x, y)` is `⟨ψ_{x,m}, ψ_{y,M}⟩`.
    pub fn cross_gram(&self, m: usize, big_m: usize) -> Result<CsrMatrix> {
        let h = self.prolongation(m, big_m)?;
        Ok(h.transpose().matmul(&self.gram(big_m)?))
    }

    /// Default comparison generation: `m + 3`, lowered while `|V_M|` exceeds `limit`
    /// but never below `m + 1`.
    pub fn reference_generation(&self, m: usize, limit: usize) -> usize {
        let mut big_m = m + 3;
        while big_m > m + 1 && self.predicted_vertex_count(big_m) > limit {
            big_m -= 1;
        }
        big_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_tent_function() {
        let model = Model::preset("interval").unwrap();
        let g3 = model.graph(3);
        let mut delta = vec![0.0; 2];
        delta[model.graph(0).boundary_vertices()[0]] = 1.0;
        let h = model.extend(&delta, 0, 3).unwrap();
        let x = ifs::vertex_coordinates(model.spec(), &g3).unwrap();
        for v in 0..g3.n_vertices() {
            assert!((h[v] - (1.0 - x[v][0])).abs() < 1e-15);
        }
    }

    #[test]
    fn embedding_keeps_addresses_geometrically() {
        let model = Model::preset("pentagasket3").unwrap();
        let emb = model.embedding(1, 3).unwrap();
        let x1 = ifs::vertex_coordinates(model.spec(), &model.graph(1)).unwrap();
        let x3 = ifs::vertex_coordinates(model.spec(), &model.graph(3)).unwrap();
        for (v, &w) in emb.iter().enumerate() {
            assert!((x1[v][0] - x3[w][0]).abs() < 1e-12 && (x1[v][1] - x3[w][1]).abs() < 1e-12);
        }
    }

    #[test]
    fn prolongation_restricts_to_identity() {
        let model = Model::preset("sg-level3").unwrap();
        let h = model.prolongation(1, 3).unwrap();
        let emb = model.embedding(1, 3).unwrap();
        for (x, &row) in emb.iter().enumerate() {
            for y in 0..h.ncols() {
                assert_eq!(h.get(row, y), if x == y { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn reference_generation_is_capped() {
        let model = Model::preset("pentagasket5").unwrap();
        assert_eq!(model.reference_generation(1, 6000), 4);
        assert_eq!(model.reference_generation(3, 6000), 4);
        assert_eq!(model.reference_generation(5, 6000), 6);
    }
}
