//! Symbolic description of a pcf self-similar fractal and its approximating graphs.
//!
//! Words are stored as integers in base `N` with the first letter most significant, so
//! numeric order of `word * N0 + corner` is the lexicographic order of `(word, corner)`.
//! Letters and corners are 0-based.

use std::collections::BTreeSet;
use std::path::Path;

use faer::Mat;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// A similarity `x ↦ A x + t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    #[serde(rename = "matrix")]
    pub linear_part: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl AffineMap {
    /// Homothety with ratio `theta` towards the point `centre`.
    pub fn homothety(theta: f64, centre: &[f64]) -> Self {
        let d = centre.len();
        let linear_part = (0..d)
            .map(|i| (0..d).map(|j| if i == j { theta } else { 0.0 }).collect())
            .collect();
        let translation = centre.iter().map(|c| (1.0 - theta) * c).collect();
        AffineMap { linear_part, translation }
    }

    /// Planar map `x ↦ theta R(angle) (x - centre) + centre + shift`.
    pub fn planar(theta: f64, angle: f64, centre: [f64; 2], shift: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        let a = [[theta * c, -theta * s], [theta * s, theta * c]];
        let t = [
            centre[0] + shift[0] - a[0][0] * centre[0] - a[0][1] * centre[1],
            centre[1] + shift[1] - a[1][0] * centre[0] - a[1][1] * centre[1],
        ];
        AffineMap { linear_part: vec![a[0].to_vec(), a[1].to_vec()], translation: t.to_vec() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let d = self.dim();
        let linear_part = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| self.linear_part[i][k] * other.linear_part[k][j]).sum())
                    .collect()
            })
            .collect();
        AffineMap { linear_part, translation: self.apply(&other.translation) }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.linear_part
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + t)
            .collect()
    }

    fn singular_value_range(&self) -> Result<(f64, f64)> {
        let d = self.dim();
        let a = Mat::from_fn(d, d, |i, j| self.linear_part[i][j]);
        let sv = linalg::singular_values(&a)?;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok((min, max))
    }

    /// Operator norm of the linear part.
    pub fn contraction_ratio(&self) -> f64 {
        self.singular_value_range().map(|(_, max)| max).unwrap_or(f64::NAN)
    }

    pub fn fixed_point(&self) -> Vec<f64> {
        let d = self.dim();
        let a = Mat::from_fn(d, d, |i, j| if i == j { 1.0 } else { 0.0 } - self.linear_part[i][j]);
        linalg::solve_dense(&a, &self.translation)
    }
}

/// Level-0 conductance on the boundary edge `{a, b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseConductance {
    pub edge: [usize; 2],
    pub tau: f64,
}

/// Full symbolic and (optionally) geometric data of a fractal.
///
/// `glue` lists pairs `[[i, a], [j, b]]` meaning corner `a` of cell `i` coincides with
/// corner `b` of cell `j`. Corners are positions in `boundary`.
///
/// Boundary point `a` is corner `boundary_corners[a]` of cell `boundary[a]`; the
/// default (`boundary_corners[a] = a`) means it is the fixed point of map `boundary[a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractalSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_maps: usize,
    #[serde(default)]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<AffineMap>>,
    pub boundary: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_corners: Option<Vec<usize>>,
    pub glue: Vec<[[usize; 2]; 2]>,
    pub renorm: Vec<f64>,
    pub conductances0: Vec<BaseConductance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure_weights: Option<Vec<f64>>,
}

impl FractalSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn corner_of_boundary(&self, a: usize) -> usize {
        self.boundary_corners.as_ref().map_or(a, |c| c[a])
    }

    /// Address of boundary point `a` at generation `n` as `(word index, corner)`.
    pub fn boundary_address(&self, a: usize, n: usize) -> (usize, usize) {
        let mut word = 0;
        let mut corner = a;
        for _ in 0..n {
            word = word * self.n_maps + self.boundary[corner];
            corner = self.corner_of_boundary(corner);
        }
        (word, corner)
    }

    pub fn renorm_min(&self) -> f64 {
        self.renorm.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn renorm_max(&self) -> f64 {
        self.renorm.iter().cloned().fold(0.0, f64::max)
    }

    pub fn tau_min(&self) -> f64 {
        self.conductances0.iter().map(|c| c.tau).fold(f64::INFINITY, f64::min)
    }

    pub fn tau_max(&self) -> f64 {
        self.conductances0.iter().map(|c| c.tau).fold(0.0, f64::max)
    }
}

/// A point `F_w(q)` named by a word and a boundary corner.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    pub word: Vec<usize>,
    pub corner: usize,
}

impl std::fmt::Display for Address {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let w: Vec<String> = self.word.iter().map(|l| l.to_string()).collect();
        write!(f, "{}:{}", w.join("."), self.corner)
    }
}

/// Digits of a word index, most significant first.
pub fn word_digits(mut index: usize, len: usize, n_maps: usize) -> Vec<usize> {
    let mut w = vec![0; len];
    for slot in w.iter_mut().rev() {
        *slot = index % n_maps;
        index /= n_maps;
    }
    w
}

pub fn word_index(word: &[usize], n_maps: usize) -> usize {
    word.iter().fold(0, |acc, &l| acc * n_maps + l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    /// Word index of the cell carrying the edge.
    pub word: usize,
    /// Position of the level-0 edge in `conductances0`.
    pub base_edge: usize,
}

/// Cell membership `(word index, local corner)` of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CellMembership {
    pub word: usize,
    pub corner: usize,
}

/// The generation-`m` graph `G_m`.
#[derive(Clone, Debug)]
pub struct ApproxGraph {
    generation: usize,
    n_maps: usize,
    n_corners: usize,
    raw_to_vertex: Vec<usize>,
    canonical: Vec<usize>,
    member_ptr: Vec<usize>,
    members: Vec<usize>,
    edges: Vec<GraphEdge>,
    boundary: Vec<usize>,
}

impl ApproxGraph {
    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn n_vertices(&self) -> usize {
        self.canonical.len()
    }

    pub fn n_cells(&self) -> usize {
        self.raw_to_vertex.len() / self.n_corners
    }

    pub fn n_maps(&self) -> usize {
        self.n_maps
    }

    pub fn n_corners(&self) -> usize {
        self.n_corners
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    /// Vertices of the boundary points, in boundary order.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary
    }

    /// Vertex holding corner `corner` of cell `word`.
    pub fn vertex_of(&self, word: usize, corner: usize) -> usize {
        self.raw_to_vertex[word * self.n_corners + corner]
    }

    /// Vertex ids of the corners of cell `word`.
    pub fn cell_vertices(&self, word: usize) -> &[usize] {
        &self.raw_to_vertex[word * self.n_corners..(word + 1) * self.n_corners]
    }

    /// Canonical (lexicographically smallest) address of `v`.
    pub fn address(&self, v: usize) -> Address {
        let raw = self.canonical[v];
        Address {
            word: word_digits(raw / self.n_corners, self.generation, self.n_maps),
            corner: raw % self.n_corners,
        }
    }

    pub fn vertex_of_address(&self, addr: &Address) -> Option<usize> {
        if addr.word.len() != self.generation
            || addr.corner >= self.n_corners
            || addr.word.iter().any(|&l| l >= self.n_maps)
        {
            return None;
        }
        Some(self.vertex_of(word_index(&addr.word, self.n_maps), addr.corner))
    }

    /// The set `W_{x,m}` with local corners, sorted.
    pub fn cells_of_vertex(&self, v: usize) -> Result<Vec<CellMembership>> {
        if v >= self.n_vertices() {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self.members[self.member_ptr[v]..self.member_ptr[v + 1]]
            .iter()
            .map(|&raw| CellMembership { word: raw / self.n_corners, corner: raw % self.n_corners })
            .collect())
    }

    pub fn cell_count(&self, v: usize) -> usize {
        self.member_ptr[v + 1] - self.member_ptr[v]
    }

    pub fn max_cells_per_vertex(&self) -> usize {
        (0..self.n_vertices()).map(|v| self.cell_count(v)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_vertices();
        let mut uf = UnionFind::new(n);
        for e in &self.edges {
            uf.union(e.u, e.v);
        }
        (0..n).all(|v| uf.find(v) == uf.find(0))
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Raw address pairs identified at generation `m`.
///
/// Every prefix `u` of length `l < m` contributes the level-1 glue pairs pushed down to
/// generation `m`, which is the copy-and-glue recursion unrolled.
fn identifications(spec: &FractalSpec, m: usize) -> Vec<(usize, usize)> {
    let n = spec.n_maps;
    let n0 = spec.n_boundary();
    let mut out = Vec::new();
    for l in 0..m {
        let rest = m - l - 1;
        let tail = n.pow(rest as u32);
        let ends: Vec<(usize, usize)> = (0..n0).map(|a| spec.boundary_address(a, rest)).collect();
        for u in 0..n.pow(l as u32) {
            for &[[i, a], [j, b]] in &spec.glue {
                let (wa, ca) = ends[a];
                let (wb, cb) = ends[b];
                let x = ((u * n + i) * tail + wa) * n0 + ca;
                let y = ((u * n + j) * tail + wb) * n0 + cb;
                out.push((x, y));
            }
        }
    }
    out
}

/// Builds `G_m` by symbolic identification of cell corners.
pub fn build_graph(spec: &FractalSpec, m: usize) -> ApproxGraph {
    assemble_graph(spec, m, identifications(spec, m))
}

/// [`build_graph`] with the identifications processed in a shuffled order; the
/// result must not depend on `seed`.
pub fn build_graph_shuffled(spec: &FractalSpec, m: usize, seed: u64) -> ApproxGraph {
    let mut pairs = identifications(spec, m);
    let mut rng = linalg::seeded_rng(seed);
    pairs.shuffle(&mut rng);
    for p in pairs.iter_mut() {
        if rand::Rng::random::<bool>(&mut rng) {
            *p = (p.1, p.0);
        }
    }
    assemble_graph(spec, m, pairs)
}

fn assemble_graph(spec: &FractalSpec, m: usize, pairs: Vec<(usize, usize)>) -> ApproxGraph {
    let n = spec.n_maps;
    let n0 = spec.n_boundary();
    let n_cells = n.pow(m as u32);
    let n_raw = n_cells * n0;
    let mut uf = UnionFind::new(n_raw);
    for (x, y) in pairs {
        uf.union(x, y);
    }

    // ascending scan: the first raw index met in a class is its minimum
    let mut root_to_vertex = vec![usize::MAX; n_raw];
    let mut raw_to_vertex = vec![0; n_raw];
    let mut canonical = Vec::new();
    for raw in 0..n_raw {
        let r = uf.find(raw);
        if root_to_vertex[r] == usize::MAX {
            root_to_vertex[r] = canonical.len();
            canonical.push(raw);
        }
        raw_to_vertex[raw] = root_to_vertex[r];
    }

    let nv = canonical.len();
    let mut member_ptr = vec![0; nv + 1];
    for &v in &raw_to_vertex {
        member_ptr[v + 1] += 1;
    }
    for v in 0..nv {
        member_ptr[v + 1] += member_ptr[v];
    }
    let mut fill = member_ptr.clone();
    let mut members = vec![0; n_raw];
    for (raw, &v) in raw_to_vertex.iter().enumerate() {
        members[fill[v]] = raw;
        fill[v] += 1;
    }

    let mut edges = Vec::with_capacity(n_cells * spec.conductances0.len());
    for w in 0..n_cells {
        for (e, c) in spec.conductances0.iter().enumerate() {
            edges.push(GraphEdge {
                u: raw_to_vertex[w * n0 + c.edge[0]],
                v: raw_to_vertex[w * n0 + c.edge[1]],
                word: w,
                base_edge: e,
            });
        }
    }

    let boundary = (0..n0)
        .map(|a| {
            let (w, c) = spec.boundary_address(a, m);
            raw_to_vertex[w * n0 + c]
        })
        .collect();

    ApproxGraph {
        generation: m,
        n_maps: n,
        n_corners: n0,
        raw_to_vertex,
        canonical,
        member_ptr,
        members,
        edges,
        boundary,
    }
}

/// `|V_m| = alpha N^m + beta`, valid when each generation step identifies `b` vertices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexCountFormula {
    pub n_maps: usize,
    pub n_boundary: usize,
    pub identified_per_step: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl VertexCountFormula {
    /// Exact count `N_0 N^m − b (N^m − 1)/(N − 1)`, saturating at `usize::MAX`.
    pub fn count(&self, m: usize) -> usize {
        let n = self.n_maps as u128;
        let Some(nm) = u32::try_from(m).ok().and_then(|m| n.checked_pow(m)) else {
            return usize::MAX;
        };
        let v = self.n_boundary as u128 * nm - self.identified_per_step as u128 * (nm - 1) / (n - 1);
        usize::try_from(v).unwrap_or(usize::MAX)
    }
}

/// Derived constants of a validated spec.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractalInfo {
    pub n_maps: usize,
    pub n_boundary: usize,
    /// Largest number of cells meeting at a vertex.
    pub max_cells_per_vertex: usize,
    /// Vertices identified per generation step.
    pub identified_per_step: usize,
    pub d_resistance: f64,
    pub d_euclidean: Option<f64>,
    pub renorm_min: f64,
    pub renorm_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub contraction_ratios: Option<Vec<f64>>,
    pub vertex_count: VertexCountFormula,
}

/// Solves `Σ x_j^d = 1` for `d` by bisection.
fn similarity_dimension(ratios: &[f64]) -> f64 {
    let f = |d: f64| ratios.iter().map(|r| r.powf(d)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Checks every structural invariant of `spec` and derives its constants.
pub fn validate_spec(spec: &FractalSpec) -> Result<FractalInfo> {
    let n = spec.n_maps;
    if n < 2 {
        return Err(Error::MalformedSpec(format!("n_maps = {n}, need at least 2")));
    }
    if spec.renorm.len() != n {
        return Err(Error::MalformedSpec(format!("{} renormalisation factors for {n} maps", spec.renorm.len())));
    }
    for (index, &value) in spec.renorm.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            return Err(Error::BadWeights { index, value });
        }
    }

    let n0 = spec.n_boundary();
    if n0 < 2 || n0 > n {
        return Err(Error::MalformedSpec(format!("boundary has {n0} points, need 2..={n}")));
    }
    if spec.boundary.iter().any(|&p| p >= n) {
        return Err(Error::MalformedSpec("boundary references a map index out of range".into()));
    }
    if spec.boundary.iter().collect::<BTreeSet<_>>().len() != n0 {
        return Err(Error::MalformedSpec("boundary indices are not distinct".into()));
    }
    if let Some(c) = &spec.boundary_corners {
        if c.len() != n0 || c.iter().any(|&x| x >= n0) {
            return Err(Error::MalformedSpec("boundary_corners must list one corner index per boundary point".into()));
        }
    }

    for (pair, &[[i, a], [j, b]]) in spec.glue.iter().enumerate() {
        let reason = if i >= n || j >= n {
            Some(format!("map index out of range 0..{n}"))
        } else if i == j {
            Some("both sides lie in the same cell".to_string())
        } else if a >= n0 || b >= n0 {
            Some(format!("corner is not a boundary index 0..{n0}"))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::BadGlue { pair, reason });
        }
    }

    let mut seen = BTreeSet::new();
    for c in &spec.conductances0 {
        let [a, b] = c.edge;
        if a >= n0 || b >= n0 || a == b {
            return Err(Error::BadConductance(format!("edge [{a}, {b}] is not a pair of distinct boundary indices")));
        }
        if !(c.tau > 0.0 && c.tau.is_finite()) {
            return Err(Error::BadConductance(format!("edge [{a}, {b}] has conductance {}", c.tau)));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::BadConductance(format!("edge [{a}, {b}] listed twice")));
        }
    }
    let mut uf = UnionFind::new(n0);
    for c in &spec.conductances0 {
        uf.union(c.edge[0], c.edge[1]);
    }
    if (0..n0).any(|a| uf.find(a) != uf.find(0)) {
        return Err(Error::DisconnectedBase);
    }

    let contraction_ratios = match &spec.maps {
        None => None,
        Some(maps) => Some(check_geometry(spec, maps)?),
    };

    if let Some(w) = &spec.measure_weights {
        crate::measure::MeasureSpec::new(w.clone())?;
        if w.len() != n {
            return Err(Error::BadMeasure(format!("{} weights for {n} maps", w.len())));
        }
    }

    let g1 = build_graph(spec, 1);
    if g1.edges().iter().any(|e| e.u == e.v) {
        return Err(Error::BadGlue { pair: 0, reason: "glue collapses a cell edge".into() });
    }
    if g1.boundary_vertices().iter().collect::<BTreeSet<_>>().len() != n0 {
        return Err(Error::BadGlue { pair: 0, reason: "glue identifies two boundary points".into() });
    }
    if !g1.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let g2 = build_graph(spec, 2);
    let b = n * n0 - g1.n_vertices();
    let beta = b as f64 / (n - 1) as f64;

    Ok(FractalInfo {
        n_maps: n,
        n_boundary: n0,
        max_cells_per_vertex: g1.max_cells_per_vertex().max(g2.max_cells_per_vertex()),
        identified_per_step: b,
        d_resistance: similarity_dimension(&spec.renorm),
        d_euclidean: contraction_ratios.as_deref().map(similarity_dimension),
        renorm_min: spec.renorm_min(),
        renorm_max: spec.renorm_max(),
        tau_min: spec.tau_min(),
        tau_max: spec.tau_max(),
        contraction_ratios,
        vertex_count: VertexCountFormula {
            n_maps: n,
            n_boundary: n0,
            identified_per_step: b,
            alpha: n0 as f64 - beta,
            beta,
        },
    })
}

fn check_geometry(spec: &FractalSpec, maps: &[AffineMap]) -> Result<Vec<f64>> {
    let n = spec.n_maps;
    if maps.len() != n {
        return Err(Error::MalformedSpec(format!("{} maps for n_maps = {n}", maps.len())));
    }
    let d = maps[0].dim();
    if spec.dim != 0 && spec.dim != d {
        return Err(Error::MalformedSpec(format!("dim = {} but maps act on R^{d}", spec.dim)));
    }
    let mut ratios = Vec::with_capacity(n);
    for (index, f) in maps.iter().enumerate() {
        if f.dim() != d || f.linear_part.len() != d || f.linear_part.iter().any(|r| r.len() != d) {
            return Err(Error::MalformedSpec(format!("map {index} does not act on R^{d}")));
        }
        let (min, max) = f.singular_value_range()?;
        if max - min > 1e-12 {
            return Err(Error::NotSimilarity { index, min, max });
        }
        if !(max > 0.0 && max < 1.0) {
            return Err(Error::NonContractive { index, ratio: max });
        }
        ratios.push(max);
    }
    if let Some(q) = &spec.fixed_points {
        if q.len() != n {
            return Err(Error::MalformedSpec(format!("{} fixed points for {n} maps", q.len())));
        }
        for (j, (f, qj)) in maps.iter().zip(q).enumerate() {
            let p = f.fixed_point();
            if qj.len() != d || p.iter().zip(qj).any(|(x, y)| (x - y).abs() > 1e-9) {
                return Err(Error::MalformedSpec(format!("fixed_points[{j}] is not the fixed point of map {j}")));
            }
        }
    }
    Ok(ratios)
}

/// Coordinates of the boundary points `V_0`, in boundary order.
pub fn boundary_coordinates(spec: &FractalSpec) -> Result<Vec<Vec<f64>>> {
    let maps = spec.maps.as_ref().ok_or(Error::NoGeometry)?;
    let n0 = spec.n_boundary();
    let mut x: Vec<Vec<f64>> = (0..n0).map(|a| maps[spec.boundary[a]].fixed_point()).collect();
    // x_a = F_{boundary[a]}(x_{corner(a)}); a contraction, so iterate to the fixed point
    for _ in 0..200 {
        let next: Vec<Vec<f64>> = (0..n0)
            .map(|a| maps[spec.boundary[a]].apply(&x[spec.corner_of_boundary(a)]))
            .collect();
        let change = next
            .iter()
            .zip(&x)
            .flat_map(|(p, q)| p.iter().zip(q).map(|(s, t)| (s - t).abs()))
            .fold(0.0, f64::max);
        x = next;
        if change < 1e-16 {
            break;
        }
    }
    Ok(x)
}

/// Coordinates of every vertex of `graph`, checking that glued addresses agree.
pub fn vertex_coordinates(spec: &FractalSpec, graph: &ApproxGraph) -> Result<Vec<Vec<f64>>> {
    let maps = spec.maps.as_ref().ok_or(Error::NoGeometry)?;
    let corners = boundary_coordinates(spec)?;
    let mut diameter: f64 = 0.0;
    for p in &corners {
        for q in &corners {
            diameter = diameter.max(dist(p, q));
        }
    }
    let tolerance = 1e-9 * diameter;
    let m = graph.generation();
    let mut out: Vec<Option<Vec<f64>>> = vec![None; graph.n_vertices()];
    for w in 0..graph.n_cells() {
        let word = word_digits(w, m, spec.n_maps);
        for (c, q) in corners.iter().enumerate() {
            let mut x = q.clone();
            for &l in word.iter().rev() {
                x = maps[l].apply(&x);
            }
            let v = graph.vertex_of(w, c);
            match &out[v] {
                None => out[v] = Some(x),
                Some(prev) => {
                    let distance = dist(prev, &x);
                    if distance > tolerance {
                        return Err(Error::GlueGeometryMismatch { distance, tolerance });
                    }
                }
            }
        }
    }
    Ok(out.into_iter().map(|x| x.expect("every vertex is a cell corner")).collect())
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
