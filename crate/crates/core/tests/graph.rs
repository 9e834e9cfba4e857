mod common;

use std::collections::BTreeSet;

use fractal_spectra::ifs::{self, build_graph, build_graph_shuffled, word_digits, AffineMap, BaseConductance};
use fractal_spectra::{presets, Error, FractalSpec, Model};

/// Distinct corner points of all m-cells, found by applying the maps directly.
fn geometric_vertex_count(spec: &FractalSpec, m: usize) -> usize {
    let maps = spec.maps.as_ref().unwrap();
    let base = ifs::boundary_coordinates(spec).unwrap();
    let mut seen = BTreeSet::new();
    for w in 0..spec.n_maps.pow(m as u32) {
        for p in &base {
            let mut x = p.clone();
            for &d in word_digits(w, m, spec.n_maps).iter().rev() {
                x = maps[d].apply(&x);
            }
            seen.insert(x.iter().map(|c| (c * 1e9).round() as i64).collect::<Vec<_>>());
        }
    }
    seen.len()
}

#[test]
fn vertex_counts_match_identification_count() {
    for spec in presets::all() {
        let info = ifs::validate_spec(&spec).unwrap();
        for m in 0..=5 {
            let g = build_graph(&spec, m);
            let expected = common::counted_vertices(spec.n_maps, spec.n_boundary(), info.identified_per_step, m);
            assert_eq!(g.n_vertices(), expected, "{:?} m={m}", spec.name);
            assert_eq!(info.vertex_count.count(m), expected);
        }
    }
}

#[test]
fn known_vertex_counts() {
    assert_eq!(build_graph(&presets::sg(), 7).n_vertices(), 3282);
    assert_eq!(build_graph(&presets::pentagasket5(), 2).n_vertices(), 95);
    let sg = ifs::validate_spec(&presets::sg()).unwrap();
    assert_eq!((sg.vertex_count.alpha, sg.vertex_count.beta), (1.5, 1.5));
}

#[test]
fn vertex_counts_match_geometry() {
    for spec in presets::all() {
        for m in 0..=4 {
            assert_eq!(build_graph(&spec, m).n_vertices(), geometric_vertex_count(&spec, m), "{:?} m={m}", spec.name);
        }
    }
}

#[test]
fn glue_coordinates_agree() {
    for spec in presets::all() {
        let g = build_graph(&spec, 3);
        let x = ifs::vertex_coordinates(&spec, &g).unwrap();
        let keys: BTreeSet<Vec<i64>> = x.iter().map(|p| p.iter().map(|c| (c * 1e9).round() as i64).collect()).collect();
        assert_eq!(keys.len(), g.n_vertices());
    }
}

#[test]
fn addresses_round_trip() {
    let model = Model::preset("pentagasket3").unwrap();
    let g = model.graph(3);
    for v in 0..g.n_vertices() {
        assert_eq!(g.vertex_of_address(&g.address(v)), Some(v));
        for c in g.cells_of_vertex(v).unwrap() {
            assert_eq!(g.vertex_of(c.word, c.corner), v);
        }
    }
    assert!(matches!(g.cells_of_vertex(g.n_vertices()), Err(Error::UnknownVertex(_))));
}

#[test]
fn sg_structure() {
    let g = build_graph(&presets::sg(), 2);
    assert_eq!(g.n_cells(), 9);
    assert_eq!(g.edges().len(), 27);
    assert_eq!(g.boundary_vertices().len(), 3);
    // boundary points lie in one cell, all others in two
    let single: usize = (0..g.n_vertices()).filter(|&v| g.cell_count(v) == 1).count();
    assert_eq!(single, 3);
    assert_eq!(g.max_cells_per_vertex(), 2);
    assert!(g.is_connected());
    for &b in g.boundary_vertices() {
        let a = g.address(b);
        assert!(a.word.iter().all(|&d| d == a.word[0]));
    }
}

#[test]
fn shuffled_union_find_gives_same_graph() {
    for spec in presets::all() {
        let a = build_graph(&spec, 3);
        for seed in [1, 2, 99] {
            let b = build_graph_shuffled(&spec, 3, seed);
            assert_eq!(a.n_vertices(), b.n_vertices());
            assert_eq!(a.edges(), b.edges());
            assert_eq!(a.boundary_vertices(), b.boundary_vertices());
        }
    }
}

#[test]
fn info_constants() {
    let sg = ifs::validate_spec(&presets::sg()).unwrap();
    assert_eq!((sg.n_maps, sg.n_boundary, sg.max_cells_per_vertex, sg.identified_per_step), (3, 3, 2, 3));
    assert!(common::rel_err(sg.d_resistance, 3f64.ln() / (5f64 / 3.0).ln()) < 1e-14);
    assert!(common::rel_err(sg.d_euclidean.unwrap(), 3f64.ln() / 2f64.ln()) < 1e-14);
    let p5 = ifs::validate_spec(&presets::pentagasket5()).unwrap();
    assert_eq!((p5.n_maps, p5.n_boundary, p5.max_cells_per_vertex), (5, 5, 2));
}

fn expect_err(spec: &FractalSpec, pred: impl Fn(&Error) -> bool) {
    let e = ifs::validate_spec(spec).unwrap_err();
    assert!(pred(&e), "unexpected error {e:?}");
}

#[test]
fn validation_errors() {
    let mut s = presets::sg();
    s.maps.as_mut().unwrap()[1] = AffineMap::homothety(1.2, &[1.0, 0.0]);
    expect_err(&s, |e| matches!(e, Error::NonContractive { index: 1, .. }));

    let mut s = presets::sg();
    s.maps.as_mut().unwrap()[0].linear_part = vec![vec![0.5, 0.0], vec![0.0, 0.25]];
    expect_err(&s, |e| matches!(e, Error::NotSimilarity { index: 0, .. }));

    let mut s = presets::sg();
    s.renorm[2] = 1.5;
    expect_err(&s, |e| matches!(e, Error::BadWeights { index: 2, .. }));

    let mut s = presets::sg();
    s.conductances0 = vec![BaseConductance { edge: [0, 1], tau: 1.0 }];
    expect_err(&s, |e| matches!(e, Error::DisconnectedBase));

    let mut s = presets::sg();
    s.conductances0[0].tau = -1.0;
    expect_err(&s, |e| matches!(e, Error::BadConductance(_)));

    let mut s = presets::sg();
    s.glue.truncate(1);
    expect_err(&s, |e| matches!(e, Error::DisconnectedGraph));

    let mut s = presets::sg();
    s.glue[0] = [[0, 1], [0, 2]];
    expect_err(&s, |e| matches!(e, Error::BadGlue { .. }));

    let mut s = presets::sg();
    s.glue[0] = [[0, 7], [1, 0]];
    expect_err(&s, |e| matches!(e, Error::BadGlue { .. }));

    let mut s = presets::sg();
    s.measure_weights = Some(vec![0.5, 0.5, 0.5]);
    expect_err(&s, |e| matches!(e, Error::BadMeasure(_)));

    let mut s = presets::sg();
    s.boundary = vec![0, 1, 5];
    expect_err(&s, |e| matches!(e, Error::MalformedSpec(_)));

    assert!(matches!(presets::by_name("sg-dim-1"), Err(Error::UnknownPreset(_))));
    assert!(matches!(presets::by_name("koch"), Err(Error::UnknownPreset(_))));
}

#[test]
fn glue_that_disagrees_with_geometry() {
    let mut s = presets::sg();
    s.glue[0] = [[0, 1], [1, 2]];
    let r = ifs::validate_spec(&s).and_then(|_| ifs::vertex_coordinates(&s, &build_graph(&s, 1)));
    assert!(r.is_err());
}

#[test]
fn spec_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for spec in presets::all() {
        let path = dir.path().join("spec.json");
        std::fs::write(&path, spec.to_json()).unwrap();
        let back = FractalSpec::from_file(&path).unwrap();
        assert_eq!(back, spec);
    }
    assert!(matches!(FractalSpec::from_json("{\"n_maps\": 2"), Err(Error::MalformedSpec(_))));
    assert!(FractalSpec::from_file(dir.path().join("missing.json")).is_err());
}

#[test]
fn abstract_spec_without_geometry() {
    let mut s = presets::sg();
    s.maps = None;
    s.fixed_points = None;
    let info = ifs::validate_spec(&s).unwrap();
    assert!(info.d_euclidean.is_none());
    assert_eq!(build_graph(&s, 3).n_vertices(), 42);
    assert!(matches!(ifs::vertex_coordinates(&s, &build_graph(&s, 1)), Err(Error::NoGeometry)));
}
