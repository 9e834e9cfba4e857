mod common;

use fractal_spectra::linalg::top_generalized_eigenvalue;
use fractal_spectra::measure::{self, MeasureSpec};
use fractal_spectra::{presets, Error, Model};

#[test]
fn sg_level1_masses() {
    let model = Model::preset("sg").unwrap();
    let g = model.graph(1);
    let mu = model.vertex_measure(1).unwrap();
    for v in 0..g.n_vertices() {
        let expected = if g.cell_count(v) == 1 { 1.0 / 9.0 } else { 2.0 / 9.0 };
        assert!(common::rel_err(mu.values[v], expected) < 1e-14);
    }
}

#[test]
fn pentagasket5_masses() {
    let model = Model::preset("pentagasket5").unwrap();
    for a in &model.measure().boundary_weights().values {
        assert!((a - 0.2).abs() < 1e-12);
    }
    for m in 1..=3 {
        let g = model.graph(m);
        let mu = model.vertex_measure(m).unwrap();
        let unit = 1.0 / 5f64.powi(m as i32 + 1);
        for v in 0..g.n_vertices() {
            let expected = if g.cell_count(v) == 2 { 2.0 * unit } else { unit };
            assert!(common::rel_err(mu.values[v], expected) < 1e-12);
        }
        // the cell masses 1/5^m dominate the vertex masses
        assert!(common::rel_err(mu.mu_plus, 5.0 * unit) < 1e-12);
    }
}

#[test]
fn interval_gram_is_p1_mass_matrix() {
    let model = Model::preset("interval").unwrap();
    for m in 0..=4 {
        let g = model.gram(m).unwrap();
        let x = fractal_spectra::ifs::vertex_coordinates(model.spec(), &model.graph(m)).unwrap();
        let h = 1.0 / (1u64 << m) as f64;
        let n = x.len();
        for i in 0..n {
            for j in 0..n {
                let d = (x[i][0] - x[j][0]).abs();
                let expected = if i == j {
                    if x[i][0] == 0.0 || x[i][0] == 1.0 { h / 3.0 } else { 2.0 * h / 3.0 }
                } else if (d - h).abs() < 1e-12 {
                    h / 6.0
                } else {
                    0.0
                };
                assert!((g.get(i, j) - expected).abs() < 1e-15, "m={m} ({i},{j})");
            }
        }
    }
}

#[test]
fn sg_cell_gram_matches_spline_integrals() {
    let model = Model::preset("sg").unwrap();
    let g0 = &model.measure().cell_gram().matrix;
    let diag = g0[(0, 0)];
    let off = g0[(0, 1)];
    assert!((diag + 2.0 * off - 1.0 / 3.0).abs() < 1e-14);
    for i in 0..3 {
        for j in 0..3 {
            let v = if i == j { diag } else { off };
            assert!((g0[(i, j)] - v).abs() < 1e-14);
        }
    }
    assert!(model.measure().cell_gram().residual < 1e-12);
}

#[test]
fn gram_identities() {
    for spec in presets::all() {
        let model = Model::new(spec).unwrap();
        for m in 0..=2 {
            let g = model.gram(m).unwrap();
            let mu = model.vertex_measure(m).unwrap();
            let rows = g.row_sums();
            for (a, b) in rows.iter().zip(&mu.values) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((mu.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let h = model.prolongation(m, m + 1).unwrap();
            let pulled = h.transpose().matmul(&model.gram(m + 1).unwrap()).matmul(&h);
            assert!(pulled.add_scaled(&g, -1.0).max_abs() < 1e-11);
            let top = top_generalized_eigenvalue(|x| g.mul_vec(x), &fractal_spectra::linalg::CsrMatrix::from_diagonal(&mu.values), 0, 1e-13).unwrap();
            assert!(top <= 1.0 + 1e-12, "{:?} m={m}: {top}", model.spec().name);
        }
    }
}

#[test]
fn skewed_measure() {
    let w = MeasureSpec::new(vec![0.6, 0.3, 0.1]).unwrap();
    let model = Model::with_measure(presets::sg(), w.clone()).unwrap();
    let bw = measure::boundary_weights(model.spec(), &w).unwrap();
    assert!((bw.values.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    assert!(bw.values[0] > bw.values[1] && bw.values[1] > bw.values[2]);
    let mu = model.vertex_measure(3).unwrap();
    assert!((mu.values.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    assert!(mu.mu_minus > 0.0 && mu.mu_minus <= mu.mu_plus);
}

#[test]
fn bad_weights() {
    assert!(matches!(MeasureSpec::new(vec![0.5, 0.6]), Err(Error::BadMeasure(_))));
    assert!(matches!(MeasureSpec::new(vec![1.0, 0.0]), Err(Error::BadMeasure(_))));
    assert!(matches!(Model::with_measure(presets::sg(), MeasureSpec::uniform(2)), Err(Error::BadMeasure(_))));
}
