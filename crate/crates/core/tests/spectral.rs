mod common;

use std::f64::consts::PI;

use fractal_spectra::spectral::{
    self, clusters, dirichlet_eigensolve, eigensolve, ew_bracket, fem_eigensolve, EigenOptions, SolverChoice, SolverKind,
};
use fractal_spectra::{Error, Model};

#[test]
fn interval_neumann_closed_form() {
    let model = Model::preset("interval").unwrap();
    for m in 1..=8 {
        let n = (1usize << m) + 1;
        let k = n.min(20);
        let res = eigensolve(&model, m, &EigenOptions::new(k)).unwrap();
        let top = common::interval_eigenvalue(m, n - 1);
        for (j, l) in res.eigenvalues.iter().enumerate() {
            let exact = common::interval_eigenvalue(m, j);
            assert!((l - exact).abs() <= 1e-9 * exact + 1e-12 * top, "m={m} j={j}: {l} vs {exact}");
        }
    }
}

#[test]
fn interval_dirichlet_closed_form() {
    let model = Model::preset("interval").unwrap();
    for m in 2..=7 {
        let g = model.graph(m);
        let k = ((1usize << m) - 1).min(10);
        let res = dirichlet_eigensolve(&model, m, g.boundary_vertices(), &EigenOptions::new(k).vectors()).unwrap();
        for (j, l) in res.eigenvalues.iter().enumerate() {
            assert!(common::rel_err(*l, common::interval_eigenvalue(m, j + 1)) < 1e-10);
        }
        let phi = res.eigenvector(0).unwrap();
        for &b in g.boundary_vertices() {
            assert_eq!(phi[b], 0.0);
        }
    }
}

#[test]
fn interval_fem_closed_form() {
    // consistent-mass P1 elements: λ_j = 6/h² (1 − cos jπh)/(2 + cos jπh)
    let model = Model::preset("interval").unwrap();
    let m = 5;
    let h = 1.0 / 32.0;
    let res = fem_eigensolve(model.energy(m).unwrap().matrix(), &model.gram(m).unwrap(), 8, false).unwrap();
    for (j, l) in res.eigenvalues.iter().enumerate() {
        let c = (j as f64 * PI * h).cos();
        let exact = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
        assert!((l - exact).abs() < 1e-9 * exact.max(1.0), "j={j}: {l} vs {exact}");
    }
}

#[test]
fn sg_level1_spectrum() {
    // by hand: C_1 has conductance 5/3, masses 1/9 and 2/9
    let model = Model::preset("sg").unwrap();
    let res = eigensolve(&model, 1, &EigenOptions::new(6)).unwrap();
    let expected = [0.0, 22.5, 22.5, 45.0, 45.0, 45.0];
    for (l, e) in res.eigenvalues.iter().zip(expected) {
        assert!((l - e).abs() < 1e-12);
    }
    assert_eq!(res.clusters(), vec![0..1, 1..3, 3..6]);
}

#[test]
fn eigenvectors_are_mass_orthonormal() {
    let model = Model::preset("pentagasket3").unwrap();
    let m = 3;
    let res = eigensolve(&model, m, &EigenOptions::new(6).vectors()).unwrap();
    let mu = model.vertex_measure(m).unwrap().values;
    let c = model.energy(m).unwrap();
    for i in 0..6 {
        let vi = res.eigenvector(i).unwrap();
        let cv = c.matrix().mul_vec(&vi);
        let r: f64 = cv.iter().zip(&vi).zip(&mu).map(|((a, v), w)| (a - res.eigenvalues[i] * w * v).powi(2)).sum();
        assert!(r.sqrt() < 1e-9 * (1.0 + res.eigenvalues[i]));
        for j in 0..6 {
            let vj = res.eigenvector(j).unwrap();
            let ip: f64 = vi.iter().zip(&vj).zip(&mu).map(|((a, b), w)| a * b * w).sum();
            assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
        }
    }
}

#[test]
fn iterative_agrees_with_dense() {
    for (name, m) in [("sg", 5), ("pentagasket5", 3), ("sg-level3", 3)] {
        let model = Model::preset(name).unwrap();
        let d = eigensolve(&model, m, &EigenOptions::new(8).solver(SolverChoice::Dense)).unwrap();
        let it = eigensolve(&model, m, &EigenOptions::new(8).solver(SolverChoice::Iterative).seed(3)).unwrap();
        assert_eq!(d.solver, SolverKind::Dense);
        assert_eq!(it.solver, SolverKind::Iterative);
        for (a, b) in d.eigenvalues.iter().zip(&it.eigenvalues) {
            assert!((a - b).abs() < 1e-7 * (1.0 + a), "{name}: {a} vs {b}");
        }
        assert!(it.residuals.iter().all(|r| *r <= 1e-9));
    }
}

#[test]
fn iterative_is_seed_deterministic() {
    let model = Model::preset("sg").unwrap();
    let opts = EigenOptions::new(5).solver(SolverChoice::Iterative).seed(11);
    let a = eigensolve(&model, 5, &opts).unwrap();
    let b = eigensolve(&model, 5, &opts).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
}

#[test]
fn large_problems_use_the_iterative_solver() {
    let model = Model::preset("sg").unwrap();
    let res = eigensolve(&model, 8, &EigenOptions::new(4)).unwrap();
    assert_eq!(res.solver, SolverKind::Iterative);
    assert!(res.eigenvalues[0].abs() < 1e-8);
    assert!((res.eigenvalues[1] - res.eigenvalues[2]).abs() < 1e-6 * res.eigenvalues[1]);
    let err = eigensolve(&model, 8, &EigenOptions::new(4).solver(SolverChoice::Dense)).unwrap_err();
    assert!(matches!(err, Error::DenseLimitExceeded { .. }));
}

#[test]
fn eigenvalues_increase_with_generation() {
    let model = Model::preset("sg").unwrap();
    let mut prev: Option<Vec<f64>> = None;
    for m in 1..=5 {
        let res = eigensolve(&model, m, &EigenOptions::new(6)).unwrap();
        if let Some(p) = prev {
            for (a, b) in p.iter().zip(&res.eigenvalues) {
                assert!(*b >= a - 1e-9);
            }
        }
        prev = Some(res.eigenvalues);
    }
}

#[test]
fn brackets() {
    let b = ew_bracket(10.0, 0.0, 50.0);
    assert_eq!((b.lower, b.upper), (10.0, 10.0));
    let b = ew_bracket(0.0, 0.3, 50.0);
    assert_eq!((b.lower, b.upper), (0.0, 0.0));
    let b = ew_bracket(10.0, 0.1, 20.0);
    assert!(!b.bounded && b.upper.is_infinite());
    let b = ew_bracket(10.0, 0.01, 20.0);
    assert!(b.bounded && b.contains(10.5, 0.0) && !b.contains(20.0, 0.0));
}

#[test]
fn subsequent_generation_factor() {
    let model = Model::preset("interval").unwrap();
    // λ_1^Dir of G_1 on the interval is 8
    assert!((spectral::dirichlet_ground_state(&model, 1).unwrap() - 8.0).abs() < 1e-12);
    let f = spectral::subseq_factor(&model, 3, 10.0).unwrap();
    assert!(common::rel_err(f, 1.0 / (1.0 - 10.0 / 8.0 / 64.0)) < 1e-12);
    assert!(matches!(spectral::subseq_factor(&model, 0, 10.0), Err(Error::FactorUndefined { .. })));
}

#[test]
fn cluster_grouping() {
    assert_eq!(clusters(&[0.0, 1.0, 1.0 + 1e-9, 2.0]), vec![0..1, 1..3, 3..4]);
    assert_eq!(clusters(&[]), Vec::<std::ops::Range<usize>>::new());
}

#[test]
fn convergence_table_rows() {
    let model = Model::preset("interval").unwrap();
    let t = spectral::convergence_table(&model, 2..=7, &EigenOptions::new(2)).unwrap();
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.reference_generation, 7);
    for r in &t.rows[1..5] {
        let obs = r.observed_ratio.unwrap();
        assert!(obs > 0.2 && obs < 0.3, "{obs}");
        assert!((r.theoretical_ratio.unwrap() - 0.5).abs() < 1e-12);
    }
    assert!(t.rows.last().unwrap().observed_ratio.is_none());
}

#[test]
fn input_errors() {
    let model = Model::preset("sg").unwrap();
    assert!(matches!(eigensolve(&model, 1, &EigenOptions::new(7)), Err(Error::TooManyEigenpairs { .. })));
    let all: Vec<usize> = (0..6).collect();
    assert!(matches!(dirichlet_eigensolve(&model, 1, &all, &EigenOptions::new(1)), Err(Error::EmptyInterior)));
    assert!(matches!(dirichlet_eigensolve(&model, 1, &[17], &EigenOptions::new(1)), Err(Error::UnknownVertex(17))));
    assert!(matches!(
        spectral::solve_diagonal_mass(model.energy(1).unwrap().matrix(), &[1.0, 1.0, 1.0, 1.0, 1.0, 0.0], 1, &EigenOptions::new(2)),
        Err(Error::MassNotPD)
    ));
}
