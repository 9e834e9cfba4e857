mod common;

use fractal_spectra::quasiuni::{self, delta_bound, que_report};
use fractal_spectra::spectral::EigenOptions;
use fractal_spectra::{presets, Error, MeasureSpec, Model};

#[test]
fn closed_form_deltas() {
    let interval = Model::preset("interval").unwrap();
    let sg = Model::preset("sg").unwrap();
    for m in 0..=10 {
        let d = delta_bound(&interval, m).unwrap();
        let exact = (1.0 + 2f64.sqrt()) / 2f64.powi(m as i32);
        assert!(common::rel_err(d.symmetric.unwrap(), exact) < 1e-12);
        assert!(common::rel_err(d.general, exact) < 1e-12);

        let d = delta_bound(&sg, m).unwrap();
        let exact = (1.0 + 3f64.sqrt()) * 2f64.sqrt() / 3f64.sqrt() * 5f64.powf(-(m as f64) / 2.0);
        assert!(common::rel_err(d.symmetric.unwrap(), exact) < 1e-12);
        assert!(d.general >= d.symmetric.unwrap());
    }
}

#[test]
fn general_bound_from_its_ingredients() {
    let model = Model::preset("pentagasket3").unwrap();
    for m in 0..=4 {
        let d = delta_bound(&model, m).unwrap();
        let mu = model.vertex_measure(m).unwrap();
        let tau = model.spec().tau_min() / model.spec().renorm_max().powi(m as i32);
        let expected = (1.0 + 3f64.sqrt()) * (mu.mu_plus / tau).sqrt();
        assert!(common::rel_err(d.general, expected) < 1e-13);
        assert!(d.general <= d.corollary * (1.0 + 1e-12));
    }
}

#[test]
fn skewed_measure_is_not_symmetric() {
    let model = Model::with_measure(presets::sg(), MeasureSpec::new(vec![0.5, 0.3, 0.2]).unwrap()).unwrap();
    assert!(!quasiuni::is_symmetric(&model));
    assert!(delta_bound(&model, 2).unwrap().symmetric.is_none());
    assert!(quasiuni::is_symmetric(&Model::preset("sg").unwrap()));
}

#[test]
fn que_report_within_bounds() {
    for name in ["sg", "pentagasket3", "sg-dim-4"] {
        let model = Model::preset(name).unwrap();
        for m in 0..=2 {
            let big_m = model.reference_generation(m, 3000);
            let r = que_report(&model, m, big_m, 0).unwrap();
            assert!(r.pass, "{name} m={m}: {:?}", r.checks);
            assert!(r.b1 > 0.0 && r.b2 > 0.0 && r.c > 0.0);
        }
    }
}

#[test]
fn defects_shrink_with_generation() {
    let model = Model::preset("sg").unwrap();
    let b1: Vec<f64> = (0..4).map(|m| quasiuni::measured_defect_b1(&model, m).unwrap()).collect();
    assert!(b1.windows(2).all(|w| w[1] < w[0]), "{b1:?}");
}

#[test]
fn que_report_is_deterministic() {
    let model = Model::preset("pentagasket5").unwrap();
    let a = que_report(&model, 1, 3, 5).unwrap();
    let b = que_report(&model, 1, 3, 5).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn interval_eigenfunction_distances() {
    // from an independent dense prototype
    let expected = [0.7071, 0.3553, 0.1776, 0.0883];
    let model = Model::preset("interval").unwrap();
    for (i, m) in (2..=5).enumerate() {
        let d = quasiuni::eigenfunction_distance(&model, m, 8, 2, &EigenOptions::new(2)).unwrap();
        assert!((d - expected[i]).abs() < 5e-4, "m={m}: {d}");
    }
}

#[test]
fn generation_order_errors() {
    let model = Model::preset("sg").unwrap();
    assert!(matches!(que_report(&model, 2, 2, 0), Err(Error::GenerationOrder { .. })));
    assert!(matches!(quasiuni::closeness_residual(&model, 3, 1), Err(Error::GenerationOrder { .. })));
}
