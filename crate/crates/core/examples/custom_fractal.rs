//! A fractal defined in JSON: the interval split into three pieces.
//!
//! cargo run --example custom_fractal

use fractal_spectra::energy::check_compatibility;
use fractal_spectra::spectral::{eigensolve, EigenOptions};
use fractal_spectra::{FractalSpec, Model};

const SPEC: &str = r#"{
  "name": "interval-3",
  "n_maps": 3,
  "dim": 1,
  "fixed_points": [[0.0], [0.5], [1.0]],
  "maps": [
    {"matrix": [[0.3333333333333333]], "translation": [0.0]},
    {"matrix": [[0.3333333333333333]], "translation": [0.3333333333333333]},
    {"matrix": [[0.3333333333333333]], "translation": [0.6666666666666666]}
  ],
  "boundary": [0, 2],
  "glue": [[[0, 1], [1, 0]], [[1, 1], [2, 0]]],
  "renorm": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
  "conductances0": [{"edge": [0, 1], "tau": 1.0}]
}"#;

fn main() -> fractal_spectra::Result<()> {
    let spec = FractalSpec::from_json(SPEC)?;
    println!("compatibility residual {:.2e}", check_compatibility(&spec, 1e-10)?.residual);
    let model = Model::new(spec)?;
    for m in 1..=5 {
        let res = eigensolve(&model, m, &EigenOptions::new(3))?;
        println!("m={m} |V|={:<4} lambda_2 = {:.8}  (pi^2 = {:.8})", model.graph(m).n_vertices(), res.eigenvalues[1], std::f64::consts::PI.powi(2));
    }
    Ok(())
}
