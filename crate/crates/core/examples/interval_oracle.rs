//! On the unit interval the graph eigenvalues are known in closed form, which makes it
//! a good sanity check for the solvers.
//!
//! cargo run --release --example interval_oracle

use std::f64::consts::PI;

use fractal_spectra::spectral::{eigensolve, EigenOptions, SolverChoice};
use fractal_spectra::Model;

fn main() -> fractal_spectra::Result<()> {
    let model = Model::preset("interval")?;
    let mut prev = None;
    for m in 2..=10 {
        let n = 1usize << m;
        let k = 8.min(n + 1);
        let res = eigensolve(&model, m, &EigenOptions::new(k))?;
        let worst = (1..k)
            .map(|i| {
                let exact = 2.0 * (4.0f64).powi(m as i32) * (1.0 - (i as f64 * PI / n as f64).cos());
                (res.eigenvalues[i] - exact).abs() / exact
            })
            .fold(0.0, f64::max);
        let err = (res.eigenvalues[1] - PI * PI).abs();
        let ratio = prev.map(|p: f64| err / p).unwrap_or(f64::NAN);
        println!("m={m:<2} lambda_2 = {:.10}  |lambda_2 - pi^2| = {err:.3e}  ratio {ratio:.4}  worst rel {worst:.1e}", res.eigenvalues[1]);
        prev = Some(err);
    }

    // Same thing through the iterative solver.
    let opts = EigenOptions::new(6).solver(SolverChoice::Iterative).seed(7);
    let res = eigensolve(&model, 12, &opts)?;
    println!("m=12 iterative: {:?}", res.eigenvalues);
    Ok(())
}
