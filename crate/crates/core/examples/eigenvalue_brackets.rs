//! Two-sided brackets for limit eigenvalues from one coarse solve. The upper end is
//! finite only once delta_m (1 + lambda_plus) < 1.
//!
//! cargo run --release --example eigenvalue_brackets [preset]

use fractal_spectra::quasiuni::delta_bound;
use fractal_spectra::spectral::{eigensolve, ew_bracket, EigenOptions};
use fractal_spectra::Model;

fn main() -> fractal_spectra::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "interval".into());
    let model = Model::preset(&name)?;
    let k = 4;
    let reference = if name == "interval" { 12 } else { 6 };
    let fine = eigensolve(&model, reference, &EigenOptions::new(k))?;
    for m in (reference - 6)..reference {
        let coarse = eigensolve(&model, m, &EigenOptions::new(k.min(model.graph(m).n_vertices())))?;
        let delta = delta_bound(&model, m)?.general;
        println!("m={m} delta={delta:.5}");
        for i in 1..coarse.eigenvalues.len() {
            let b = ew_bracket(coarse.eigenvalues[i], delta, 2.0 * fine.eigenvalues[i]);
            println!(
                "  k={} [{:10.4}, {:10.4}] contains m={reference} value {:10.4}: {}",
                i + 1,
                b.lower,
                b.upper,
                fine.eigenvalues[i],
                b.contains(fine.eigenvalues[i], 1e-9)
            );
        }
    }
    Ok(())
}
