//! Eigenvalues against the defect bound delta_m, the same table the CLI writes.
//!
//! cargo run --release --example convergence_table [preset]

use fractal_spectra::spectral::{convergence_table, EigenOptions};
use fractal_spectra::Model;

fn main() -> fractal_spectra::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "sg".into());
    let model = Model::preset(&name)?;
    let table = convergence_table(&model, 1..=6, &EigenOptions::new(4))?;
    println!("{name}, k = {}, reference m = {}", table.k, table.reference_generation);
    println!("{:>2} {:>6} {:>10} {:>12} {:>9} {:>9}", "m", "|V_m|", "delta_m", "lambda_k", "obs", "theory");
    for r in &table.rows {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:9.4}")).unwrap_or_else(|| format!("{:>9}", "-"));
        println!(
            "{:>2} {:>6} {:>10.5} {:>12.5} {} {}",
            r.m,
            r.vertices,
            r.delta,
            r.eigenvalues.last().copied().unwrap_or(f64::NAN),
            fmt(r.observed_ratio),
            fmt(r.theoretical_ratio)
        );
    }
    Ok(())
}
