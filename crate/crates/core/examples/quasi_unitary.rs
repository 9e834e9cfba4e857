//! Measures each quasi-unitarity defect between generation m and a finer reference
//! generation and compares it with its bound.
//!
//! cargo run --release --example quasi_unitary [preset] [m]

use fractal_spectra::quasiuni::que_report;
use fractal_spectra::spectral::DENSE_LIMIT;
use fractal_spectra::Model;

fn main() -> fractal_spectra::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "sg".into());
    let m: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let model = Model::preset(&name)?;
    let big_m = model.reference_generation(m, DENSE_LIMIT);
    let report = que_report(&model, m, big_m, 0)?;
    println!("{name}: m = {m}, M = {big_m}, delta_m = {:.5}", report.delta.general);
    for c in &report.checks {
        println!("  {:<12} {:>12.4e} <= {:<12.4e} {}", c.name, c.measured, c.bound, if c.pass { "pass" } else { "FAIL" });
    }
    Ok(())
}
