//! Low spectrum of the gasket Laplacian, generation by generation.
//!
//! cargo run --release --example gasket_spectrum

use fractal_spectra::spectral::{eigensolve, EigenOptions};
use fractal_spectra::Model;

fn main() -> fractal_spectra::Result<()> {
    let model = Model::preset("sg")?;
    for m in 1..=6 {
        let k = 10.min(model.graph(m).n_vertices());
        let res = eigensolve(&model, m, &EigenOptions::new(k))?;
        let vals: Vec<String> = res.eigenvalues.iter().map(|l| format!("{l:9.3}")).collect();
        println!("m={m} |V|={:<5} {:?} {}", model.graph(m).n_vertices(), res.solver, vals.join(""));
        for c in res.clusters() {
            if c.len() > 1 {
                print!("  [{}..{}) multiplicity {}", c.start + 1, c.end + 1, c.len());
            }
        }
        println!();
    }
    Ok(())
}
