//! Dirichlet eigenvalues: boundary values pinned to zero.
//!
//! cargo run --example dirichlet_spectrum

use fractal_spectra::spectral::{dirichlet_eigensolve, EigenOptions};
use fractal_spectra::Model;

fn main() -> fractal_spectra::Result<()> {
    for name in ["interval", "sg", "pentagasket3"] {
        let model = Model::preset(name)?;
        for m in 1..=4 {
            let g = model.graph(m);
            let k = 4.min(g.n_vertices() - g.boundary_vertices().len());
            let res = dirichlet_eigensolve(&model, m, g.boundary_vertices(), &EigenOptions::new(k).vectors())?;
            let phi = res.eigenvector(0).expect("vectors requested");
            let on_boundary = g.boundary_vertices().iter().map(|&b| phi[b].abs()).fold(0.0, f64::max);
            println!("{name:>12} m={m} {:?}  max|phi_1| on V_0 = {on_boundary}", res.eigenvalues);
        }
    }
    Ok(())
}
