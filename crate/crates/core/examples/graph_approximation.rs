//! Builds the first few graph approximations of each preset and checks them
//! against the closed-form vertex count.
//!
//! cargo run --example graph_approximation

use fractal_spectra::{presets, Model};

fn main() -> fractal_spectra::Result<()> {
    for spec in presets::all() {
        let model = Model::new(spec)?;
        let name = model.spec().name.clone().unwrap_or_default();
        print!("{name:>14}:");
        for m in 0..=4 {
            let g = model.graph(m);
            assert_eq!(g.n_vertices(), model.predicted_vertex_count(m));
            print!(" {:>5}", g.n_vertices());
        }
        println!();
    }

    // addresses of the generation-2 gasket
    let sg = Model::preset("sg")?;
    let g = sg.graph(2);
    for v in 0..g.n_vertices() {
        let cells: Vec<String> = g.cells_of_vertex(v)?.iter().map(|c| format!("{}", c.word)).collect();
        println!("v{v:<3} {:<8} cells [{}]", g.address(v).to_string(), cells.join(" "));
    }
    Ok(())
}
