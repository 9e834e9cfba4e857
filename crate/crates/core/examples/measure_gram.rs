//! Vertex masses and the spline Gram matrix of a self-similar measure.
//!
//! cargo run --example measure_gram

use fractal_spectra::measure::MeasureSpec;
use fractal_spectra::{presets, Model};

fn main() -> fractal_spectra::Result<()> {
    let sg = Model::preset("sg")?;
    let mu = sg.vertex_measure(1)?;
    println!("sg, m=1 masses: {:?}", mu.values);

    let p5 = Model::preset("pentagasket5")?;
    println!("pentagasket5 boundary weights: {:?}", p5.measure().boundary_weights().values);
    let mu = p5.vertex_measure(2)?;
    println!("pentagasket5, m=2: mu_+ = {}, mu_- = {}", mu.mu_plus, mu.mu_minus);

    // A lopsided measure on the gasket.
    let skew = Model::with_measure(presets::sg(), MeasureSpec::new(vec![0.5, 0.25, 0.25])?)?;
    let g = skew.gram(2)?;
    let rows = g.row_sums();
    let mu = skew.vertex_measure(2)?;
    let err = rows.iter().zip(&mu.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("skewed sg, m=2: |G 1 - mu| = {err:.2e}, total mass {}", mu.values.iter().sum::<f64>());
    Ok(())
}
