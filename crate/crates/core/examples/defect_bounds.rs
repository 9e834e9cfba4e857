//! The defect bound delta_m for every preset, and the first generation where it drops
//! below a target.
//!
//! cargo run --example defect_bounds

use fractal_spectra::quasiuni::delta_bound;
use fractal_spectra::{presets, Model};

fn main() -> fractal_spectra::Result<()> {
    let target = 0.01;
    for spec in presets::all() {
        let name = spec.name.clone().unwrap_or_default();
        let model = Model::new(spec)?;
        let mut first = None;
        for m in 0..=10 {
            let d = delta_bound(&model, m)?;
            let v = d.symmetric.unwrap_or(d.general);
            if v < target && first.is_none() {
                first = Some(m);
            }
            if m <= 3 {
                println!(
                    "{name:>14} m={m}  general {:.5}  corollary {:.5}  symmetric {}",
                    d.general,
                    d.corollary,
                    d.symmetric.map(|s| format!("{s:.5}")).unwrap_or_else(|| "-".into())
                );
            }
        }
        println!("{name:>14} first m with delta < {target}: {first:?}");
    }
    Ok(())
}
