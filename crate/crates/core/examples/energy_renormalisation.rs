//! Energy forms across generations: the trace of C_{m+1} onto V_m reproduces C_m
//! exactly when the renormalisation factors are right.
//!
//! cargo run --example energy_renormalisation

use fractal_spectra::energy::{self, energy_value};
use fractal_spectra::{presets, Model};

fn main() -> fractal_spectra::Result<()> {
    for spec in presets::all() {
        let name = spec.name.clone().unwrap_or_default();
        let report = energy::check_compatibility(&spec, 1e-10)?;
        println!("{name:>14}  residual {:.3e}  {}", report.residual, if report.compatible { "ok" } else { "FAIL" });
    }

    // A wrong factor breaks it.
    let mut bad = presets::sg();
    bad.renorm[0] = 0.5;
    let report = energy::check_compatibility(&bad, 1e-10)?;
    println!("sg with r_0 = 0.5: residual {:.4}", report.residual);

    // Harmonic extension keeps the energy: E_m(u) = E_M(Hu).
    let model = Model::preset("sg")?;
    let u = [1.0, -0.5, 0.25];
    let e0 = energy_value(&model.energy(0)?, &u, None)?;
    for m in 1..=5 {
        let hu = model.extend(&u, 0, m)?;
        let e = energy_value(&model.energy(m)?, &hu, None)?;
        println!("m={m}  E(Hu) = {e:.15}  (E_0 = {e0:.15})");
    }
    Ok(())
}
