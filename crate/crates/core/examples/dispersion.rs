//! Lowest band and its minima for a few coupling strengths at δ = 1, ε = 0.

use socsqueeze::band_structure::dispersion;
use socsqueeze::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for omega in [0.5, 1.0, 2.0, 4.0] {
        let d = dispersion(&ModelParams::new(omega, 1.0, 0.0, 1), -4.0, 4.0, 2001)?;
        let minima: Vec<String> = d
            .minima
            .iter()
            .map(|m| format!("k={:+.4} E={:+.5}", m.k, m.energy))
            .collect();
        println!("Ω_R = {omega}: {} minima [{}]", d.minima.len(), minima.join(", "));
    }
    Ok(())
}
