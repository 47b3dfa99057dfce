//! Exact ground state of the effective model and its squeezing figures of merit.

use socsqueeze::effective_model::{ed_ground_state, ed_moment_set, effective_coefficients};
use socsqueeze::squeezing_metrics::{squeezing_report, MetricOptions};
use socsqueeze::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 200;
    println!("{:>6} {:>10} {:>10} {:>10} {:>8}", "Ω_R", "ξ_x", "ξ_DCZ", "ξ_UV", "ρ_0");
    for omega in [0.0, 1.0, 2.0, 3.0, 4.0] {
        let c = effective_coefficients(&ModelParams::new(omega, 0.0, 6.0, n))?;
        let moments = ed_moment_set(&ed_ground_state(&c, n)?);
        let r = squeezing_report(&moments, &MetricOptions::default())?;
        println!(
            "{omega:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>8.5}",
            r.xi_x, r.xi_dcz_min, r.xi_uv_min, r.populations.rho_0
        );
    }
    Ok(())
}
