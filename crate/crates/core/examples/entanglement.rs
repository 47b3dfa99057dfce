//! Quadrature-angle scan of the two entanglement criteria for one ground state.

use std::f64::consts::PI;

use socsqueeze::effective_model::{ed_ground_state, ed_moment_set, effective_coefficients};
use socsqueeze::squeezing_metrics::{optimize_theta, xi_dcz, xi_uv, Metric};
use socsqueeze::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 100;
    let c = effective_coefficients(&ModelParams::new(2.0, 0.0, 6.0, n))?;
    let m = ed_moment_set(&ed_ground_state(&c, n)?);
    for step in 0..8 {
        let theta = step as f64 * PI / 8.0;
        println!("θ = {theta:.4}  ξ_DCZ = {:.6}  ξ_UV = {:.6}", xi_dcz(&m, theta)?, xi_uv(&m, theta)?);
    }
    let (td, xd) = optimize_theta(&m, Metric::Dcz)?;
    let (tu, xu) = optimize_theta(&m, Metric::Uv)?;
    println!("optimum: DCZ θ*={td:.3e} ξ={xd:.6}, UV θ*={tu:.3e} ξ={xu:.6}");
    Ok(())
}
