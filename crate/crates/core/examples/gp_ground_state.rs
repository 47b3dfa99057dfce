//! Imaginary-time spinor ground state in a quasi-1D cigar trap.

use socsqueeze::gp_solver::{
    build_problem, gp_moments, imaginary_time_ground_state, GpConfig, Grid, InteractionConfig, TrapConfig,
};
use socsqueeze::squeezing_metrics::xi_x;
use socsqueeze::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 100_000;
    let trap = TrapConfig {
        omega_x: 5000.0,
        omega_y: 5000.0,
        omega_z: 1500.0,
        recoil_frequency: 23116.0,
    };
    let problem = build_problem(
        &ModelParams::new(2.0, 2.0, 6.0, n),
        &trap,
        &InteractionConfig::rb87(n),
        Grid::uniform(1, 256, 120.0)?,
    )?;
    println!("c0 = {:.3}, c2 = {:.4}", problem.c0, problem.c2);
    let cfg = GpConfig {
        dt: 0.01,
        tol: 1e-10,
        ..GpConfig::default()
    };
    let gs = imaginary_time_ground_state(&problem, &cfg)?;
    let p = gs.field.populations();
    println!("iterations {}, E = {:.6}, μ = {:.6}", gs.iterations, gs.energy, gs.chemical_potential);
    println!("ρ₋₁ = {:.5}, ρ₀ = {:.5}, ρ₊₁ = {:.5}", p.rho_m1, p.rho_0, p.rho_p1);
    println!("dominant k = {:.4}", gs.field.dominant_momentum());
    println!("ξ_x (Hartree product) = {:.6}", xi_x(&gp_moments(&gs.field, n))?);
    Ok(())
}
