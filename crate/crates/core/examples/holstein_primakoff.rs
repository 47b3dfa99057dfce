//! Gaussian (Holstein–Primakoff) backend against exact diagonalization as N grows.

use socsqueeze::effective_model::{
    ed_ground_state_with, ed_moment_set, effective_coefficients, gaussian_moment_set, hp_mean_field, hp_quadratic, EdConfig,
};
use socsqueeze::squeezing_metrics::xi_x;
use socsqueeze::ModelParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ed_cfg = EdConfig {
        n_max: 400,
        ..EdConfig::default()
    };
    for n in [20, 50, 100, 200, 400] {
        let c = effective_coefficients(&ModelParams::new(2.0, 0.0, 6.0, n))?;
        let mf = hp_mean_field(&c, n)?;
        let sol = hp_quadratic(&c, n, &mf)?;
        let hp = xi_x(&gaussian_moment_set(&sol)?)?;
        let ed = xi_x(&ed_moment_set(&ed_ground_state_with(&c, n, &ed_cfg)?))?;
        println!(
            "N={n:>4}  ξ_HP={hp:.6}  ξ_ED={ed:.6}  |Δ|={:.2e}  ω=({:.4}, {:.4})",
            (hp - ed).abs(),
            sol.frequencies[0],
            sol.frequencies[1]
        );
    }
    Ok(())
}
