//! Reading a nematic quadrature through a Jy rotation before measuring Jx.

use std::f64::consts::PI;

use socsqueeze::effective_model::{ed_ground_state, ed_moment_set, effective_coefficients};
use socsqueeze::squeezing_metrics::rf_rotate;
use socsqueeze::{Generator, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 100;
    let c = effective_coefficients(&ModelParams::new(2.0, 0.0, 6.0, n))?;
    let m = ed_moment_set(&ed_ground_state(&c, n)?);
    for step in 0..=4 {
        let angle = step as f64 * PI / 8.0;
        let r = rf_rotate(&m, angle)?;
        println!(
            "pulse {angle:.4}: Var(Jx)/N = {:.6}  Var(Qzx)/N = {:.6}  <Jz> = {:+.3e}",
            r.variance(Generator::Jx)? / n as f64,
            r.variance(Generator::Qzx)? / n as f64,
            r.mean(Generator::Jz)?
        );
    }
    Ok(())
}
