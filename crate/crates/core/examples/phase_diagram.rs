//! ASCII map of the number of band minima over the (Ω_R, ε) plane at δ = 1.

use socsqueeze::band_structure::{phase_diagram, Axis, BandScan};
use socsqueeze::{ModelParams, ParamName};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n1, n2) = (20, 40);
    let pd = phase_diagram(
        Axis::new(ParamName::OmegaR, 0.0, 4.0, n1),
        Axis::new(ParamName::Epsilon, -2.0, 10.0, n2),
        &ModelParams::new(0.0, 1.0, 0.0, 1),
        &BandScan::default(),
    )?;
    println!("rows: Ω_R from 4 (top) to 0; columns: ε from -2 to 10");
    for i in (0..n1).rev() {
        let row: String = (0..n2).map(|j| char::from(b'0' + pd.cell(i, j).n_minima as u8)).collect();
        println!("{row}");
    }
    Ok(())
}
