//! Runs a detuning sweep through the library runner and prints the result table.

use socsqueeze::runner::{run, Overrides, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("socsqueeze_sweep_example");
    let text = "[run]\ncommand = eff-squeeze\nbackend = ed\n[params]\nN = 100\nomega_R = 2\nepsilon = 6\n[sweep]\ndelta = -3:3:7\n";
    let overrides = Overrides {
        out: Some(out.display().to_string()),
        ..Overrides::default()
    };
    let cfg = RunConfig::parse(text, &overrides)?;
    let summary = run(&cfg, 2)?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(out.join("sweep.csv"))?);
    Ok(())
}
