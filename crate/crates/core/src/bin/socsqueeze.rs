use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use socsqueeze::runner::{emit_plot_data, run_file, Overrides};

/// Band structure, collective-spin squeezing and spinor GP runs from INI configurations.
#[derive(Parser)]
#[command(name = "socsqueeze", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a run configuration.
    Run {
        #[arg(long, env = "SOCSQUEEZE_CONFIG")]
        config: PathBuf,
        /// Worker threads for sweep points.
        #[arg(long, env = "SOCSQUEEZE_JOBS", default_value_t = 1)]
        jobs: usize,
        /// Output directory, overriding [output] dir.
        #[arg(long, env = "SOCSQUEEZE_OUT")]
        out: Option<String>,
        #[arg(long, env = "SOCSQUEEZE_SEED")]
        seed: Option<u64>,
        /// ed, gaussian or gp, overriding [run] backend.
        #[arg(long, env = "SOCSQUEEZE_BACKEND")]
        backend: Option<String>,
    },
    /// Turn sweep.csv / phase_diagram.csv into plot-ready series files.
    PlotData {
        /// Directory holding the result tables.
        #[arg(long)]
        input: PathBuf,
        /// Destination directory (defaults to the input directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run {
            config,
            jobs,
            out,
            seed,
            backend,
        } => run_file(&config, &Overrides { backend, seed, out }, jobs).map(|s| s.files),
        Cmd::PlotData { input, out } => {
            let out = out.unwrap_or_else(|| input.clone());
            emit_plot_data(&input, &out)
        }
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("socsqueeze: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
