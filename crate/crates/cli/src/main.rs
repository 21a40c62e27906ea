use std::path::PathBuf;

use clap::{Args, Parser};
use dgl_cli::Subcommand;

#[derive(Parser)]
#[command(name = "dgl", version, about = "Dirac gap-soliton laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Gap eigenvalues and the edge-resonance integrals.
    Spectrum(Common),
    /// Scattering coefficients and Wronskians over `k_grid`.
    Scattering(Common),
    /// Soliton branch over `a_values`.
    Soliton(Common),
    /// Linearisation spectra and identities at each amplitude.
    Linearize(Common),
    /// Perturbed soliton evolution with modulation tracking.
    Evolve(Common),
    /// Linear dispersive decay with norm saturation diagnostics.
    Decay(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, env = "DGL_THREADS")]
    threads: Option<usize>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage problems are validation errors
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (sub, c) = match cli.command {
        Command::Spectrum(c) => (Subcommand::Spectrum, c),
        Command::Scattering(c) => (Subcommand::Scattering, c),
        Command::Soliton(c) => (Subcommand::Soliton, c),
        Command::Linearize(c) => (Subcommand::Linearize, c),
        Command::Evolve(c) => (Subcommand::Evolve, c),
        Command::Decay(c) => (Subcommand::Decay, c),
    };
    std::process::exit(dgl_cli::run(sub, &c.config, &c.out, c.threads));
}
