//! Driver for the `dgl` command: configuration parsing, subcommand dispatch
//! and deterministic CSV/JSON output.
//!
//! Exit codes: `0` success, `1` parse or validation error, `2` numerical
//! failure.  Failures leave an `error.json` record in the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::Path;

use serde_json::{Map, Value};

pub use config::{parse_config, RunConfig};
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Spectrum,
    Scattering,
    Soliton,
    Linearize,
    Evolve,
    Decay,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [Self::Spectrum, Self::Scattering, Self::Soliton, Self::Linearize, Self::Evolve, Self::Decay];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Scattering => "scattering",
            Self::Soliton => "soliton",
            Self::Linearize => "linearize",
            Self::Evolve => "evolve",
            Self::Decay => "decay",
        }
    }
}

/// Runs one pipeline and writes its files into `out`.
pub fn dispatch(cfg: &RunConfig, sub: Subcommand, out: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut em = output::Emitter::new(out, sub.name())?;
    match sub {
        Subcommand::Spectrum => commands::spectrum(cfg, &mut em)?,
        Subcommand::Scattering => commands::scattering(cfg, &mut em)?,
        Subcommand::Soliton => commands::soliton(cfg, &mut em)?,
        Subcommand::Linearize => commands::linearize(cfg, &mut em)?,
        Subcommand::Evolve => commands::evolve(cfg, &mut em)?,
        Subcommand::Decay => commands::decay(cfg, &mut em)?,
    }
    Ok(em.written().to_vec())
}

fn run_inner(sub: Subcommand, config: &Path, out: &Path, cfg_slot: &mut Option<RunConfig>) -> Result<Vec<std::path::PathBuf>, CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::io(format!("reading {}", config.display()), e))?;
    let cfg = parse_config(&text)?;
    *cfg_slot = Some(cfg.clone());
    dispatch(&cfg, sub, out)
}

/// Parses `config`, runs `sub` and returns the process exit code.  On
/// failure an error record is written to `out/error.json` (when possible)
/// and the message goes to stderr.
pub fn run(sub: Subcommand, config: &Path, out: &Path, threads: Option<usize>) -> i32 {
    dgl_core::parallel::set_threads(threads.unwrap_or(0));
    let mut cfg = None;
    match run_inner(sub, config, out, &mut cfg) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("dgl {}: {e}", sub.name());
            if let Err(w) = write_error_record(&e, sub, cfg.as_ref(), out) {
                eprintln!("dgl {}: could not write error record: {w}", sub.name());
            }
            code
        }
    }
}

pub fn write_error_record(e: &CliError, sub: Subcommand, cfg: Option<&RunConfig>, out: &Path) -> Result<(), CliError> {
    let mut em = output::Emitter::new(out, sub.name())?;
    let mut body = Map::new();
    body.insert("status".into(), "error".into());
    body.insert("exit_code".into(), e.exit_code().into());
    body.insert("kind".into(), e.kind().into());
    body.insert("line".into(), e.line().map_or(Value::Null, Value::from));
    body.insert("message".into(), e.to_string().into());
    em.json("error.json", cfg, body)
}
