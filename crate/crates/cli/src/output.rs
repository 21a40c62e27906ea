//! Bit-stable CSV/JSON emission.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64`.  Each file starts with the artifact version and
//! the resolved configuration: `#`-prefixed lines in CSV, a `header` object in
//! JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Number, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const ARTIFACT: &str = "dgl";

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A JSON number carrying exactly the 17-digit text (`null` if not finite).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn header_json(subcommand: &str, cfg: Option<&RunConfig>) -> Value {
    let mut h = Map::new();
    h.insert("artifact".into(), ARTIFACT.into());
    h.insert("version".into(), dgl_core::VERSION.into());
    h.insert("subcommand".into(), subcommand.into());
    if let Some(cfg) = cfg {
        let mut c = Map::new();
        for (section, keys) in cfg.echo() {
            let mut s = Map::new();
            for (k, v) in keys {
                s.insert(k.into(), v.into());
            }
            c.insert(section.into(), Value::Object(s));
        }
        h.insert("config".into(), Value::Object(c));
    }
    Value::Object(h)
}

fn header_lines(subcommand: &str, cfg: &RunConfig) -> String {
    let mut s = format!("# {ARTIFACT} {} {subcommand}\n", dgl_core::VERSION);
    for (section, keys) in cfg.echo() {
        let _ = writeln!(s, "# [{section}]");
        for (k, v) in keys {
            let _ = writeln!(s, "# {k} = {v}");
        }
    }
    s
}

/// Writes files into the output directory.
pub struct Emitter {
    dir: PathBuf,
    subcommand: String,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(dir: &Path, subcommand: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(Self { dir: dir.to_path_buf(), subcommand: subcommand.into(), written: vec![] })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        self.written.push(path);
        Ok(())
    }

    /// CSV with the config header, a column line, and one row per record.
    pub fn csv(&mut self, name: &str, cfg: &RunConfig, columns: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut s = header_lines(&self.subcommand, cfg);
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            debug_assert_eq!(r.len(), columns.len());
            let line: Vec<String> = r.iter().map(|&x| fmt_f64(x)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    /// JSON object `{header, ...body}`.
    pub fn json(&mut self, name: &str, cfg: Option<&RunConfig>, body: Map<String, Value>) -> Result<(), CliError> {
        let mut root = Map::new();
        root.insert("header".into(), header_json(&self.subcommand, cfg));
        root.extend(body);
        let mut text = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialise");
        text.push('\n');
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
