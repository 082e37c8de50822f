use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use pqvar::pathcore::io::{write_field_csv, write_path_csv};
use pqvar::pathcore::{SampledField, SampledPath};
use pqvar::stochastic::{Coefficient, SemimartingaleSpec};

use crate::error::{CliError, CliResult};

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of replicates.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Run past failed hypothesis checks.
    #[arg(long)]
    pub force: bool,
    /// Convergence tolerance, where the command has one.
    #[arg(long)]
    pub tol: Option<f64>,
}

/// Semimartingale parameters shared by the simulation-based commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n_steps: usize,
    pub x0: f64,
    pub drift: Coefficient,
    pub volatility: Coefficient,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            n_steps: 1 << 12,
            x0: 0.0,
            drift: Coefficient::Constant(0.0),
            volatility: Coefficient::Constant(1.0),
        }
    }
}

impl SimulationConfig {
    pub fn spec(&self, seed: u64, replicate: u64) -> SemimartingaleSpec {
        SemimartingaleSpec {
            t_end: self.t_end,
            n_steps: self.n_steps,
            drift: self.drift.clone(),
            volatility: self.volatility.clone(),
            x0: self.x0,
            seed,
            replicate,
        }
    }

    pub fn apply(&mut self, a: &SimArgs) {
        set(&mut self.t_end, a.t_end);
        set(&mut self.n_steps, a.n_steps);
        set(&mut self.x0, a.x0);
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct SimArgs {
    /// Time horizon.
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub n_steps: Option<usize>,
    #[arg(long)]
    pub x0: Option<f64>,
}

pub fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

/// Config from `path`, or the defaults when no file is given.
pub fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<C> {
    let Some(path) = path else {
        return Ok(C::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("malformed config {}: {e}", path.display())))
}

/// Artifact writer rooted at the output directory.
pub struct Output {
    dir: PathBuf,
    config: Value,
}

impl Output {
    /// Creates the directory and writes `effective_config.json`.
    pub fn create(dir: &Path, command: &str, config: &impl Serialize) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        let config = serde_json::to_value(config)?;
        let out = Self {
            dir: dir.to_path_buf(),
            config,
        };
        out.write_text(
            "effective_config.json",
            &pretty(&json!({ "command": command, "config": out.config }))?,
        )?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// `{config, result}` envelope.
    pub fn json(&self, name: &str, result: &impl Serialize) -> CliResult<()> {
        let body = json!({ "config": self.config, "result": serde_json::to_value(result)? });
        self.write_text(name, &pretty(&body)?)
    }

    pub fn path_csv(&self, name: &str, path: &SampledPath) -> CliResult<()> {
        write_path_csv(path, BufWriter::new(self.create_file(name)?))?;
        Ok(())
    }

    pub fn field_csv(&self, name: &str, field: &SampledField) -> CliResult<()> {
        write_field_csv(field, BufWriter::new(self.create_file(name)?))?;
        Ok(())
    }

    fn create_file(&self, name: &str) -> CliResult<File> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        Ok(File::create(p)?)
    }

    fn write_text(&self, name: &str, text: &str) -> CliResult<()> {
        let p = self.path(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(p, text)?;
        Ok(())
    }
}

fn pretty(v: &Value) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Left-aligned plain-text table.
pub fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        println!("{}", parts.join("  ").trim_end());
    };
    line(header.to_vec());
    line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
}

pub fn sci(v: f64) -> String {
    format!("{v:.6e}")
}
