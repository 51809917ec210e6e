//! Experiment runner: config handling, command dispatch and CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod momentum;
pub mod output;

use std::time::Instant;

use serde_json::{json, Value};

pub use commands::{build_operator, Artifacts};
pub use config::{Command, RunConfig};
pub use output::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for configuration problems, 2 for everything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<quasix_core::Error> for CliError {
    fn from(e: quasix_core::Error) -> Self {
        use quasix_core::Error as E;
        match e {
            E::Numerical(_) => CliError::Numerical(e.to_string()),
            E::Invalid(_) | E::UnknownModel(_) | E::OffGrid(..) => CliError::Config(e.to_string()),
        }
    }
}

/// Result of a run: rendered CSV text per table and the metadata document.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub artifacts: Artifacts,
    /// (table name, CSV text), main table first
    pub csv: Vec<(String, String)>,
    pub metadata: Value,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.artifacts.tables.iter().find(|t| t.name == name)
    }
}

/// Worker count from QUASIX_THREADS, if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("QUASIX_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("QUASIX_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn header(cfg: &RunConfig, artifacts: &Artifacts) -> Result<Vec<(String, String)>, CliError> {
    let cmd = cfg.command.unwrap();
    let mut h = vec![
        ("quasix".to_string(), cmd.to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("config".to_string(), serde_json::to_string(&config_for_metadata(cfg)).map_err(|e| CliError::Io(e.to_string()))?),
        ("model".to_string(), format!("{} params=[{}] sites={}", cfg.model.as_deref().unwrap(), cfg.params.as_deref().unwrap(), cfg.sites.unwrap())),
    ];
    for (k, v) in &artifacts.constants {
        h.push((k.clone(), format!("{v:?}")));
    }
    for m in &artifacts.momenta {
        let to = match m.index {
            Some(j) => format!("index {j} of {} (p = {:?})", m.grid.unwrap(), m.p),
            None => format!("p = {:?}", m.p),
        };
        h.push(("momentum".into(), format!("{} -> {to}", m.spec)));
    }
    Ok(h)
}

/// The config as stored in metadata: output paths dropped, so the record
/// describes the computation only.
fn config_for_metadata(cfg: &RunConfig) -> RunConfig {
    RunConfig { out: None, meta: None, ..cfg.clone() }
}

/// Validates, runs and renders. Nothing is written to disk.
pub fn execute(config: &RunConfig) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let cfg = config.resolve()?;
    let artifacts = match thread_cap()? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Io(e.to_string()))?;
            pool.install(|| commands::execute(&cfg))?
        }
        None => commands::execute(&cfg)?,
    };
    for t in &artifacts.tables {
        t.check_finite()?;
    }
    let head = header(&cfg, &artifacts)?;
    let csv = artifacts
        .tables
        .iter()
        .map(|t| Ok((t.name.clone(), t.to_csv(&head)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let metadata = json!({
        "command": cfg.command.unwrap().name(),
        "config": config_for_metadata(&cfg),
        "model": {"kind": cfg.model, "params": cfg.params, "sites": cfg.sites},
        "constants": artifacts.constants,
        "momenta": artifacts.momenta,
        "results": Value::Object(artifacts.info.clone()),
        "versions": {
            "quasix": env!("CARGO_PKG_VERSION"),
            "quasix-core": env!("CARGO_PKG_VERSION"),
            "quasix-mps": env!("CARGO_PKG_VERSION"),
        },
        "threads": rayon::current_num_threads(),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "tables": artifacts.tables.iter().map(|t| json!({"name": t.name, "columns": t.columns, "rows": t.rows.len()})).collect::<Vec<_>>(),
    });
    Ok(RunOutput { config: cfg, artifacts, csv, metadata })
}

/// Runs and writes artifacts: with `out` set, the main CSV goes there, extra
/// tables next to it as `<stem>_<name>.csv`, metadata to `meta` or `<stem>.json`.
/// Without `out` the main CSV is returned for printing and metadata is written
/// only when `meta` is set.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let out = execute(config)?;
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    if let Some(path) = &config.out {
        for (name, text) in &out.csv {
            let p = if name.is_empty() { path.clone() } else { output::sibling(path, name, "csv") };
            std::fs::write(&p, text).map_err(io)?;
        }
    }
    let meta = config.meta.clone().or_else(|| config.out.as_ref().map(|p| output::sibling(p, "", "json")));
    if let Some(m) = meta {
        let text = serde_json::to_string_pretty(&out.metadata).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(m, text + "\n").map_err(io)?;
    }
    Ok(out)
}
