//! Command-line front end: configuration, subcommands and output files.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use serde_json::json;

use config::{ConfigError, RunConfig, Value};

/// Failure of a run, rendered as a one-line JSON record on stderr.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Config(ConfigError),
    Numerics(ajja_core::Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config(_) => 2,
            RunError::Numerics(_) => 3,
            RunError::Io(_) => 4,
        }
    }

    pub fn record(&self) -> serde_json::Value {
        let (kind, field, message) = match self {
            RunError::Usage(m) => ("usage", None, m.clone()),
            RunError::Config(e) => ("config", e.field.clone(), e.message.clone()),
            RunError::Numerics(e) => {
                let field = match e {
                    ajja_core::Error::InvalidParameter { name, .. } => Some(name.to_string()),
                    _ => None,
                };
                ("numerics", field, e.to_string())
            }
            RunError::Io(e) => ("io", None, e.to_string()),
        };
        json!({
            "schema_version": output::SCHEMA_VERSION,
            "status": "error",
            "kind": kind,
            "field": field,
            "message": message,
        })
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

/// Resolved command-line request.
#[derive(Debug, Clone, Default)]
pub struct Request {
    pub subcommand: String,
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    pub target: Option<String>,
    pub pulses: Option<i64>,
}

impl Request {
    /// Defaults, then the file, then `--set`, then dedicated flags.
    pub fn resolve(&self) -> Result<RunConfig, RunError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for s in &self.sets {
            cfg.set(s)?;
        }
        let two = self.subcommand == "two-qubit";
        cfg.set_value("subcommand", Value::Text(self.subcommand.clone()))?;
        if let Some(out) = &self.out {
            cfg.set_value("out", Value::Text(out.clone()))?;
        }
        if let Some(seed) = self.seed {
            let seed = i64::try_from(seed).map_err(|_| ConfigError {
                field: Some("seed".into()),
                message: "too large".into(),
            })?;
            cfg.set_value("seed", Value::Int(seed))?;
        }
        if let Some(format) = &self.format {
            cfg.set_value("format", Value::Text(format.clone()))?;
        }
        if let Some(target) = &self.target {
            let key = if two {
                "two_qubit_target"
            } else {
                "gate_target"
            };
            cfg.set_value(key, Value::Text(target.clone()))?;
        }
        if let Some(pulses) = self.pulses {
            let key = if two {
                "two_qubit_pulses"
            } else {
                "gate_pulses"
            };
            cfg.set_value(key, Value::Int(pulses))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `AJJA_THREADS`, if set, caps the worker pool.
pub fn configure_threads() -> Result<(), RunError> {
    let Ok(raw) = std::env::var("AJJA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        RunError::Config(ConfigError {
            field: Some("AJJA_THREADS".into()),
            message: format!("expected a positive integer, got {raw:?}"),
        })
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Usage(e.to_string()))
}

/// Resolves, runs and writes one request; returns the written paths.
pub fn execute(request: &Request) -> Result<Vec<PathBuf>, RunError> {
    let cfg = request.resolve()?;
    let report = commands::run(&cfg).map_err(RunError::Numerics)?;
    output::write_report(&report, &cfg).map_err(RunError::Io)
}
