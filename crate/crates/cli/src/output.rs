//! CSV tables and JSON documents, written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ajja_core::c64;
use ajja_core::linalg::CMat;
use serde_json::{json, Map, Value as Json};

use crate::config::{RunConfig, Value};

pub const SCHEMA_VERSION: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Shortest round-trip text, with an exponent for very large or small values.
pub fn format_number(x: f64) -> String {
    format!("{x:?}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Num(x) => json_number(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

fn json_number(x: f64) -> Json {
    // JSON has no infinities; keep them readable
    if x.is_finite() {
        json!(x)
    } else {
        json!(format_number(x))
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(name: &str, columns: Vec<String>) -> Self {
        Self {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width of table {}",
            self.name
        );
        self.rows.push(row);
    }
}

/// Everything a subcommand produces.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub matrices: Vec<(String, CMat)>,
    pub summary: Map<String, Json>,
}

impl Report {
    pub fn summary(&mut self, key: &str, value: impl Into<Json>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn number(&mut self, key: &str, x: f64) {
        self.summary.insert(key.to_string(), json_number(x));
    }
}

fn config_json(cfg: &RunConfig) -> Json {
    let mut m = Map::new();
    for (k, v) in cfg.entries() {
        let j = match v {
            Value::Int(i) => json!(i),
            Value::Float(x) => json!(x),
            Value::Text(s) => json!(s),
            Value::IntList(xs) => json!(xs),
            Value::FloatList(xs) => json!(xs),
        };
        m.insert(k.to_string(), j);
    }
    Json::Object(m)
}

fn matrix_json(m: &CMat) -> Json {
    let part = |f: fn(&c64) -> f64| -> Vec<Vec<Json>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| json_number(f(&m[(i, j)]))).collect())
            .collect()
    };
    json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "re": part(|z| z.re),
        "im": part(|z| z.im),
        "abs": part(|z| z.norm()),
    })
}

pub fn csv_text(table: &Table, cfg: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("# ajja {VERSION}\n"));
    out.push_str(&format!("# subcommand: {}\n", cfg.text("subcommand")));
    out.push_str(&format!("# table: {}\n", table.name));
    out.push_str(&format!("# config_sha256: {}\n", cfg.hash()));
    out.push_str(&format!("# seed: {}\n", cfg.int("seed")));
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn json_document(report: &Report, cfg: &RunConfig) -> Json {
    let tables: Map<String, Json> = report
        .tables
        .iter()
        .map(|t| {
            let rows: Vec<Json> = t
                .rows
                .iter()
                .map(|r| Json::Array(r.iter().map(Cell::json).collect()))
                .collect();
            (
                t.name.clone(),
                json!({ "columns": t.columns, "rows": rows }),
            )
        })
        .collect();
    let matrices: Map<String, Json> = report
        .matrices
        .iter()
        .map(|(k, m)| (k.clone(), matrix_json(m)))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "program": "ajja",
        "version": VERSION,
        "subcommand": cfg.text("subcommand"),
        "seed": cfg.int("seed"),
        "config_sha256": cfg.hash(),
        "config_text": cfg.emit(),
        "config": config_json(cfg),
        "summary": Json::Object(report.summary.clone()),
        "matrices": Json::Object(matrices),
        "tables": Json::Object(tables),
    })
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Writes the report in the configured format and returns the paths.
pub fn write_report(report: &Report, cfg: &RunConfig) -> std::io::Result<Vec<PathBuf>> {
    let dir = PathBuf::from(cfg.text("out"));
    fs::create_dir_all(&dir)?;
    let format = cfg.text("format");
    let mut written = Vec::new();
    if format == "csv" || format == "both" {
        for t in &report.tables {
            let path = dir.join(format!("{}.csv", t.name));
            write_atomic(&path, csv_text(t, cfg).as_bytes())?;
            written.push(path);
        }
    }
    if format == "json" || format == "both" {
        let path = dir.join(format!("{}.json", cfg.text("subcommand")));
        let mut text =
            serde_json::to_string_pretty(&json_document(report, cfg)).expect("serializable");
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tamper {
    Malformed(String),
    HashMismatch { recorded: String, computed: String },
}

/// Recomputes the config hash of a JSON document from its echoed config.
pub fn verify_json(text: &str) -> Result<(), Tamper> {
    let doc: Json = serde_json::from_str(text).map_err(|e| Tamper::Malformed(e.to_string()))?;
    let recorded = doc["config_sha256"]
        .as_str()
        .ok_or_else(|| Tamper::Malformed("missing config_sha256".into()))?;
    let config = doc["config_text"]
        .as_str()
        .ok_or_else(|| Tamper::Malformed("missing config_text".into()))?;
    let cfg = RunConfig::parse_str(config).map_err(|e| Tamper::Malformed(e.to_string()))?;
    let computed = cfg.hash();
    if computed != recorded
        || cfg.text("subcommand") != doc["subcommand"].as_str().unwrap_or_default()
    {
        return Err(Tamper::HashMismatch {
            recorded: recorded.to_string(),
            computed,
        });
    }
    Ok(())
}

/// Checks that a CSV header names the given config hash.
pub fn verify_csv(text: &str, cfg: &RunConfig) -> Result<(), Tamper> {
    let recorded = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config_sha256: "))
        .ok_or_else(|| Tamper::Malformed("missing config_sha256 header".into()))?;
    let computed = cfg.hash();
    if recorded != computed {
        return Err(Tamper::HashMismatch {
            recorded: recorded.to_string(),
            computed,
        });
    }
    Ok(())
}
