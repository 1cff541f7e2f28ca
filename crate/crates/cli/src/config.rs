//! Flat, typed run configuration with a strict schema.
//!
//! A config file is a TOML document holding only top-level `key = value`
//! pairs from [`SCHEMA`]. Values are resolved in the order defaults, file,
//! `--set` overrides, dedicated flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    IntList(Vec<i64>),
    FloatList(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Text(&'static [&'static str]),
    /// Free-form text.
    Path,
    IntList,
    FloatList,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Int => "integer",
            Kind::Float => "float",
            Kind::Text(_) => "choice",
            Kind::Path => "string",
            Kind::IntList => "integer list",
            Kind::FloatList => "float list",
        }
    }
}

pub struct Field {
    pub key: &'static str,
    pub kind: Kind,
    pub default: fn() -> Value,
    pub doc: &'static str,
}

macro_rules! field {
    ($key:literal, $kind:expr, $default:expr, $doc:literal) => {
        Field {
            key: $key,
            kind: $kind,
            default: || $default,
            doc: $doc,
        }
    };
}

const SUBCOMMANDS: &[&str] = &[
    "spectrum",
    "wavefunction",
    "splitting",
    "coupling-sweep",
    "gate",
    "two-qubit",
    "ramp",
    "readout",
    "loss",
];

pub static SCHEMA: &[Field] = &[
    field!(
        "subcommand",
        Kind::Text(SUBCOMMANDS),
        Value::Text("spectrum".into()),
        "What to run; the command line always overrides this."
    ),
    field!(
        "n_atoms",
        Kind::Int,
        Value::Int(15),
        "Atoms per qubit, N_t."
    ),
    field!(
        "u0_hz",
        Kind::Float,
        Value::Float(550.0),
        "Collision energy U0 in Hz; converts U0 units to Hz and ms."
    ),
    field!(
        "josephson_ratio",
        Kind::Float,
        Value::Float(70.0),
        "2 Omega0 N_t / 3 in units of U0; fixes Omega0."
    ),
    field!(
        "ratio",
        Kind::Float,
        Value::Float(0.75),
        "r0 = Omega1 / Omega0."
    ),
    field!(
        "flux",
        Kind::Float,
        Value::Float(0.495),
        "Flux fraction f at the working point."
    ),
    field!(
        "interaction",
        Kind::Text(&["symmetric", "negative_symmetric"]),
        Value::Text("symmetric".into()),
        "Collision term: U0 sum N^2 or its negative."
    ),
    field!(
        "levels",
        Kind::Int,
        Value::Int(6),
        "Energy levels reported per row."
    ),
    field!(
        "flux_min",
        Kind::Float,
        Value::Float(0.48),
        "Lower end of the flux grid."
    ),
    field!(
        "flux_max",
        Kind::Float,
        Value::Float(0.52),
        "Upper end of the flux grid."
    ),
    field!(
        "flux_points",
        Kind::Int,
        Value::Int(81),
        "Points on the flux grid, ends included."
    ),
    field!(
        "atom_list",
        Kind::IntList,
        Value::IntList(vec![10, 15, 30]),
        "Atom numbers for the convergence table; Omega0 N_t held fixed."
    ),
    field!(
        "wavefunction_flux",
        Kind::Float,
        Value::Float(0.5),
        "Flux used for the phase-space wavefunctions."
    ),
    field!(
        "wavefunction_ratios",
        Kind::FloatList,
        Value::FloatList(vec![0.01, 0.2]),
        "U0 / Omega0 values for the wavefunction grids."
    ),
    field!(
        "wavefunction_grid",
        Kind::Int,
        Value::Int(64),
        "Grid points per phase axis; must exceed 2 N_t."
    ),
    field!(
        "wavefunction_floor",
        Kind::Float,
        Value::Float(0.05),
        "Peaks below this fraction of the maximum are ignored."
    ),
    field!(
        "ratio_min",
        Kind::Float,
        Value::Float(0.7),
        "Lower end of the r0 grid for the splitting table."
    ),
    field!(
        "ratio_max",
        Kind::Float,
        Value::Float(1.5),
        "Upper end of the r0 grid."
    ),
    field!(
        "ratio_points",
        Kind::Int,
        Value::Int(81),
        "Points on the r0 grid."
    ),
    field!(
        "coupling_min",
        Kind::Float,
        Value::Float(1.0),
        "Smallest Omega0 in U0 units for the coupling sweep."
    ),
    field!(
        "coupling_max",
        Kind::Float,
        Value::Float(200.0),
        "Largest Omega0 in U0 units."
    ),
    field!(
        "coupling_points",
        Kind::Int,
        Value::Int(100),
        "Points on the Omega0 grid."
    ),
    field!(
        "gate_target",
        Kind::Text(&["not", "hadamard", "identity"]),
        Value::Text("not".into()),
        "Single-qubit target gate."
    ),
    field!(
        "gate_pulses",
        Kind::Int,
        Value::Int(12),
        "Pulses in the single-qubit sequence."
    ),
    field!(
        "gate_window",
        Kind::Int,
        Value::Int(6),
        "Lowest H_A eigenstates in the gate window."
    ),
    field!(
        "gate_max_total_time",
        Kind::Float,
        Value::Float(1.3),
        "Single-qubit time budget in 1/U0 units."
    ),
    field!(
        "two_qubit_target",
        Kind::Text(&["cphase", "identity"]),
        Value::Text("cphase".into()),
        "Two-qubit target gate."
    ),
    field!(
        "two_qubit_pulses",
        Kind::Int,
        Value::Int(36),
        "Pulses in the two-qubit sequence."
    ),
    field!(
        "two_qubit_max_total_time",
        Kind::Float,
        Value::Float(300.0),
        "Two-qubit time budget in 1/U0 units."
    ),
    field!(
        "truncation",
        Kind::Int,
        Value::Int(6),
        "Site eigenstates kept per sector, K."
    ),
    field!(
        "tunneling",
        Kind::Float,
        Value::Float(0.005),
        "Inter-site tunneling Omega_t in U0 units."
    ),
    field!("restarts", Kind::Int, Value::Int(32), "Optimizer restarts."),
    field!(
        "seed",
        Kind::Int,
        Value::Int(0),
        "Seed of the restart generator."
    ),
    field!(
        "leakage_weight",
        Kind::Float,
        Value::Float(10.0),
        "Weight of leakage^2 in the gate objective."
    ),
    field!(
        "time_weight",
        Kind::Float,
        Value::Float(10.0),
        "Weight of the squared budget excess."
    ),
    field!(
        "max_evals",
        Kind::Int,
        Value::Int(4000),
        "Simplex evaluations per restart."
    ),
    field!(
        "gradient_iterations",
        Kind::Int,
        Value::Int(300),
        "L-BFGS iterations per restart; 0 disables."
    ),
    field!(
        "ramp_start",
        Kind::Float,
        Value::Float(7.0),
        "Omega0 at the start of the ramp, U0 units."
    ),
    field!(
        "ramp_end",
        Kind::Float,
        Value::Float(200.0),
        "Omega0 at the end of the ramp."
    ),
    field!(
        "ramp_durations",
        Kind::FloatList,
        Value::FloatList(vec![0.0, 25.0, 50.0, 100.0, 200.0, 300.0]),
        "Ramp durations in 1/U0 units; 0 is a sudden quench."
    ),
    field!(
        "ramp_shape",
        Kind::Text(&["linear", "smoothstep"]),
        Value::Text("linear".into()),
        "Time profile of the ramp."
    ),
    field!(
        "ramp_step",
        Kind::Float,
        Value::Float(0.2),
        "Initial integrator step."
    ),
    field!(
        "ramp_tolerance",
        Kind::Float,
        Value::Float(1e-6),
        "Agreement required between successive step halvings."
    ),
    field!(
        "ramp_tracked",
        Kind::Int,
        Value::Int(3),
        "Instantaneous levels followed along the ramp."
    ),
    field!(
        "qubit_population",
        Kind::Float,
        Value::Float(0.7),
        "|alpha|^2 of the initial qubit superposition."
    ),
    field!(
        "qubit_phase",
        Kind::Float,
        Value::Float(0.4),
        "Relative phase of beta in radians."
    ),
    field!(
        "readout_duration",
        Kind::Float,
        Value::Float(300.0),
        "Ramp duration before the readout."
    ),
    field!(
        "loss_atoms",
        Kind::IntList,
        Value::IntList((6..=30).collect()),
        "Atom numbers for the loss tables; Omega0 N_t held fixed."
    ),
    field!(
        "loss_flux_points",
        Kind::Int,
        Value::Int(9),
        "Flux points for the single-atom loss table over the flux grid range."
    ),
    field!(
        "k3",
        Kind::Float,
        Value::Float(1e-28),
        "Three-body coefficient in cm^6/s."
    ),
    field!(
        "density",
        Kind::Float,
        Value::Float(3e14),
        "Atomic density in cm^-3."
    ),
    field!(
        "out",
        Kind::Path,
        Value::Text("out".into()),
        "Output directory."
    ),
    field!(
        "format",
        Kind::Text(&["csv", "json", "both"]),
        Value::Text("both".into()),
        "Which files to write."
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(k) => write!(f, "{k}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: Some(field.to_string()),
        message: message.into(),
    }
}

fn lookup(key: &str) -> Result<&'static Field, ConfigError> {
    SCHEMA
        .iter()
        .find(|f| f.key == key)
        .ok_or_else(|| error(key, "unknown key"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: SCHEMA.iter().map(|f| (f.key, (f.default)())).collect(),
        }
    }
}

fn from_toml(field: &Field, v: &toml::Value) -> Result<Value, ConfigError> {
    let wrong = || {
        error(
            field.key,
            format!("expected {}, got {}", field.kind.name(), v.type_str()),
        )
    };
    let float = |v: &toml::Value| match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    Ok(match field.kind {
        Kind::Int => Value::Int(v.as_integer().ok_or_else(wrong)?),
        Kind::Float => Value::Float(float(v).ok_or_else(wrong)?),
        Kind::Text(_) | Kind::Path => Value::Text(v.as_str().ok_or_else(wrong)?.to_string()),
        Kind::IntList => Value::IntList(
            v.as_array()
                .ok_or_else(wrong)?
                .iter()
                .map(|x| x.as_integer().ok_or_else(wrong))
                .collect::<Result<_, _>>()?,
        ),
        Kind::FloatList => Value::FloatList(
            v.as_array()
                .ok_or_else(wrong)?
                .iter()
                .map(|x| float(x).ok_or_else(wrong))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn from_text(field: &Field, raw: &str) -> Result<Value, ConfigError> {
    let raw = raw.trim();
    let int = |s: &str| {
        s.trim().parse::<i64>().map_err(|_| {
            error(
                field.key,
                format!("expected {}, got {s:?}", field.kind.name()),
            )
        })
    };
    let float = |s: &str| {
        s.trim().parse::<f64>().map_err(|_| {
            error(
                field.key,
                format!("expected {}, got {s:?}", field.kind.name()),
            )
        })
    };
    let items = |s: &str| -> Vec<String> {
        let s = s.trim().trim_start_matches('[').trim_end_matches(']');
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(String::from)
            .collect()
    };
    Ok(match field.kind {
        Kind::Int => Value::Int(int(raw)?),
        Kind::Float => Value::Float(float(raw)?),
        Kind::Text(_) | Kind::Path => Value::Text(raw.trim_matches('"').to_string()),
        Kind::IntList => Value::IntList(
            items(raw)
                .iter()
                .map(|s| int(s))
                .collect::<Result<_, _>>()?,
        ),
        Kind::FloatList => Value::FloatList(
            items(raw)
                .iter()
                .map(|s| float(s))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn format_float(x: f64) -> String {
    // `{:?}` round-trips and always carries a decimal point or exponent
    format!("{x:?}")
}

fn emit_value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(x) => format_float(*x),
        Value::Text(s) => toml::Value::String(s.clone()).to_string(),
        Value::IntList(xs) => format!(
            "[{}]",
            xs.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")
        ),
        Value::FloatList(xs) => format!(
            "[{}]",
            xs.iter()
                .map(|x| format_float(*x))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    }
}

impl RunConfig {
    /// Parses a config document on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
            field: None,
            message: format!("malformed config: {}", e.message()),
        })?;
        let mut cfg = Self::default();
        for (key, v) in &table {
            let field = lookup(key)?;
            cfg.values.insert(field.key, from_toml(field, v)?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse_str(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| ConfigError {
            field: None,
            message: format!("override {assignment:?} is not of the form key=value"),
        })?;
        let field = lookup(key.trim())?;
        self.values.insert(field.key, from_text(field, raw)?);
        Ok(())
    }

    pub fn set_value(&mut self, key: &str, value: Value) -> Result<(), ConfigError> {
        let field = lookup(key)?;
        self.values.insert(field.key, value);
        Ok(())
    }

    /// Canonical text: every key in schema order, one per line.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for f in SCHEMA {
            out.push_str(f.key);
            out.push_str(" = ");
            out.push_str(&emit_value(&self.values[f.key]));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of [`emit`](Self::emit), hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.emit().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn get(&self, key: &str) -> &Value {
        &self.values[lookup(key).expect("schema key").key]
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(i) => *i,
            v => panic!("{key} is not an integer: {v:?}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            v => panic!("{key} is not a float: {v:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(s) => s,
            v => panic!("{key} is not text: {v:?}"),
        }
    }

    pub fn ints(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            Value::IntList(xs) => xs.iter().map(|&x| x as usize).collect(),
            v => panic!("{key} is not an integer list: {v:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(xs) => xs,
            v => panic!("{key} is not a float list: {v:?}"),
        }
    }

    /// Key-value pairs in schema order, for echoing into JSON.
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &Value)> {
        SCHEMA.iter().map(|f| (f.key, &self.values[f.key]))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for f in SCHEMA {
            let v = &self.values[f.key];
            match (f.kind, v) {
                (Kind::Text(choices), Value::Text(s)) if !choices.contains(&s.as_str()) => {
                    return Err(error(
                        f.key,
                        format!("{s:?} is not one of {}", choices.join(", ")),
                    ));
                }
                (_, Value::Float(x)) if !x.is_finite() => {
                    return Err(error(f.key, "must be finite"))
                }
                (_, Value::FloatList(xs)) if xs.iter().any(|x| !x.is_finite()) => {
                    return Err(error(f.key, "entries must be finite"));
                }
                _ => {}
            }
        }
        let at_least = |key: &str, lo: i64| {
            let v = self.int(key);
            if v < lo {
                Err(error(key, format!("must be at least {lo} (got {v})")))
            } else {
                Ok(())
            }
        };
        let positive = |key: &str| {
            let v = self.float(key);
            if v > 0.0 {
                Ok(())
            } else {
                Err(error(key, format!("must be positive (got {v})")))
            }
        };
        let nonnegative = |key: &str| {
            let v = self.float(key);
            if v >= 0.0 {
                Ok(())
            } else {
                Err(error(key, format!("must be nonnegative (got {v})")))
            }
        };
        let unit_interval = |key: &str| {
            let v = self.float(key);
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(error(key, format!("must lie in [0, 1) (got {v})")))
            }
        };
        at_least("n_atoms", 2)?;
        if self.int("n_atoms") > 200 {
            return Err(error("n_atoms", "at most 200 atoms are supported"));
        }
        for k in [
            "u0_hz",
            "josephson_ratio",
            "ratio",
            "coupling_min",
            "coupling_max",
            "gate_max_total_time",
        ] {
            positive(k)?;
        }
        for k in [
            "two_qubit_max_total_time",
            "ramp_step",
            "ramp_tolerance",
            "k3",
            "density",
        ] {
            positive(k)?;
        }
        for k in ["flux", "flux_min", "flux_max", "wavefunction_flux"] {
            unit_interval(k)?;
        }
        for k in [
            "ratio_min",
            "ratio_max",
            "ramp_start",
            "ramp_end",
            "tunneling",
            "leakage_weight",
            "time_weight",
        ] {
            nonnegative(k)?;
        }
        for k in ["readout_duration", "wavefunction_floor"] {
            nonnegative(k)?;
        }
        for k in [
            "flux_points",
            "ratio_points",
            "coupling_points",
            "gate_pulses",
            "two_qubit_pulses",
            "truncation",
        ] {
            at_least(k, 1)?;
        }
        for k in ["restarts", "max_evals", "ramp_tracked", "loss_flux_points"] {
            at_least(k, 1)?;
        }
        at_least("levels", 2)?;
        at_least("gate_window", 2)?;
        at_least("seed", 0)?;
        at_least("gradient_iterations", 0)?;
        if self.float("flux_min") > self.float("flux_max") {
            return Err(error("flux_min", "must not exceed flux_max"));
        }
        if self.float("ratio_min") > self.float("ratio_max") {
            return Err(error("ratio_min", "must not exceed ratio_max"));
        }
        if self.float("coupling_min") >= self.float("coupling_max")
            && self.int("coupling_points") > 1
        {
            return Err(error("coupling_min", "must be below coupling_max"));
        }
        if self.int("wavefunction_grid") <= 2 * self.int("n_atoms") {
            return Err(error("wavefunction_grid", "must exceed 2 n_atoms"));
        }
        let q = self.float("qubit_population");
        if !(0.0..=1.0).contains(&q) {
            return Err(error(
                "qubit_population",
                format!("must lie in [0, 1] (got {q})"),
            ));
        }
        for key in ["atom_list", "loss_atoms"] {
            match self.get(key) {
                Value::IntList(xs) if xs.is_empty() => return Err(error(key, "must not be empty")),
                Value::IntList(xs) if xs.iter().any(|&x| !(2..=200).contains(&x)) => {
                    return Err(error(key, "atom numbers must lie in 2..=200"));
                }
                _ => {}
            }
        }
        if self.floats("wavefunction_ratios").iter().any(|&x| x <= 0.0) {
            return Err(error("wavefunction_ratios", "entries must be positive"));
        }
        if self.floats("ramp_durations").iter().any(|&x| x < 0.0) {
            return Err(error("ramp_durations", "entries must be nonnegative"));
        }
        if self.text("out").is_empty() {
            return Err(error("out", "must not be empty"));
        }
        Ok(())
    }
}

/// Human-readable schema, shipped as `config-schema.txt`.
pub fn schema_text() -> String {
    let mut out = String::from(
        "# ajja run configuration schema\n\
         #\n\
         # A config file is a flat TOML document of `key = value` lines.\n\
         # Unknown keys are rejected. Every key is optional; the default is shown.\n\
         # Energies are in units of U0 and times in units of 1/U0 unless noted.\n\n",
    );
    for f in SCHEMA {
        let kind = match f.kind {
            Kind::Text(choices) => format!("one of {}", choices.join(" | ")),
            k => k.name().to_string(),
        };
        out.push_str(&format!(
            "{} ({kind})\n    {}\n    default: {}\n\n",
            f.key,
            f.doc,
            emit_value(&(f.default)())
        ));
    }
    out
}
