//! Experiment configuration: JSON files overlaid with command-line flags.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::Args;
use cposterior::coarsening::CoarseningConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

/// A coarsening level; `inf` is the standard posterior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Alpha(pub f64);

impl Alpha {
    pub fn config(&self) -> anyhow::Result<CoarseningConfig> {
        Ok(CoarseningConfig::new(self.0)?)
    }

    pub fn is_inf(&self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Stream label for this level, independent of its position in the list.
    pub fn stream_label(&self) -> u64 {
        self.0.to_bits()
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inf() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Alpha {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Alpha(f64::INFINITY)),
            other => other.parse::<f64>().map(Alpha).map_err(|_| format!("'{s}' is not a number or 'inf'")),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.is_inf() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Alpha(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Fields shared by every experiment.
#[derive(Args, Clone, Debug, Default, Serialize)]
pub struct SharedFields {
    /// Master seed (required, here or in the config file).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Coarsening levels, comma separated; `inf` is the standard posterior.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<Alpha>>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Replicates per (alpha, n) cell.
    #[arg(long)]
    pub replicates: Option<usize>,
}

/// Reads typed fields out of a merged JSON object, collecting every problem.
pub struct FieldReader {
    map: Map<String, Value>,
    used: BTreeSet<String>,
    pub errors: Vec<String>,
}

impl FieldReader {
    pub fn new(map: Map<String, Value>) -> Self {
        Self { map, used: BTreeSet::new(), errors: Vec::new() }
    }

    pub fn get<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        self.used.insert(key.to_string());
        match self.map.get(key) {
            None | Some(Value::Null) => None,
            Some(v) => match serde_json::from_value(v.clone()) {
                Ok(t) => Some(t),
                Err(e) => {
                    self.errors.push(format!("{key}: {e}"));
                    None
                }
            },
        }
    }

    pub fn get_or<T: DeserializeOwned>(&mut self, key: &str, default: T) -> T {
        self.get(key).unwrap_or(default)
    }

    pub fn error(&mut self, key: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{key}: {msg}"));
    }

    /// Records unknown keys and returns all collected errors.
    pub fn finish(mut self) -> Vec<String> {
        for key in self.map.keys() {
            if !self.used.contains(key) {
                self.errors.push(format!("{key}: unknown field"));
            }
        }
        self.errors
    }
}

/// Reads the config file (if any) and overlays non-null flag values.
pub fn merged_fields(config: Option<&Path>, flags: &[Value]) -> anyhow::Result<Map<String, Value>> {
    let mut map = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            match serde_json::from_str::<Value>(&text).with_context(|| format!("parsing config {}", path.display()))? {
                Value::Object(m) => m,
                _ => anyhow::bail!("config {} must contain a JSON object", path.display()),
            }
        }
        None => Map::new(),
    };
    for f in flags {
        if let Value::Object(m) = f {
            for (k, v) in m {
                if !v.is_null() {
                    map.insert(k.clone(), v.clone());
                }
            }
        }
    }
    Ok(map)
}

/// Seed, levels, sizes and replicates after validation.
#[derive(Clone, Debug, Serialize)]
pub struct Common {
    pub seed: u64,
    pub alpha: Vec<Alpha>,
    pub n: Vec<usize>,
    pub replicates: usize,
}

pub struct CommonDefaults {
    pub alpha: Vec<Alpha>,
    pub n: Vec<usize>,
    pub replicates: usize,
}

/// Validates the shared fields. `n_from_data` replaces the size list when a
/// dataset is loaded from file.
pub fn read_common(r: &mut FieldReader, d: CommonDefaults, n_from_data: Option<usize>, min_n: usize) -> Common {
    let seed = r.get::<u64>("seed");
    if seed.is_none() && !r.errors.iter().any(|e| e.starts_with("seed:")) {
        r.error("seed", "required");
    }
    let alpha = r.get_or("alpha", d.alpha);
    if alpha.is_empty() {
        r.error("alpha", "list must not be empty");
    }
    for a in &alpha {
        if !(a.0 > 0.0) {
            r.error("alpha", format!("values must be > 0 or 'inf', got {}", a.0));
        }
    }
    if has_duplicates(alpha.iter().map(|a| a.0.to_bits())) {
        r.error("alpha", "values must be distinct");
    }
    let given_n: Option<Vec<usize>> = r.get("n");
    let n = match (n_from_data, given_n) {
        (Some(_), Some(_)) => {
            r.error("n", "must not be set when data is read from a file");
            Vec::new()
        }
        (Some(len), None) => vec![len],
        (None, given) => given.unwrap_or(d.n),
    };
    if n.is_empty() && n_from_data.is_none() {
        r.error("n", "list must not be empty");
    }
    for &v in &n {
        if v < min_n {
            r.error("n", format!("values must be >= {min_n}, got {v}"));
        }
    }
    if has_duplicates(n.iter().map(|&v| v as u64)) {
        r.error("n", "values must be distinct");
    }
    let replicates = r.get_or("replicates", d.replicates);
    if replicates == 0 {
        r.error("replicates", "must be >= 1");
    }
    Common { seed: seed.unwrap_or(0), alpha, n, replicates }
}

fn has_duplicates(values: impl Iterator<Item = u64>) -> bool {
    let mut seen = BTreeSet::new();
    values.into_iter().any(|v| !seen.insert(v))
}

pub fn check_positive(r: &mut FieldReader, key: &str, v: f64) {
    if !(v > 0.0) || !v.is_finite() {
        r.error(key, format!("must be finite and > 0, got {v}"));
    }
}

pub fn check_sweeps(r: &mut FieldReader, sweeps: usize, burnin: usize) {
    if sweeps <= burnin {
        r.error("sweeps", format!("must exceed burnin ({sweeps} <= {burnin})"));
    }
}

pub fn data_path(r: &mut FieldReader) -> Option<PathBuf> {
    r.get::<PathBuf>("data")
}

/// Error returned when a spec fails validation.
#[derive(Debug)]
pub struct InvalidSpec(pub Vec<String>);

impl fmt::Display for InvalidSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid experiment spec:")?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for InvalidSpec {}

pub fn finish<T>(r: FieldReader, spec: T) -> anyhow::Result<T> {
    let errors = r.finish();
    if errors.is_empty() {
        Ok(spec)
    } else {
        Err(InvalidSpec(errors).into())
    }
}
