use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{db_to_linear, CorrelationModel, SystemConfig};
use crate::decoder::SolverOptions;
use crate::error::{Error, Result};
use crate::montecarlo::{DecoderKind, ExperimentConfig, SamplingPath};

/// On-disk experiment configuration. Powers are given in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: usize,
    pub beta: f64,
    pub tau: f64,
    pub tau_p: f64,
    pub rho_db: f64,
    pub alpha: f64,
    #[serde(default)]
    pub corr_model: CorrelationModel,
    pub r: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<String>,
    #[serde(default)]
    pub sampling_path: SamplingPath,
    #[serde(default)]
    pub tolerances: SolverOptions,
    #[serde(default)]
    pub perfect_csi: bool,
}

fn default_trials() -> usize {
    100
}

fn default_decoders() -> Vec<String> {
    vec!["BRO".to_string()]
}

impl FileConfig {
    /// Resolves defaults and checks every invariant, reporting all failures.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let system = SystemConfig {
            n: self.n,
            beta: self.beta,
            tau: self.tau,
            tau_p: self.tau_p,
            rho: db_to_linear(self.rho_db),
            alpha: self.alpha,
            corr_model: self.corr_model,
            r: self.r,
            seed: self.seed,
            perfect_csi: self.perfect_csi,
        };
        let mut problems = Vec::new();
        if !self.rho_db.is_finite() {
            problems.push(format!("rho_db = {} must be finite", self.rho_db));
        }
        let mut decoders = Vec::new();
        for name in &self.decoders {
            match name.parse::<DecoderKind>() {
                Ok(d) if !decoders.contains(&d) => decoders.push(d),
                Ok(_) => problems.push(format!("decoder `{name}` is listed twice")),
                Err(_) => problems.push(format!("unknown decoder `{name}` (expected BRO or LS)")),
            }
        }
        let config = ExperimentConfig {
            system,
            trials: self.trials,
            decoders,
            sampling_path: self.sampling_path,
            solver: self.tolerances,
        };
        let mut all = config.violations();
        if !self.decoders.is_empty() {
            all.retain(|v| !v.starts_with("decoders must"));
        }
        problems.extend(all);
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// SHA-256 of the configuration with defaults filled in and keys sorted.
    pub fn canonical_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("configuration serializes");
        hex::encode(Sha256::digest(canonical_json(&value).as_bytes()))
    }
}

/// Compact JSON with object keys in lexicographic order.
pub fn canonical_json(value: &serde_json::Value) -> String {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let body: Vec<String> =
                keys.into_iter().map(|k| format!("{}:{}", Value::String(k.clone()), canonical_json(&map[k]))).collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(items) => format!("[{}]", items.iter().map(canonical_json).collect::<Vec<_>>().join(",")),
        other => other.to_string(),
    }
}

/// Parses configuration text. Syntax and schema errors carry the line and
/// column reported by the JSON reader.
pub fn parse_config_str(text: &str) -> Result<FileConfig> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads and parses a configuration file without validating it.
pub fn read_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<(FileConfig, ExperimentConfig)> {
    let file = read_config(path)?;
    let resolved = file.resolve()?;
    Ok((file, resolved))
}
