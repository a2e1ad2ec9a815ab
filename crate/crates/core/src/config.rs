//! Key-value run configuration files.
//!
//! Format: one `key = value` per line, `#` starts a comment. Recognized
//! keys:
//!
//! ```text
//! model       = pl | mallows
//! model.k     = 5                  # item count; theta defaults to 2^(K-i)
//! model.theta = 14 5 1             # PL weights (implies model.k)
//! model.phi   = 1.0                # Mallows spread
//! model.reference = 1 2 3         # Mallows reference, items best first
//! coarsening  = degenerate 1 2 | uniform | topk 2 | custom FILE
//!               | positions 0.9 0.5 0.2
//! methods     = all | Borda Copeland FAS ...
//! sizes       = 1000 10000 100000
//! reps        = 500
//! seed        = 0
//! baseline    = false
//! policy      = half | zero | skip
//! n           = 1000               # sample count for generation
//! dataset     = FILE               # real-data study input
//! dataset.prefix = 2
//! dataset.zero_indexed = true
//! ```
//!
//! A `custom` coarsening file lists one `i j lambda` triple per line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::aggregate::MethodId;
use crate::coarsening::CoarseningSpec;
use crate::error::{Error, Result};
use crate::experiment::{DatasetFormat, ExperimentConfig, ModelSpec, DEFAULT_REPS};
use crate::models::{MallowsParams, PlParams};
use crate::pairwise::UndefinedPolicy;
use crate::perm::Ordering;

const KNOWN_KEYS: &[&str] = &[
    "model",
    "model.k",
    "model.theta",
    "model.phi",
    "model.reference",
    "coarsening",
    "methods",
    "sizes",
    "reps",
    "seed",
    "baseline",
    "policy",
    "n",
    "dataset",
    "dataset.prefix",
    "dataset.zero_indexed",
];

/// A parsed configuration: last assignment per key wins.
#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Directory relative paths in the file resolve against.
    base_dir: PathBuf,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: "expected 'key = value'".into(),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("unknown key '{key}'"),
                });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self {
            values,
            base_dir: PathBuf::from("."),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    /// Applies `key=value` override pairs on top of the file contents.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("override '{o}' is not key=value"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!("unknown key '{key}'")));
            }
            self.values.insert(key, value.trim().to_string());
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(raw) = self.get(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for tok in raw.split(|c: char| c == ',' || c.is_whitespace()) {
            if tok.is_empty() {
                continue;
            }
            out.push(tok.parse().map_err(|_| {
                Error::InvalidConfig(format!("bad value '{tok}' for key '{key}'"))
            })?);
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig(format!("empty value for key '{key}'")));
        }
        Ok(Some(out))
    }

    fn parse_scalar<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidConfig(format!("bad value '{raw}' for key '{key}'"))),
        }
    }

    /// The ranking model; PL with geometric weights when only `model.k` is
    /// given.
    pub fn model(&self) -> Result<ModelSpec> {
        let kind = self.get("model").unwrap_or("pl").to_ascii_lowercase();
        let theta = self.parse_list::<f64>("model.theta")?;
        let k_key = self.parse_scalar::<usize>("model.k")?;
        match kind.as_str() {
            "pl" | "plackett-luce" | "plackettluce" => {
                let theta = match (theta, k_key) {
                    (Some(t), _) => t,
                    (None, Some(k)) => geometric_theta(k),
                    (None, None) => {
                        return Err(Error::InvalidConfig(
                            "PL model needs model.theta or model.k".into(),
                        ))
                    }
                };
                Ok(ModelSpec::Pl(PlParams::new(theta)?))
            }
            "mallows" => {
                let phi = self.parse_scalar::<f64>("model.phi")?.unwrap_or(1.0);
                let reference = match self.parse_list::<usize>("model.reference")? {
                    Some(items) => Ordering::new(items)?.to_ranking(),
                    None => {
                        let k = k_key.ok_or_else(|| {
                            Error::InvalidConfig(
                                "Mallows model needs model.reference or model.k".into(),
                            )
                        })?;
                        Ordering::identity(k).to_ranking()
                    }
                };
                Ok(ModelSpec::Mallows(MallowsParams::new(reference, phi)?))
            }
            other => Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
        }
    }

    /// The coarsening process, sized to `k` items.
    pub fn coarsening(&self, k: usize) -> Result<CoarseningSpec> {
        let raw = self.get("coarsening").unwrap_or("uniform");
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let bad = || Error::InvalidConfig(format!("bad coarsening '{raw}'"));
        match fields.first().map(|s| s.to_ascii_lowercase()).as_deref() {
            Some("uniform") if fields.len() == 1 => CoarseningSpec::uniform_pairs(k),
            Some("degenerate") if fields.len() == 3 => {
                let i = fields[1].parse().map_err(|_| bad())?;
                let j = fields[2].parse().map_err(|_| bad())?;
                CoarseningSpec::degenerate_pair(k, i, j)
            }
            Some("topk") if fields.len() == 2 => {
                let keep = fields[1].parse().map_err(|_| bad())?;
                CoarseningSpec::top_k(k, keep)
            }
            Some("positions") if fields.len() == k + 1 => {
                let lambda = fields[1..]
                    .iter()
                    .map(|f| f.parse().map_err(|_| bad()))
                    .collect::<Result<Vec<f64>>>()?;
                CoarseningSpec::independent_positions(lambda)
            }
            Some("custom") if fields.len() == 2 => {
                let path = self.base_dir.join(fields[1]);
                let entries = read_lambda_file(&path)?;
                CoarseningSpec::custom_pairs(k, &entries)
            }
            _ => Err(bad()),
        }
    }

    pub fn methods(&self) -> Result<Vec<MethodId>> {
        match self.get("methods") {
            None => Ok(MethodId::ALL.to_vec()),
            Some(raw) if raw.trim().eq_ignore_ascii_case("all") => Ok(MethodId::ALL.to_vec()),
            Some(_) => Ok(self.parse_list::<MethodId>("methods")?.unwrap()),
        }
    }

    pub fn policy(&self) -> Result<UndefinedPolicy> {
        Ok(self
            .parse_scalar::<UndefinedPolicy>("policy")?
            .unwrap_or_default())
    }

    pub fn seed(&self) -> Result<u64> {
        Ok(self.parse_scalar("seed")?.unwrap_or(0))
    }

    pub fn reps(&self) -> Result<Option<usize>> {
        self.parse_scalar("reps")
    }

    pub fn sample_count(&self) -> Result<Option<usize>> {
        self.parse_scalar("n")
    }

    pub fn dataset(&self) -> Result<Option<(PathBuf, DatasetFormat)>> {
        let Some(path) = self.get("dataset") else {
            return Ok(None);
        };
        let format = DatasetFormat {
            prefix_columns: self.parse_scalar("dataset.prefix")?.unwrap_or(0),
            zero_indexed: parse_bool(self.get("dataset.zero_indexed"))?,
        };
        Ok(Some((self.base_dir.join(path), format)))
    }

    /// Assembles the full synthetic-study configuration.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let model = self.model()?;
        let k = model.k();
        let cfg = ExperimentConfig {
            coarsening: self.coarsening(k)?,
            model,
            methods: self.methods()?,
            sizes: self
                .parse_list("sizes")?
                .ok_or_else(|| Error::InvalidConfig("missing key 'sizes'".into()))?,
            reps: self.parse_scalar("reps")?.unwrap_or(DEFAULT_REPS),
            seed: self.seed()?,
            baseline: parse_bool(self.get("baseline"))?,
            policy: self.policy()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_bool(raw: Option<&str>) -> Result<bool> {
    match raw.map(|s| s.to_ascii_lowercase()) {
        None => Ok(false),
        Some(s) => match s.as_str() {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            other => Err(Error::InvalidConfig(format!("bad boolean '{other}'"))),
        },
    }
}

/// Default ground-truth weights when only the item count is given.
pub fn geometric_theta(k: usize) -> Vec<f64> {
    (0..k).map(|i| 2f64.powi((k - 1 - i) as i32)).collect()
}

/// Reads `i j lambda` triples, one per line, `#` comments allowed.
pub fn read_lambda_file(path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected 'i j lambda', got {} fields", fields.len()),
            });
        }
        let parse_idx = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid rank index '{s}'"),
            })
        };
        let lambda = fields[2].parse::<f64>().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid weight '{}'", fields[2]),
        })?;
        out.push((parse_idx(fields[0])?, parse_idx(fields[1])?, lambda));
    }
    if out.is_empty() {
        return Err(Error::EmptyInput(path.display().to_string()));
    }
    Ok(out)
}
