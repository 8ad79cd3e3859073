//! Run configuration, the flat `key = value` config format, and config hashes.
//!
//! Grammar of a config file, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' anything
//! entry   := key '=' value       (whitespace around key and value ignored)
//! ```
//!
//! Values may be wrapped in double quotes. Size lists accept `10..16`
//! (inclusive) or `10,12,14`. Unknown keys are an error.

use serde::{Deserialize, Serialize};

use crate::bench::CiMethod;
use crate::error::{Error, Result};
use crate::instances::{LibraryConfig, WeightDist};
use crate::schedule::OptimizerConfig;

/// Everything that can influence an output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub library: LibraryConfig,
    pub target: f64,
    pub p_start: usize,
    pub p_max: usize,
    pub optimizer: OptimizerConfig,
    pub ci: CiMethod,
    pub bootstrap_resamples: usize,
    pub ls_runs: u64,
    pub ls_seed: u64,
    /// Worker cap; does not change results and is excluded from the hash.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            library: LibraryConfig::default(),
            target: 0.10,
            p_start: 2,
            p_max: 40,
            optimizer: OptimizerConfig::default(),
            ci: CiMethod::Normal,
            bootstrap_resamples: 10_000,
            ls_runs: 1000,
            ls_seed: 7,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Short hex digest of the canonical JSON form.
    pub fn hash(&self) -> String {
        hash_json(self)
    }

    /// Applies every entry of a flat config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            self.set(key.trim(), value)
                .map_err(|e| Error::InvalidParameter(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value `{v}` for `{key}`")))
        }
        match key {
            "seed" => self.library.seed = num(key, value)?,
            "sizes" => self.library.sizes = parse_sizes(value)?,
            "per_size" => self.library.per_size = num(key, value)?,
            "edge_prob" => self.library.edge_prob = num(key, value)?,
            "weight_dist" => self.library.weight_dist = value.parse::<WeightDist>()?,
            "target" => self.target = num(key, value)?,
            "p_start" => self.p_start = num(key, value)?,
            "p_max" => self.p_max = num(key, value)?,
            "starts" => self.optimizer.starts = num(key, value)?,
            "start_seed" => self.optimizer.start_seed = num(key, value)?,
            "max_iter" => self.optimizer.max_iter = num(key, value)?,
            "memory" => self.optimizer.memory = num(key, value)?,
            "pgtol" => self.optimizer.pgtol = num(key, value)?,
            "ftol" => self.optimizer.ftol = num(key, value)?,
            "fd_step" => self.optimizer.fd_step = num(key, value)?,
            "ci" => self.ci = value.parse()?,
            "bootstrap_resamples" => self.bootstrap_resamples = num(key, value)?,
            "ls_runs" => self.ls_runs = num(key, value)?,
            "ls_seed" => self.ls_seed = num(key, value)?,
            "threads" => self.threads = Some(num(key, value)?),
            _ => return Err(Error::InvalidParameter(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.target > 0.0 && self.target < 1.0) {
            return bad(format!("target must be in (0, 1), got {}", self.target));
        }
        if self.p_start < 2 || self.p_max < self.p_start {
            return bad(format!("need 2 <= p_start <= p_max, got {} and {}", self.p_start, self.p_max));
        }
        if !(self.library.edge_prob > 0.0 && self.library.edge_prob <= 1.0) {
            return bad(format!("edge_prob must be in (0, 1], got {}", self.library.edge_prob));
        }
        if self.library.sizes.iter().any(|&n| n < 2) {
            return bad("sizes must be >= 2".into());
        }
        if self.optimizer.starts == 0 || self.optimizer.max_iter == 0 {
            return bad("starts and max_iter must be >= 1".into());
        }
        if self.ls_runs == 0 {
            return bad("ls_runs must be >= 1".into());
        }
        Ok(())
    }
}

/// `10..16` (inclusive) or a comma-separated list.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidParameter(format!("bad size list `{s}`"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let sizes: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if sizes.is_empty() {
        return Err(bad());
    }
    Ok(sizes)
}

/// First 16 hex digits of SHA-256 over the compact JSON serialization.
pub fn hash_json<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    crate::instances::hex_digest(&json)[..16].to_string()
}
