//! Benchmark orchestration: depth sweeps to a target measurement probability,
//! interpolation of the required depth, fits, and the comparison metrics.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::QuadraticFit;
use crate::instances::LibraryInstance;
use crate::landscape::ObjectiveTable;
use crate::rng::child_stream;
use crate::schedule::{optimize_multistart, OptimizerConfig, QwoaObjective, ScheduleParams};

/// Smallest depth used by sweeps and reports.
pub const MIN_DEPTH: usize = 2;

/// Reference depth model `0.019 n² + 0.053 n − 0.092`.
pub const REFERENCE_DEPTH_FIT: QuadraticFit = QuadraticFit {
    a: 0.019,
    b: 0.053,
    c: -0.092,
    residual_norm: 0.0,
};

const Z95: f64 = 1.959_963_984_540_054;

/// One optimised instance at one depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config_hash: String,
    pub n: usize,
    pub instance_id: usize,
    pub p: usize,
    pub params: ScheduleParams,
    pub expectation: f64,
    pub meas_prob: f64,
    pub degeneracy: usize,
    pub n_evals: usize,
    pub converged: bool,
}

impl ExperimentRecord {
    fn key(&self) -> (String, usize, usize, usize) {
        (self.config_hash.clone(), self.n, self.instance_id, self.p)
    }

    /// `meas_prob / (M / 2^n)`.
    pub fn amplification(&self) -> f64 {
        amplification(self.meas_prob, self.degeneracy, self.n)
    }
}

/// Optimises one instance at depth `p` and measures the optimal-solution
/// probability of the state with the highest expectation.
pub fn run_instance(
    inst: &LibraryInstance,
    p: usize,
    optimizer: &OptimizerConfig,
    config_hash: &str,
) -> Result<ExperimentRecord> {
    let table = ObjectiveTable::build(&inst.graph)?;
    let result = optimize_multistart(&table, p, optimizer)?;
    let mut objective = QwoaObjective::new(&table, p)?;
    let meas_prob = objective.state(result.params)?.optimal_probability(&table)?;
    Ok(ExperimentRecord {
        config_hash: config_hash.to_string(),
        n: inst.n,
        instance_id: inst.id,
        p,
        params: result.params,
        expectation: result.expectation,
        meas_prob,
        degeneracy: table.degeneracy(),
        n_evals: result.n_evals,
        converged: result.converged,
    })
}

/// Append-only JSON-lines store of experiment records keyed by
/// `(config_hash, n, instance_id, p)`.
#[derive(Debug, Default)]
pub struct ResultsStore {
    path: Option<PathBuf>,
    records: Vec<ExperimentRecord>,
    keys: HashSet<(String, usize, usize, usize)>,
}

impl ResultsStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a store file. A final line without a newline is a
    /// write interrupted mid-record and is dropped.
    pub fn open(path: &Path) -> Result<Self> {
        let mut store = Self {
            path: Some(path.to_path_buf()),
            ..Default::default()
        };
        if path.exists() {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            let complete = match text.rfind('\n') {
                Some(i) => &text[..=i],
                None => "",
            };
            if complete.len() != text.len() {
                log::warn!("{}: dropping incomplete trailing record", path.display());
                fs::write(path, complete)
                    .map_err(|e| Error::io(format!("rewriting {}", path.display()), e))?;
            }
            for rec in parse_records(complete, path)? {
                store.insert(rec);
            }
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Vec<ExperimentRecord>> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        parse_records(&text, path)
    }

    fn insert(&mut self, rec: ExperimentRecord) -> bool {
        if self.keys.insert(rec.key()) {
            self.records.push(rec);
            true
        } else {
            false
        }
    }

    pub fn get(&self, config_hash: &str, n: usize, instance_id: usize, p: usize) -> Option<&ExperimentRecord> {
        if !self.keys.contains(&(config_hash.to_string(), n, instance_id, p)) {
            return None;
        }
        self.records
            .iter()
            .find(|r| r.config_hash == config_hash && r.n == n && r.instance_id == instance_id && r.p == p)
    }

    pub fn records(&self) -> &[ExperimentRecord] {
        &self.records
    }

    /// Adds records not already present and appends them to the file.
    pub fn append(&mut self, recs: Vec<ExperimentRecord>) -> Result<()> {
        let fresh: Vec<ExperimentRecord> = recs.into_iter().filter(|r| !self.keys.contains(&r.key())).collect();
        if let Some(path) = &self.path {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
            let mut w = BufWriter::new(file);
            for r in &fresh {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n").map_err(|e| Error::io("appending record", e))?;
            }
            w.flush().map_err(|e| Error::io("flushing results", e))?;
        }
        for r in fresh {
            self.insert(r);
        }
        Ok(())
    }
}

fn parse_records(text: &str, path: &Path) -> Result<Vec<ExperimentRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::schema(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// mean ± 1.96 standard errors.
    Normal,
    /// Percentile bootstrap of the mean.
    Bootstrap,
}

impl FromStr for CiMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(CiMethod::Normal),
            "bootstrap" => Ok(CiMethod::Bootstrap),
            _ => Err(Error::InvalidParameter(format!("unknown CI method `{s}`"))),
        }
    }
}

/// Sample mean with its 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub count: usize,
}

pub fn mean_ci_normal(xs: &[f64]) -> MeanCi {
    let k = xs.len();
    let mean = xs.iter().sum::<f64>() / k as f64;
    let half = if k > 1 {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        Z95 * (var / k as f64).sqrt()
    } else {
        0.0
    };
    MeanCi {
        mean,
        ci_lo: mean - half,
        ci_hi: mean + half,
        count: k,
    }
}

/// Percentile bootstrap (2.5%, 97.5%) of the mean with `resamples` draws.
pub fn mean_ci_bootstrap(xs: &[f64], resamples: usize, seed: u64) -> MeanCi {
    let k = xs.len();
    let mean = xs.iter().sum::<f64>() / k as f64;
    let mut rng = child_stream(seed, 0xB007);
    let mut means: Vec<f64> = (0..resamples.max(1))
        .map(|_| (0..k).map(|_| xs[rng.gen_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    let at = |q: f64| means[((q * (means.len() - 1) as f64).round() as usize).min(means.len() - 1)];
    MeanCi {
        mean,
        ci_lo: at(0.025),
        ci_hi: at(0.975),
        count: k,
    }
}

pub fn mean_ci(xs: &[f64], method: CiMethod, resamples: usize, seed: u64) -> MeanCi {
    match method {
        CiMethod::Normal => mean_ci_normal(xs),
        CiMethod::Bootstrap => mean_ci_bootstrap(xs, resamples, seed),
    }
}

/// Mean measurement probability at one depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthPoint {
    pub p: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub count: usize,
}

impl DepthPoint {
    pub fn from_probs(p: usize, probs: &[f64], method: CiMethod, resamples: usize) -> Self {
        let m = mean_ci(probs, method, resamples, p as u64);
        Self {
            p,
            mean: m.mean,
            ci_lo: m.ci_lo,
            ci_hi: m.ci_hi,
            count: m.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketStatus {
    /// Two consecutive depths straddle the target.
    Bracketed,
    /// The smallest allowed depth already meets the target.
    AtLowerBoundary,
    /// The depth cap was reached below the target.
    Unbracketed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PStar {
    pub p_lo: usize,
    pub p_hi: usize,
    pub p_star: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Linear interpolation of the mean curve to `target` on the first pair of
/// consecutive swept depths that brackets it. The interval comes from the
/// first crossings of the upper and lower CI curves, interpolated the same way
/// (and extrapolated along the end segments when a CI curve never crosses).
pub fn interpolate_p_star(points: &[DepthPoint], target: f64) -> Result<PStar> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|d| d.p);
    if pts.is_empty() {
        return Err(Error::NoBracket("no swept depths".into()));
    }
    let (p_lo, p_hi, p_star) = if pts[0].mean == target {
        (pts[0].p, pts[0].p, pts[0].p as f64)
    } else {
        let w = pts
            .windows(2)
            .find(|w| w[0].mean < target && w[1].mean >= target)
            .ok_or_else(|| Error::NoBracket(format!("target {target} not bracketed by swept means")))?;
        let frac = (target - w[0].mean) / (w[1].mean - w[0].mean);
        (w[0].p, w[1].p, w[0].p as f64 + frac * (w[1].p - w[0].p) as f64)
    };
    let curve_hi: Vec<(f64, f64)> = pts.iter().map(|d| (d.p as f64, d.ci_hi)).collect();
    let curve_lo: Vec<(f64, f64)> = pts.iter().map(|d| (d.p as f64, d.ci_lo)).collect();
    Ok(PStar {
        p_lo,
        p_hi,
        p_star,
        ci_lo: first_crossing(&curve_hi, target).min(p_star),
        ci_hi: first_crossing(&curve_lo, target).max(p_star),
    })
}

fn first_crossing(curve: &[(f64, f64)], target: f64) -> f64 {
    if curve.len() == 1 {
        return curve[0].0;
    }
    let line = |a: (f64, f64), b: (f64, f64)| {
        if b.1 > a.1 {
            a.0 + (target - a.1) / (b.1 - a.1) * (b.0 - a.0)
        } else {
            f64::NAN
        }
    };
    if curve[0].1 >= target {
        let x = line(curve[0], curve[1]);
        return if x.is_nan() { curve[0].0 } else { x };
    }
    if let Some(w) = curve.windows(2).find(|w| w[0].1 < target && w[1].1 >= target) {
        return line(w[0], w[1]);
    }
    let k = curve.len();
    let x = line(curve[k - 2], curve[k - 1]);
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub target: f64,
    pub p_start: usize,
    pub p_max: usize,
    pub optimizer: OptimizerConfig,
    pub ci: CiMethod,
    pub bootstrap_resamples: usize,
}

impl SweepConfig {
    pub fn from_run(run: &crate::config::RunConfig) -> Self {
        Self {
            target: run.target,
            p_start: run.p_start,
            p_max: run.p_max,
            optimizer: run.optimizer,
            ci: run.ci,
            bootstrap_resamples: run.bootstrap_resamples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub n: usize,
    pub per_p: BTreeMap<usize, DepthPoint>,
    pub status: BracketStatus,
    pub p_star: Option<PStar>,
    /// Mean probability decreased somewhere along the swept depths.
    pub non_monotone: bool,
}

/// Optimises every instance at depth `p`, reusing stored records.
pub fn evaluate_depth(
    instances: &[&LibraryInstance],
    p: usize,
    optimizer: &OptimizerConfig,
    config_hash: &str,
    store: &mut ResultsStore,
) -> Result<Vec<ExperimentRecord>> {
    let todo: Vec<&LibraryInstance> = instances
        .iter()
        .copied()
        .filter(|i| store.get(config_hash, i.n, i.id, p).is_none())
        .collect();
    let run = |inst: &&LibraryInstance| run_instance(inst, p, optimizer, config_hash);
    #[cfg(feature = "parallel")]
    let fresh: Vec<ExperimentRecord> = {
        use rayon::prelude::*;
        todo.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let fresh: Vec<ExperimentRecord> = todo.iter().map(run).collect::<Result<_>>()?;
    store.append(fresh)?;
    Ok(instances
        .iter()
        .map(|i| store.get(config_hash, i.n, i.id, p).expect("just stored").clone())
        .collect())
}

/// Sweeps depth from `p_start` until the mean measurement probability over
/// `instances` brackets `config.target`: upward while below it, downward
/// (not below [`MIN_DEPTH`]) while the starting depth already meets it.
pub fn run_sweep(
    instances: &[&LibraryInstance],
    n: usize,
    config: &SweepConfig,
    config_hash: &str,
    store: &mut ResultsStore,
) -> Result<SweepSummary> {
    if instances.is_empty() {
        return Err(Error::InvalidParameter(format!("no instances of size {n}")));
    }
    if !(config.target > 0.0 && config.target < 1.0) {
        return Err(Error::InvalidParameter(format!("target must be in (0, 1), got {}", config.target)));
    }
    let mut per_p = BTreeMap::new();
    let mut measure = |p: usize, store: &mut ResultsStore| -> Result<f64> {
        let recs = evaluate_depth(instances, p, &config.optimizer, config_hash, store)?;
        let probs: Vec<f64> = recs.iter().map(|r| r.meas_prob).collect();
        let point = DepthPoint::from_probs(p, &probs, config.ci, config.bootstrap_resamples);
        log::info!("n={n} p={p}: mean meas_prob {:.4} [{:.4}, {:.4}]", point.mean, point.ci_lo, point.ci_hi);
        per_p.insert(p, point);
        Ok(point.mean)
    };

    let mut p = config.p_start.max(MIN_DEPTH);
    let mut status = BracketStatus::Bracketed;
    if measure(p, store)? >= config.target {
        loop {
            if p == MIN_DEPTH {
                status = BracketStatus::AtLowerBoundary;
                break;
            }
            p -= 1;
            if measure(p, store)? < config.target {
                break;
            }
        }
    } else {
        loop {
            if p >= config.p_max {
                status = BracketStatus::Unbracketed;
                break;
            }
            p += 1;
            if measure(p, store)? >= config.target {
                break;
            }
        }
    }

    let points: Vec<DepthPoint> = per_p.values().copied().collect();
    let non_monotone = points.windows(2).any(|w| w[1].mean < w[0].mean);
    if non_monotone {
        log::warn!("n={n}: mean measurement probability is not monotone in p");
    }
    let p_star = match status {
        BracketStatus::Bracketed => Some(interpolate_p_star(&points, config.target)?),
        BracketStatus::AtLowerBoundary => {
            let d = points[0];
            Some(PStar {
                p_lo: d.p,
                p_hi: d.p,
                p_star: d.p as f64,
                ci_lo: d.p as f64,
                ci_hi: d.p as f64,
            })
        }
        BracketStatus::Unbracketed => None,
    };
    Ok(SweepSummary {
        n,
        per_p,
        status,
        p_star,
        non_monotone,
    })
}

/// Groups records by size and depth into [`DepthPoint`]s.
pub fn depth_points(
    records: &[ExperimentRecord],
    method: CiMethod,
    resamples: usize,
) -> BTreeMap<usize, Vec<DepthPoint>> {
    let mut grouped: BTreeMap<usize, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in records {
        grouped.entry(r.n).or_default().entry(r.p).or_default().push(r.meas_prob);
    }
    grouped
        .into_iter()
        .map(|(n, by_p)| {
            let pts = by_p
                .into_iter()
                .map(|(p, probs)| DepthPoint::from_probs(p, &probs, method, resamples))
                .collect();
            (n, pts)
        })
        .collect()
}

/// Returns the single config hash shared by all `hashes`.
pub fn common_hash<'a>(hashes: impl IntoIterator<Item = &'a str>) -> Result<Option<String>> {
    let mut found: Option<&str> = None;
    for h in hashes {
        match found {
            None => found = Some(h),
            Some(f) if f != h => return Err(Error::HashMismatch(f.to_string(), h.to_string())),
            _ => {}
        }
    }
    Ok(found.map(str::to_string))
}

/// Rounds half away from zero for the positive depths used here.
pub fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Depth prescribed by a fitted model at size `n`, rounded to an integer and
/// never below [`MIN_DEPTH`].
pub fn prescribed_depth(fit: &QuadraticFit, n: usize) -> usize {
    round_half_up(fit.eval(n as f64)).max(MIN_DEPTH)
}

/// Probability that at least one of four shots returns an optimum.
pub fn four_shot_probability(meas_prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&meas_prob) {
        return Err(Error::InvalidParameter(format!("probability {meas_prob} outside [0, 1]")));
    }
    Ok(1.0 - (1.0 - meas_prob).powi(4))
}

/// Ratio of `meas_prob` to the uniform baseline `M / 2^n`.
pub fn amplification(meas_prob: f64, degeneracy: usize, n: usize) -> f64 {
    meas_prob * 2f64.powi(n as i32) / degeneracy as f64
}

/// Shared CSV reader: skips `# config_hash=` comment lines (returning the
/// hash) and checks the header.
pub fn read_csv(text: &str, header: &[&str]) -> Result<(Option<String>, Vec<Vec<String>>)> {
    let mut hash = None;
    let mut rows = Vec::new();
    let mut seen_header = false;
    for line in text.lines() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(h) = c.trim().strip_prefix("config_hash=") {
                hash = Some(h.to_string());
            }
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if !seen_header {
            if fields != header {
                return Err(Error::InvalidParameter(format!(
                    "unexpected CSV header `{line}`, want `{}`",
                    header.join(",")
                )));
            }
            seen_header = true;
            continue;
        }
        if fields.len() != header.len() {
            return Err(Error::InvalidParameter(format!("CSV row `{line}` has wrong field count")));
        }
        rows.push(fields);
    }
    if !seen_header {
        return Err(Error::InvalidParameter("CSV has no header".into()));
    }
    Ok((hash, rows))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))
}
