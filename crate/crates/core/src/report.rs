//! File formats exchanged between pipeline stages and the final report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::{
    amplification, common_hash, create, depth_points, four_shot_probability, interpolate_p_star, mean_ci_normal,
    prescribed_depth, read_csv, BracketStatus, CiMethod, DepthPoint, ExperimentRecord, MIN_DEPTH,
    REFERENCE_DEPTH_FIT,
};
use crate::error::{Error, Result};
use crate::fit::{fit_exponential, fit_quadratic, ExponentialFit, QuadraticFit};
use crate::instances::LibraryInstance;
use crate::landscape::{fit_exponential_to_medians, LocalOptimaCensus, ObjectiveTable};
use crate::local_search::{estimate_solve_probability, SearchProblem, Variant};
use crate::plot::{Chart, Series};
use crate::rng::instance_stream;
use crate::sim::{grover_required_iterations, grover_success_probability};

fn io_write(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_f(s: &str) -> Result<f64> {
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad number `{s}`")))
}

fn parse_u(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::InvalidParameter(format!("bad integer `{s}`")))
}

/// One line of `pstar.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PStarRow {
    pub n: usize,
    pub status: BracketStatus,
    pub p_lo: Option<usize>,
    pub p_hi: Option<usize>,
    pub p_star: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

const PSTAR_HEADER: [&str; 7] = ["n", "status", "p_lo", "p_hi", "p_star", "ci_lo", "ci_hi"];

fn status_str(s: BracketStatus) -> &'static str {
    match s {
        BracketStatus::Bracketed => "bracketed",
        BracketStatus::AtLowerBoundary => "at_lower_boundary",
        BracketStatus::Unbracketed => "unbracketed",
    }
}

/// Interpolated depth per size from the swept depths in `points`.
pub fn pstar_from_points(n: usize, points: &[DepthPoint], target: f64) -> PStarRow {
    let first = points.iter().min_by_key(|d| d.p);
    if let Some(d) = first {
        if d.p <= MIN_DEPTH && d.mean >= target {
            return PStarRow {
                n,
                status: BracketStatus::AtLowerBoundary,
                p_lo: Some(d.p),
                p_hi: Some(d.p),
                p_star: Some(d.p as f64),
                ci_lo: Some(d.p as f64),
                ci_hi: Some(d.p as f64),
            };
        }
    }
    match interpolate_p_star(points, target) {
        Ok(ps) => PStarRow {
            n,
            status: BracketStatus::Bracketed,
            p_lo: Some(ps.p_lo),
            p_hi: Some(ps.p_hi),
            p_star: Some(ps.p_star),
            ci_lo: Some(ps.ci_lo),
            ci_hi: Some(ps.ci_hi),
        },
        Err(_) => PStarRow {
            n,
            status: BracketStatus::Unbracketed,
            p_lo: None,
            p_hi: None,
            p_star: None,
            ci_lo: None,
            ci_hi: None,
        },
    }
}

pub fn pstar_rows(records: &[ExperimentRecord], target: f64, ci: CiMethod, resamples: usize) -> Vec<PStarRow> {
    depth_points(records, ci, resamples)
        .into_iter()
        .map(|(n, pts)| pstar_from_points(n, &pts, target))
        .collect()
}

pub fn write_pstar_csv(rows: &[PStarRow], config_hash: &str) -> String {
    let mut s = format!("# config_hash={config_hash}\n{}\n", PSTAR_HEADER.join(","));
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n,
            status_str(r.status),
            r.p_lo.map(|v| v.to_string()).unwrap_or_default(),
            r.p_hi.map(|v| v.to_string()).unwrap_or_default(),
            fmt_opt(r.p_star),
            fmt_opt(r.ci_lo),
            fmt_opt(r.ci_hi),
        ));
    }
    s
}

pub fn read_pstar_csv(text: &str) -> Result<(Option<String>, Vec<PStarRow>)> {
    let (hash, rows) = read_csv(text, &PSTAR_HEADER)?;
    let opt_u = |s: &str| -> Result<Option<usize>> { if s.is_empty() { Ok(None) } else { parse_u(s).map(Some) } };
    let opt_f = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { parse_f(s).map(Some) } };
    let parsed = rows
        .iter()
        .map(|r| {
            let status = match r[1].as_str() {
                "bracketed" => BracketStatus::Bracketed,
                "at_lower_boundary" => BracketStatus::AtLowerBoundary,
                "unbracketed" => BracketStatus::Unbracketed,
                other => return Err(Error::InvalidParameter(format!("bad status `{other}`"))),
            };
            Ok(PStarRow {
                n: parse_u(&r[0])?,
                status,
                p_lo: opt_u(&r[2])?,
                p_hi: opt_u(&r[3])?,
                p_star: opt_f(&r[4])?,
                ci_lo: opt_f(&r[5])?,
                ci_hi: opt_f(&r[6])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((hash, parsed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitModel {
    Quadratic(QuadraticFit),
    Exponential(ExponentialFit),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub p_star: f64,
}

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub config_hash: String,
    pub fit: FitModel,
    pub points: Vec<FitPoint>,
}

impl FitFile {
    /// Fits `model` ("quadratic" or "exponential") to the interpolated depths.
    pub fn from_pstar(rows: &[PStarRow], model: &str, config_hash: &str) -> Result<Self> {
        let points: Vec<FitPoint> = rows
            .iter()
            .filter(|r| r.status != BracketStatus::Unbracketed)
            .filter_map(|r| r.p_star.map(|p| FitPoint { n: r.n, p_star: p }))
            .collect();
        let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.p_star).collect();
        let fit = match model {
            "quadratic" => FitModel::Quadratic(fit_quadratic(&xs, &ys)?),
            "exponential" => FitModel::Exponential(fit_exponential(&xs, &ys)?),
            other => return Err(Error::InvalidParameter(format!("unknown fit model `{other}`"))),
        };
        Ok(Self {
            config_hash: config_hash.to_string(),
            fit,
            points,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn eval(&self, n: f64) -> f64 {
        match &self.fit {
            FitModel::Quadratic(q) => q.eval(n),
            FitModel::Exponential(e) => e.eval(n),
        }
    }
}

/// One line of `ls.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsRow {
    pub n: usize,
    pub instance_id: usize,
    pub variant: Variant,
    pub runs: u64,
    pub p_solve: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_evals: f64,
}

const LS_HEADER: [&str; 8] = ["n", "instance_id", "variant", "runs", "p_solve", "ci_lo", "ci_hi", "mean_evals"];

/// Seed for the local-search runs on instance `(n, id)`.
pub fn ls_instance_seed(ls_seed: u64, n: usize, id: usize) -> u64 {
    ls_seed ^ instance_stream(n, id).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run_local_search_library(
    instances: &[&LibraryInstance],
    variant: Variant,
    runs: u64,
    ls_seed: u64,
) -> Result<Vec<LsRow>> {
    instances
        .iter()
        .map(|inst| {
            let table = ObjectiveTable::build(&inst.graph)?;
            let problem = SearchProblem::from_table(&inst.graph, &table)?;
            let est = estimate_solve_probability(&problem, variant, runs, ls_instance_seed(ls_seed, inst.n, inst.id))?;
            Ok(LsRow {
                n: inst.n,
                instance_id: inst.id,
                variant,
                runs,
                p_solve: est.p_solve,
                ci_lo: est.ci_lo,
                ci_hi: est.ci_hi,
                mean_evals: est.mean_evals,
            })
        })
        .collect()
}

pub fn write_ls_csv(rows: &[LsRow], config_hash: &str) -> String {
    let mut s = format!("# config_hash={config_hash}\n{}\n", LS_HEADER.join(","));
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n, r.instance_id, r.variant, r.runs, r.p_solve, r.ci_lo, r.ci_hi, r.mean_evals
        ));
    }
    s
}

pub fn read_ls_csv(text: &str) -> Result<(Option<String>, Vec<LsRow>)> {
    let (hash, rows) = read_csv(text, &LS_HEADER)?;
    let parsed = rows
        .iter()
        .map(|r| {
            Ok(LsRow {
                n: parse_u(&r[0])?,
                instance_id: parse_u(&r[1])?,
                variant: r[2].parse()?,
                runs: parse_u(&r[3])? as u64,
                p_solve: parse_f(&r[4])?,
                ci_lo: parse_f(&r[5])?,
                ci_hi: parse_f(&r[6])?,
                mean_evals: parse_f(&r[7])?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((hash, parsed))
}

/// Per-size local-search summary across instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsSummary {
    pub p_solve: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_evals: f64,
    pub instances: usize,
}

pub fn summarize_ls(rows: &[LsRow]) -> BTreeMap<(Variant, usize), LsSummary> {
    let mut grouped: BTreeMap<(Variant, usize), Vec<&LsRow>> = BTreeMap::new();
    for r in rows {
        grouped.entry((r.variant, r.n)).or_default().push(r);
    }
    grouped
        .into_iter()
        .map(|((variant, n), rs)| {
            let ps: Vec<f64> = rs.iter().map(|r| r.p_solve).collect();
            let m = mean_ci_normal(&ps);
            let evals = rs.iter().map(|r| r.mean_evals).sum::<f64>() / rs.len() as f64;
            (
                (variant, n),
                LsSummary {
                    p_solve: m.mean,
                    ci_lo: m.ci_lo,
                    ci_hi: m.ci_hi,
                    mean_evals: evals,
                    instances: rs.len(),
                },
            )
        })
        .collect()
}

/// One size in the quantum/classical comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n: usize,
    pub p: usize,
    /// `4p`: four shots of a depth-`p` circuit.
    pub quantum_evals: usize,
    pub instances: usize,
    pub mean_meas_prob: f64,
    pub four_shot: f64,
    pub four_shot_ci_lo: f64,
    pub four_shot_ci_hi: f64,
    pub mean_amplification: f64,
    /// Grover amplification `sin²((2p+1)θ)/(M/N)` at the same depth, M = 2.
    pub grover_amplification: f64,
    /// Grover iterations to reach the target with M = 2.
    pub grover_iterations: u64,
    pub steepest: Option<LsSummary>,
    pub firstimp: Option<LsSummary>,
    pub flags: Vec<String>,
}

pub struct ReportInputs<'a> {
    pub records: &'a [ExperimentRecord],
    pub ls_rows: &'a [LsRow],
    pub fit: Option<&'a FitFile>,
    pub census: Option<&'a LocalOptimaCensus>,
    pub target: f64,
    pub ci: CiMethod,
    pub bootstrap_resamples: usize,
}

pub struct Report {
    pub config_hash: String,
    pub rows: Vec<ComparisonRow>,
    pub sweep: BTreeMap<usize, Vec<DepthPoint>>,
    pub pstar: Vec<PStarRow>,
    pub depth_fit: QuadraticFit,
    pub census_medians: BTreeMap<usize, f64>,
    pub census_fit: Option<ExponentialFit>,
    pub warnings: Vec<String>,
}

/// Builds the per-size comparison. Depths come from the quadratic in
/// `inputs.fit` when present, otherwise from [`REFERENCE_DEPTH_FIT`].
pub fn comparison_report(inputs: &ReportInputs, hashes: &[&str]) -> Result<Report> {
    let mut all_hashes: Vec<&str> = hashes.to_vec();
    all_hashes.extend(inputs.records.iter().map(|r| r.config_hash.as_str()));
    if let Some(f) = inputs.fit {
        all_hashes.push(&f.config_hash);
    }
    let config_hash = common_hash(all_hashes)?.unwrap_or_default();

    let mut warnings = Vec::new();
    let depth_fit = match inputs.fit.map(|f| &f.fit) {
        Some(FitModel::Quadratic(q)) => *q,
        Some(FitModel::Exponential(_)) => {
            warnings.push("fit is exponential; using the reference quadratic for report depths".into());
            REFERENCE_DEPTH_FIT
        }
        None => {
            warnings.push("no fit supplied; using the reference quadratic for report depths".into());
            REFERENCE_DEPTH_FIT
        }
    };
    if inputs.ls_rows.is_empty() {
        warnings.push("no local-search results; report has quantum columns only".into());
    }
    let ls = summarize_ls(inputs.ls_rows);

    let mut by_n: BTreeMap<usize, BTreeMap<usize, Vec<&ExperimentRecord>>> = BTreeMap::new();
    for r in inputs.records {
        by_n.entry(r.n).or_default().entry(r.p).or_default().push(r);
    }
    let mut sizes: Vec<usize> = by_n.keys().copied().collect();
    for (_, n) in ls.keys() {
        if !sizes.contains(n) {
            sizes.push(*n);
        }
    }
    sizes.sort_unstable();

    let mut rows = Vec::new();
    for n in sizes {
        let mut flags = Vec::new();
        let wanted = prescribed_depth(&depth_fit, n);
        let Some(by_p) = by_n.get(&n) else {
            warnings.push(format!("n={n}: no quantum records"));
            continue;
        };
        let p = if by_p.contains_key(&wanted) {
            wanted
        } else {
            let nearest = *by_p
                .keys()
                .min_by_key(|&&p| (p as i64 - wanted as i64).abs())
                .expect("non-empty");
            flags.push(format!("p{wanted}_missing_used_p{nearest}"));
            warnings.push(format!("n={n}: no records at p={wanted}, using p={nearest}"));
            nearest
        };
        let recs = &by_p[&p];
        let shots: Vec<f64> = recs
            .iter()
            .map(|r| four_shot_probability(r.meas_prob.clamp(0.0, 1.0)))
            .collect::<Result<_>>()?;
        let shot_ci = mean_ci_normal(&shots);
        let mean_meas = recs.iter().map(|r| r.meas_prob).sum::<f64>() / recs.len() as f64;
        let mean_amp = recs
            .iter()
            .map(|r| amplification(r.meas_prob, r.degeneracy, r.n))
            .sum::<f64>()
            / recs.len() as f64;
        let space = 2f64.powi(n as i32);
        let grover_amplification = grover_success_probability(space, 2.0, p as u64)? / (2.0 / space);
        let steepest = ls.get(&(Variant::SteepestAscent, n)).copied();
        let firstimp = ls.get(&(Variant::FirstImprovement, n)).copied();
        if !inputs.ls_rows.is_empty() && (steepest.is_none() || firstimp.is_none()) {
            flags.push("ls_partial".into());
            warnings.push(format!("n={n}: local-search results incomplete"));
        }
        rows.push(ComparisonRow {
            n,
            p,
            quantum_evals: 4 * p,
            instances: recs.len(),
            mean_meas_prob: mean_meas,
            four_shot: shot_ci.mean,
            four_shot_ci_lo: shot_ci.ci_lo,
            four_shot_ci_hi: shot_ci.ci_hi,
            mean_amplification: mean_amp,
            grover_amplification,
            grover_iterations: grover_required_iterations(space, 2.0, inputs.target)?,
            steepest,
            firstimp,
            flags,
        });
    }

    let sweep = depth_points(inputs.records, inputs.ci, inputs.bootstrap_resamples);
    let pstar = sweep
        .iter()
        .map(|(&n, pts)| pstar_from_points(n, pts, inputs.target))
        .collect();

    let (census_medians, census_fit) = match inputs.census {
        Some(c) => {
            let medians = c.medians();
            let fit = match fit_exponential_to_medians(&medians) {
                Ok(f) => Some(f),
                Err(e) => {
                    warnings.push(format!("local-optima fit: {e}"));
                    None
                }
            };
            (medians, fit)
        }
        None => {
            warnings.push("no census supplied; fig1 data is empty".into());
            (BTreeMap::new(), None)
        }
    };

    Ok(Report {
        config_hash,
        rows,
        sweep,
        pstar,
        depth_fit,
        census_medians,
        census_fit,
        warnings,
    })
}

impl Report {
    pub fn comparison_csv(&self) -> String {
        let mut s = format!(
            "# config_hash={}\nn,p,quantum_evals,instances,mean_meas_prob,four_shot_prob,four_shot_ci_lo,four_shot_ci_hi,\
mean_amplification,grover_amplification_same_p,grover_iterations_to_target,\
steepest_p_solve,steepest_ci_lo,steepest_ci_hi,steepest_mean_evals,\
firstimp_p_solve,firstimp_ci_lo,firstimp_ci_hi,firstimp_mean_evals,flags\n",
            self.config_hash
        );
        let ls = |x: &Option<LsSummary>| match x {
            Some(l) => format!("{},{},{},{}", l.p_solve, l.ci_lo, l.ci_hi, l.mean_evals),
            None => ",,,".into(),
        };
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                r.p,
                r.quantum_evals,
                r.instances,
                r.mean_meas_prob,
                r.four_shot,
                r.four_shot_ci_lo,
                r.four_shot_ci_hi,
                r.mean_amplification,
                r.grover_amplification,
                r.grover_iterations,
                ls(&r.steepest),
                ls(&r.firstimp),
                r.flags.join(";"),
            ));
        }
        s
    }

    fn fig1_csv(&self) -> String {
        let mut s = format!("# config_hash={}\nn,median_local_optima,exponential_fit\n", self.config_hash);
        for (n, m) in &self.census_medians {
            s.push_str(&format!("{n},{m},{}\n", fmt_opt(self.census_fit.map(|f| f.eval(*n as f64)))));
        }
        s
    }

    fn fig3_csv(&self) -> String {
        let mut s = format!("# config_hash={}\nn,p,mean_meas_prob,ci_lo,ci_hi,instances\n", self.config_hash);
        for (n, pts) in &self.sweep {
            for d in pts {
                s.push_str(&format!("{n},{},{},{},{},{}\n", d.p, d.mean, d.ci_lo, d.ci_hi, d.count));
            }
        }
        s
    }

    fn fig4_csv(&self, target: f64) -> Result<String> {
        let mut s = format!(
            "# config_hash={}\nn,status,p_star,ci_lo,ci_hi,quadratic_fit,grover_iterations\n",
            self.config_hash
        );
        for r in &self.pstar {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                status_str(r.status),
                fmt_opt(r.p_star),
                fmt_opt(r.ci_lo),
                fmt_opt(r.ci_hi),
                self.depth_fit.eval(r.n as f64),
                grover_required_iterations(2f64.powi(r.n as i32), 2.0, target)?,
            ));
        }
        Ok(s)
    }

    /// Writes CSV plot data, SVG figures and `warnings.txt` into `dir`.
    pub fn write(&self, dir: &Path, target: f64) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let comparison = self.comparison_csv();
        io_write(&dir.join("comparison.csv"), &comparison)?;
        io_write(&dir.join("fig1_local_optima.csv"), &self.fig1_csv())?;
        io_write(&dir.join("fig3_sweep.csv"), &self.fig3_csv())?;
        io_write(&dir.join("fig4_required_iterations.csv"), &self.fig4_csv(target)?)?;
        io_write(&dir.join("fig5_comparison.csv"), &comparison)?;
        let mut warn = String::new();
        for w in &self.warnings {
            warn.push_str(w);
            warn.push('\n');
        }
        io_write(&dir.join("warnings.txt"), &warn)?;
        for (name, chart) in self.charts(target)? {
            io_write(&dir.join(name), &chart.to_svg())?;
        }
        Ok(())
    }

    fn charts(&self, target: f64) -> Result<Vec<(&'static str, Chart)>> {
        let mut out = Vec::new();

        let mut fig1 = Chart::new("Single-flip local optima", "n", "median count").log_y().push(Series::new(
            "median",
            "black",
            self.census_medians.iter().map(|(&n, &m)| (n as f64, m)).collect(),
        ));
        if let Some(f) = self.census_fit {
            fig1 = fig1.push(
                Series::new(
                    format!("{:.3}·{:.3}^n", f.a, f.r),
                    "steelblue",
                    self.census_medians.keys().map(|&n| (n as f64, f.eval(n as f64))).collect(),
                )
                .as_line(),
            );
        }
        out.push(("fig1_local_optima.svg", fig1));

        let palette = ["black", "steelblue", "darkorange", "seagreen", "crimson", "purple", "gray", "olive"];
        let mut fig3 = Chart::new("Mean measurement probability vs depth", "p", "mean probability");
        for (k, (n, pts)) in self.sweep.iter().enumerate() {
            fig3 = fig3.push(
                Series::new(
                    format!("n={n}"),
                    palette[k % palette.len()],
                    pts.iter().map(|d| (d.p as f64, d.mean)).collect(),
                )
                .with_errors(pts.iter().map(|d| (d.ci_lo, d.ci_hi)).collect()),
            );
        }
        if let (Some(lo), Some(hi)) = (
            self.sweep.values().flatten().map(|d| d.p).min(),
            self.sweep.values().flatten().map(|d| d.p).max(),
        ) {
            fig3 = fig3.push(Series::new("target", "crimson", vec![(lo as f64, target), (hi as f64, target)]).dashed());
        }
        out.push(("fig3_sweep.svg", fig3));

        let solved: Vec<&PStarRow> = self.pstar.iter().filter(|r| r.p_star.is_some()).collect();
        let mut grover = Vec::new();
        for r in &self.pstar {
            grover.push((r.n as f64, grover_required_iterations(2f64.powi(r.n as i32), 2.0, target)? as f64));
        }
        let fig4 = Chart::new("Depth for target probability", "n", "p")
            .push(
                Series::new("QWOA p*", "black", solved.iter().map(|r| (r.n as f64, r.p_star.unwrap())).collect())
                    .with_errors(
                        solved
                            .iter()
                            .map(|r| (r.ci_lo.unwrap_or(f64::NAN), r.ci_hi.unwrap_or(f64::NAN)))
                            .collect(),
                    ),
            )
            .push(
                Series::new(
                    "quadratic fit",
                    "steelblue",
                    self.pstar.iter().map(|r| (r.n as f64, self.depth_fit.eval(r.n as f64))).collect(),
                )
                .as_line(),
            )
            .push(Series::new("Grover", "darkorange", grover));
        out.push(("fig4_required_iterations.svg", fig4));

        let mut fig5 = Chart::new("Success probability per run", "n", "probability").push(
            Series::new(
                "QWOA (4 shots)",
                "black",
                self.rows.iter().map(|r| (r.n as f64, r.four_shot)).collect(),
            )
            .with_errors(self.rows.iter().map(|r| (r.four_shot_ci_lo, r.four_shot_ci_hi)).collect()),
        );
        for (label, color, pick) in [
            ("steepest ascent", "steelblue", 0),
            ("first improvement", "darkorange", 1),
        ] {
            let pts: Vec<(f64, f64)> = self
                .rows
                .iter()
                .filter_map(|r| {
                    let s = if pick == 0 { r.steepest } else { r.firstimp };
                    s.map(|s| (r.n as f64, s.p_solve))
                })
                .collect();
            if !pts.is_empty() {
                fig5 = fig5.push(Series::new(label, color, pts));
            }
        }
        out.push(("fig5_comparison.svg", fig5));
        Ok(out)
    }
}
