//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion does. The full run optimises 400 instances at
//! n = 10..16 and takes tens of minutes on a single core.
//!
//! Set `QWOA_ACCEPTANCE=1,3,8` to run a subset while iterating.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwoa_core::bench::{
    amplification, evaluate_depth, interpolate_p_star, mean_ci_normal, prescribed_depth, run_sweep, DepthPoint,
    ExperimentRecord, ResultsStore, SweepConfig, REFERENCE_DEPTH_FIT,
};
use qwoa_core::config::RunConfig;
use qwoa_core::fit::{fit_exponential, fit_line, fit_quadratic};
use qwoa_core::instances::{generate_instance, InstanceLibrary, LibraryConfig, LibraryInstance, WeightDist};
use qwoa_core::landscape::{count_local_optima, fit_exponential_to_medians, LocalOptimaCensus, ObjectiveTable};
use qwoa_core::local_search::{estimate_solve_probability, exact_solve_probability, SearchProblem, Variant};
use qwoa_core::reference::evolve_gates;
use qwoa_core::report::{
    comparison_report, pstar_rows, run_local_search_library, write_ls_csv, write_pstar_csv, FitFile, ReportInputs,
};
use qwoa_core::schedule::{expand_schedule, OptimizerConfig, DEFAULT_START};
use qwoa_core::sim::{evolve, grover_success_probability, LayerSchedule};

const UNITARY_TOL: f64 = 1e-9;
const UNITARY_BUDGET: Duration = Duration::from_secs(60);
const NORM_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-10;
/// Optimum values come from differently ordered float sums.
const OPTIMUM_REL_TOL: f64 = 1e-12;
const SCALE_TOL: f64 = 1e-10;
const MEAN_PROB_BAND: (f64, f64) = (0.05, 0.20);
const DESK_INSTANCES: usize = 100;
const GROVER_1681_REL_TOL: f64 = 0.01;
const WILSON_COVERAGE: f64 = 0.95;
const MACHINERY_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn desk_library() -> &'static InstanceLibrary {
    use std::sync::OnceLock;
    static LIB: OnceLock<InstanceLibrary> = OnceLock::new();
    LIB.get_or_init(|| LibraryConfig::default().generate().expect("desk library"))
}

fn brute_cut(edges: &[(usize, usize, f64)], b: u64) -> f64 {
    edges
        .iter()
        .filter(|&&(i, j, _)| ((b >> i) ^ (b >> j)) & 1 == 1)
        .map(|&(_, _, w)| w)
        .sum()
}

fn c1_unitary_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let n = [4, 6, 8][k % 3];
        let p = rng.gen_range(1..=3);
        let g = generate_instance(n, 0.5, WeightDist::default(), &mut rng).unwrap().graph;
        let table = ObjectiveTable::build(&g).unwrap();
        let sched = LayerSchedule::new(
            (0..p).map(|_| rng.gen_range(0.0..4.0)).collect(),
            (0..p).map(|_| rng.gen_range(0.0..0.7)).collect(),
        )
        .unwrap();
        let fast = evolve(&table, &sched).unwrap();
        let slow = evolve_gates(&g, &sched).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= UNITARY_TOL && elapsed < UNITARY_BUDGET,
        format!("max |Δamp| = {worst:.2e} over 50 instances in {:.2}s", elapsed.as_secs_f64()),
    )
}

fn c2_norm_symmetry() -> Outcome {
    let lib = desk_library();
    let (mut worst_norm, mut worst_sym) = (0.0f64, 0.0f64);
    for inst in &lib.instances {
        let table = ObjectiveTable::build(&inst.graph).unwrap();
        let p = prescribed_depth(&REFERENCE_DEPTH_FIT, inst.n);
        let psi = evolve(&table, &expand_schedule(DEFAULT_START, p, table.sigma()).unwrap()).unwrap();
        worst_norm = worst_norm.max((psi.norm_sqr() - 1.0).abs());
        let amps = psi.amplitudes();
        let mask = amps.len() - 1;
        for b in 0..amps.len() {
            worst_sym = worst_sym.max((amps[b].norm() - amps[!b & mask].norm()).abs());
        }
    }
    outcome(
        worst_norm < NORM_TOL && worst_sym < SYMMETRY_TOL,
        format!(
            "{} states: max |norm-1| = {worst_norm:.2e}, max ||a_b|-|a_~b|| = {worst_sym:.2e}",
            lib.instances.len()
        ),
    )
}

fn c3_landscape() -> Outcome {
    let lib = desk_library();
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let small: Vec<LibraryInstance> = {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
        (2..10)
            .flat_map(|n| (0..5).map(move |id| (n, id)))
            .map(|(n, id)| LibraryInstance {
                n,
                id,
                graph: generate_instance(n, 0.5, WeightDist::default(), &mut rng).unwrap().graph,
                rejections: 0,
            })
            .collect()
    };
    for inst in small.iter().chain(lib.instances.iter().filter(|i| i.n <= 12)) {
        let n = inst.n;
        let edges: Vec<(usize, usize, f64)> = inst.graph.edges().iter().map(|e| (e.i, e.j, e.w)).collect();
        let values: Vec<f64> = (0..1u64 << n).map(|b| brute_cut(&edges, b)).collect();
        let opt = values.iter().copied().fold(f64::MIN, f64::max);
        let m = values.iter().filter(|&&v| (v - opt).abs() <= 1e-9 * opt.max(1.0)).count();
        let lo = (0..1usize << n)
            .filter(|&b| (0..n).all(|i| values[b ^ (1 << i)] <= values[b]))
            .count() as u64;
        let table = ObjectiveTable::build(&inst.graph).unwrap();
        let ok = (table.optimum() - opt).abs() <= OPTIMUM_REL_TOL * opt
            && table.degeneracy() == m
            && count_local_optima(&table).count == lo;
        if !ok {
            mismatches.push((n, inst.id));
        }
        checked += 1;
    }
    let mut census = LocalOptimaCensus::default();
    for inst in lib.instances.iter().filter(|i| (10..=14).contains(&i.n)) {
        let table = ObjectiveTable::build(&inst.graph).unwrap();
        census.record(inst.n, inst.id, count_local_optima(&table).count);
    }
    let medians = census.medians();
    let fit = fit_exponential_to_medians(&medians).unwrap();
    outcome(
        mismatches.is_empty() && fit.r > 1.0,
        format!(
            "{checked} instances, {} mismatches; medians {:?}, growth rate r = {:.4}",
            mismatches.len(),
            medians.values().collect::<Vec<_>>(),
            fit.r
        ),
    )
}

fn c4_weight_scale() -> Outcome {
    let lib = desk_library();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for inst in lib.instances.iter().filter(|i| i.n <= 12 && i.id < 10) {
        let base = ObjectiveTable::build(&inst.graph).unwrap();
        let params = qwoa_core::schedule::ScheduleParams::new(
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..0.7),
            rng.gen_range(0.0..0.5),
        );
        let p = rng.gen_range(1..=6);
        let a = evolve(&base, &expand_schedule(params, p, base.sigma()).unwrap()).unwrap();
        for c in [0.1, 10.0] {
            let scaled = ObjectiveTable::build(&inst.graph.scaled(c).unwrap()).unwrap();
            let b = evolve(&scaled, &expand_schedule(params, p, scaled.sigma()).unwrap()).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                worst = worst.max((x - y).norm());
            }
            cases += 1;
        }
    }
    outcome(worst <= SCALE_TOL, format!("{cases} scaled evolutions, max |Δamp| = {worst:.2e}"))
}

/// Optimised records at the reference-fit depth for n = 10, 12, 14, 16.
fn desk_records() -> Vec<(usize, usize, Vec<ExperimentRecord>)> {
    let lib = desk_library();
    let optimizer = OptimizerConfig::default();
    let mut store = ResultsStore::in_memory();
    [10, 12, 14, 16]
        .into_iter()
        .map(|n| {
            let p = prescribed_depth(&REFERENCE_DEPTH_FIT, n);
            let instances: Vec<&LibraryInstance> = lib.of_size(n).take(DESK_INSTANCES).collect();
            let recs = evaluate_depth(&instances, p, &optimizer, "acceptance", &mut store).unwrap();
            (n, p, recs)
        })
        .collect()
}

fn c5_desk_consistency(desk: &[(usize, usize, Vec<ExperimentRecord>)]) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (n, p, recs) in desk {
        let m = mean_ci_normal(&recs.iter().map(|r| r.meas_prob).collect::<Vec<_>>());
        let inside = m.mean >= MEAN_PROB_BAND.0 && m.mean <= MEAN_PROB_BAND.1 && recs.len() >= DESK_INSTANCES;
        pass &= inside;
        let _ = write!(detail, "n={n} p={p}: {:.4} [{:.4}, {:.4}] (N={}); ", m.mean, m.ci_lo, m.ci_hi, recs.len());
    }
    outcome(pass, detail.trim_end_matches("; ").to_string())
}

fn c6_amplification(desk: &[(usize, usize, Vec<ExperimentRecord>)]) -> Outcome {
    let (n, p, recs) = desk.last().expect("at least one size");
    let mean_amp = recs.iter().map(|r| amplification(r.meas_prob, r.degeneracy, r.n)).sum::<f64>() / recs.len() as f64;
    let grover = ((2 * p + 1) * (2 * p + 1)) as f64;
    let big = 2f64.powi(40);
    let closed = grover_success_probability(big, 1.0, 20).unwrap() * big;
    let closed_ok = (closed - 1681.0).abs() / 1681.0 <= GROVER_1681_REL_TOL;
    outcome(
        mean_amp > grover && closed_ok,
        format!(
            "n={n} p={p}: mean amplification {mean_amp:.1} vs Grover {grover}; p=20 closed form {closed:.2}"
        ),
    )
}

fn c7_local_search() -> Outcome {
    let lib = desk_library();
    let runs = RunConfig::default().ls_runs;
    let seed = RunConfig::default().ls_seed;
    let instances: Vec<&LibraryInstance> = lib.instances.iter().collect();
    let rows = run_local_search_library(&instances, Variant::SteepestAscent, runs, seed).unwrap();
    let mut per_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        per_n.entry(r.n).or_default().push(r.p_solve);
    }
    let summary: Vec<(usize, f64, f64)> = per_n
        .iter()
        .map(|(&n, ps)| {
            let m = mean_ci_normal(ps);
            (n, m.mean, (m.ci_hi - m.mean) / 1.959_963_984_540_054)
        })
        .collect();
    // a rise larger than the combined 95% margin counts as an increase
    let non_increasing = summary
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + 1.959_963_984_540_054 * (w[0].2.powi(2) + w[1].2.powi(2)).sqrt());
    let xs: Vec<f64> = summary.iter().map(|s| s.0 as f64).collect();
    let ys: Vec<f64> = summary.iter().map(|s| s.1.ln()).collect();
    let (_, slope) = fit_line(&xs, &ys).unwrap();

    let mut covered = 0;
    let mut total = 0;
    for inst in lib.instances.iter().filter(|i| i.n <= 12) {
        let table = ObjectiveTable::build(&inst.graph).unwrap();
        let exact = exact_solve_probability(&table).unwrap();
        let problem = SearchProblem::from_table(&inst.graph, &table).unwrap();
        let est = estimate_solve_probability(
            &problem,
            Variant::SteepestAscent,
            runs,
            qwoa_core::report::ls_instance_seed(seed, inst.n, inst.id),
        )
        .unwrap();
        total += 1;
        if est.ci_lo <= exact && exact <= est.ci_hi {
            covered += 1;
        }
    }
    let coverage = covered as f64 / total as f64;
    let means: Vec<String> = summary.iter().map(|(n, m, _)| format!("{n}:{m:.3}")).collect();
    outcome(
        non_increasing && slope < 0.0 && coverage >= WILSON_COVERAGE,
        format!(
            "means {}; log-slope {slope:.4}; Wilson coverage {covered}/{total} = {coverage:.3}",
            means.join(" ")
        ),
    )
}

fn c8_machinery() -> Outcome {
    let mut worst = 0.0f64;
    let xs: Vec<f64> = (10..=30).map(|n| n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| REFERENCE_DEPTH_FIT.eval(x)).collect();
    let q = fit_quadratic(&xs, &ys).unwrap();
    worst = worst
        .max((q.a - 0.019).abs())
        .max((q.b - 0.053).abs())
        .max((q.c + 0.092).abs());

    let ys: Vec<f64> = xs.iter().map(|&x| 0.37 * 1.41f64.powf(x)).collect();
    let e = fit_exponential(&xs, &ys).unwrap();
    worst = worst.max((e.a - 0.37).abs() / 0.37).max((e.r - 1.41).abs());

    let (c, m) = fit_line(&xs, &xs.iter().map(|x| 2.5 - 0.75 * x).collect::<Vec<_>>()).unwrap();
    worst = worst.max((c - 2.5).abs()).max((m + 0.75).abs());

    // means linear in p with slope 0.03 cross 0.11 at p = 2 + 0.07 / 0.03
    let points: Vec<DepthPoint> = (2..=7)
        .map(|p| {
            let mean = 0.04 + 0.03 * (p - 2) as f64;
            DepthPoint {
                p,
                mean,
                ci_lo: mean - 0.015,
                ci_hi: mean + 0.015,
                count: 100,
            }
        })
        .collect();
    let ps = interpolate_p_star(&points, 0.11).unwrap();
    worst = worst.max((ps.p_star - (2.0 + 0.07 / 0.03)).abs());
    // ci_hi crosses 0.11 at p = 2 + 0.055/0.03 and ci_lo at p = 2 + 0.085/0.03
    worst = worst.max((ps.ci_lo - (2.0 + 0.055 / 0.03)).abs());
    worst = worst.max((ps.ci_hi - (2.0 + 0.085 / 0.03)).abs());
    let depth_ok = [(10, 2), (12, 3), (14, 4), (16, 6), (20, 9)]
        .iter()
        .all(|&(n, p)| prescribed_depth(&REFERENCE_DEPTH_FIT, n) == p);
    outcome(
        worst <= MACHINERY_TOL && depth_ok,
        format!("max coefficient/interpolation error {worst:.2e}; reference depths at n=10,12,14,16,20 = 2,3,4,6,9: {depth_ok}"),
    )
}

fn pipeline(dir: &Path, config: &RunConfig) {
    let lib = config.library.generate().unwrap();
    lib.save(&dir.join("lib")).unwrap();
    let lib = InstanceLibrary::load(&dir.join("lib")).unwrap();
    let hash = config.hash();

    let mut census = LocalOptimaCensus::default();
    for inst in &lib.instances {
        census.record(inst.n, inst.id, count_local_optima(&ObjectiveTable::build(&inst.graph).unwrap()).count);
    }
    fs::write(dir.join("census.csv"), census.to_csv(&hash)).unwrap();

    let mut store = ResultsStore::open(&dir.join("results.jsonl")).unwrap();
    for n in lib.sizes() {
        let instances: Vec<&LibraryInstance> = lib.of_size(n).collect();
        run_sweep(&instances, n, &SweepConfig::from_run(config), &hash, &mut store).unwrap();
    }
    let records = ResultsStore::load(&dir.join("results.jsonl")).unwrap();
    let pstar = pstar_rows(&records, config.target, config.ci, config.bootstrap_resamples);
    fs::write(dir.join("pstar.csv"), write_pstar_csv(&pstar, &hash)).unwrap();
    let fit = FitFile::from_pstar(&pstar, "quadratic", &hash).unwrap();
    fs::write(dir.join("fit.json"), fit.to_json().unwrap()).unwrap();

    let instances: Vec<&LibraryInstance> = lib.instances.iter().collect();
    let mut ls_rows = Vec::new();
    for v in [Variant::SteepestAscent, Variant::FirstImprovement] {
        let rows = run_local_search_library(&instances, v, config.ls_runs, config.ls_seed).unwrap();
        fs::write(dir.join(format!("ls_{v}.csv")), write_ls_csv(&rows, &hash)).unwrap();
        ls_rows.extend(rows);
    }
    let report = comparison_report(
        &ReportInputs {
            records: &records,
            ls_rows: &ls_rows,
            fit: Some(&fit),
            census: Some(&census),
            target: config.target,
            ci: config.ci,
            bootstrap_resamples: config.bootstrap_resamples,
        },
        &[&hash],
    )
    .unwrap();
    report.write(&dir.join("report"), config.target).unwrap();
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(root, &path, out);
        } else {
            out.push(path.strip_prefix(root).unwrap().to_string_lossy().into_owned());
        }
    }
}

fn c9_determinism() -> Outcome {
    let mut config = RunConfig::default();
    config.library.sizes = vec![8, 9, 10];
    config.library.per_size = 12;
    config.ls_runs = 300;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline(a.path(), &config);
    pipeline(b.path(), &config);
    let mut files = Vec::new();
    collect_files(a.path(), a.path(), &mut files);
    files.sort();
    let compared: Vec<&String> = files
        .iter()
        .filter(|f| f.ends_with(".csv") || f.ends_with(".jsonl") || f.ends_with(".json"))
        .collect();
    let differing: Vec<&&String> = compared
        .iter()
        .filter(|f| fs::read(a.path().join(f)).ok() != fs::read(b.path().join(f)).ok())
        .collect();
    outcome(
        differing.is_empty() && compared.len() >= 10,
        format!("{} CSV/JSON files compared, {} differ {:?}", compared.len(), differing.len(), differing),
    )
}

#[test]
fn acceptance() {
    let selected: Option<Vec<usize>> = std::env::var("QWOA_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wants = |k: usize| selected.as_ref().map_or(true, |s| s.contains(&k));

    let mut report = String::new();
    let mut failed = Vec::new();
    let mut record = |k: usize, name: &str, started: Instant, o: Outcome| {
        let line = format!(
            "[{}] criterion {k} ({name}, {:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64(),
            o.detail
        );
        println!("{line}");
        report.push_str(&line);
        report.push('\n');
        if !o.pass {
            failed.push(k);
        }
    };

    let criteria: [(usize, &str, fn() -> Outcome); 4] = [
        (1, "unitary oracle", c1_unitary_oracle),
        (2, "norm and symmetry", c2_norm_symmetry),
        (3, "landscape oracle", c3_landscape),
        (4, "weight-scale invariance", c4_weight_scale),
    ];
    for (k, name, f) in criteria {
        if wants(k) {
            let t = Instant::now();
            record(k, name, t, f());
        }
    }
    if wants(5) || wants(6) {
        let t = Instant::now();
        let desk = desk_records();
        if wants(5) {
            record(5, "desk-scale depth consistency", t, c5_desk_consistency(&desk));
        }
        if wants(6) {
            record(6, "amplification vs Grover", Instant::now(), c6_amplification(&desk));
        }
    }
    let tail: [(usize, &str, fn() -> Outcome); 3] = [
        (7, "local-search decay", c7_local_search),
        (8, "interpolation and fit machinery", c8_machinery),
        (9, "end-to-end determinism", c9_determinism),
    ];
    for (k, name, f) in tail {
        if wants(k) {
            let t = Instant::now();
            record(k, name, t, f());
        }
    }

    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance.txt");
    let _ = fs::write(&out, &report);
    assert!(failed.is_empty(), "failed criteria: {failed:?}\n{report}");
}
