//! `qwoa`: generate maxcut libraries, sweep QWOA depth, run local search and
//! build comparison reports.
//!
//! Settings resolve as flags > `--config` file > built-in defaults. Every
//! output carries the resolved config hash, and commands that combine files
//! refuse inputs with different hashes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qwoa_core::bench::{common_hash, evaluate_depth, run_sweep, BracketStatus, ResultsStore, SweepConfig};
use qwoa_core::config::RunConfig;
use qwoa_core::instances::{InstanceLibrary, LibraryInstance};
use qwoa_core::landscape::{count_local_optima, LocalOptimaCensus, ObjectiveTable};
use qwoa_core::local_search::Variant;
use qwoa_core::report::{
    comparison_report, pstar_rows, read_ls_csv, read_pstar_csv, run_local_search_library, write_ls_csv,
    write_pstar_csv, FitFile, LsRow, ReportInputs,
};
use qwoa_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_UNBRACKETED: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "qwoa", version, about = "QWOA maxcut benchmarking pipeline")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (also `QWOA_THREADS`).
    #[arg(long, global = true, env = "QWOA_THREADS")]
    threads: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an instance library.
    Gen(GenArgs),
    /// Count single-flip local optima of every library instance.
    Census(CensusArgs),
    /// Optimise one size over increasing depth until the target is bracketed.
    Sweep(SweepArgs),
    /// Interpolate the depth reaching the target from sweep results.
    Interp(InterpArgs),
    /// Fit a growth model to interpolated depths.
    Fit(FitArgs),
    /// Run classical local search on every library instance.
    Ls(LsArgs),
    /// Build the quantum/classical comparison and figure data.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    per_size: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    edge_prob: Option<String>,
    /// `uniform(lo,hi]` or `const(w)`.
    #[arg(long)]
    weight_dist: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CensusArgs {
    #[arg(long)]
    library: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    library: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    p_start: Option<String>,
    #[arg(long)]
    p_max: Option<String>,
    /// Evaluate only these depths (comma list) instead of sweeping.
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,
    #[arg(long)]
    starts: Option<String>,
    /// `normal` or `bootstrap`.
    #[arg(long)]
    ci: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InterpArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    ci: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long)]
    pstar: PathBuf,
    /// `quadratic` or `exponential`.
    #[arg(long, default_value = "quadratic")]
    model: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LsArgs {
    #[arg(long)]
    library: PathBuf,
    /// `steepest` or `firstimp`.
    #[arg(long)]
    variant: String,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    ls_seed: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    quantum: PathBuf,
    /// Local-search CSV; repeat for each variant.
    #[arg(long)]
    ls: Vec<PathBuf>,
    #[arg(long)]
    fit: Option<PathBuf>,
    /// Local-optima census CSV for the first figure.
    #[arg(long)]
    census: Option<PathBuf>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    ci: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Config(String),
    Unbracketed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Unbracketed(_) => EXIT_UNBRACKETED,
            CliError::Core(e) => match e {
                Error::Io { .. } | Error::Schema { .. } | Error::Checksum { .. } | Error::Json(_) => EXIT_IO,
                Error::Unbracketed { .. } => EXIT_UNBRACKETED,
                _ => EXIT_CONFIG,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) | CliError::Unbracketed(m) => f.write_str(m),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        config.apply_text(&text)?;
    }
    if let Some(t) = cli.threads {
        config.threads = Some(t);
    }
    if let Some(t) = config.threads {
        if t == 0 {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let started = Instant::now();
    let (name, out, hash) = match &cli.command {
        Command::Gen(a) => ("gen", a.out.clone(), gen(a, config)?),
        Command::Census(a) => ("census", a.out.clone(), census(a, config)?),
        Command::Sweep(a) => ("sweep", a.out.clone(), sweep(a, config)?),
        Command::Interp(a) => ("interp", a.out.clone(), interp(a, config)?),
        Command::Fit(a) => ("fit", a.out.clone(), fit(a)?),
        Command::Ls(a) => ("ls", a.out.clone(), ls(a, config)?),
        Command::Report(a) => ("report", a.out.clone(), report(a, config)?),
    };
    write_manifest(name, &out, &hash, started)
}

fn override_with(config: &mut RunConfig, pairs: &[(&str, &Option<String>)]) -> CliResult<()> {
    for (key, value) in pairs {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    config.validate()?;
    Ok(())
}

/// Uses the library's own generation settings for the hash.
fn load_library(dir: &Path, config: &mut RunConfig) -> CliResult<InstanceLibrary> {
    let lib = InstanceLibrary::load(dir)?;
    if lib.config != config.library {
        log::debug!("library settings from {} replace configured ones", dir.display());
    }
    config.library = lib.config.clone();
    Ok(lib)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Core(Error::Io {
            context: format!("reading {}", path.display()),
            source: e,
        })
    })
}

fn gen(a: &GenArgs, mut config: RunConfig) -> CliResult<String> {
    override_with(
        &mut config,
        &[
            ("sizes", &a.sizes),
            ("per_size", &a.per_size),
            ("seed", &a.seed),
            ("edge_prob", &a.edge_prob),
            ("weight_dist", &a.weight_dist),
        ],
    )?;
    let lib = config.library.generate()?;
    lib.save(&a.out)?;
    println!("wrote {} instances to {}", lib.instances.len(), a.out.display());
    Ok(lib.config_hash())
}

fn census(a: &CensusArgs, mut config: RunConfig) -> CliResult<String> {
    config.validate()?;
    let lib = load_library(&a.library, &mut config)?;
    let hash = config.hash();
    let mut census = LocalOptimaCensus::default();
    for inst in &lib.instances {
        let table = ObjectiveTable::build(&inst.graph)?;
        census.record(inst.n, inst.id, count_local_optima(&table).count);
    }
    write_text(&a.out, &census.to_csv(&hash))?;
    for (n, m) in census.medians() {
        println!("n={n}: median local optima {m}");
    }
    Ok(hash)
}

fn sweep(a: &SweepArgs, mut config: RunConfig) -> CliResult<String> {
    override_with(
        &mut config,
        &[
            ("target", &a.target),
            ("p_start", &a.p_start),
            ("p_max", &a.p_max),
            ("starts", &a.starts),
            ("ci", &a.ci),
        ],
    )?;
    let lib = load_library(&a.library, &mut config)?;
    let hash = config.hash();
    let instances: Vec<&LibraryInstance> = lib.of_size(a.n).collect();
    if instances.is_empty() {
        return Err(CliError::Config(format!("library has no instances of size {}", a.n)));
    }
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let mut store = ResultsStore::open(&a.out)?;
    if !a.p.is_empty() {
        for &p in &a.p {
            if p == 0 {
                return Err(CliError::Config("--p values must be >= 1".into()));
            }
            let recs = evaluate_depth(&instances, p, &config.optimizer, &hash, &mut store)?;
            let mean = recs.iter().map(|r| r.meas_prob).sum::<f64>() / recs.len() as f64;
            println!("n={} p={p}: mean meas_prob {mean:.6}", a.n);
        }
        return Ok(hash);
    }
    let summary = run_sweep(&instances, a.n, &SweepConfig::from_run(&config), &hash, &mut store)?;
    for (p, d) in &summary.per_p {
        println!("n={} p={p}: mean meas_prob {:.6} [{:.6}, {:.6}]", a.n, d.mean, d.ci_lo, d.ci_hi);
    }
    if summary.non_monotone {
        println!("n={}: warning: mean probability not monotone in p", a.n);
    }
    match (summary.status, summary.p_star) {
        (BracketStatus::Unbracketed, _) => {
            write_manifest("sweep", &a.out, &hash, Instant::now())?;
            return Err(CliError::Unbracketed(format!(
                "target {} not reached for n={} up to p={}",
                config.target, a.n, config.p_max
            )));
        }
        (_, Some(ps)) => println!("n={}: p* = {:.4} [{:.4}, {:.4}]", a.n, ps.p_star, ps.ci_lo, ps.ci_hi),
        _ => {}
    }
    Ok(hash)
}

fn interp(a: &InterpArgs, mut config: RunConfig) -> CliResult<String> {
    override_with(&mut config, &[("target", &a.target), ("ci", &a.ci)])?;
    let records = ResultsStore::load(&a.results)?;
    let hash = common_hash(records.iter().map(|r| r.config_hash.as_str()))?
        .ok_or_else(|| CliError::Config(format!("{} holds no records", a.results.display())))?;
    let rows = pstar_rows(&records, config.target, config.ci, config.bootstrap_resamples);
    write_text(&a.out, &write_pstar_csv(&rows, &hash))?;
    for r in &rows {
        match r.p_star {
            Some(p) => println!("n={}: p* = {p:.4}", r.n),
            None => println!("n={}: unbracketed", r.n),
        }
    }
    Ok(hash)
}

fn fit(a: &FitArgs) -> CliResult<String> {
    let (hash, rows) = read_pstar_csv(&read_text(&a.pstar)?)?;
    let hash = hash.unwrap_or_default();
    let fit = FitFile::from_pstar(&rows, &a.model, &hash)?;
    write_text(&a.out, &fit.to_json()?)?;
    println!("{}", serde_json::to_string(&fit.fit).map_err(Error::from)?);
    Ok(hash)
}

fn ls(a: &LsArgs, mut config: RunConfig) -> CliResult<String> {
    override_with(&mut config, &[("ls_runs", &a.runs), ("ls_seed", &a.ls_seed)])?;
    let variant: Variant = a.variant.parse()?;
    let lib = load_library(&a.library, &mut config)?;
    let hash = config.hash();
    let instances: Vec<&LibraryInstance> = lib.instances.iter().collect();
    let rows = run_local_search_library(&instances, variant, config.ls_runs, config.ls_seed)?;
    write_text(&a.out, &write_ls_csv(&rows, &hash))?;
    for n in lib.sizes() {
        let ps: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.p_solve).collect();
        println!("n={n}: mean solve probability {:.4}", ps.iter().sum::<f64>() / ps.len() as f64);
    }
    Ok(hash)
}

fn report(a: &ReportArgs, mut config: RunConfig) -> CliResult<String> {
    override_with(&mut config, &[("target", &a.target), ("ci", &a.ci)])?;
    let records = ResultsStore::load(&a.quantum)?;
    let mut hashes = Vec::new();
    let mut ls_rows: Vec<LsRow> = Vec::new();
    for path in &a.ls {
        let (h, rows) = read_ls_csv(&read_text(path)?)?;
        hashes.extend(h);
        ls_rows.extend(rows);
    }
    let fit = match &a.fit {
        Some(path) => Some(serde_json::from_str::<FitFile>(&read_text(path)?).map_err(|e| {
            CliError::Core(Error::Schema {
                path: path.clone(),
                msg: e.to_string(),
            })
        })?),
        None => None,
    };
    let census = match &a.census {
        Some(path) => {
            let (c, h) = LocalOptimaCensus::from_csv(&read_text(path)?)?;
            hashes.extend(h);
            Some(c)
        }
        None => None,
    };
    let hash_refs: Vec<&str> = hashes.iter().map(String::as_str).collect();
    let rep = comparison_report(
        &ReportInputs {
            records: &records,
            ls_rows: &ls_rows,
            fit: fit.as_ref(),
            census: census.as_ref(),
            target: config.target,
            ci: config.ci,
            bootstrap_resamples: config.bootstrap_resamples,
        },
        &hash_refs,
    )?;
    rep.write(&a.out, config.target)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", rep.comparison_csv());
    Ok(rep.config_hash)
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    argv: Vec<String>,
    config_hash: &'a str,
    version: &'a str,
    elapsed_secs: f64,
    finished_unix: u64,
}

/// Writes `run_manifest.json` inside a directory output, or
/// `<file>.manifest.json` beside a file output.
fn write_manifest(command: &str, out: &Path, hash: &str, started: Instant) -> CliResult<()> {
    let path = if out.is_dir() {
        out.join("run_manifest.json")
    } else {
        let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        out.with_file_name(name)
    };
    let manifest = RunManifest {
        command,
        argv: std::env::args().collect(),
        config_hash: hash,
        version: env!("CARGO_PKG_VERSION"),
        elapsed_secs: started.elapsed().as_secs_f64(),
        finished_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(Error::from)?;
    text.push('\n');
    write_text(&path, &text)
}
