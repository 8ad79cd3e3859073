//! Three-parameter schedules and their box-constrained optimisation.
//!
//! `(γ, t, β)` expand to `p` layers by linear ramps: the phase strength rises
//! from `βγ/σ` to `γ/σ` while the mixing time falls from `t` to `βt`. The
//! expectation of the resulting state is maximised with a projected
//! limited-memory BFGS using finite-difference gradients.

use std::collections::VecDeque;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::ObjectiveTable;
use crate::rng::child_stream;
use crate::sim::{evolve_in_place, LayerSchedule, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub gamma: f64,
    pub t: f64,
    pub beta: f64,
}

/// Closed box `[lower_k, upper_k]` per coordinate, in `(γ, t, β)` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
}

pub const PARAM_BOUNDS: Bounds = Bounds {
    lower: [0.0, 0.0, 0.0],
    upper: [5.0, 0.7, 0.5],
};

/// Interior starting point used when none is given.
pub const DEFAULT_START: ScheduleParams = ScheduleParams {
    gamma: 0.75,
    t: 0.35,
    beta: 0.25,
};

impl ScheduleParams {
    pub fn new(gamma: f64, t: f64, beta: f64) -> Self {
        Self { gamma, t, beta }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.gamma, self.t, self.beta]
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self::new(x[0], x[1], x[2])
    }

    pub fn is_within(&self, bounds: &Bounds) -> bool {
        bounds.contains(&self.to_array())
    }
}

impl Bounds {
    pub fn contains(&self, x: &[f64; 3]) -> bool {
        (0..3).all(|k| x[k].is_finite() && x[k] >= self.lower[k] && x[k] <= self.upper[k])
    }

    pub fn project(&self, x: &mut [f64; 3]) {
        for k in 0..3 {
            x[k] = x[k].clamp(self.lower[k], self.upper[k]);
        }
    }
}

/// Per-layer angles for `p` layers.
///
/// For `p = 1` the single layer takes the upper end of both ramps:
/// `γ_1 = γ/σ` and `t_1 = t`.
pub fn expand_schedule(params: ScheduleParams, p: usize, sigma: f64) -> Result<LayerSchedule> {
    if p == 0 {
        return Err(Error::InvalidParameter("p must be >= 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let ScheduleParams { gamma, t, beta } = params;
    let scale = gamma / sigma;
    if p == 1 {
        return LayerSchedule::new(vec![scale], vec![t]);
    }
    let mut gammas = Vec::with_capacity(p);
    let mut times = Vec::with_capacity(p);
    for k in 0..p {
        let frac = k as f64 / (p - 1) as f64;
        gammas.push(scale * (beta + frac * (1.0 - beta)));
        times.push(t * (1.0 + frac * (beta - 1.0)));
    }
    LayerSchedule::new(gammas, times)
}

/// A function of three variables to minimise.
pub trait Objective {
    fn eval(&mut self, x: &[f64; 3]) -> Result<f64>;
}

/// Negative QWOA expectation for a fixed instance and depth.
pub struct QwoaObjective<'a> {
    table: &'a ObjectiveTable,
    p: usize,
    psi: Statevector,
    evals: usize,
}

impl<'a> QwoaObjective<'a> {
    pub fn new(table: &'a ObjectiveTable, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("p must be >= 1".into()));
        }
        Ok(Self {
            table,
            p,
            psi: Statevector::equal_superposition(table.n())?,
            evals: 0,
        })
    }

    /// Number of objective evaluations so far.
    pub fn evaluations(&self) -> usize {
        self.evals
    }

    /// Evolves to the state for `params` without counting an evaluation.
    pub fn state(&mut self, params: ScheduleParams) -> Result<&Statevector> {
        let sched = expand_schedule(params, self.p, self.table.sigma())?;
        evolve_in_place(&mut self.psi, self.table, &sched)?;
        Ok(&self.psi)
    }
}

impl Objective for QwoaObjective<'_> {
    fn eval(&mut self, x: &[f64; 3]) -> Result<f64> {
        let params = ScheduleParams::from_array(*x);
        if !params.is_within(&PARAM_BOUNDS) {
            return Err(Error::InvalidParameter(format!("{params:?} outside parameter bounds")));
        }
        self.evals += 1;
        let table = self.table;
        let e = self.state(params)?.expectation(table)?;
        Ok(-e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Stored correction pairs.
    pub memory: usize,
    /// Stop when the projected-gradient ∞-norm falls below this.
    pub pgtol: f64,
    /// Stop when `(f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1)` falls below this.
    pub ftol: f64,
    pub max_iter: usize,
    /// Relative and absolute floor of the finite-difference step.
    pub fd_step: f64,
    /// Number of starts: the default point plus `starts - 1` Latin-hypercube
    /// samples.
    pub starts: usize,
    pub start_seed: u64,
    pub max_line_search: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            pgtol: 1e-6,
            ftol: 1e-10,
            max_iter: 500,
            fd_step: 1e-6,
            starts: 4,
            start_seed: 0,
            max_line_search: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ProjectedGradient,
    FunctionChange,
    /// Line search could not find a decrease; the point is stationary to
    /// within finite-difference accuracy.
    LineSearch,
    MaxIterations,
}

impl Termination {
    pub fn converged(self) -> bool {
        !matches!(self, Termination::MaxIterations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eval: usize,
    pub gamma: f64,
    pub t: f64,
    pub beta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub x: [f64; 3],
    pub value: f64,
    pub n_evals: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

struct Counted<'o, O: Objective + ?Sized> {
    inner: &'o mut O,
    evals: usize,
    trace: Option<Vec<TraceEntry>>,
}

impl<O: Objective + ?Sized> Counted<'_, O> {
    fn eval(&mut self, x: &[f64; 3]) -> Result<f64> {
        self.evals += 1;
        let v = self.inner.eval(x)?;
        if let Some(trace) = &mut self.trace {
            trace.push(TraceEntry {
                eval: self.evals,
                gamma: x[0],
                t: x[1],
                beta: x[2],
                value: v,
            });
        }
        if !v.is_finite() {
            return Err(Error::NonFiniteObjective {
                gamma: x[0],
                t: x[1],
                beta: x[2],
            });
        }
        Ok(v)
    }

    /// Central differences, one-sided where a central step would leave the box.
    fn gradient(&mut self, x: &[f64; 3], fx: f64, bounds: &Bounds, step: f64) -> Result<[f64; 3]> {
        let mut g = [0.0; 3];
        for k in 0..3 {
            let h = step.max(step * x[k].abs());
            let can_up = x[k] + h <= bounds.upper[k];
            let can_down = x[k] - h >= bounds.lower[k];
            let mut xp = *x;
            let mut xm = *x;
            g[k] = if can_up && can_down {
                xp[k] += h;
                xm[k] -= h;
                (self.eval(&xp)? - self.eval(&xm)?) / (2.0 * h)
            } else if can_up {
                xp[k] += h;
                (self.eval(&xp)? - fx) / h
            } else {
                xm[k] -= h;
                (fx - self.eval(&xm)?) / h
            };
        }
        Ok(g)
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn projected_gradient_norm(x: &[f64; 3], g: &[f64; 3], bounds: &Bounds) -> f64 {
    (0..3)
        .map(|k| ((x[k] - g[k]).clamp(bounds.lower[k], bounds.upper[k]) - x[k]).abs())
        .fold(0.0, f64::max)
}

/// Minimises `f` over `bounds` from `x0` with projected L-BFGS.
///
/// Variables sitting on a bound with the gradient pushing outward are held
/// fixed for the iteration; the quasi-Newton direction is computed on the
/// rest and the step is projected back onto the box during a backtracking
/// Armijo search. The returned point is never worse than `x0`.
pub fn minimize_box<O: Objective + ?Sized>(
    f: &mut O,
    x0: [f64; 3],
    bounds: &Bounds,
    config: &OptimizerConfig,
    keep_trace: bool,
) -> Result<MinimizeResult> {
    if !bounds.contains(&x0) {
        return Err(Error::InvalidParameter(format!("start {x0:?} outside bounds")));
    }
    let mut obj = Counted {
        inner: f,
        evals: 0,
        trace: keep_trace.then(Vec::new),
    };
    let mut x = x0;
    let mut fx = obj.eval(&x)?;
    let mut g = obj.gradient(&x, fx, bounds, config.fd_step)?;
    let mut history: VecDeque<([f64; 3], [f64; 3], f64)> = VecDeque::with_capacity(config.memory);
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < config.max_iter {
        if projected_gradient_norm(&x, &g, bounds) <= config.pgtol {
            termination = Termination::ProjectedGradient;
            break;
        }
        iterations += 1;

        let active: [bool; 3] = std::array::from_fn(|k| {
            (x[k] <= bounds.lower[k] && g[k] > 0.0) || (x[k] >= bounds.upper[k] && g[k] < 0.0)
        });
        let free = |v: &mut [f64; 3]| {
            for k in 0..3 {
                if active[k] {
                    v[k] = 0.0;
                }
            }
        };
        let mut gf = g;
        free(&mut gf);
        let mut d = two_loop(&gf, &history, &free);
        for v in &mut d {
            *v = -*v;
        }
        free(&mut d);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            history.clear();
            d = gf.map(|v| -v);
            slope = dot(&g, &d);
        }
        if history.is_empty() {
            // First step or reset: move at most 10% of the box width.
            let widest = (0..3)
                .map(|k| d[k].abs() / (bounds.upper[k] - bounds.lower[k]))
                .fold(0.0, f64::max);
            if widest > 0.1 {
                let s = 0.1 / widest;
                d = d.map(|v| v * s);
                slope *= s;
            }
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..config.max_line_search {
            let mut xn = [x[0] + alpha * d[0], x[1] + alpha * d[1], x[2] + alpha * d[2]];
            bounds.project(&mut xn);
            let step = [xn[0] - x[0], xn[1] - x[1], xn[2] - x[2]];
            if step.iter().all(|s| *s == 0.0) {
                break;
            }
            let fn_ = obj.eval(&xn)?;
            if fn_ <= fx + 1e-4 * dot(&g, &step) && fn_ < fx {
                accepted = Some((xn, fn_));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            if history.is_empty() {
                termination = Termination::LineSearch;
                break;
            }
            // Retry from steepest descent before giving up.
            history.clear();
            continue;
        };

        let gn = obj.gradient(&xn, fn_, bounds, config.fd_step)?;
        let s = [xn[0] - x[0], xn[1] - x[1], xn[2] - x[2]];
        let y = [gn[0] - g[0], gn[1] - g[1], gn[2] - g[2]];
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&y, &y).max(f64::MIN_POSITIVE) {
            if history.len() == config.memory.max(1) {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let rel = (fx - fn_) / fx.abs().max(fn_.abs()).max(1.0);
        x = xn;
        fx = fn_;
        g = gn;
        if rel <= config.ftol {
            termination = Termination::FunctionChange;
            break;
        }
    }

    Ok(MinimizeResult {
        x,
        value: fx,
        n_evals: obj.evals,
        iterations,
        termination,
        trace: obj.trace.unwrap_or_default(),
    })
}

/// L-BFGS two-loop recursion restricted to the free coordinates.
fn two_loop(
    g: &[f64; 3],
    history: &VecDeque<([f64; 3], [f64; 3], f64)>,
    free: &dyn Fn(&mut [f64; 3]),
) -> [f64; 3] {
    let mut q = *g;
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let (mut s, mut y) = (*s, *y);
        free(&mut s);
        free(&mut y);
        let a = rho * dot(&s, &q);
        for k in 0..3 {
            q[k] -= a * y[k];
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let yy = dot(y, y);
        if yy > 0.0 {
            let gamma = dot(s, y) / yy;
            q = q.map(|v| v * gamma);
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let (mut s, mut y) = (*s, *y);
        free(&mut s);
        free(&mut y);
        let b = rho * dot(&y, &q);
        for k in 0..3 {
            q[k] += (a - b) * s[k];
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub params: ScheduleParams,
    /// Expectation value (positive) at `params`.
    pub expectation: f64,
    /// Objective evaluations across all starts.
    pub n_evals: usize,
    pub converged: bool,
    pub termination: Termination,
    pub trace: Vec<TraceEntry>,
}

/// Maximises the expectation at depth `p` from a single start `x0`.
pub fn optimize(
    table: &ObjectiveTable,
    p: usize,
    x0: ScheduleParams,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    optimize_from(table, p, &[x0], config, false)
}

/// Starting points: [`DEFAULT_START`] then `starts - 1` Latin-hypercube
/// samples of the box drawn from `config.start_seed`.
pub fn start_points(config: &OptimizerConfig) -> Vec<ScheduleParams> {
    let mut points = vec![DEFAULT_START];
    let extra = config.starts.saturating_sub(1);
    if extra == 0 {
        return points;
    }
    let mut rng = child_stream(config.start_seed, 0x5354_4152_5453);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(3);
    for k in 0..3 {
        let mut strata: Vec<usize> = (0..extra).collect();
        rand::seq::SliceRandom::shuffle(strata.as_mut_slice(), &mut rng);
        let lo = PARAM_BOUNDS.lower[k];
        let width = PARAM_BOUNDS.upper[k] - lo;
        columns.push(
            strata
                .into_iter()
                .map(|s| lo + width * (s as f64 + rng.gen::<f64>()) / extra as f64)
                .collect(),
        );
    }
    points.extend((0..extra).map(|i| ScheduleParams::new(columns[0][i], columns[1][i], columns[2][i])));
    points
}

/// Multi-start optimisation from [`start_points`], keeping the best.
pub fn optimize_multistart(
    table: &ObjectiveTable,
    p: usize,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    optimize_from(table, p, &start_points(config), config, false)
}

pub fn optimize_from(
    table: &ObjectiveTable,
    p: usize,
    starts: &[ScheduleParams],
    config: &OptimizerConfig,
    keep_trace: bool,
) -> Result<OptimizationResult> {
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no starting points".into()));
    }
    for x0 in starts {
        if !x0.is_within(&PARAM_BOUNDS) {
            return Err(Error::InvalidParameter(format!("start {x0:?} outside parameter bounds")));
        }
    }
    let mut objective = QwoaObjective::new(table, p)?;
    let mut best: Option<MinimizeResult> = None;
    let mut n_evals = 0;
    let mut trace = Vec::new();
    for x0 in starts {
        let mut r = minimize_box(&mut objective, x0.to_array(), &PARAM_BOUNDS, config, keep_trace)?;
        for e in &mut r.trace {
            e.eval += n_evals;
        }
        n_evals += r.n_evals;
        trace.append(&mut r.trace);
        if best.as_ref().map_or(true, |b| r.value < b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    debug_assert_eq!(n_evals, objective.evaluations());
    Ok(OptimizationResult {
        params: ScheduleParams::from_array(best.x),
        expectation: -best.value,
        n_evals,
        converged: best.termination.converged(),
        termination: best.termination,
        trace,
    })
}

/// Writes an optimizer trace as JSON lines.
pub fn write_trace<W: Write>(trace: &[TraceEntry], mut w: W) -> Result<()> {
    for e in trace {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n").map_err(|e| Error::io("writing trace", e))?;
    }
    Ok(())
}
