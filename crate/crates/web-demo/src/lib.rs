//! Browser front end for the QWOA simulator.
//!
//! The page in `www/` holds one [`Demo`] at a time. Each method returns a
//! JSON string so the page needs no glue beyond `JSON.parse`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qwoa_core::bench::amplification;
use qwoa_core::instances::{LibraryConfig, WeightedGraph};
use qwoa_core::landscape::ObjectiveTable;
use qwoa_core::schedule::{
    expand_schedule, optimize, Objective, OptimizerConfig, QwoaObjective, ScheduleParams, DEFAULT_START, PARAM_BOUNDS,
};
use qwoa_core::sim::{evolve, grover_required_iterations, grover_success_probability};

/// Largest instance the page will build. 2^14 amplitudes keep a heatmap
/// under a few seconds in a browser tab.
pub const MAX_N: usize = 14;

const MAX_P: usize = 40;
const MAX_GRID: usize = 64;

#[derive(Debug, Serialize)]
pub struct Distribution {
    /// Distinct cut values, ascending.
    pub cuts: Vec<f64>,
    /// Total probability of each cut value.
    pub probs: Vec<f64>,
    /// Fraction of bitstrings with each cut value.
    pub uniform: Vec<f64>,
    pub expectation: f64,
    pub meas_prob: f64,
    pub amplification: f64,
    pub optimum: f64,
    pub degeneracy: usize,
}

#[derive(Debug, Serialize)]
pub struct Heatmap {
    pub gammas: Vec<f64>,
    pub times: Vec<f64>,
    /// Row-major over `times` then `gammas`, normalised as
    /// `(⟨C⟩ - mean) / (optimum - mean)`.
    pub values: Vec<f64>,
    pub best_gamma: f64,
    pub best_t: f64,
}

#[derive(Debug, Serialize)]
pub struct Optimized {
    pub gamma: f64,
    pub t: f64,
    pub beta: f64,
    pub expectation: f64,
    pub meas_prob: f64,
    pub amplification: f64,
    pub n_evals: usize,
    /// Grover success after the same number of iterations.
    pub grover_prob: f64,
    /// Grover iterations needed to match `meas_prob`.
    pub grover_iterations: u64,
}

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn check_params(p: usize, x: ScheduleParams) -> Result<(), String> {
    if p == 0 || p > MAX_P {
        return Err(format!("depth must be in 1..={MAX_P}"));
    }
    if !x.is_within(&PARAM_BOUNDS) {
        return Err(format!(
            "parameters must lie in γ∈[0,5], t∈[0,0.7], β∈[0,0.5], got ({}, {}, {})",
            x.gamma, x.t, x.beta
        ));
    }
    Ok(())
}

/// One random instance with its cost table.
#[wasm_bindgen]
pub struct Demo {
    graph: WeightedGraph,
    table: ObjectiveTable,
}

impl Demo {
    pub fn build(n: usize, seed: u64, edge_prob: f64) -> Result<Demo, String> {
        if !(2..=MAX_N).contains(&n) {
            return Err(format!("n must be in 2..={MAX_N}"));
        }
        let cfg = LibraryConfig {
            seed,
            sizes: vec![n],
            per_size: 1,
            edge_prob,
            ..LibraryConfig::default()
        };
        let graph = cfg.instance(n, 0).map_err(|e| e.to_string())?.graph;
        let table = ObjectiveTable::build(&graph).map_err(|e| e.to_string())?;
        Ok(Demo { graph, table })
    }

    pub fn distribution(&self, p: usize, x: ScheduleParams) -> Result<Distribution, String> {
        check_params(p, x)?;
        let sched = expand_schedule(x, p, self.table.sigma()).map_err(|e| e.to_string())?;
        let psi = evolve(&self.table, &sched).map_err(|e| e.to_string())?;
        let probs = psi.probabilities();
        let mut pairs: Vec<(f64, f64)> = self.table.values().iter().copied().zip(probs).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Cut values that differ only by rounding share a bar.
        let tol = 1e-9 * self.table.optimum().max(1.0);
        let dim = pairs.len() as f64;
        let (mut cuts, mut out, mut uniform) = (Vec::new(), Vec::new(), Vec::new());
        for (c, q) in pairs {
            match cuts.last() {
                Some(&last) if c - last <= tol => {
                    *out.last_mut().unwrap() += q;
                    *uniform.last_mut().unwrap() += 1.0 / dim;
                }
                _ => {
                    cuts.push(c);
                    out.push(q);
                    uniform.push(1.0 / dim);
                }
            }
        }
        let meas_prob = psi.optimal_probability(&self.table).map_err(|e| e.to_string())?;
        Ok(Distribution {
            cuts,
            probs: out,
            uniform,
            expectation: psi.expectation(&self.table).map_err(|e| e.to_string())?,
            meas_prob,
            amplification: amplification(meas_prob, self.table.degeneracy(), self.graph.n()),
            optimum: self.table.optimum(),
            degeneracy: self.table.degeneracy(),
        })
    }

    pub fn heatmap(&self, p: usize, beta: f64, steps: usize) -> Result<Heatmap, String> {
        if !(2..=MAX_GRID).contains(&steps) {
            return Err(format!("grid size must be in 2..={MAX_GRID}"));
        }
        check_params(p, ScheduleParams::new(0.0, 0.0, beta))?;
        let lin = |hi: f64| (0..steps).map(|i| hi * i as f64 / (steps - 1) as f64).collect::<Vec<_>>();
        let (gammas, times) = (lin(PARAM_BOUNDS.upper[0]), lin(PARAM_BOUNDS.upper[1]));
        let mut obj = QwoaObjective::new(&self.table, p).map_err(|e| e.to_string())?;
        let (mean, span) = (self.table.mean(), self.table.optimum() - self.table.mean());
        let mut values = Vec::with_capacity(steps * steps);
        let mut best = (f64::MIN, 0.0, 0.0);
        for &t in &times {
            for &g in &gammas {
                let e = -obj.eval(&[g, t, beta]).map_err(|e| e.to_string())?;
                if e > best.0 {
                    best = (e, g, t);
                }
                values.push(if span > 0.0 { (e - mean) / span } else { 0.0 });
            }
        }
        Ok(Heatmap {
            gammas,
            times,
            values,
            best_gamma: best.1,
            best_t: best.2,
        })
    }

    pub fn optimized(&self, p: usize) -> Result<Optimized, String> {
        check_params(p, DEFAULT_START)?;
        let cfg = OptimizerConfig {
            starts: 1,
            ..OptimizerConfig::default()
        };
        let res = optimize(&self.table, p, DEFAULT_START, &cfg).map_err(|e| e.to_string())?;
        let d = self.distribution(p, res.params)?;
        let dim = (1u64 << self.graph.n()) as f64;
        let marked = self.table.degeneracy() as f64;
        Ok(Optimized {
            gamma: res.params.gamma,
            t: res.params.t,
            beta: res.params.beta,
            expectation: res.expectation,
            meas_prob: d.meas_prob,
            amplification: d.amplification,
            n_evals: res.n_evals,
            grover_prob: grover_success_probability(dim, marked, p as u64).map_err(|e| e.to_string())?,
            grover_iterations: grover_required_iterations(dim, marked, d.meas_prob.clamp(1e-300, 1.0))
                .map_err(|e| e.to_string())?,
        })
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u32, edge_prob: f64) -> Result<Demo, JsValue> {
        Demo::build(n, seed as u64, edge_prob).map_err(js_err)
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Edges as a flat `[i, j, w, i, j, w, ...]` array.
    pub fn edges(&self) -> Vec<f64> {
        self.graph.edges().iter().flat_map(|e| [e.i as f64, e.j as f64, e.w]).collect()
    }

    /// Output distribution over cut values at the given schedule.
    pub fn simulate(&self, p: usize, gamma: f64, t: f64, beta: f64) -> Result<String, JsValue> {
        let d = self.distribution(p, ScheduleParams::new(gamma, t, beta)).map_err(js_err)?;
        serde_json::to_string(&d).map_err(js_err)
    }

    /// Normalised expectation over a `steps × steps` grid of `(γ, t)`.
    pub fn landscape(&self, p: usize, beta: f64, steps: usize) -> Result<String, JsValue> {
        let h = self.heatmap(p, beta, steps).map_err(js_err)?;
        serde_json::to_string(&h).map_err(js_err)
    }

    /// Optimises from the default start and compares with Grover search.
    pub fn optimize(&self, p: usize) -> Result<String, JsValue> {
        let o = self.optimized(p).map_err(js_err)?;
        serde_json::to_string(&o).map_err(js_err)
    }
}
