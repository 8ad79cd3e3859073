//! Single-flip hill climbing baselines.
//!
//! Each neighbour inspected costs one objective evaluation even though the
//! value is obtained from an `O(deg)` delta.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::WeightedGraph;
use crate::landscape::{is_optimal, tie_margin, ObjectiveTable};
use crate::rng::child_stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Inspect all `n` flips and take the best strict improvement, lowest
    /// index on ties.
    SteepestAscent,
    /// Inspect flips in a fresh random order each sweep and take the first
    /// strict improvement.
    FirstImprovement,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::SteepestAscent => "steepest",
            Variant::FirstImprovement => "firstimp",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "steepest" | "steepest_ascent" => Ok(Variant::SteepestAscent),
            "firstimp" | "first_improvement" => Ok(Variant::FirstImprovement),
            _ => Err(Error::InvalidParameter(format!("unknown local-search variant `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchRun {
    pub variant: Variant,
    pub start: u64,
    pub final_state: u64,
    pub final_value: f64,
    pub n_evals: u64,
    pub solved: bool,
}

/// A graph prepared for repeated searches, with its known optimum.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    n: usize,
    adjacency: Vec<Vec<(usize, f64)>>,
    graph: WeightedGraph,
    optimum: f64,
    margin: f64,
    verify: bool,
}

impl SearchProblem {
    /// `optimum` is C*, typically from [`ObjectiveTable::optimum`].
    pub fn new(graph: &WeightedGraph, optimum: f64) -> Result<Self> {
        if graph.n() > 64 {
            return Err(Error::TooLarge {
                n: graph.n(),
                limit: 64,
            });
        }
        Ok(Self {
            n: graph.n(),
            adjacency: graph.adjacency(),
            graph: graph.clone(),
            optimum,
            margin: tie_margin(optimum),
            verify: false,
        })
    }

    pub fn from_table(graph: &WeightedGraph, table: &ObjectiveTable) -> Result<Self> {
        Self::new(graph, table.optimum())
    }

    /// Re-derives the running value from scratch after every accepted move
    /// and panics if it drifts from the incremental one by more than 1e-9.
    pub fn with_verification(mut self, on: bool) -> Self {
        self.verify = on;
        self
    }

    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    fn flip_delta(&self, state: u64, i: usize) -> f64 {
        let si = (state >> i) & 1;
        self.adjacency[i]
            .iter()
            .map(|&(j, w)| if (state >> j) & 1 == si { w } else { -w })
            .sum()
    }

    fn check(&self, state: u64, value: f64) {
        if self.verify {
            let full = self.graph.cut_value(state);
            assert!(
                (full - value).abs() <= 1e-9,
                "incremental value {value} drifted from {full} at state {state:#b}"
            );
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, variant: Variant, rng: &mut R) -> LocalSearchRun {
        let mask = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let start = rng.gen::<u64>() & mask;
        self.run_from(variant, start, rng)
    }

    /// Climbs from `start`. `rng` is only consumed by first-improvement.
    pub fn run_from<R: Rng + ?Sized>(&self, variant: Variant, start: u64, rng: &mut R) -> LocalSearchRun {
        let mut state = start;
        let mut value = self.graph.cut_value(state);
        let mut evals = 0u64;
        match variant {
            Variant::SteepestAscent => loop {
                let mut best = (self.margin, usize::MAX);
                for i in 0..self.n {
                    let d = self.flip_delta(state, i);
                    evals += 1;
                    if d > best.0 {
                        best = (d, i);
                    }
                }
                if best.1 == usize::MAX {
                    break;
                }
                state ^= 1 << best.1;
                value += best.0;
                self.check(state, value);
            },
            Variant::FirstImprovement => {
                let mut order: Vec<usize> = (0..self.n).collect();
                'sweep: loop {
                    order.shuffle(rng);
                    for &i in &order {
                        let d = self.flip_delta(state, i);
                        evals += 1;
                        if d > self.margin {
                            state ^= 1 << i;
                            value += d;
                            self.check(state, value);
                            continue 'sweep;
                        }
                    }
                    break;
                }
            }
        }
        let final_value = self.graph.cut_value(state);
        LocalSearchRun {
            variant,
            start,
            final_state: state,
            final_value,
            n_evals: evals,
            solved: is_optimal(final_value, self.optimum),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveEstimate {
    pub runs: u64,
    pub solved: u64,
    pub p_solve: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_evals: f64,
}

/// Wilson score interval for `k` successes in `n` trials at `z` standard
/// normal quantiles.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Monte Carlo solve probability. Run `r` draws from stream `r` of `seed`.
pub fn estimate_solve_probability(
    problem: &SearchProblem,
    variant: Variant,
    runs: u64,
    seed: u64,
) -> Result<SolveEstimate> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be >= 1".into()));
    }
    let one = |r: u64| {
        let mut rng = child_stream(seed, r);
        let run = problem.run(variant, &mut rng);
        (run.solved as u64, run.n_evals)
    };
    #[cfg(feature = "parallel")]
    let (solved, evals) = {
        use rayon::prelude::*;
        (0..runs)
            .into_par_iter()
            .map(one)
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    #[cfg(not(feature = "parallel"))]
    let (solved, evals) = (0..runs).map(one).fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (ci_lo, ci_hi) = wilson_interval(solved, runs, 1.959_963_984_540_054);
    Ok(SolveEstimate {
        runs,
        solved,
        p_solve: solved as f64 / runs as f64,
        ci_lo,
        ci_hi,
        mean_evals: evals as f64 / runs as f64,
    })
}

/// Exact steepest-ascent solve probability from a uniform start, found by
/// following the deterministic move from every bitstring on the table.
pub fn exact_solve_probability(table: &ObjectiveTable) -> Result<f64> {
    let n = table.n();
    if n > 16 {
        return Err(Error::TooLarge { n, limit: 16 });
    }
    let values = table.values();
    let margin = tie_margin(table.optimum());
    let dim = values.len();
    let next = |b: usize| {
        let mut best = (values[b] + margin, b);
        for i in 0..n {
            let nb = b ^ (1 << i);
            if values[nb] > best.0 {
                best = (values[nb], nb);
            }
        }
        best.1
    };
    // terminal[b]: 0 unknown, 1 optimal basin, 2 other basin.
    let mut terminal = vec![0u8; dim];
    let mut path = Vec::new();
    for b0 in 0..dim {
        let mut b = b0;
        path.clear();
        let outcome = loop {
            if terminal[b] != 0 {
                break terminal[b];
            }
            path.push(b);
            let nb = next(b);
            if nb == b {
                break if is_optimal(values[b], table.optimum()) { 1 } else { 2 };
            }
            b = nb;
        };
        for &v in &path {
            terminal[v] = outcome;
        }
    }
    Ok(terminal.iter().filter(|&&t| t == 1).count() as f64 / dim as f64)
}
