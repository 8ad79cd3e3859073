//! Exhaustive objective tables and the single-flip local-optima census.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fit::{fit_exponential, ExponentialFit};
use crate::instances::WeightedGraph;

/// Default upper bound on the number of vertices for exhaustive tables.
pub const DEFAULT_MAX_QUBITS: usize = 28;

/// Relative tolerance under which two cut values count as the same optimum.
pub const OPTIMUM_REL_TOL: f64 = 1e-9;

/// Whether `value` is a global optimum given the maximum `optimum`.
pub fn is_optimal(value: f64, optimum: f64) -> bool {
    (value - optimum).abs() <= OPTIMUM_REL_TOL * optimum.abs().max(1.0)
}

/// Relative margin a flip must beat to count as a strict improvement. Values
/// reached along different summation paths can differ by a few ulps where
/// exact arithmetic gives a tie.
pub const TIE_REL_TOL: f64 = 1e-12;

/// Absolute improvement margin for an instance with maximum `optimum`.
pub fn tie_margin(optimum: f64) -> f64 {
    TIE_REL_TOL * optimum.abs().max(1.0)
}

/// Cut value of every bitstring, with summary statistics.
///
/// Index `b` encodes the partition with vertex `i` on side `(b >> i) & 1`.
#[derive(Debug, Clone)]
pub struct ObjectiveTable {
    n: usize,
    values: Vec<f64>,
    mean: f64,
    sigma: f64,
    min: f64,
    optimum: f64,
    optima: Vec<u64>,
}

impl ObjectiveTable {
    pub fn build(graph: &WeightedGraph) -> Result<Self> {
        Self::build_with_limit(graph, DEFAULT_MAX_QUBITS)
    }

    pub fn build_with_limit(graph: &WeightedGraph, max_qubits: usize) -> Result<Self> {
        let n = graph.n();
        if n > max_qubits || n > 40 {
            return Err(Error::TooLarge {
                n,
                limit: max_qubits.min(40),
            });
        }
        let values = cut_values(graph);
        Ok(Self::from_values(n, values))
    }

    /// Builds statistics over a precomputed value array of length `2^n`.
    pub(crate) fn from_values(n: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), 1usize << n);
        let len = values.len() as f64;
        let mean = values.iter().sum::<f64>() / len;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
        let (min, optimum) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let optima = values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| is_optimal(v, optimum))
            .map(|(b, _)| b as u64)
            .collect();
        Self {
            n,
            values,
            mean,
            sigma: var.sqrt(),
            min,
            optimum,
            optima,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, b: u64) -> f64 {
        self.values[b as usize]
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation over all `2^n` values.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    /// Maximum cut value C*.
    pub fn optimum(&self) -> f64 {
        self.optimum
    }

    /// Sorted bitstrings attaining C*.
    pub fn optima(&self) -> &[u64] {
        &self.optima
    }

    pub fn degeneracy(&self) -> usize {
        self.optima.len()
    }

    /// Writes the debug dump: `MAXCUTC1`, `n` as u64, then the values, all
    /// little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(b"MAXCUTC1")?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Fills the table for bitstrings with vertex `n-1` on side 0 by adding one
/// vertex at a time, then mirrors onto the complements so that `C_b` and
/// `C_{!b}` are bit-identical.
fn cut_values(graph: &WeightedGraph) -> Vec<f64> {
    let n = graph.n();
    let adj = graph.adjacency();
    let half = 1usize << (n - 1);
    let mut values = vec![0.0f64; 1usize << n];
    // values[b] for b in [2^k, 2^(k+1)) is values[b - 2^k] plus the change
    // from moving vertex k to side 1 while every vertex above k stays on 0.
    for k in 0..(n - 1) {
        let lo = 1usize << k;
        let (done, rest) = values.split_at_mut(lo);
        for (offset, slot) in rest[..lo].iter_mut().enumerate() {
            let base = offset;
            let delta: f64 = adj[k]
                .iter()
                .map(|&(j, w)| if (base >> j) & 1 == 1 { -w } else { w })
                .sum();
            *slot = done[base] + delta;
        }
    }
    let full = (1usize << n) - 1;
    let (low, high) = values.split_at_mut(half);
    for (b, slot) in high.iter_mut().enumerate() {
        *slot = low[full ^ (b + half)];
    }
    values
}

/// Single-flip local maxima of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOptimaCount {
    pub count: u64,
}

/// Counts bitstrings no single flip of which strictly increases the cut
/// value. Plateaus count as local maxima.
pub fn count_local_optima(table: &ObjectiveTable) -> LocalOptimaCount {
    let n = table.n();
    let values = table.values();
    let margin = tie_margin(table.optimum());
    let is_local_max = |b: usize| {
        let v = values[b] + margin;
        (0..n).all(|i| values[b ^ (1 << i)] <= v)
    };
    #[cfg(feature = "parallel")]
    let count = {
        use rayon::prelude::*;
        (0..values.len())
            .into_par_iter()
            .with_min_len(1 << 12)
            .filter(|&b| is_local_max(b))
            .count() as u64
    };
    #[cfg(not(feature = "parallel"))]
    let count = (0..values.len()).filter(|&b| is_local_max(b)).count() as u64;
    LocalOptimaCount { count }
}

/// Local-optima counts gathered over a library, keyed by size.
#[derive(Debug, Clone, Default)]
pub struct LocalOptimaCensus {
    pub per_size: BTreeMap<usize, Vec<(usize, u64)>>,
}

impl LocalOptimaCensus {
    pub fn record(&mut self, n: usize, instance_id: usize, count: u64) {
        self.per_size.entry(n).or_default().push((instance_id, count));
    }

    pub fn medians(&self) -> BTreeMap<usize, f64> {
        self.per_size
            .iter()
            .map(|(&n, rows)| {
                let counts: Vec<f64> = rows.iter().map(|&(_, c)| c as f64).collect();
                (n, median(&counts))
            })
            .collect()
    }

    /// CSV with header `n,instance_id,local_optima_count`.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut s = format!("# config_hash={config_hash}\nn,instance_id,local_optima_count\n");
        for (n, rows) in &self.per_size {
            for (id, c) in rows {
                s.push_str(&format!("{n},{id},{c}\n"));
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<(Self, Option<String>)> {
        let (hash, rows) = crate::bench::read_csv(text, &["n", "instance_id", "local_optima_count"])?;
        let mut census = Self::default();
        for row in rows {
            let parse = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad census field `{s}`")))
            };
            census.record(parse(&row[0])? as usize, parse(&row[1])? as usize, parse(&row[2])?);
        }
        Ok((census, hash))
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Least-squares fit of `median(n) ≈ a·r^n` on log-medians.
pub fn fit_exponential_to_medians(medians: &BTreeMap<usize, f64>) -> Result<ExponentialFit> {
    let xs: Vec<f64> = medians.keys().map(|&n| n as f64).collect();
    let ys: Vec<f64> = medians.values().copied().collect();
    fit_exponential(&xs, &ys)
}
