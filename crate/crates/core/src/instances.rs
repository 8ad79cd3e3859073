//! Weighted maxcut instances and the benchmark library.
//!
//! Graphs are drawn from the Erdős–Rényi–Gilbert model: every unordered pair
//! `(i, j)`, visited in lexicographic order, is included with probability
//! `edge_prob` and included edges receive i.i.d. weights. Graphs without edges
//! are redrawn from the same stream and the number of redraws is recorded.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::{child_stream, instance_stream};

const INSTANCE_MAGIC: &str = "maxcut";
const INSTANCE_VERSION: &str = "v1";
const MANIFEST_FILE: &str = "library.json";
const MANIFEST_FORMAT: &str = "qwoa-library";
const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// Undirected graph with strictly positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Validates and builds a graph. Edges must satisfy `i < j < n`, appear at
    /// most once and carry finite positive weights.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph(format!("need at least 2 vertices, got {n}")));
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.i >= e.j {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) must have i < j", e.i, e.j)));
            }
            if e.j >= n {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) out of range for n = {n}", e.i, e.j)));
            }
            if !(e.w.is_finite() && e.w > 0.0) {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) has weight {}", e.i, e.j, e.w)));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
        }
        Ok(Self { n, edges })
    }

    /// Convenience constructor from `(i, j, w)` triples.
    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        Self::new(n, triples.iter().map(|&(i, j, w)| Edge { i, j, w }).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Copy of the graph with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.n,
            self.edges.iter().map(|e| Edge { w: e.w * c, ..*e }).collect(),
        )
    }

    /// Cut weight of the partition encoded by `bits` (bit `i` is vertex `i`).
    pub fn cut_value(&self, bits: u64) -> f64 {
        self.edges
            .iter()
            .filter(|e| ((bits >> e.i) ^ (bits >> e.j)) & 1 == 1)
            .map(|e| e.w)
            .sum()
    }

    /// Per-vertex neighbour lists `(neighbour, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push((e.j, e.w));
            adj[e.j].push((e.i, e.w));
        }
        adj
    }

    /// Text form used by instance files, without the checksum trailer.
    fn canonical_body(&self) -> String {
        let mut s = format!(
            "{INSTANCE_MAGIC} {INSTANCE_VERSION} n={} m={}\n",
            self.n,
            self.edges.len()
        );
        for e in &self.edges {
            // `Display` for f64 is the shortest string that parses back exactly.
            s.push_str(&format!("{} {} {}\n", e.i, e.j, e.w));
        }
        s
    }

    /// Hex SHA-256 of the canonical text.
    pub fn checksum(&self) -> String {
        hex_digest(self.canonical_body().as_bytes())
    }

    /// Serializes to the `maxcut v1` instance format.
    pub fn to_instance_string(&self) -> String {
        let body = self.canonical_body();
        let sum = hex_digest(body.as_bytes());
        format!("{body}checksum={sum}\n")
    }

    /// Parses the `maxcut v1` instance format. `origin` only labels errors.
    pub fn parse_instance(text: &str, origin: &Path) -> Result<Self> {
        let schema = |msg: String| Error::schema(origin, msg);
        let mut lines = text.split_inclusive('\n');
        let header = lines.next().ok_or_else(|| schema("empty file".into()))?;
        let mut parts = header.trim_end().split(' ');
        if parts.next() != Some(INSTANCE_MAGIC) {
            return Err(schema(format!("bad header `{}`", header.trim_end())));
        }
        match parts.next() {
            Some(INSTANCE_VERSION) => {}
            Some(v) => return Err(schema(format!("unsupported schema version `{v}`"))),
            None => return Err(schema("missing schema version".into())),
        }
        let n = header_field(parts.next(), "n").map_err(&schema)?;
        let m = header_field(parts.next(), "m").map_err(&schema)?;
        if parts.next().is_some() {
            return Err(schema("trailing header fields".into()));
        }

        let mut body = String::from(header);
        let mut edges = Vec::with_capacity(m);
        for k in 0..m {
            let line = lines
                .next()
                .ok_or_else(|| schema(format!("truncated: expected {m} edges, found {k}")))?;
            if line.starts_with("checksum=") {
                return Err(schema(format!("truncated: expected {m} edges, found {k}")));
            }
            body.push_str(line);
            let fields: Vec<&str> = line.trim_end().split(' ').collect();
            if fields.len() != 3 {
                return Err(schema(format!("malformed edge line `{}`", line.trim_end())));
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| schema(format!("bad vertex index `{s}`")))
            };
            let w = fields[2]
                .parse::<f64>()
                .map_err(|_| schema(format!("bad weight `{}`", fields[2])))?;
            edges.push(Edge {
                i: parse_idx(fields[0])?,
                j: parse_idx(fields[1])?,
                w,
            });
        }
        let trailer = lines
            .next()
            .ok_or_else(|| schema("truncated: missing checksum line".into()))?;
        if !trailer.ends_with('\n') {
            return Err(schema("truncated checksum line".into()));
        }
        let expected = trailer
            .trim_end()
            .strip_prefix("checksum=")
            .ok_or_else(|| schema(format!("expected checksum line, got `{}`", trailer.trim_end())))?;
        if lines.next().is_some() {
            return Err(schema("content after checksum line".into()));
        }
        let computed = hex_digest(body.as_bytes());
        if computed != expected {
            return Err(Error::Checksum {
                path: origin.to_path_buf(),
                expected: expected.to_string(),
                computed,
            });
        }
        WeightedGraph::new(n, edges).map_err(|e| schema(e.to_string()))
    }
}

fn header_field(part: Option<&str>, key: &str) -> std::result::Result<usize, String> {
    let part = part.ok_or_else(|| format!("missing header field `{key}`"))?;
    part.strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad header field `{part}`"))
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Edge-weight distribution.
///
/// Text forms: `uniform(lo,hi]` (half-open, `0 <= lo < hi`) and `const(w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    Uniform { lo: f64, hi: f64 },
    Constant(f64),
}

impl Default for WeightDist {
    fn default() -> Self {
        WeightDist::Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl WeightDist {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            // gen::<f64>() is in [0, 1), so 1 - u is in (0, 1].
            WeightDist::Uniform { lo, hi } => lo + (hi - lo) * (1.0 - rng.gen::<f64>()),
            WeightDist::Constant(w) => w,
        }
    }
}

impl fmt::Display for WeightDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightDist::Uniform { lo, hi } => write!(f, "uniform({lo},{hi}]"),
            WeightDist::Constant(w) => write!(f, "const({w})"),
        }
    }
}

impl FromStr for WeightDist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unsupported = || Error::UnsupportedDistribution(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "uniform" {
            return Ok(WeightDist::default());
        }
        if let Some(inner) = t.strip_prefix("uniform(").and_then(|r| r.strip_suffix(']')) {
            let (lo, hi) = inner.split_once(',').ok_or_else(unsupported)?;
            let lo: f64 = lo.parse().map_err(|_| unsupported())?;
            let hi: f64 = hi.parse().map_err(|_| unsupported())?;
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(unsupported());
            }
            return Ok(WeightDist::Uniform { lo, hi });
        }
        if let Some(inner) = t.strip_prefix("const(").and_then(|r| r.strip_suffix(')')) {
            let w: f64 = inner.parse().map_err(|_| unsupported())?;
            if !(w.is_finite() && w > 0.0) {
                return Err(unsupported());
            }
            return Ok(WeightDist::Constant(w));
        }
        Err(unsupported())
    }
}

impl Serialize for WeightDist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for WeightDist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A generated graph plus the number of empty draws that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub graph: WeightedGraph,
    pub rejections: u32,
}

pub fn generate_instance<R: Rng + ?Sized>(
    n: usize,
    edge_prob: f64,
    weight_dist: WeightDist,
    rng: &mut R,
) -> Result<GeneratedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if !(edge_prob > 0.0 && edge_prob <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must be in (0, 1], got {edge_prob}"
        )));
    }
    let mut rejections = 0u32;
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < edge_prob {
                    edges.push(Edge {
                        i,
                        j,
                        w: weight_dist.sample(rng),
                    });
                }
            }
        }
        if edges.is_empty() {
            rejections += 1;
            continue;
        }
        let graph = WeightedGraph::new(n, edges)?;
        return Ok(GeneratedGraph { graph, rejections });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryConfig {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub per_size: usize,
    pub edge_prob: f64,
    pub weight_dist: WeightDist,
}

impl Default for LibraryConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            sizes: (10..=16).collect(),
            per_size: 100,
            edge_prob: 0.5,
            weight_dist: WeightDist::default(),
        }
    }
}

impl LibraryConfig {
    /// Regenerates a single instance without touching any other.
    pub fn instance(&self, n: usize, id: usize) -> Result<GeneratedGraph> {
        let mut rng = child_stream(self.seed, instance_stream(n, id));
        generate_instance(n, self.edge_prob, self.weight_dist, &mut rng)
    }

    pub fn generate(&self) -> Result<InstanceLibrary> {
        let mut instances = Vec::with_capacity(self.sizes.len() * self.per_size);
        for &n in &self.sizes {
            for id in 0..self.per_size {
                let g = self.instance(n, id)?;
                if g.rejections > 0 {
                    log::info!("n={n} id={id}: resampled {} empty graph(s)", g.rejections);
                }
                instances.push(LibraryInstance {
                    n,
                    id,
                    graph: g.graph,
                    rejections: g.rejections,
                });
            }
        }
        Ok(InstanceLibrary {
            config: self.clone(),
            instances,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LibraryInstance {
    pub n: usize,
    pub id: usize,
    pub graph: WeightedGraph,
    pub rejections: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceLibrary {
    pub config: LibraryConfig,
    pub instances: Vec<LibraryInstance>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    config_hash: String,
    config: LibraryConfig,
    instances: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    n: usize,
    id: usize,
    path: String,
    checksum: String,
    rejections: u32,
}

fn instance_rel_path(n: usize, id: usize) -> String {
    format!("n{n:02}/{id:04}.maxcut")
}

impl InstanceLibrary {
    pub fn of_size(&self, n: usize) -> impl Iterator<Item = &LibraryInstance> {
        self.instances.iter().filter(move |inst| inst.n == n)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.instances.iter().map(|i| i.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }

    /// Hash of the generating configuration.
    pub fn config_hash(&self) -> String {
        crate::config::hash_json(&self.config)
    }

    /// Writes `library.json` and one instance file per graph under `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let mut entries = Vec::with_capacity(self.instances.len());
        for inst in &self.instances {
            let rel = instance_rel_path(inst.n, inst.id);
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)
                    .map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
            }
            fs::write(&path, inst.graph.to_instance_string())
                .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
            entries.push(ManifestEntry {
                n: inst.n,
                id: inst.id,
                path: rel,
                checksum: inst.graph.checksum(),
                rejections: inst.rejections,
            });
        }
        let manifest = Manifest {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            config_hash: self.config_hash(),
            config: self.config.clone(),
            instances: entries,
        };
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::schema(&path, format!("manifest: {e}")))?;
        if manifest.format != MANIFEST_FORMAT || manifest.version != MANIFEST_VERSION {
            return Err(Error::schema(
                &path,
                format!(
                    "unsupported manifest {} v{} (expected {MANIFEST_FORMAT} v{MANIFEST_VERSION})",
                    manifest.format, manifest.version
                ),
            ));
        }
        let hash = crate::config::hash_json(&manifest.config);
        if hash != manifest.config_hash {
            return Err(Error::Checksum {
                path,
                expected: manifest.config_hash,
                computed: hash,
            });
        }
        let mut instances = Vec::with_capacity(manifest.instances.len());
        for entry in manifest.instances {
            let ipath: PathBuf = dir.join(&entry.path);
            let text = fs::read_to_string(&ipath)
                .map_err(|e| Error::io(format!("reading {}", ipath.display()), e))?;
            let graph = WeightedGraph::parse_instance(&text, &ipath)?;
            if graph.n() != entry.n {
                return Err(Error::schema(
                    &ipath,
                    format!("manifest says n={}, file says n={}", entry.n, graph.n()),
                ));
            }
            let sum = graph.checksum();
            if sum != entry.checksum {
                return Err(Error::Checksum {
                    path: ipath,
                    expected: entry.checksum,
                    computed: sum,
                });
            }
            instances.push(LibraryInstance {
                n: entry.n,
                id: entry.id,
                graph,
                rejections: entry.rejections,
            });
        }
        Ok(Self {
            config: manifest.config,
            instances,
        })
    }
}
