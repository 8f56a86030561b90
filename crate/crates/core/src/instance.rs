//! Planted instances of the complete weighted graph.
//!
//! Vertices are `0..n`. Weights live in a flat upper-triangular table: pair
//! `(u, v)` with `u < v` sits at [`pair_index`]. Planted structures are
//! uniform labeled trees (decoded from uniform Prüfer sequences) or uniform
//! Hamiltonian paths (from uniform permutations).

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edge_set::{Edge, EdgeSet};
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose};
use crate::weights::{EdgeLaw, EdgeWeightModel, WeightFamily};

/// Default memory guard: about 33M weights at the limit.
pub const DEFAULT_MAX_N: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantedKind {
    /// Uniform labeled spanning tree.
    Tree,
    /// Uniform Hamiltonian path.
    Path,
    /// No planted structure; every pair is unplanted.
    Null,
}

impl PlantedKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlantedKind::Tree => "tree",
            PlantedKind::Path => "path",
            PlantedKind::Null => "null",
        }
    }
}

impl std::fmt::Display for PlantedKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PlantedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(PlantedKind::Tree),
            "path" => Ok(PlantedKind::Path),
            "null" => Ok(PlantedKind::Null),
            other => Err(Error::domain(format!("unknown model kind {other:?}"))),
        }
    }
}

#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Position of the pair `{u, v}` (`u != v`) in the upper-triangular table.
#[inline]
pub fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u != v && u < n && v < n);
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// All pairs in table order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub n: usize,
    pub weights: Vec<f64>,
    pub planted: EdgeSet,
    pub kind: PlantedKind,
    pub seed: u64,
    pub model: EdgeWeightModel,
}

impl PlantedInstance {
    /// Builds an instance from explicit weights. `weights` is in table order.
    pub fn from_weights(
        n: usize,
        weights: Vec<f64>,
        planted: EdgeSet,
        kind: PlantedKind,
        model: EdgeWeightModel,
        seed: u64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("need n >= 2, got {n}")));
        }
        if weights.len() != pair_count(n) {
            return Err(Error::domain(format!(
                "expected {} weights for n = {n}, got {}",
                pair_count(n),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::domain(format!("weight {w} is not a finite nonnegative number")));
        }
        match kind {
            PlantedKind::Null if !planted.is_empty() => {
                return Err(Error::EdgeSet("null instance with planted edges".into()))
            }
            PlantedKind::Null => {}
            _ => planted.validate_spanning_tree(n)?,
        }
        Ok(Self {
            n,
            weights,
            planted,
            kind,
            seed,
            model,
        })
    }

    #[inline]
    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[pair_index(self.n, u, v)]
    }

    pub fn edge_weight(&self, e: Edge) -> f64 {
        let (u, v) = e.endpoints();
        self.weight(u, v)
    }

    /// Writes `u,v,weight,planted` rows in table order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "v", "weight", "planted"])?;
        for ((u, v), &weight) in pairs(self.n).zip(&self.weights) {
            let planted = self.planted.contains(Edge::new(u as u32, v as u32));
            w.write_record([
                u.to_string(),
                v.to_string(),
                weight.to_string(),
                u8::from(planted).to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn sidecar(&self) -> InstanceSidecar {
        InstanceSidecar {
            n: self.n,
            kind: self.kind,
            mu: self.model.planted.mean(),
            seed: self.seed,
        }
    }

    /// Writes the CSV dump to `path` and the sidecar to `path` + `.json`.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io)?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let side = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.sidecar())?;
        std::fs::write(&side, json + "\n").map_err(|source| Error::Io {
            path: side.display().to_string(),
            source,
        })
    }

    /// Reads a CSV dump. Every pair must appear exactly once.
    pub fn read_csv<R: Read>(input: R, sidecar: Option<InstanceSidecar>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        let mut n = 0usize;
        for rec in rdr.deserialize::<CsvRow>() {
            let row = rec?;
            if row.u == row.v {
                return Err(Error::EdgeSet(format!("self-loop at vertex {}", row.u)));
            }
            n = n.max(row.u as usize + 1).max(row.v as usize + 1);
            rows.push(row);
        }
        if let Some(side) = &sidecar {
            if side.n < n {
                return Err(Error::domain(format!("sidecar n = {} but CSV mentions vertex {}", side.n, n - 1)));
            }
            n = side.n;
        }
        if rows.len() != pair_count(n) {
            return Err(Error::domain(format!(
                "expected {} rows for n = {n}, found {}",
                pair_count(n),
                rows.len()
            )));
        }
        let mut weights = vec![f64::NAN; pair_count(n)];
        let mut planted = Vec::new();
        for row in &rows {
            let idx = pair_index(n, row.u as usize, row.v as usize);
            if !weights[idx].is_nan() {
                return Err(Error::domain(format!("duplicate pair ({}, {})", row.u, row.v)));
            }
            weights[idx] = row.weight;
            if row.planted != 0 {
                planted.push(Edge::new(row.u, row.v));
            }
        }
        let planted = EdgeSet::from_edges(planted);
        let (kind, mu, seed) = match sidecar {
            Some(s) => (s.kind, s.mu, s.seed),
            None if planted.is_empty() => (PlantedKind::Null, 1.0, 0),
            None => (PlantedKind::Tree, 1.0, 0),
        };
        let model = EdgeWeightModel::exponential(mu, n)?;
        Self::from_weights(n, weights, planted, kind, model, seed)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let io = |p: &Path| {
            let p = p.display().to_string();
            move |source| Error::Io { path: p, source }
        };
        let side = sidecar_path(path);
        let sidecar = if side.exists() {
            let text = std::fs::read_to_string(&side).map_err(io(&side))?;
            Some(serde_json::from_str(&text)?)
        } else {
            None
        };
        let file = std::fs::File::open(path).map_err(io(path))?;
        Self::read_csv(std::io::BufReader::new(file), sidecar)
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    u: u32,
    v: u32,
    weight: f64,
    planted: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub n: usize,
    pub kind: PlantedKind,
    pub mu: f64,
    pub seed: u64,
}

pub fn sidecar_path(csv: &Path) -> std::path::PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Decodes a Prüfer sequence (entries in `0..n`, length `n - 2`) into the
/// edges of the corresponding labeled tree. Linear time.
pub fn prufer_decode(code: &[u32], n: usize) -> Result<EdgeSet> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    if code.len() != n - 2 {
        return Err(Error::domain(format!(
            "Prüfer code for n = {n} must have length {}, got {}",
            n - 2,
            code.len()
        )));
    }
    if let Some(&x) = code.iter().find(|&&x| x as usize >= n) {
        return Err(Error::domain(format!("Prüfer entry {x} out of range for n = {n}")));
    }
    let mut degree = vec![1u32; n];
    for &x in code {
        degree[x as usize] += 1;
    }
    let mut ptr = degree.iter().position(|&d| d == 1).expect("a leaf exists");
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(n - 1);
    for &x in code {
        let x = x as usize;
        edges.push(Edge::new(leaf as u32, x as u32));
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push(Edge::new(leaf as u32, (n - 1) as u32));
    Ok(EdgeSet::from_edges(edges))
}

/// Calls `visit` with every Prüfer sequence of length `n - 2`, i.e. with the
/// code of every labeled tree on `n` vertices.
pub fn for_each_prufer_code(n: usize, mut visit: impl FnMut(&[u32])) {
    let len = n.saturating_sub(2);
    let mut code = vec![0u32; len];
    loop {
        visit(&code);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            code[i] += 1;
            if (code[i] as usize) < n {
                break;
            }
            code[i] = 0;
            i += 1;
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::Capacity {
            what: "n",
            requested: n,
            limit: u32::MAX as usize,
        });
    }
    Ok(())
}

/// Uniform labeled tree on `0..n`: a uniform Prüfer sequence, decoded.
pub fn gen_uniform_spanning_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<EdgeSet> {
    check_n(n)?;
    let code: Vec<u32> = (0..n - 2).map(|_| rng.random_range(0..n as u32)).collect();
    prufer_decode(&code, n)
}

/// Uniform Hamiltonian path on `0..n`, from a uniform permutation.
pub fn gen_uniform_hamiltonian_path<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<EdgeSet> {
    check_n(n)?;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    Ok(order.windows(2).map(|w| Edge::new(w[0], w[1])).collect())
}

pub fn gen_instance(
    n: usize,
    kind: PlantedKind,
    planted: WeightFamily,
    seed: u64,
) -> Result<PlantedInstance> {
    gen_instance_with_guard(n, kind, planted, seed, DEFAULT_MAX_N)
}

/// Generates an instance. The result depends only on the arguments.
pub fn gen_instance_with_guard(
    n: usize,
    kind: PlantedKind,
    planted_law: WeightFamily,
    seed: u64,
    max_n: usize,
) -> Result<PlantedInstance> {
    check_n(n)?;
    if n > max_n {
        return Err(Error::Capacity {
            what: "n",
            requested: n,
            limit: max_n,
        });
    }
    let model = EdgeWeightModel {
        planted: planted_law,
        n,
    };
    let mut structure = substream(seed, Purpose::Structure, 0);
    let planted = match kind {
        PlantedKind::Tree => gen_uniform_spanning_tree(n, &mut structure)?,
        PlantedKind::Path => gen_uniform_hamiltonian_path(n, &mut structure)?,
        PlantedKind::Null => EdgeSet::new(),
    };

    let mut unplanted_rng = substream(seed, Purpose::Weights, 0);
    let mut weights: Vec<f64> = (0..pair_count(n))
        .map(|_| model.sample_unplanted(&mut unplanted_rng))
        .collect();
    let mut planted_rng = substream(seed, Purpose::Weights, 1);
    for e in planted.iter() {
        let (u, v) = e.endpoints();
        weights[pair_index(n, u, v)] = model.sample_planted(&mut planted_rng);
    }

    Ok(PlantedInstance {
        n,
        weights,
        planted,
        kind,
        seed,
        model,
    })
}
