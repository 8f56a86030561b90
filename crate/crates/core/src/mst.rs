//! Minimum spanning tree of an instance and the recovery metrics.

use serde::Serialize;

use crate::edge_set::{Edge, EdgeSet};
use crate::error::{Error, Result};
use crate::instance::{for_each_prufer_code, pair_index, prufer_decode, PlantedInstance, PlantedKind};

/// Disjoint-set forest with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb as u32,
            std::cmp::Ordering::Greater => self.parent[rb] = ra as u32,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra as u32;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Row starts of the upper-triangular table, used to map a flat index back
/// to its pair.
struct PairDecoder {
    n: usize,
    row_start: Vec<usize>,
}

impl PairDecoder {
    fn new(n: usize) -> Self {
        let row_start = (0..n).map(|u| u * (2 * n - u - 1) / 2).collect();
        Self { n, row_start }
    }

    fn decode(&self, idx: usize) -> (usize, usize) {
        let u = self.row_start.partition_point(|&s| s <= idx) - 1;
        let v = idx - self.row_start[u] + u + 1;
        debug_assert!(v < self.n);
        (u, v)
    }
}

/// Edges ordered by `(weight, table index)`: the strict total order used for
/// every tie-break.
fn sorted_pairs(weights: &[f64]) -> Vec<(u64, u32)> {
    // For nonnegative finite floats the bit pattern orders like the value.
    let mut order: Vec<(u64, u32)> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| ((w + 0.0).to_bits(), i as u32))
        .collect();
    order.sort_unstable();
    order
}

/// Kruskal over the full weight table of the complete graph on `n` vertices.
pub fn kruskal_on_table(n: usize, weights: &[f64]) -> EdgeSet {
    debug_assert_eq!(weights.len(), n * (n - 1) / 2);
    let decoder = PairDecoder::new(n);
    let mut dsu = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (_, idx) in sorted_pairs(weights) {
        let (u, v) = decoder.decode(idx as usize);
        if dsu.union(u, v) {
            tree.push(Edge::new(u as u32, v as u32));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    EdgeSet::from_edges(tree)
}

pub fn kruskal_mst(instance: &PlantedInstance) -> EdgeSet {
    kruskal_on_table(instance.n, &instance.weights)
}

/// Largest `n` accepted by [`brute_force_mst`] (`8^6 = 262144` trees).
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Exact MST by enumerating every labeled spanning tree through its Prüfer
/// code. Ties in total weight are broken by comparing the trees' sorted edge
/// ranks lexicographically, which selects the same tree as Kruskal's
/// `(weight, index)` order.
pub fn brute_force_mst(instance: &PlantedInstance) -> Result<EdgeSet> {
    let n = instance.n;
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Capacity {
            what: "n (brute force)",
            requested: n,
            limit: BRUTE_FORCE_MAX_N,
        });
    }
    let mut rank = vec![0u32; instance.weights.len()];
    for (r, (_, idx)) in sorted_pairs(&instance.weights).into_iter().enumerate() {
        rank[idx as usize] = r as u32;
    }

    let mut best: Option<(f64, Vec<u32>, EdgeSet)> = None;
    for_each_prufer_code(n, |code| {
        let tree = prufer_decode(code, n).expect("valid code");
        let mut ranked: Vec<(u32, f64)> = tree
            .iter()
            .map(|e| {
                let (u, v) = e.endpoints();
                (rank[pair_index(n, u, v)], instance.edge_weight(e))
            })
            .collect();
        ranked.sort_unstable_by_key(|&(r, _)| r);
        // Summing in rank order makes equal weight multisets sum identically.
        let total: f64 = ranked.iter().map(|&(_, w)| w).sum();
        let ranks: Vec<u32> = ranked.into_iter().map(|(r, _)| r).collect();
        let better = match &best {
            None => true,
            Some((bt, br, _)) => total < *bt || (total == *bt && ranks < *br),
        };
        if better {
            best = Some((total, ranks, tree));
        }
    });
    Ok(best.expect("at least one tree").2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryResult {
    pub n: usize,
    pub kind: PlantedKind,
    #[serde(skip)]
    pub mst: EdgeSet,
    /// `|M ∩ M*| / (n - 1)`; reported as 0 for null instances.
    pub overlap: f64,
    /// Mean MST edge weight, `w(M) / (n - 1)`.
    pub weight: f64,
    #[serde(rename = "intersection")]
    pub intersection_size: usize,
    /// False for null instances, whose overlap is 0 by convention.
    pub planted_available: bool,
}

pub fn evaluate(instance: &PlantedInstance, mst: &EdgeSet) -> Result<RecoveryResult> {
    let n = instance.n;
    mst.validate_spanning_tree(n)?;
    let total: f64 = mst.iter().map(|e| instance.edge_weight(e)).sum();
    let intersection_size = mst.intersection_len(&instance.planted);
    let planted_available = instance.kind != PlantedKind::Null;
    let overlap = if planted_available {
        intersection_size as f64 / (n - 1) as f64
    } else {
        0.0
    };
    Ok(RecoveryResult {
        n,
        kind: instance.kind,
        mst: mst.clone(),
        overlap,
        weight: total / (n - 1) as f64,
        intersection_size,
        planted_available,
    })
}

/// Kruskal followed by [`evaluate`].
pub fn recover(instance: &PlantedInstance) -> RecoveryResult {
    let mst = kruskal_mst(instance);
    evaluate(instance, &mst).expect("Kruskal output is a spanning tree")
}
