use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An unordered vertex pair stored as `(u, v)` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(u32, u32);

impl Edge {
    /// Canonicalizes endpoint order. Panics on a self-loop.
    pub fn new(a: u32, b: u32) -> Self {
        assert_ne!(a, b, "self-loop ({a}, {a})");
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn u(self) -> u32 {
        self.0
    }

    pub fn v(self) -> u32 {
        self.1
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.0 as usize, self.1 as usize)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Sorted, deduplicated set of edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeSet(Vec<Edge>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Self {
        let mut v: Vec<Edge> = edges.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        EdgeSet(v)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        Self::from_edges(pairs.into_iter().map(|(a, b)| Edge::new(a, b)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.0
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    /// Size of the intersection, by merging the two sorted lists.
    pub fn intersection_len(&self, other: &EdgeSet) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for e in self.iter() {
            let (u, v) = e.endpoints();
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Checks that the set is a spanning tree of `{0, .., n-1}`.
    pub fn validate_spanning_tree(&self, n: usize) -> Result<()> {
        if self.len() + 1 != n {
            return Err(Error::EdgeSet(format!(
                "expected {} edges for n = {n}, found {}",
                n.saturating_sub(1),
                self.len()
            )));
        }
        let mut dsu = crate::mst::UnionFind::new(n);
        for e in self.iter() {
            let (u, v) = e.endpoints();
            if v >= n {
                return Err(Error::EdgeSet(format!("edge {e} out of range for n = {n}")));
            }
            if !dsu.union(u, v) {
                return Err(Error::EdgeSet(format!("edge {e} closes a cycle")));
            }
        }
        Ok(())
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        Self::from_edges(iter)
    }
}

impl<'a> IntoIterator for &'a EdgeSet {
    type Item = &'a Edge;
    type IntoIter = std::slice::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}
