//! Sparse undirected graphs, vertex permutations and random perturbations.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};

/// An immutable simple undirected graph stored as compressed sorted
/// neighbor lists.
///
/// Invariants held by construction: neighbor lists are strictly sorted,
/// symmetric (`j in neighbors(i)` iff `i in neighbors(j)`), free of
/// self-loops, and every index lies in `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph over `n` nodes from an edge list. Duplicate edges and
    /// reversed duplicates are merged; self-loops and out-of-range indices
    /// are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop { node: a });
            }
            for node in [a, b] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { index: node, n });
                }
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let edge_count = targets.len() / 2;
        Ok(Graph {
            offsets,
            targets,
            edge_count,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Degree of every node; entry `i` is `|neighbors(i)|`.
    pub fn degree_vector(&self) -> Vec<usize> {
        (0..self.node_count())
            .map(|i| self.offsets[i + 1] - self.offsets[i])
            .collect()
    }

    /// Edges as `(i, j)` pairs with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .filter(move |&&j| i < j)
                .map(move |&j| (i, j))
        })
    }

    /// Relabels nodes: the result has edge `(p(i), p(j))` iff `self` has
    /// edge `(i, j)`.
    pub fn permuted(&self, p: &Permutation) -> Result<Graph> {
        if p.len() != self.node_count() {
            return Err(Error::PermutationLength {
                perm: p.len(),
                n: self.node_count(),
            });
        }
        Graph::from_edges(
            self.node_count(),
            self.edges().map(|(a, b)| (p.apply(a), p.apply(b))),
        )
    }

    /// Returns a copy with the edge `(a, b)` deleted if present, added
    /// otherwise.
    pub fn toggled_edge(&self, a: usize, b: usize) -> Result<Graph> {
        if a == b {
            return Err(Error::SelfLoop { node: a });
        }
        let n = self.node_count();
        for node in [a, b] {
            if node >= n {
                return Err(Error::NodeOutOfRange { index: node, n });
            }
        }
        let present = self.has_edge(a, b);
        let pair = if a < b { (a, b) } else { (b, a) };
        let edges = self
            .edges()
            .filter(|&e| e != pair)
            .chain((!present).then_some(pair));
        Graph::from_edges(n, edges)
    }

    /// Flips one uniformly drawn node pair: deletes the edge if present,
    /// adds it otherwise. The pair is drawn uniformly from all C(n, 2)
    /// unordered pairs, independent of the current edge set.
    pub fn flip_random_edge<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Graph> {
        let n = self.node_count();
        if n < 2 {
            return Err(Error::TooFewNodes {
                required: 2,
                found: n,
            });
        }
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        self.toggled_edge(a, b)
    }
}

/// Samples an Erdős–Rényi G(n, p) graph, each unordered pair present
/// independently with probability `p`.
///
/// Uses geometric skips over the linearized upper triangle so the cost is
/// proportional to the number of sampled edges rather than C(n, 2).
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability { p });
    }
    if p == 0.0 || n < 2 {
        return Graph::from_edges(n, std::iter::empty());
    }
    let distr = Geometric::new(p).expect("probability validated above");
    let total = (n as u64) * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    // Row i holds pairs (i, j) with j > i; row_base is the linear index of
    // (i, i + 1). cur only moves forward, so the row pointer is amortized
    // O(n) over the whole sweep.
    let mut row = 0usize;
    let mut row_base = 0u64;
    let mut cur = 0u64;
    loop {
        let skip = distr.sample(rng);
        cur = match cur.checked_add(skip) {
            Some(next) => next,
            None => break,
        };
        if cur >= total {
            break;
        }
        while row_base + (n - 1 - row) as u64 <= cur {
            row_base += (n - 1 - row) as u64;
            row += 1;
        }
        let j = row + 1 + (cur - row_base) as usize;
        edges.push((row, j));
        cur += 1;
        if cur >= total {
            break;
        }
    }
    Graph::from_edges(n, edges)
}

/// A bijection on `{0, .., n-1}` acting on node labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &image in &map {
            if image >= n || seen[image] {
                return Err(Error::PermutationNotBijective);
            }
            seen[image] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &image) in self.map.iter().enumerate() {
            inv[image] = i;
        }
        Permutation { map: inv }
    }
}
