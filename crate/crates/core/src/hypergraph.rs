//! Hypergraphs with hyperedge multiplicities, cycle and hypertree tests,
//! and melonic classification of regular maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{merge_edges, CombinatorialMap, EdgePartition, Hypermap};

/// A hyperedge as a vertex multiset: `(v, l_v(e))` pairs sorted by `v`,
/// together with its multiplicity `m(e)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hyperedge {
    pub vertices: Vec<(usize, usize)>,
    pub m: usize,
}

impl Hyperedge {
    /// `|e| = Σ_v l_v(e)`.
    pub fn order(&self) -> usize {
        self.vertices.iter().map(|&(_, l)| l).sum()
    }

    fn multiplicity_of(&self, v: usize) -> usize {
        self.vertices
            .binary_search_by_key(&v, |&(u, _)| u)
            .map_or(0, |i| self.vertices[i].1)
    }
}

fn multiset(vertices: &[usize]) -> Vec<(usize, usize)> {
    let mut counts = BTreeMap::new();
    for &v in vertices {
        *counts.entry(v).or_insert(0) += 1;
    }
    counts.into_iter().collect()
}

/// `H = (V, E, m)`. Hyperedges are pairwise distinct as multisets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HypergraphRecord")]
pub struct Hypergraph {
    num_vertices: usize,
    hyperedges: Vec<Hyperedge>,
}

#[derive(Deserialize)]
struct HypergraphRecord {
    num_vertices: usize,
    hyperedges: Vec<Hyperedge>,
}

impl TryFrom<HypergraphRecord> for Hypergraph {
    type Error = Error;

    fn try_from(r: HypergraphRecord) -> Result<Self> {
        let mut h = Hypergraph::new(r.num_vertices);
        for e in r.hyperedges {
            if e.m == 0 {
                return Err(Error::InvalidMap(
                    "hyperedge multiplicity must be >= 1".into(),
                ));
            }
            let expanded: Vec<usize> = e
                .vertices
                .iter()
                .flat_map(|&(v, l)| std::iter::repeat_n(v, l))
                .collect();
            for _ in 0..e.m {
                h.add_hyperedge(&expanded)?;
            }
        }
        Ok(h)
    }
}

impl Hypergraph {
    pub fn new(num_vertices: usize) -> Self {
        Hypergraph {
            num_vertices,
            hyperedges: Vec::new(),
        }
    }

    /// Adds one copy of the hyperedge with the given vertex list; a copy of an
    /// existing multiset raises that hyperedge's multiplicity instead.
    pub fn add_hyperedge(&mut self, vertices: &[usize]) -> Result<()> {
        if vertices.is_empty() {
            return Err(Error::InvalidMap("empty hyperedge".into()));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v >= self.num_vertices) {
            return Err(Error::InvalidMap(format!("vertex {v} out of range")));
        }
        let ms = multiset(vertices);
        match self.hyperedges.iter_mut().find(|e| e.vertices == ms) {
            Some(e) => e.m += 1,
            None => self.hyperedges.push(Hyperedge { vertices: ms, m: 1 }),
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn hyperedges(&self) -> &[Hyperedge] {
        &self.hyperedges
    }

    /// `d(v) = Σ_e m(e) · l_v(e)`.
    pub fn degree(&self, v: usize) -> usize {
        self.hyperedges
            .iter()
            .map(|e| e.m * e.multiplicity_of(v))
            .sum()
    }

    pub fn reduce(&self) -> ReducedHypergraph {
        ReducedHypergraph {
            num_vertices: self.num_vertices,
            hyperedges: self.hyperedges.iter().map(|e| e.vertices.clone()).collect(),
        }
    }

    /// Whether some cycle exists; multiplicities `m(e)` play no role, a vertex
    /// repeated inside a hyperedge is a cycle of length one.
    pub fn has_cycle(&self) -> bool {
        self.reduce().has_cycle()
    }
}

/// `H*`: the hyperedge set without multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedHypergraph {
    pub num_vertices: usize,
    pub hyperedges: Vec<Vec<(usize, usize)>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl ReducedHypergraph {
    /// Cycle in the vertex/hyperedge incidence multigraph.
    pub fn has_cycle(&self) -> bool {
        let nv = self.num_vertices;
        let mut uf = UnionFind::new(nv + self.hyperedges.len());
        for (e, verts) in self.hyperedges.iter().enumerate() {
            for &(v, l) in verts {
                if l >= 2 || !uf.union(v, nv + e) {
                    return true;
                }
            }
        }
        false
    }

    pub fn is_connected(&self) -> bool {
        let nv = self.num_vertices;
        if nv == 0 {
            return true;
        }
        let mut uf = UnionFind::new(nv);
        for verts in &self.hyperedges {
            for w in verts.windows(2) {
                uf.union(w[0].0, w[1].0);
            }
        }
        (1..nv).all(|v| uf.find(v) == uf.find(0))
    }

    pub fn is_hypertree(&self) -> bool {
        self.is_connected() && !self.has_cycle()
    }

    /// `1 − |V| + (p−1)|E|`, which vanishes exactly on hypertrees.
    pub fn euler_deficiency(&self, p: usize) -> Result<i64> {
        if !self.is_connected() {
            return Err(Error::ContractViolation(
                "hypergraph is not connected".into(),
            ));
        }
        if self
            .hyperedges
            .iter()
            .any(|e| e.iter().map(|&(_, l)| l).sum::<usize>() != p)
        {
            return Err(Error::ContractViolation(format!(
                "hypergraph is not {p}-uniform"
            )));
        }
        Ok(1 - self.num_vertices as i64 + (p as i64 - 1) * self.hyperedges.len() as i64)
    }
}

/// Every hyperedge has multiplicity two and the reduced hypergraph is a hypertree.
pub fn is_double_hypertree(h: &Hypergraph) -> bool {
    h.hyperedges.iter().all(|e| e.m == 2) && h.reduce().is_hypertree()
}

/// `H(b)`: vertices are the `σ`-cycles, hyperedges the `τ`-cycles read as
/// vertex multisets, equal multisets collapsed with multiplicity.
pub fn hypergraph_of(b: &Hypermap) -> Hypergraph {
    let vertex = b.sigma().cycle_index();
    let num_vertices = vertex.iter().copied().max().map_or(0, |m| m + 1);
    let mut h = Hypergraph::new(num_vertices);
    for cycle in b.tau().cycles() {
        let verts: Vec<usize> = cycle.iter().map(|&x| vertex[x]).collect();
        h.add_hyperedge(&verts).expect("cycle indices are in range");
    }
    h
}

/// `H(b_π†)`: one vertex per block of `π`, one hyperedge per vertex of `b`.
pub fn dual_hypergraph(b: &CombinatorialMap, pi: &EdgePartition) -> Result<Hypergraph> {
    Ok(hypergraph_of(&merge_edges(b, pi)?.dual()))
}

fn require_melonic_input(b: &CombinatorialMap) -> Result<()> {
    if b.p() < 3 {
        return Err(Error::Unsupported(
            "melonic partitions are not unique for p = 2".into(),
        ));
    }
    if !b.is_connected() {
        return Err(Error::ContractViolation("map is not connected".into()));
    }
    Ok(())
}

/// The unique partition `π` for which `H(b_π†)` is a double hypertree, if any.
///
/// Leaf peeling on the dual: a block is a leaf when it has exactly two
/// incidences, in two distinct live vertices of `b`. A vertex pair sharing
/// `p−1` leaves is a hyperedge with `p−1` leaf vertices; its two remaining
/// blocks must coincide, so they are merged and the pair is removed. The
/// candidate is then checked against the double-hypertree predicate.
pub fn is_melonic_dual(b: &CombinatorialMap) -> Result<Option<EdgePartition>> {
    require_melonic_input(b)?;
    let p = b.p();
    let m = b.num_edges();
    let vertex_edges = b.vertex_edges();
    let nv = vertex_edges.len();
    let mut uf = UnionFind::new(m);
    let mut alive = vec![true; nv];
    let mut remaining = nv;

    // incidences[block root] = live vertices holding it, with repetition
    let incidences = |uf: &mut UnionFind, alive: &[bool]| {
        let mut inc: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, edges) in vertex_edges.iter().enumerate() {
            if alive[v] {
                for &e in edges {
                    inc.entry(uf.find(e)).or_default().push(v);
                }
            }
        }
        inc
    };

    'peel: while remaining >= 2 {
        let inc = incidences(&mut uf, &alive);
        for u in (0..nv).filter(|&u| alive[u]) {
            // leaves of u grouped by their other vertex
            let mut shared: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &e in &vertex_edges[u] {
                let r = uf.find(e);
                let holders = &inc[&r];
                if holders.len() == 2 && holders[0] != holders[1] {
                    let w = if holders[0] == u {
                        holders[1]
                    } else {
                        holders[0]
                    };
                    shared.entry(w).or_default().push(r);
                }
            }
            for (w, leaves) in shared {
                if leaves.len() == p && remaining == 2 {
                    break 'peel;
                }
                if leaves.len() != p - 1 {
                    continue;
                }
                let other = |x: usize, uf: &mut UnionFind| {
                    vertex_edges[x]
                        .iter()
                        .map(|&e| uf.find(e))
                        .find(|r| !leaves.contains(r))
                };
                let (Some(a), Some(c)) = (other(u, &mut uf), other(w, &mut uf)) else {
                    continue;
                };
                uf.union(a, c);
                alive[u] = false;
                alive[w] = false;
                remaining -= 2;
                continue 'peel;
            }
        }
        return Ok(None);
    }
    if remaining != 0 && remaining != 2 {
        return Ok(None);
    }

    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in 0..m {
        blocks.entry(uf.find(e)).or_default().push(e);
    }
    let pi = EdgePartition::new(m, blocks.into_values().collect())?;
    if is_double_hypertree(&dual_hypergraph(b, &pi)?) {
        Ok(Some(pi))
    } else {
        Ok(None)
    }
}

/// Melon removal on the multigraph `G(b)`: a vertex pair joined by exactly
/// `p−1` parallel edges is deleted and its two outer edges spliced into one;
/// the graph is melonic when this ends at a single melon.
pub fn is_melonic_recursive(b: &CombinatorialMap) -> Result<bool> {
    require_melonic_input(b)?;
    let p = b.p();
    let n = b.num_vertices();
    // adj[u][v]: number of u–v edges; adj[u][u] counts loops
    let mut adj = vec![vec![0usize; n]; n];
    for (u, v) in b.graph_edges() {
        adj[u][v] += 1;
        if u != v {
            adj[v][u] += 1;
        }
    }
    let mut alive = vec![true; n];
    let mut remaining = n;
    'restart: loop {
        for u in 0..n {
            if !alive[u] {
                continue;
            }
            for w in u + 1..n {
                if !alive[w] {
                    continue;
                }
                let k = adj[u][w];
                if k == p && remaining == 2 {
                    return Ok(true);
                }
                if k != p - 1 {
                    continue;
                }
                let outer = |x: usize, y: usize, adj: &Vec<Vec<usize>>| {
                    (0..n).find(|&z| z != x && z != y && adj[x][z] > 0)
                };
                let (Some(x), Some(y)) = (outer(u, w, &adj), outer(w, u, &adj)) else {
                    continue;
                };
                adj[u][w] = 0;
                adj[w][u] = 0;
                adj[u][x] -= 1;
                adj[x][u] -= 1;
                adj[w][y] -= 1;
                adj[y][w] -= 1;
                adj[x][y] += 1;
                if x != y {
                    adj[y][x] += 1;
                }
                alive[u] = false;
                alive[w] = false;
                remaining -= 2;
                continue 'restart;
            }
        }
        return Ok(false);
    }
}

/// Exhaustive search over all edge partitions for those whose dual
/// hypergraph is a double hypertree.
pub fn melonic_partitions_brute_force(b: &CombinatorialMap) -> Result<Vec<EdgePartition>> {
    let mut out = Vec::new();
    for pi in crate::maps::enumerate_edge_partitions(b.num_edges()) {
        if is_double_hypertree(&dual_hypergraph(b, &pi)?) {
            out.push(pi);
        }
    }
    Ok(out)
}
