//! Injective traces, balanced invariants, exact expectations and the
//! resolvent series.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::dist::EntryDistribution;
use super::network::{trace_invariant, MAX_ASSIGNMENTS};
use super::sym::SymTensor;
use crate::counting::factorial;
use crate::error::{Error, Result};
use crate::hypergraph::dual_hypergraph;
use crate::maps::{
    enumerate_edge_partitions, enumerate_rooted_connected, CombinatorialMap, EdgePartition,
};
use crate::numerics::{falling_factorial, CompensatedSum};

/// Largest edge count for the sum over edge partitions.
pub const MAX_PARTITION_EDGES: usize = 8;

/// Largest vertex count for which maps are grouped up to multigraph
/// isomorphism; above it only identical labelled multigraphs are merged.
pub const MAX_GROUPING_VERTICES: usize = 6;

/// `Tr⁰_{b_π}(T)`: the trace of `b` with the edges of each block of `π`
/// sharing one index, and distinct blocks carrying distinct indices.
pub fn injective_trace(b: &CombinatorialMap, pi: &EdgePartition, t: &SymTensor) -> Result<f64> {
    if b.p() != t.order() {
        return Err(Error::ContractViolation(
            "map valence differs from tensor order".into(),
        ));
    }
    if pi.num_edges() != b.num_edges() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} edges, map has {}",
            pi.num_edges(),
            b.num_edges()
        )));
    }
    let n = t.dim();
    let k = pi.len();
    if falling_factorial(n, k) > MAX_ASSIGNMENTS as f64 {
        return Err(Error::Resource(format!(
            "injective sum over {k} blocks at N = {n} is too large"
        )));
    }
    let block = pi.block_of();
    let legs: Vec<Vec<usize>> = b
        .vertex_edges()
        .into_iter()
        .map(|l| l.into_iter().map(|e| block[e]).collect())
        .collect();

    struct Walk<'a> {
        legs: &'a [Vec<usize>],
        t: &'a SymTensor,
        values: Vec<usize>,
        used: Vec<bool>,
        idx: Vec<usize>,
        sum: CompensatedSum,
    }
    impl Walk<'_> {
        fn go(&mut self, depth: usize) {
            if depth == self.values.len() {
                let mut prod = 1.0;
                for l in self.legs {
                    for (slot, &blk) in self.idx.iter_mut().zip(l) {
                        *slot = self.values[blk];
                    }
                    prod *= self.t.get(&self.idx);
                }
                self.sum.add(prod);
                return;
            }
            for a in 0..self.used.len() {
                if !self.used[a] {
                    self.used[a] = true;
                    self.values[depth] = a;
                    self.go(depth + 1);
                    self.used[a] = false;
                }
            }
        }
    }
    let mut w = Walk {
        legs: &legs,
        t,
        values: vec![0; k],
        used: vec![false; n],
        idx: vec![0; t.order()],
        sum: CompensatedSum::new(),
    };
    w.go(0);
    Ok(w.sum.value())
}

/// Adjacency counts of `G(b)`, with loops on the diagonal.
fn adjacency(b: &CombinatorialMap) -> Vec<Vec<u32>> {
    let n = b.num_vertices();
    let mut adj = vec![vec![0u32; n]; n];
    for (u, v) in b.graph_edges() {
        adj[u][v] += 1;
        if u != v {
            adj[v][u] += 1;
        }
    }
    adj
}

/// Lexicographically smallest upper-triangular adjacency over all vertex
/// orderings: a complete isomorphism invariant of the multigraph.
fn canonical_multigraph(adj: &[Vec<u32>]) -> Vec<u32> {
    let n = adj.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let key = |perm: &[usize]| {
        let mut k = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                k.push(adj[perm[i]][perm[j]]);
            }
        }
        k
    };
    let mut best = key(&perm);
    while super::sym::next_permutation(&mut perm) {
        let k = key(&perm);
        if k < best {
            best = k;
        }
    }
    best
}

/// `I_n = Σ_{b ∈ 𝓑_n} Tr_b`, prepared once for repeated evaluation. Maps
/// with isomorphic underlying multigraphs share a trace and are evaluated
/// once.
#[derive(Clone, Debug)]
pub struct BalancedInvariant {
    p: usize,
    n: usize,
    groups: Vec<(CombinatorialMap, usize)>,
}

impl BalancedInvariant {
    pub fn new(p: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Ok(BalancedInvariant {
                p,
                n,
                groups: Vec::new(),
            });
        }
        let maps = enumerate_rooted_connected(p, n)?;
        // maps with the same labelled multigraph have the same trace
        let mut by_adjacency: BTreeMap<Vec<Vec<u32>>, (CombinatorialMap, usize)> = BTreeMap::new();
        for b in maps {
            by_adjacency.entry(adjacency(&b)).or_insert((b, 0)).1 += 1;
        }
        let groups = if n <= MAX_GROUPING_VERTICES {
            let mut by_graph: BTreeMap<Vec<u32>, (CombinatorialMap, usize)> = BTreeMap::new();
            for (adj, (b, count)) in by_adjacency {
                by_graph
                    .entry(canonical_multigraph(&adj))
                    .or_insert((b, 0))
                    .1 += count;
            }
            by_graph.into_values().collect()
        } else {
            by_adjacency.into_values().collect()
        };
        Ok(BalancedInvariant { p, n, groups })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `|𝓑_n|`.
    pub fn num_maps(&self) -> usize {
        self.groups.iter().map(|(_, c)| c).sum()
    }

    /// Representative maps with the number of rooted classes they stand for.
    pub fn groups(&self) -> &[(CombinatorialMap, usize)] {
        &self.groups
    }

    pub fn evaluate(&self, t: &SymTensor) -> Result<f64> {
        if t.order() != self.p {
            return Err(Error::ContractViolation(format!(
                "invariant of order {} applied to a tensor of order {}",
                self.p,
                t.order()
            )));
        }
        if self.n == 0 {
            return Ok(t.dim() as f64);
        }
        let mut sum = CompensatedSum::new();
        for (b, count) in &self.groups {
            sum.add(*count as f64 * trace_invariant(b, t)?);
        }
        Ok(sum.value())
    }
}

/// `I_n(T)`; `I_0 = N`.
pub fn balanced_invariant(n: usize, t: &SymTensor) -> Result<f64> {
    BalancedInvariant::new(t.order(), n)?.evaluate(t)
}

fn check_exact(b: &CombinatorialMap, dist: &EntryDistribution) -> Result<()> {
    if !dist.has_all_moments() {
        return Err(Error::Unsupported(format!(
            "{dist} has no finite moments of all orders"
        )));
    }
    if b.p() < 2 {
        return Err(Error::ContractViolation(
            "valence must be at least 2".into(),
        ));
    }
    Ok(())
}

/// `E[entry^m]` for an entry with occurrence counts `counts`.
fn entry_moment(p: usize, n: usize, counts: &[usize], m: usize, dist: &EntryDistribution) -> f64 {
    let var = dist.profile().variance_from_counts(p, counts) / (n as f64).powi(p as i32 - 1);
    let xi = dist.standardized_moment(m as u32).expect("checked moments");
    xi * var.powf(m as f64 / 2.0)
}

/// `E[Tr_b(W)]` by visiting every edge assignment and grouping equal
/// entries.
pub fn exact_expected_trace_oracle(
    b: &CombinatorialMap,
    n: usize,
    dist: &EntryDistribution,
) -> Result<f64> {
    check_exact(b, dist)?;
    let p = b.p();
    let m = b.num_edges();
    let count = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > MAX_ASSIGNMENTS {
        return Err(Error::Resource(format!(
            "{n}^{m} assignments exceed the limit of {MAX_ASSIGNMENTS}"
        )));
    }
    let legs = b.vertex_edges();
    let mut a = vec![0usize; m];
    let mut entries: Vec<Vec<usize>> = vec![vec![0; p]; legs.len()];
    let mut counts = Vec::with_capacity(p);
    let mut sum = CompensatedSum::new();
    loop {
        for (slot, l) in entries.iter_mut().zip(&legs) {
            for (x, &e) in slot.iter_mut().zip(l) {
                *x = a[e];
            }
            slot.sort_unstable();
        }
        entries.sort_unstable();
        let mut prod = 1.0;
        let mut i = 0;
        while i < entries.len() {
            let mut j = i;
            while j < entries.len() && entries[j] == entries[i] {
                j += 1;
            }
            let mult = j - i;
            if mult % 2 == 1 {
                prod = 0.0;
                break;
            }
            counts.clear();
            for (k, &x) in entries[i].iter().enumerate() {
                if k > 0 && entries[i][k - 1] == x {
                    *counts.last_mut().unwrap() += 1;
                } else {
                    counts.push(1);
                }
            }
            prod *= entry_moment(p, n, &counts, mult, dist);
            i = j;
        }
        if prod != 0.0 {
            sum.add(prod);
        }
        let mut k = 0;
        while k < m {
            a[k] += 1;
            if a[k] < n {
                break;
            }
            a[k] = 0;
            k += 1;
        }
        if k == m {
            break;
        }
    }
    Ok(sum.value())
}

/// `E[Tr⁰_{b_π}(W)]`: distinct blocks carry distinct indices, so each
/// hyperedge of `H(b_π†)` is an independent entry whose variance depends only
/// on its vertex multiplicities.
pub fn expected_injective_trace(
    b: &CombinatorialMap,
    pi: &EdgePartition,
    n: usize,
    dist: &EntryDistribution,
) -> Result<f64> {
    check_exact(b, dist)?;
    let p = b.p();
    let h = dual_hypergraph(b, pi)?;
    let mut value = falling_factorial(n, pi.len());
    for e in h.hyperedges() {
        if e.m % 2 == 1 {
            return Ok(0.0);
        }
        let counts: Vec<usize> = e.vertices.iter().map(|&(_, l)| l).collect();
        value *= entry_moment(p, n, &counts, e.m, dist);
    }
    Ok(value)
}

/// `E[Tr_b(W)] = Σ_π E[Tr⁰_{b_π}(W)]`.
pub fn expected_trace_partition(
    b: &CombinatorialMap,
    n: usize,
    dist: &EntryDistribution,
) -> Result<f64> {
    check_exact(b, dist)?;
    if b.num_edges() > MAX_PARTITION_EDGES {
        return Err(Error::Resource(format!(
            "{} edges exceed the partition limit of {MAX_PARTITION_EDGES}",
            b.num_edges()
        )));
    }
    let mut sum = CompensatedSum::new();
    for pi in enumerate_edge_partitions(b.num_edges()) {
        sum.add(expected_injective_trace(b, &pi, n, dist)?);
    }
    Ok(sum.value())
}

/// `(p−1)!^{−|V(b)|/2}`: the limit of `E[Tr_b]/N` for melonic `b`.
pub fn melonic_weight(p: usize, num_vertices: usize) -> f64 {
    let f = factorial(p as u64 - 1).expect("small order") as f64;
    f.powf(-(num_vertices as f64) / 2.0)
}

/// `Σ_{n=0}^{K} I_n/(N z^{n+1})` from precomputed invariants `I_0, …, I_K`.
pub fn resolvent_series_from(invariants: &[f64], dim: usize, z: Complex64) -> Complex64 {
    let mut zpow = z;
    let mut acc = Complex64::new(0.0, 0.0);
    for &i_n in invariants {
        acc += i_n / (dim as f64 * zpow);
        zpow *= z;
    }
    acc
}

/// Truncated resolvent series `Σ_{n=0}^{K} I_n(T)/(N z^{n+1})`.
pub fn resolvent_series(t: &SymTensor, z: Complex64, k: usize) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(Error::Domain("z must be nonzero".into()));
    }
    let invariants = (0..=k)
        .map(|n| balanced_invariant(n, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(resolvent_series_from(&invariants, t.dim(), z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sample_gote;

    fn map(p: usize, pairs: &[(usize, usize)]) -> CombinatorialMap {
        let mut tau = vec![0; pairs.len() * 2];
        for &(a, b) in pairs {
            tau[a] = b;
            tau[b] = a;
        }
        CombinatorialMap::from_matching(p, tau).unwrap()
    }

    #[test]
    fn degree_zero_is_dimension() {
        let t = sample_gote(3, 5, 0).unwrap();
        assert_eq!(balanced_invariant(0, &t).unwrap(), 5.0);
        let k0 = resolvent_series(&t, Complex64::new(2.0, 1.0), 0).unwrap();
        assert!((k0 - 1.0 / Complex64::new(2.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn degree_two_cubic_formula() {
        let n = 5;
        let t = sample_gote(3, n, 9).unwrap();
        let inv = BalancedInvariant::new(3, 2).unwrap();
        assert_eq!(inv.num_maps(), 5);
        assert_eq!(inv.groups().len(), 2);
        let mut dumbbell = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    dumbbell += t.get(&[a, a, b]) * t.get(&[b, c, c]);
                }
            }
        }
        let expected = 3.0 * dumbbell + 2.0 * t.frobenius_norm_sq();
        assert!((inv.evaluate(&t).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn melon_expectation_by_hand() {
        // N = 2, p = 3: sorted indices 000, 001, 011, 111 with σ² = 3, 1, 1, 3,
        // appearing 1, 3, 3, 1 times among ordered tuples
        let melon = map(3, &[(0, 3), (1, 4), (2, 5)]);
        let hand = (3.0 + 3.0 + 3.0 + 3.0) / 4.0;
        let d = EntryDistribution::GaussianGote;
        assert!((exact_expected_trace_oracle(&melon, 2, &d).unwrap() - hand).abs() < 1e-14);
        assert!((expected_trace_partition(&melon, 2, &d).unwrap() - hand).abs() < 1e-14);
    }

    #[test]
    fn only_even_multiplicities_contribute() {
        let b = map(3, &[(0, 2), (1, 3), (4, 5)]);
        let d = EntryDistribution::GaussianGote;
        for pi in enumerate_edge_partitions(3) {
            let h = dual_hypergraph(&b, &pi).unwrap();
            let v = expected_injective_trace(&b, &pi, 6, &d).unwrap();
            if h.hyperedges().iter().any(|e| e.m < 2) {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn heavy_tails_are_refused() {
        let b = map(3, &[(0, 3), (1, 4), (2, 5)]);
        let d = EntryDistribution::SymmetrizedPareto { alpha: 3.5 };
        assert!(matches!(
            expected_trace_partition(&b, 4, &d),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            exact_expected_trace_oracle(&b, 4, &d),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn guards() {
        let big = enumerate_rooted_connected(3, 6).unwrap().remove(0);
        assert!(matches!(
            expected_trace_partition(&big, 4, &EntryDistribution::GaussianGote),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            exact_expected_trace_oracle(&big, 30, &EntryDistribution::GaussianGote),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn injective_single_block() {
        let t = sample_gote(3, 4, 2).unwrap();
        let b = map(3, &[(0, 2), (1, 3), (4, 5)]);
        let v = injective_trace(&b, &EdgePartition::single_block(3), &t).unwrap();
        let direct: f64 = (0..4).map(|a| t.get(&[a, a, a]).powi(2)).sum();
        assert!((v - direct).abs() < 1e-14);
    }
}
