//! Combinatorial maps and hypermaps.
//!
//! A map is a pair of permutations `(σ, τ)` on a set of halfedges
//! `{0, …, |Q|-1}`. The cycles of `σ` are vertices, the cycles of `τ` are
//! edges (2-cycles for a map, arbitrary cycles for a hypermap). A `p`-regular
//! map has every `σ`-cycle of length `p`.

mod enumerate;
mod partition;
mod permutation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use enumerate::{enumerate_by_matchings, enumerate_rooted_connected, MAX_MATCHING_HALFEDGES};
pub use partition::{enumerate_edge_partitions, EdgePartition, SetPartitions};
pub use permutation::Permutation;

/// A pair `(σ, τ)` of permutations on the same ground set, with an optional root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypermap {
    sigma: Permutation,
    tau: Permutation,
    root: Option<usize>,
}

impl Hypermap {
    pub fn new(sigma: Permutation, tau: Permutation, root: Option<usize>) -> Result<Self> {
        if sigma.len() != tau.len() {
            return Err(Error::InvalidMap(format!(
                "sigma acts on {} points, tau on {}",
                sigma.len(),
                tau.len()
            )));
        }
        if let Some(r) = root {
            if r >= sigma.len() {
                return Err(Error::InvalidMap(format!("root {r} is not a halfedge")));
            }
        }
        Ok(Hypermap { sigma, tau, root })
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn tau(&self) -> &Permutation {
        &self.tau
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn num_halfedges(&self) -> usize {
        self.sigma.len()
    }

    /// `b† = (τ, σ)`: vertices become hyperedges and vice versa.
    pub fn dual(&self) -> Hypermap {
        Hypermap {
            sigma: self.tau.clone(),
            tau: self.sigma.clone(),
            root: self.root,
        }
    }

    /// Whether `⟨σ, τ⟩` acts transitively on the halfedges.
    pub fn is_connected(&self) -> bool {
        let n = self.num_halfedges();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(h) = stack.pop() {
            for next in [self.sigma.apply(h), self.tau.apply(h)] {
                if !seen[next] {
                    seen[next] = true;
                    count += 1;
                    stack.push(next);
                }
            }
        }
        count == n
    }
}

/// A rooted-or-not `p`-regular combinatorial map: `τ` is a fixed-point-free
/// involution and every cycle of `σ` has length `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MapRecord", into = "MapRecord")]
pub struct CombinatorialMap {
    p: usize,
    sigma: Permutation,
    tau: Permutation,
    root: Option<usize>,
}

impl CombinatorialMap {
    pub fn new(
        p: usize,
        sigma: Permutation,
        tau: Permutation,
        root: Option<usize>,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidMap("valence must be positive".into()));
        }
        let hm = Hypermap::new(sigma, tau, root)?;
        if let Some(c) = hm.sigma.cycles().iter().find(|c| c.len() != p) {
            return Err(Error::InvalidMap(format!(
                "vertex {c:?} has valence {} instead of {p}",
                c.len()
            )));
        }
        if !hm.tau.is_involution() || hm.tau.has_fixed_point() {
            return Err(Error::InvalidMap(
                "tau must be a fixed-point-free involution".into(),
            ));
        }
        Ok(CombinatorialMap {
            p,
            sigma: hm.sigma,
            tau: hm.tau,
            root: hm.root,
        })
    }

    /// `σ = (0 … p-1)(p … 2p-1)…` on `n` vertices.
    pub fn standard_sigma(p: usize, n: usize) -> Permutation {
        let image = (0..n * p)
            .map(|h| {
                let v = h / p;
                v * p + (h % p + 1) % p
            })
            .collect();
        Permutation::new(image).expect("standard rotation is a permutation")
    }

    /// A map with the standard `σ`, root `0`, and the given matching.
    pub fn from_matching(p: usize, tau: Vec<usize>) -> Result<Self> {
        if p == 0 || !tau.len().is_multiple_of(p) {
            return Err(Error::InvalidMap(format!(
                "{} halfedges cannot form {p}-valent vertices",
                tau.len()
            )));
        }
        let n = tau.len() / p;
        let root = if tau.is_empty() { None } else { Some(0) };
        CombinatorialMap::new(p, Self::standard_sigma(p, n), Permutation::new(tau)?, root)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn tau(&self) -> &Permutation {
        &self.tau
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn with_root(&self, root: Option<usize>) -> Result<Self> {
        CombinatorialMap::new(self.p, self.sigma.clone(), self.tau.clone(), root)
    }

    pub fn num_halfedges(&self) -> usize {
        self.sigma.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_halfedges() / self.p
    }

    pub fn num_edges(&self) -> usize {
        self.num_halfedges() / 2
    }

    /// Vertices as `σ`-cycles, each listed from its smallest halfedge.
    pub fn vertices(&self) -> Vec<Vec<usize>> {
        self.sigma.cycles()
    }

    /// Edges as `(h, τ(h))` with `h < τ(h)`, ordered by `h`. The position in
    /// this list is the edge index used by [`EdgePartition`].
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_halfedges())
            .filter_map(|h| {
                let t = self.tau.apply(h);
                (h < t).then_some((h, t))
            })
            .collect()
    }

    /// Edge index of every halfedge.
    pub fn edge_of_halfedge(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_halfedges()];
        for (e, (a, b)) in self.edges().into_iter().enumerate() {
            out[a] = e;
            out[b] = e;
        }
        out
    }

    /// Vertex index (position in [`CombinatorialMap::vertices`]) of every halfedge.
    pub fn vertex_of_halfedge(&self) -> Vec<usize> {
        self.sigma.cycle_index()
    }

    /// The edges incident to each vertex, in rotation order: `δ(v)`.
    pub fn vertex_edges(&self) -> Vec<Vec<usize>> {
        let eoh = self.edge_of_halfedge();
        self.vertices()
            .iter()
            .map(|cycle| cycle.iter().map(|&h| eoh[h]).collect())
            .collect()
    }

    /// The underlying multigraph `G(b)` as a list of `(u, v)` vertex pairs,
    /// one per edge in edge-index order.
    pub fn graph_edges(&self) -> Vec<(usize, usize)> {
        let voh = self.vertex_of_halfedge();
        self.edges()
            .into_iter()
            .map(|(a, b)| (voh[a], voh[b]))
            .collect()
    }

    pub fn as_hypermap(&self) -> Hypermap {
        Hypermap {
            sigma: self.sigma.clone(),
            tau: self.tau.clone(),
            root: self.root,
        }
    }

    pub fn dual(&self) -> Hypermap {
        self.as_hypermap().dual()
    }

    pub fn is_connected(&self) -> bool {
        self.as_hypermap().is_connected()
    }

    /// The map with halfedges renamed by `θ`; the root follows.
    pub fn relabel(&self, theta: &Permutation) -> Result<Self> {
        if theta.len() != self.num_halfedges() {
            return Err(Error::ContractViolation(
                "relabelling must act on the halfedge set".into(),
            ));
        }
        Ok(CombinatorialMap {
            p: self.p,
            sigma: self.sigma.conjugate_by(theta),
            tau: self.tau.conjugate_by(theta),
            root: self.root.map(|r| theta.apply(r)),
        })
    }

    /// Disjoint union; halfedges of `other` are shifted past those of `self`.
    /// The root of `self` is kept.
    pub fn disjoint_union(&self, other: &CombinatorialMap) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::ContractViolation("valences differ".into()));
        }
        let shift = self.num_halfedges();
        let mut sigma = self.sigma.image().to_vec();
        sigma.extend(other.sigma.image().iter().map(|x| x + shift));
        let mut tau = self.tau.image().to_vec();
        tau.extend(other.tau.image().iter().map(|x| x + shift));
        CombinatorialMap::new(
            self.p,
            Permutation::new(sigma)?,
            Permutation::new(tau)?,
            self.root,
        )
    }

    /// Halfedges in first-visit order of the canonical traversal from the
    /// root: a newly reached vertex has all of its halfedges labelled at once
    /// by walking `σ`; the queue is scanned in label order, crossing `τ` to
    /// reach new vertices.
    fn canonical_order(&self) -> Result<Vec<usize>> {
        let root = self.root.ok_or_else(|| {
            Error::ContractViolation("canonical code requires a rooted map".into())
        })?;
        let q = self.num_halfedges();
        let mut labelled = vec![false; q];
        let mut order = Vec::with_capacity(q);
        let enter = |h: usize, order: &mut Vec<usize>, labelled: &mut Vec<bool>| {
            let mut x = h;
            loop {
                labelled[x] = true;
                order.push(x);
                x = self.sigma.apply(x);
                if x == h {
                    break;
                }
            }
        };
        enter(root, &mut order, &mut labelled);
        let mut i = 0;
        while i < order.len() {
            let t = self.tau.apply(order[i]);
            if !labelled[t] {
                enter(t, &mut order, &mut labelled);
            }
            i += 1;
        }
        if order.len() != q {
            return Err(Error::ContractViolation(
                "canonical code requires a connected map".into(),
            ));
        }
        Ok(order)
    }

    /// Code identifying the rooted map up to root-preserving relabelling.
    pub fn canonical_code(&self) -> Result<CanonicalCode> {
        let form = self.canonical_form()?;
        let mut code = Vec::with_capacity(form.num_halfedges() + 2);
        code.push(self.p);
        code.push(self.num_vertices());
        code.extend_from_slice(form.tau.image());
        Ok(CanonicalCode(code))
    }

    /// The representative of the rooted class: root `0`, standard `σ`, and
    /// `τ` written in canonical-traversal labels.
    pub fn canonical_form(&self) -> Result<Self> {
        let order = self.canonical_order()?;
        let mut label = vec![0; order.len()];
        for (l, &h) in order.iter().enumerate() {
            label[h] = l;
        }
        let theta = Permutation::new(label).expect("traversal labels are a bijection");
        self.relabel(&theta)
    }
}

/// Integer sequence `[p, n, τ(0), …, τ(np-1)]` of the canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalCode(pub Vec<usize>);

impl CanonicalCode {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Rebuilds the canonical representative from a code.
    pub fn to_map(&self) -> Result<CombinatorialMap> {
        if self.0.len() < 2 {
            return Err(Error::InvalidMap("code too short".into()));
        }
        let (p, n) = (self.0[0], self.0[1]);
        let tau = self.0[2..].to_vec();
        if tau.len() != p * n {
            return Err(Error::InvalidMap("code length disagrees with p·n".into()));
        }
        CombinatorialMap::from_matching(p, tau)
    }
}

/// On-disk form of a map: `{p, n, sigma, tau, root}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapRecord {
    pub p: usize,
    pub n: usize,
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
    pub root: Option<usize>,
}

impl From<CombinatorialMap> for MapRecord {
    fn from(b: CombinatorialMap) -> Self {
        MapRecord {
            p: b.p,
            n: b.num_vertices(),
            sigma: b.sigma.image().to_vec(),
            tau: b.tau.image().to_vec(),
            root: b.root,
        }
    }
}

impl TryFrom<MapRecord> for CombinatorialMap {
    type Error = Error;

    fn try_from(r: MapRecord) -> Result<Self> {
        if r.sigma.len() != r.p * r.n {
            return Err(Error::InvalidMap(format!(
                "{} halfedges for n = {} vertices of valence {}",
                r.sigma.len(),
                r.n,
                r.p
            )));
        }
        CombinatorialMap::new(
            r.p,
            Permutation::new(r.sigma)?,
            Permutation::new(r.tau)?,
            r.root,
        )
    }
}

/// `b_π`: the hypermap where the edges of each block of `π` are merged into
/// one hyperedge. The hyperedge cycle concatenates the member edges'
/// 2-cycles in increasing order of their smallest halfedge; `σ` is unchanged.
pub fn merge_edges(b: &CombinatorialMap, pi: &EdgePartition) -> Result<Hypermap> {
    if pi.num_edges() != b.num_edges() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} edges, map has {}",
            pi.num_edges(),
            b.num_edges()
        )));
    }
    let edges = b.edges();
    let cycles: Vec<Vec<usize>> = pi
        .blocks()
        .iter()
        .map(|block| {
            block
                .iter()
                .flat_map(|&e| [edges[e].0, edges[e].1])
                .collect()
        })
        .collect();
    let tau = Permutation::from_cycles(b.num_halfedges(), &cycles)?;
    Hypermap::new(b.sigma.clone(), tau, b.root)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_vertex_map(tau: &[(usize, usize)]) -> CombinatorialMap {
        let mut image = vec![0; 6];
        for &(a, b) in tau {
            image[a] = b;
            image[b] = a;
        }
        CombinatorialMap::from_matching(3, image).unwrap()
    }

    #[test]
    fn dual_is_involution() {
        let b = two_vertex_map(&[(0, 2), (1, 3), (4, 5)]).as_hypermap();
        assert_eq!(b.dual().dual(), b);
    }

    #[test]
    fn dual_of_regular_map_is_uniform_two_regular() {
        let b = two_vertex_map(&[(0, 3), (1, 4), (2, 5)]);
        let d = b.dual();
        assert!(d.sigma().cycles().iter().all(|c| c.len() == 2));
        assert!(d.tau().cycles().iter().all(|c| c.len() == 3));
    }

    #[test]
    fn merge_with_singletons_is_identity() {
        let b = two_vertex_map(&[(0, 2), (1, 3), (4, 5)]);
        let m = merge_edges(&b, &EdgePartition::singletons(3)).unwrap();
        assert_eq!(m, b.as_hypermap());
    }

    #[test]
    fn merge_with_single_block_gives_one_long_cycle() {
        let b = two_vertex_map(&[(0, 2), (1, 3), (4, 5)]);
        let m = merge_edges(&b, &EdgePartition::single_block(3)).unwrap();
        assert_eq!(m.tau().cycles(), vec![vec![0, 2, 1, 3, 4, 5]]);
    }

    #[test]
    fn merge_parallel_edges_of_first_map() {
        // τ₁ = (0 2)(1 3)(4 5): edges 0 = (0,2), 1 = (1,3), 2 = (4,5).
        // Edge 1 joins the two vertices; merging it with the loop at the
        // second vertex gives a 2-block partition.
        let b = two_vertex_map(&[(0, 2), (1, 3), (4, 5)]);
        let pi = EdgePartition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        let m = merge_edges(&b, &pi).unwrap();
        assert_eq!(m.tau().cycles(), vec![vec![0, 2], vec![1, 3, 4, 5]]);
        assert!(merge_edges(&b, &EdgePartition::singletons(4)).is_err());
    }

    #[test]
    fn connectivity() {
        let melon = two_vertex_map(&[(0, 3), (1, 4), (2, 5)]);
        assert!(melon.is_connected());
        assert!(!melon.disjoint_union(&melon).unwrap().is_connected());
        let one_vertex = CombinatorialMap::from_matching(4, vec![2, 3, 0, 1]).unwrap();
        assert!(one_vertex.is_connected());
    }

    #[test]
    fn canonical_code_contract() {
        let melon = two_vertex_map(&[(0, 3), (1, 4), (2, 5)]);
        let unrooted = melon.with_root(None).unwrap();
        assert!(matches!(
            unrooted.canonical_code(),
            Err(Error::ContractViolation(_))
        ));
        let two = melon.disjoint_union(&melon).unwrap();
        assert!(matches!(
            two.canonical_code(),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn two_vertex_codes_are_distinct() {
        let maps = [
            two_vertex_map(&[(0, 2), (1, 3), (4, 5)]),
            two_vertex_map(&[(0, 3), (1, 2), (4, 5)]),
            two_vertex_map(&[(0, 1), (2, 3), (4, 5)]),
            two_vertex_map(&[(0, 3), (1, 4), (2, 5)]),
            two_vertex_map(&[(0, 3), (1, 5), (2, 4)]),
        ];
        let codes: std::collections::BTreeSet<_> =
            maps.iter().map(|b| b.canonical_code().unwrap()).collect();
        assert_eq!(codes.len(), 5);
    }

    #[test]
    fn code_roundtrip_and_json() {
        let b = two_vertex_map(&[(0, 3), (1, 5), (2, 4)]);
        let code = b.canonical_code().unwrap();
        assert_eq!(code.to_map().unwrap().canonical_code().unwrap(), code);
        let json = serde_json::to_string(&b).unwrap();
        assert!(json.contains("\"sigma\""));
        let back: CombinatorialMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
        let bad = r#"{"p":3,"n":2,"sigma":[1,2,0,4,5,3],"tau":[0,1,2,3,4,5],"root":0}"#;
        assert!(serde_json::from_str::<CombinatorialMap>(bad).is_err());
    }

    #[test]
    fn vertex_edges_follow_rotation() {
        let b = two_vertex_map(&[(0, 2), (1, 3), (4, 5)]);
        assert_eq!(b.vertex_edges(), vec![vec![0, 1, 0], vec![1, 2, 2]]);
        assert_eq!(b.graph_edges(), vec![(0, 0), (0, 1), (1, 1)]);
    }
}
