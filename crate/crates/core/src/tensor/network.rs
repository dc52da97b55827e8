//! Trace invariants by tensor-network contraction.

use ndarray::{ArrayD, Axis, Ix2, IxDyn};

use super::sym::SymTensor;
use crate::error::{Error, Result};
use crate::maps::CombinatorialMap;
use crate::numerics::CompensatedSum;

/// Largest intermediate tensor (in entries) the greedy contraction may build.
pub const MAX_INTERMEDIATE: usize = 1 << 28;

/// Largest number of assignments the exhaustive loops will visit.
pub const MAX_ASSIGNMENTS: u128 = 100_000_000;

/// A dense factor whose axes are labelled by edge indices.
#[derive(Clone, Debug)]
struct Factor {
    labels: Vec<usize>,
    data: ArrayD<f64>,
}

impl Factor {
    /// Sums the diagonal of every label that occurs twice.
    fn trace_repeated(mut self) -> Factor {
        loop {
            let mut dup = None;
            'find: for i in 0..self.labels.len() {
                for j in i + 1..self.labels.len() {
                    if self.labels[i] == self.labels[j] {
                        dup = Some((i, j));
                        break 'find;
                    }
                }
            }
            let Some((i, j)) = dup else {
                return self;
            };
            let n = self.data.shape()[i];
            let mut shape = self.data.shape().to_vec();
            shape.remove(j);
            shape.remove(i);
            let mut acc = ArrayD::<f64>::zeros(IxDyn(&shape));
            for a in 0..n {
                let diag = self.data.index_axis(Axis(j), a);
                acc += &diag.index_axis(Axis(i), a);
            }
            self.labels.remove(j);
            self.labels.remove(i);
            self.data = acc;
        }
    }
}

fn size_of(n: usize, rank: usize) -> usize {
    n.checked_pow(rank as u32).unwrap_or(usize::MAX)
}

/// Contracts two factors over all their shared labels with one matrix product.
fn contract_pair(a: Factor, b: Factor, n: usize) -> Factor {
    let shared: Vec<usize> = a
        .labels
        .iter()
        .copied()
        .filter(|l| b.labels.contains(l))
        .collect();
    let a_free: Vec<usize> = a
        .labels
        .iter()
        .copied()
        .filter(|l| !shared.contains(l))
        .collect();
    let b_free: Vec<usize> = b
        .labels
        .iter()
        .copied()
        .filter(|l| !shared.contains(l))
        .collect();
    let pos = |labels: &[usize], l: usize| labels.iter().position(|&x| x == l).unwrap();

    let a_axes: Vec<usize> = a_free
        .iter()
        .chain(&shared)
        .map(|&l| pos(&a.labels, l))
        .collect();
    let b_axes: Vec<usize> = shared
        .iter()
        .chain(&b_free)
        .map(|&l| pos(&b.labels, l))
        .collect();
    let (rows, inner, cols) = (
        size_of(n, a_free.len()),
        size_of(n, shared.len()),
        size_of(n, b_free.len()),
    );
    let am = a
        .data
        .permuted_axes(a_axes)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((rows, inner))
        .expect("standard layout");
    let bm = b
        .data
        .permuted_axes(b_axes)
        .as_standard_layout()
        .into_owned()
        .into_shape_with_order((inner, cols))
        .expect("standard layout");
    let c = am.dot(&bm);
    let mut labels = a_free;
    labels.extend(b_free);
    let data = c
        .into_shape_with_order(IxDyn(&vec![n; labels.len()]))
        .expect("standard layout");
    Factor { labels, data }
}

/// `Σ_{a : E → [N]} ∏_v T_{a(δ(v))}` where each vertex's legs are given by
/// `legs[v]` (edge labels, a label repeated within a vertex is a loop).
///
/// Pairs are eliminated greedily by smallest result; factors sharing no label
/// are multiplied as an outer product at the end.
pub fn contract_network(legs: &[Vec<usize>], t: &SymTensor) -> Result<f64> {
    let n = t.dim();
    if legs.iter().any(|l| l.len() != t.order()) {
        return Err(Error::ContractViolation(format!(
            "network vertex valence differs from tensor order {}",
            t.order()
        )));
    }
    if legs.is_empty() {
        return Ok(1.0);
    }
    let dense = t.to_dense();
    let mut factors: Vec<Factor> = legs
        .iter()
        .map(|l| {
            Factor {
                labels: l.clone(),
                data: dense.clone(),
            }
            .trace_repeated()
        })
        .collect();

    while factors.len() > 1 {
        let mut best: Option<(usize, usize, usize, bool)> = None;
        for i in 0..factors.len() {
            for j in i + 1..factors.len() {
                let (a, b) = (&factors[i].labels, &factors[j].labels);
                let shared = a.iter().filter(|l| b.contains(l)).count();
                let out = size_of(n, a.len() + b.len() - 2 * shared);
                let key = (out, i, j, shared > 0);
                best = match best {
                    None => Some(key),
                    Some(cur) => {
                        // prefer pairs that actually share an index
                        let better = (key.3 && !cur.3) || (key.3 == cur.3 && key.0 < cur.0);
                        Some(if better { key } else { cur })
                    }
                };
            }
        }
        let (out, i, j, _) = best.expect("at least two factors");
        if out > MAX_INTERMEDIATE {
            return Err(Error::Resource(format!(
                "contraction needs an intermediate of {out} entries"
            )));
        }
        let b = factors.remove(j);
        let a = factors.remove(i);
        factors.push(contract_pair(a, b, n));
    }
    let last = factors.pop().expect("one factor left");
    debug_assert!(last.labels.is_empty());
    Ok(last
        .data
        .into_dimensionality::<ndarray::Ix0>()
        .expect("scalar")
        .into_scalar())
}

/// `Tr_b(T)`.
pub fn trace_invariant(b: &CombinatorialMap, t: &SymTensor) -> Result<f64> {
    if b.p() != t.order() {
        return Err(Error::ContractViolation(format!(
            "map valence {} differs from tensor order {}",
            b.p(),
            t.order()
        )));
    }
    contract_network(&b.vertex_edges(), t)
}

fn assignments_guard(n: usize, k: usize) -> Result<()> {
    let count = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count > MAX_ASSIGNMENTS {
        return Err(Error::Resource(format!(
            "{n}^{k} assignments exceed the limit of {MAX_ASSIGNMENTS}"
        )));
    }
    Ok(())
}

/// `Tr_b(T)` by visiting every edge assignment.
pub fn trace_invariant_naive(b: &CombinatorialMap, t: &SymTensor) -> Result<f64> {
    if b.p() != t.order() {
        return Err(Error::ContractViolation(
            "map valence differs from tensor order".into(),
        ));
    }
    let n = t.dim();
    let m = b.num_edges();
    assignments_guard(n, m)?;
    let legs = b.vertex_edges();
    let mut a = vec![0usize; m];
    let mut idx = vec![0usize; b.p()];
    let mut sum = CompensatedSum::new();
    loop {
        let mut prod = 1.0;
        for l in &legs {
            for (k, &e) in l.iter().enumerate() {
                idx[k] = a[e];
            }
            prod *= t.get(&idx);
        }
        sum.add(prod);
        // odometer
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

/// Contracts a matrix network into a 2-axis result; used by tests of the
/// matrix case.
pub fn as_matrix(t: &SymTensor) -> Result<ndarray::Array2<f64>> {
    if t.order() != 2 {
        return Err(Error::ContractViolation("not a matrix".into()));
    }
    Ok(t.to_dense()
        .into_dimensionality::<Ix2>()
        .expect("order two"))
}
