use std::io::{Read, Write};

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order supported by the stack buffers used for index sorting.
pub const MAX_ORDER: usize = 16;

/// `C(n, k)` as `usize`, for table building.
fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of sorted multi-indices `i₁ ≤ … ≤ i_p` over `{0, …, N−1}`.
pub fn sym_len(p: usize, n: usize) -> usize {
    if n == 0 {
        return usize::from(p == 0);
    }
    binom(n + p - 1, p)
}

/// Real symmetric tensor of order `p` and dimension `N`, one value per
/// sorted multi-index, stored in colex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymTensorRecord", into = "SymTensorRecord")]
pub struct SymTensor {
    p: usize,
    n: usize,
    data: Vec<f64>,
    // rank_table[k][i] = C(i + k, k + 1): contribution of index i at sorted position k
    rank_table: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct SymTensorRecord {
    p: usize,
    n: usize,
    entries: Vec<f64>,
}

impl From<SymTensor> for SymTensorRecord {
    fn from(t: SymTensor) -> Self {
        SymTensorRecord {
            p: t.p,
            n: t.n,
            entries: t.data,
        }
    }
}

impl TryFrom<SymTensorRecord> for SymTensor {
    type Error = Error;

    fn try_from(r: SymTensorRecord) -> Result<Self> {
        SymTensor::from_vec(r.p, r.n, r.entries)
    }
}

impl SymTensor {
    pub fn zeros(p: usize, n: usize) -> Self {
        assert!(p <= MAX_ORDER, "order {p} exceeds {MAX_ORDER}");
        let rank_table = (0..p)
            .map(|k| (0..n).map(|i| binom(i + k, k + 1)).collect())
            .collect();
        SymTensor {
            p,
            n,
            data: vec![0.0; sym_len(p, n)],
            rank_table,
        }
    }

    /// Wraps entries given in colex order of sorted multi-indices.
    pub fn from_vec(p: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if p > MAX_ORDER {
            return Err(Error::Unsupported(format!("order {p} exceeds {MAX_ORDER}")));
        }
        let mut t = SymTensor::zeros(p, n);
        if data.len() != t.data.len() {
            return Err(Error::ContractViolation(format!(
                "expected {} entries, got {}",
                t.data.len(),
                data.len()
            )));
        }
        t.data = data;
        Ok(t)
    }

    /// Fills every sorted multi-index with `f(index)`, in colex order.
    pub fn from_fn(p: usize, n: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = SymTensor::zeros(p, n);
        let mut idx = vec![0usize; p];
        for slot in t.data.iter_mut() {
            *slot = f(&idx);
            next_sorted_index(&mut idx, n);
        }
        t
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entries in colex order of sorted multi-indices.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Position of a sorted multi-index in [`SymTensor::as_slice`].
    #[inline]
    pub fn rank_sorted(&self, sorted: &[usize]) -> usize {
        sorted
            .iter()
            .enumerate()
            .map(|(k, &i)| self.rank_table[k][i])
            .sum()
    }

    fn sorted_copy(&self, index: &[usize]) -> [usize; MAX_ORDER] {
        assert_eq!(
            index.len(),
            self.p,
            "index length differs from tensor order"
        );
        let mut buf = [0usize; MAX_ORDER];
        buf[..self.p].copy_from_slice(index);
        buf[..self.p].sort_unstable();
        buf
    }

    /// Entry at any ordering of a multi-index.
    #[inline]
    pub fn get(&self, index: &[usize]) -> f64 {
        let buf = self.sorted_copy(index);
        self.data[self.rank_sorted(&buf[..self.p])]
    }

    /// Sets the entry of the multi-index and, implicitly, all its permutations.
    pub fn set(&mut self, index: &[usize], value: f64) {
        let buf = self.sorted_copy(index);
        let r = self.rank_sorted(&buf[..self.p]);
        self.data[r] = value;
    }

    /// Sorted multi-indices in storage order.
    pub fn indices(&self) -> SortedIndices {
        SortedIndices {
            n: self.n,
            next: Some(vec![0; self.p]),
            left: self.data.len(),
        }
    }

    /// The full `N^p` array.
    pub fn to_dense(&self) -> ArrayD<f64> {
        let mut out = ArrayD::zeros(IxDyn(&vec![self.n; self.p]));
        for (idx, &v) in self.indices().zip(&self.data) {
            let mut perm = idx.clone();
            loop {
                out[perm.as_slice()] = v;
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        out
    }

    /// Reads the sorted entries of a dense array; the array is assumed symmetric.
    pub fn from_dense(a: &ArrayD<f64>) -> Result<Self> {
        let p = a.ndim();
        let n = a.shape().first().copied().unwrap_or(1);
        if a.shape().iter().any(|&s| s != n) {
            return Err(Error::ContractViolation("array is not hypercubic".into()));
        }
        Ok(SymTensor::from_fn(p, n, |idx| a[idx]))
    }

    /// `Σ_{i₁…i_p} T²`, all orderings counted.
    pub fn frobenius_norm_sq(&self) -> f64 {
        self.indices()
            .zip(&self.data)
            .map(|(idx, &v)| distinct_permutations(&idx) as f64 * v * v)
            .sum()
    }

    /// `U • T`: every leg multiplied by the `N × N` matrix `U`.
    pub fn transform(&self, u: &DMatrix<f64>) -> Result<Self> {
        if u.nrows() != self.n || u.ncols() != self.n {
            return Err(Error::ContractViolation(
                "transform matrix has wrong shape".into(),
            ));
        }
        let n = self.n;
        let um = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
        let mut dense = self.to_dense();
        for _ in 0..self.p {
            // act on axis 0, then rotate it to the back
            let rest = dense.len() / n.max(1);
            let m = dense
                .as_standard_layout()
                .into_owned()
                .into_shape_with_order((n, rest))
                .expect("contiguous reshape");
            let prod = um.dot(&m);
            let shaped = prod
                .into_shape_with_order(IxDyn(&vec![n; self.p]))
                .expect("contiguous reshape");
            let mut axes: Vec<usize> = (1..self.p).collect();
            axes.push(0);
            dense = shaped.permuted_axes(axes).as_standard_layout().into_owned();
        }
        SymTensor::from_dense(&dense)
    }

    /// Little-endian binary: `p` and `N` as `u64`, then the entries as `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.p as u64).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let p = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        if p > MAX_ORDER {
            return Err(Error::Unsupported(format!("order {p} exceeds {MAX_ORDER}")));
        }
        let len = sym_len(p, n);
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut word)?;
            data.push(f64::from_le_bytes(word));
        }
        SymTensor::from_vec(p, n, data)
    }
}

/// Advances a sorted multi-index to its colex successor.
fn next_sorted_index(idx: &mut [usize], n: usize) -> bool {
    let p = idx.len();
    for k in 0..p {
        let cap = if k + 1 < p {
            idx[k + 1]
        } else {
            n.saturating_sub(1)
        };
        if idx[k] < cap {
            idx[k] += 1;
            for j in idx.iter_mut().take(k) {
                *j = 0;
            }
            return true;
        }
    }
    false
}

/// Lexicographic successor, visiting each distinct arrangement once.
pub(crate) fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

/// `p! / ∏_a c_a!`: number of distinct orderings of a multi-index.
pub fn distinct_permutations(idx: &[usize]) -> u64 {
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    let mut count = 1u64;
    let mut run = 0u64;
    for (k, w) in sorted.iter().enumerate() {
        run = if k > 0 && sorted[k - 1] == *w {
            run + 1
        } else {
            1
        };
        count = count * (k as u64 + 1) / run;
    }
    count
}

/// Iterator over sorted multi-indices in colex order.
pub struct SortedIndices {
    n: usize,
    next: Option<Vec<usize>>,
    left: usize,
}

impl Iterator for SortedIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.left == 0 {
            return None;
        }
        self.left -= 1;
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        if next_sorted_index(&mut succ, self.n) {
            self.next = Some(succ);
        }
        Some(cur)
    }
}

/// Contracts the first `k = vectors.len()` legs of `t` against the vectors.
/// The result stays symmetric in the remaining legs.
pub fn contract(t: &SymTensor, vectors: &[Vec<f64>]) -> Result<SymTensor> {
    let (p, n) = (t.order(), t.dim());
    if vectors.len() > p {
        return Err(Error::ContractViolation(format!(
            "{} vectors for an order-{p} tensor",
            vectors.len()
        )));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::ContractViolation(format!(
            "vector of length {} against dimension {n}",
            v.len()
        )));
    }
    let mut dense = t.to_dense();
    for u in vectors {
        let order = dense.ndim();
        let rest = dense.len() / n.max(1);
        let m = dense
            .into_shape_with_order((n, rest))
            .expect("standard layout reshape");
        let uv = ndarray::ArrayView1::from(u.as_slice());
        dense = uv
            .dot(&m)
            .into_shape_with_order(IxDyn(&vec![n; order - 1]))
            .expect("standard layout reshape");
    }
    Ok(SymTensor::from_fn(dense.ndim(), n, |idx| dense[idx]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_rank_matches_storage_order() {
        let t = SymTensor::zeros(3, 4);
        assert_eq!(t.as_slice().len(), 20);
        for (r, idx) in t.indices().enumerate() {
            assert!(idx.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(t.rank_sorted(&idx), r);
        }
        assert_eq!(t.indices().count(), 20);
    }

    #[test]
    fn reads_are_symmetric() {
        let t = SymTensor::from_fn(3, 3, |i| (100 * i[0] + 10 * i[1] + i[2]) as f64);
        assert_eq!(t.get(&[2, 0, 1]), 12.0);
        assert_eq!(t.get(&[1, 2, 0]), 12.0);
        let d = t.to_dense();
        assert_eq!(d[[1, 0, 2]], 12.0);
        assert_eq!(SymTensor::from_dense(&d).unwrap(), t);
    }

    #[test]
    fn permutation_counts() {
        assert_eq!(distinct_permutations(&[0, 1, 2]), 6);
        assert_eq!(distinct_permutations(&[0, 0, 2]), 3);
        assert_eq!(distinct_permutations(&[4, 4, 4]), 1);
        assert_eq!(distinct_permutations(&[1, 0, 1, 0]), 6);
    }

    #[test]
    fn binary_and_json_roundtrip() {
        let t = SymTensor::from_fn(3, 4, |i| i.iter().sum::<usize>() as f64 * 0.25 - 1.0);
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 * 20);
        assert_eq!(SymTensor::read_binary(buf.as_slice()).unwrap(), t);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<SymTensor>(&json).unwrap(), t);
        let bad = r#"{"p":2,"n":3,"entries":[1.0]}"#;
        assert!(serde_json::from_str::<SymTensor>(bad).is_err());
    }

    #[test]
    fn contraction_basics() {
        let t = SymTensor::from_fn(2, 3, |i| (i[0] + 3 * i[1]) as f64);
        assert_eq!(contract(&t, &[]).unwrap(), t);
        let row = contract(&t, &[vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(
            row.as_slice(),
            &[t.get(&[0, 0]), t.get(&[0, 1]), t.get(&[0, 2])]
        );
        assert!(contract(&t, &[vec![1.0]]).is_err());
        let u = vec![0.5, -1.0, 2.0];
        let full = contract(&t, &[u.clone(), u.clone()]).unwrap();
        let mut direct = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                direct += u[i] * u[j] * t.get(&[i, j]);
            }
        }
        assert_eq!(full.order(), 0);
        assert!((full.as_slice()[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn frobenius_counts_every_ordering() {
        let t = SymTensor::from_fn(3, 2, |_| 1.0);
        assert_eq!(t.frobenius_norm_sq(), 8.0);
    }
}
