//! Exact enumeration: Fuss-Catalan numbers, (p−1)-Dyck paths, plane
//! hypertrees, melonic map counts and divisible non-crossing partitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul(n as u128 - i)? / (i + 1);
    }
    Some(acc)
}

pub fn factorial(n: u64) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, x| acc.checked_mul(x))
}

/// `F_p(k) = C(pk+1, k)/(pk+1)`.
///
/// Panics if the value does not fit in 128 bits.
pub fn fuss_catalan(p: u64, k: u64) -> u128 {
    let n = p * k + 1;
    binomial(n, k).expect("Fuss-Catalan number overflows u128") / n as u128
}

/// The second closed form `C(pk, k)/((p−1)k+1)`.
pub fn fuss_catalan_alt(p: u64, k: u64) -> u128 {
    binomial(p * k, k).expect("Fuss-Catalan number overflows u128") / ((p - 1) * k + 1) as u128
}

/// Number of lattice paths of length `np` with steps `+1` and `−(p−1)`,
/// never below zero and ending at zero.
pub fn count_dyck(p: usize, n: usize) -> u128 {
    assert!(p >= 2, "count_dyck needs p >= 2");
    let len = n * p;
    let down = p - 1;
    let mut ways = vec![0u128; len + 1];
    ways[0] = 1;
    for _ in 0..len {
        let mut next = vec![0u128; len + 1];
        for (h, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            if h < len {
                next[h + 1] += w;
            }
            if h >= down {
                next[h - down] += w;
            }
        }
        ways = next;
    }
    ways[0]
}

/// A `(p−1)`-Dyck path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyckPath {
    p: usize,
    steps: Vec<i64>,
}

impl DyckPath {
    pub fn new(p: usize, steps: Vec<i64>) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidPath("p must be at least 2".into()));
        }
        let down = -(p as i64 - 1);
        let mut h = 0i64;
        for (i, &s) in steps.iter().enumerate() {
            if s != 1 && s != down {
                return Err(Error::InvalidPath(format!("step {i} is {s}")));
            }
            h += s;
            if h < 0 {
                return Err(Error::InvalidPath(format!(
                    "path goes below zero at step {i}"
                )));
            }
        }
        if h != 0 {
            return Err(Error::InvalidPath(format!("path ends at height {h}")));
        }
        Ok(DyckPath { p, steps })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn steps(&self) -> &[i64] {
        &self.steps
    }

    /// `n`, the path having length `np`.
    pub fn size(&self) -> usize {
        self.steps.len() / self.p
    }

    /// All paths of size `n`.
    pub fn all(p: usize, n: usize) -> Vec<DyckPath> {
        fn rec(p: usize, left: usize, h: usize, cur: &mut Vec<i64>, out: &mut Vec<DyckPath>) {
            if left == 0 {
                if h == 0 {
                    out.push(DyckPath {
                        p,
                        steps: cur.clone(),
                    });
                }
                return;
            }
            if h < (left - 1) * (p - 1) {
                cur.push(1);
                rec(p, left - 1, h + 1, cur, out);
                cur.pop();
            }
            if h >= p - 1 {
                cur.push(-(p as i64 - 1));
                rec(p, left - 1, h - (p - 1), cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(p, n * p, 0, &mut Vec::new(), &mut out);
        out
    }
}

/// A node of a rooted plane `p`-uniform hypertree. Each hyperedge hanging
/// below the node is the ordered list of its other `p−1` vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub edges: Vec<Vec<Node>>,
}

impl Node {
    fn num_hyperedges(&self) -> usize {
        self.edges
            .iter()
            .map(|e| 1 + e.iter().map(Node::num_hyperedges).sum::<usize>())
            .sum()
    }
}

/// A rooted, fully directed plane `p`-uniform hypertree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlaneHypertree {
    pub p: usize,
    pub root: Node,
}

impl PlaneHypertree {
    pub fn empty(p: usize) -> Self {
        PlaneHypertree {
            p,
            root: Node::default(),
        }
    }

    pub fn num_hyperedges(&self) -> usize {
        self.root.num_hyperedges()
    }

    fn check(&self, node: &Node) -> Result<()> {
        for e in &node.edges {
            if e.len() != self.p - 1 {
                return Err(Error::InvalidPath(format!(
                    "hyperedge with {} children in a {}-uniform hypertree",
                    e.len(),
                    self.p
                )));
            }
            for child in e {
                self.check(child)?;
            }
        }
        Ok(())
    }
}

/// Depth-first walk: entering the `i`-th vertex of a hyperedge is a `+1`
/// step, closing the hyperedge returns to its base with `−(p−1)`.
pub fn dyck_from_hypertree(h: &PlaneHypertree) -> Result<DyckPath> {
    if h.p < 2 {
        return Err(Error::InvalidPath("p must be at least 2".into()));
    }
    h.check(&h.root)?;
    fn walk(node: &Node, down: i64, out: &mut Vec<i64>) {
        for e in &node.edges {
            for child in e {
                out.push(1);
                walk(child, down, out);
            }
            out.push(down);
        }
    }
    let mut steps = Vec::new();
    walk(&h.root, -(h.p as i64 - 1), &mut steps);
    DyckPath::new(h.p, steps)
}

/// Inverse of [`dyck_from_hypertree`]. An up-step from height `g` opens a
/// hyperedge of the current vertex exactly when the path comes back to `g`
/// before dropping under it; otherwise it enters the next vertex of the
/// enclosing hyperedge.
pub fn hypertree_from_dyck(d: &DyckPath) -> Result<PlaneHypertree> {
    let d = DyckPath::new(d.p, d.steps.clone())?;
    let p = d.p;
    let steps = &d.steps;
    let mut heights = vec![0i64; steps.len() + 1];
    for (i, &s) in steps.iter().enumerate() {
        heights[i + 1] = heights[i] + s;
    }
    let opens_hyperedge = |pos: usize| {
        let g = heights[pos];
        heights[pos + 1..]
            .iter()
            .find(|&&x| x <= g)
            .is_some_and(|&x| x == g)
    };

    fn node(
        pos: &mut usize,
        p: usize,
        steps: &[i64],
        opens: &dyn Fn(usize) -> bool,
    ) -> Result<Node> {
        let mut n = Node::default();
        while *pos < steps.len() && steps[*pos] == 1 && opens(*pos) {
            let mut children = Vec::with_capacity(p - 1);
            for _ in 0..p - 1 {
                if steps.get(*pos) != Some(&1) {
                    return Err(Error::InvalidPath(format!("expected +1 at step {pos}")));
                }
                *pos += 1;
                children.push(node(pos, p, steps, opens)?);
            }
            if steps.get(*pos) != Some(&-(p as i64 - 1)) {
                return Err(Error::InvalidPath(format!("expected a down-step at {pos}")));
            }
            *pos += 1;
            n.edges.push(children);
        }
        Ok(n)
    }

    let mut pos = 0;
    let root = node(&mut pos, p, steps, &opens_hyperedge)?;
    if pos != steps.len() {
        return Err(Error::InvalidPath(format!("unparsed steps from {pos}")));
    }
    Ok(PlaneHypertree { p, root })
}

/// Rooted melonic maps on `2n` vertices: `F_p(n) · ((p−1)!)^n`.
pub fn count_melonic_maps(p: u64, n: u64) -> u128 {
    let f = factorial(p - 1).expect("factorial overflows u128");
    (0..n).fold(fuss_catalan(p, n), |acc, _| {
        acc.checked_mul(f).expect("melonic count overflows u128")
    })
}

/// Non-crossing partitions of `{0, …, n(p−1)−1}` whose block sizes are all
/// multiples of `p−1`.
pub fn noncrossing_div(p: usize, n: usize) -> Vec<Vec<Vec<usize>>> {
    assert!(p >= 2, "noncrossing_div needs p >= 2");
    let d = p - 1;
    // partitions of the interval [lo, hi)
    fn rec(lo: usize, hi: usize, d: usize) -> Vec<Vec<Vec<usize>>> {
        if lo == hi {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        // block containing lo: lo = a_0 < a_1 < … ; each gap must be divisible by d
        fn grow(block: &mut Vec<usize>, hi: usize, d: usize, out: &mut Vec<Vec<Vec<usize>>>) {
            let last = *block.last().unwrap();
            if block.len().is_multiple_of(d) && (hi - last - 1).is_multiple_of(d) {
                let mut parts = vec![vec![vec![block.clone()]]];
                for w in block.windows(2) {
                    parts.push(rec(w[0] + 1, w[1], d));
                }
                parts.push(rec(last + 1, hi, d));
                // product of the pieces
                let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
                for choices in parts {
                    let mut next = Vec::with_capacity(acc.len() * choices.len());
                    for a in &acc {
                        for c in &choices {
                            let mut x = a.clone();
                            x.extend(c.iter().cloned());
                            next.push(x);
                        }
                    }
                    acc = next;
                }
                out.extend(acc);
            }
            let mut next = last + 1;
            while next < hi {
                if (next - last - 1).is_multiple_of(d) {
                    block.push(next);
                    grow(block, hi, d, out);
                    block.pop();
                }
                next += 1;
            }
        }
        grow(&mut vec![lo], hi, d, &mut out);
        out
    }
    let mut all = rec(0, n * d, d);
    for part in &mut all {
        part.sort_by_key(|b| b[0]);
    }
    all
}

pub fn count_noncrossing_div(p: usize, n: usize) -> u128 {
    noncrossing_div(p, n).len() as u128
}

/// Whether a set partition of points on a line is non-crossing.
pub fn is_noncrossing(blocks: &[Vec<usize>]) -> bool {
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            let interleaved = |a: &[usize], b: &[usize]| {
                a.iter().any(|&a1| {
                    a.iter().any(|&a2| {
                        b.iter().any(|&b1| a1 < b1 && b1 < a2) && b.iter().any(|&b2| a2 < b2)
                    })
                })
            };
            if interleaved(a, b) || interleaved(b, a) {
                return false;
            }
        }
    }
    true
}

/// Checks `T = 1 + z T^p` coefficientwise up to `z^K` for `T = Σ F_p(k) z^k`.
pub fn generating_series_check(p: usize, k_max: usize) -> bool {
    let t: Vec<u128> = (0..=k_max)
        .map(|k| fuss_catalan(p as u64, k as u64))
        .collect();
    let mul = |a: &[u128], b: &[u128]| {
        let mut c = vec![0u128; k_max + 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate().take(k_max + 1 - i) {
                c[i + j] += x * y;
            }
        }
        c
    };
    let mut power = vec![0u128; k_max + 1];
    power[0] = 1;
    for _ in 0..p {
        power = mul(&power, &t);
    }
    (0..=k_max).all(|k| {
        let rhs = if k == 0 { 1 } else { power[k - 1] };
        t[k] == rhs
    })
}
