use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `{0, …, n-1}` onto itself, stored by its image array.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for (i, &x) in image.iter().enumerate() {
            if x >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image of {i} is {x}, outside 0..{n}"
                )));
            }
            if seen[x] {
                return Err(Error::InvalidPermutation(format!("{x} is hit twice")));
            }
            seen[x] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    /// Builds a permutation of `0..n` from disjoint cycles; points not listed are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                if x >= n || touched[x] {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle element {x} repeated or out of range"
                    )));
                }
                touched[x] = true;
                image[x] = cycle[(k + 1) % cycle.len()];
            }
        }
        Permutation::new(image)
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.image.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { image: inv }
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "composing permutations of different size"
        );
        Permutation {
            image: other.image.iter().map(|&x| self.image[x]).collect(),
        }
    }

    /// `θ ∘ self ∘ θ⁻¹`: the same permutation written in labels relabelled by `θ`.
    pub fn conjugate_by(&self, theta: &Permutation) -> Self {
        let mut image = vec![0; self.len()];
        for (i, &x) in self.image.iter().enumerate() {
            image[theta.apply(i)] = theta.apply(x);
        }
        Permutation { image }
    }

    /// Cycles, each starting at its minimal element, sorted by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.image[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.image[x];
            }
            out.push(cycle);
        }
        out
    }

    /// For each point, the index of its cycle in [`Permutation::cycles`] order.
    pub fn cycle_index(&self) -> Vec<usize> {
        let mut idx = vec![0; self.len()];
        for (c, cycle) in self.cycles().iter().enumerate() {
            for &x in cycle {
                idx[x] = c;
            }
        }
        idx
    }

    pub fn is_involution(&self) -> bool {
        self.image
            .iter()
            .enumerate()
            .all(|(i, &x)| self.image[x] == i)
    }

    pub fn has_fixed_point(&self) -> bool {
        self.image.iter().enumerate().any(|(i, &x)| i == x)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(image: Vec<usize>) -> Result<Self> {
        Permutation::new(image)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.image
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_cycles_are_fixed_points() {
        assert_eq!(
            Permutation::identity(3).cycles(),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn two_vertex_permutations() {
        let sigma = Permutation::from_cycles(6, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(sigma.cycles(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
        let tau1 = Permutation::from_cycles(6, &[vec![0, 2], vec![1, 3], vec![4, 5]]).unwrap();
        assert_eq!(tau1.cycles(), vec![vec![0, 2], vec![1, 3], vec![4, 5]]);
        assert!(tau1.is_involution());
        assert!(!tau1.has_fixed_point());
    }

    #[test]
    fn cycles_start_at_minimum() {
        let p = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(p.cycles(), vec![vec![0, 2, 3, 1]]);
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::from_cycles(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let p = Permutation::new(vec![1, 2, 0, 4, 3]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(5));
        let q = Permutation::new(vec![0, 2, 1, 3, 4]).unwrap();
        // conjugation preserves cycle type
        let c = p.conjugate_by(&q);
        let mut lens: Vec<_> = c.cycles().iter().map(Vec::len).collect();
        lens.sort();
        assert_eq!(lens, vec![2, 3]);
    }
}
