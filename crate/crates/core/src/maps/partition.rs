use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set partition of the edge indices `{0, …, m-1}` of a map.
///
/// Blocks are kept normalized: each block ascending, blocks ordered by their
/// smallest element. Two partitions are equal iff their normalized blocks are.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgePartition {
    num_edges: usize,
    blocks: Vec<Vec<usize>>,
}

impl EdgePartition {
    pub fn new(num_edges: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; num_edges];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &e in block {
                if e >= num_edges {
                    return Err(Error::InvalidPartition(format!(
                        "edge {e} outside 0..{num_edges}"
                    )));
                }
                if seen[e] {
                    return Err(Error::InvalidPartition(format!("edge {e} in two blocks")));
                }
                seen[e] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "edge {missing} not covered"
            )));
        }
        if num_edges == 0 {
            return Err(Error::InvalidPartition("no edges to partition".into()));
        }
        let mut blocks = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(EdgePartition { num_edges, blocks })
    }

    pub fn singletons(num_edges: usize) -> Self {
        EdgePartition {
            num_edges,
            blocks: (0..num_edges).map(|e| vec![e]).collect(),
        }
    }

    pub fn single_block(num_edges: usize) -> Self {
        EdgePartition {
            num_edges,
            blocks: vec![(0..num_edges).collect()],
        }
    }

    /// Builds a partition from a restricted growth string `a` (`a[0] = 0`,
    /// `a[i] ≤ 1 + max(a[..i])`), where `a[i]` is the block of element `i`.
    pub fn from_growth_string(rgs: &[usize]) -> Result<Self> {
        let k = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); k];
        for (e, &b) in rgs.iter().enumerate() {
            blocks[b].push(e);
        }
        EdgePartition::new(rgs.len(), blocks)
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    /// Number of blocks `|π|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// For each edge, the index of its block.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_edges];
        for (b, block) in self.blocks.iter().enumerate() {
            for &e in block {
                out[e] = b;
            }
        }
        out
    }
}

/// Iterator over all set partitions of `{0, …, m-1}` in restricted growth
/// string order. Yields Bell(m) partitions.
pub struct SetPartitions {
    rgs: Vec<usize>,
    // maxes[i] = max(rgs[..=i])
    maxes: Vec<usize>,
    done: bool,
}

impl SetPartitions {
    pub fn new(m: usize) -> Self {
        SetPartitions {
            rgs: vec![0; m],
            maxes: vec![0; m],
            done: m == 0,
        }
    }

    fn advance(&mut self) {
        let m = self.rgs.len();
        let mut i = m;
        while i > 1 {
            i -= 1;
            if self.rgs[i] <= self.maxes[i - 1] {
                self.rgs[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.rgs[i]);
                for j in i + 1..m {
                    self.rgs[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for SetPartitions {
    type Item = EdgePartition;

    fn next(&mut self) -> Option<EdgePartition> {
        if self.done {
            return None;
        }
        let out = EdgePartition::from_growth_string(&self.rgs).expect("valid growth string");
        self.advance();
        Some(out)
    }
}

/// Every partition of the edge set `{0, …, m-1}`, each exactly once.
pub fn enumerate_edge_partitions(m: usize) -> SetPartitions {
    SetPartitions::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn bell_numbers() {
        let bell = [1usize, 1, 2, 5, 15, 52, 203, 877, 4140];
        for m in 1..=8 {
            let all: Vec<_> = enumerate_edge_partitions(m).collect();
            assert_eq!(all.len(), bell[m], "m = {m}");
            let unique: HashSet<_> = all.iter().cloned().collect();
            assert_eq!(unique.len(), all.len());
        }
    }

    #[test]
    fn three_edges_listing() {
        let all: Vec<Vec<Vec<usize>>> = enumerate_edge_partitions(3)
            .map(|p| p.blocks().to_vec())
            .collect();
        assert_eq!(
            all,
            vec![
                vec![vec![0, 1, 2]],
                vec![vec![0, 1], vec![2]],
                vec![vec![0, 2], vec![1]],
                vec![vec![0], vec![1, 2]],
                vec![vec![0], vec![1], vec![2]],
            ]
        );
    }

    #[test]
    fn validation() {
        assert!(EdgePartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(EdgePartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(EdgePartition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(EdgePartition::new(2, vec![vec![0, 5], vec![1]]).is_err());
        let p = EdgePartition::new(4, vec![vec![3, 1], vec![2, 0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!(p.block_of(), vec![0, 1, 0, 1]);
    }
}
