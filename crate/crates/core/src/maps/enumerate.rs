use std::collections::BTreeMap;

use rayon::prelude::*;

use super::CombinatorialMap;
use crate::error::{Error, Result};

/// Largest halfedge count accepted by [`enumerate_by_matchings`].
pub const MAX_MATCHING_HALFEDGES: usize = 22;

/// Largest number of classes [`enumerate_rooted_connected`] will materialize.
pub const MAX_ENUMERATED_MAPS: usize = 4_000_000;

const FREE: usize = usize::MAX;

struct Orderly {
    p: usize,
    total: usize,
    tau: Vec<usize>,
    // halfedges 0..next_block are labelled (their vertices have been entered)
    next_block: usize,
    out: Vec<Vec<usize>>,
    overflow: bool,
}

impl Orderly {
    fn new(p: usize, n: usize) -> Self {
        Orderly {
            p,
            total: p * n,
            tau: vec![FREE; p * n],
            next_block: p.min(p * n),
            out: Vec::new(),
            overflow: false,
        }
    }

    fn first_free(&self, from: usize) -> usize {
        (from..self.next_block)
            .find(|&h| self.tau[h] == FREE)
            .unwrap_or(self.next_block)
    }

    fn pair(&mut self, a: usize, b: usize) {
        self.tau[a] = b;
        self.tau[b] = a;
    }

    fn unpair(&mut self, a: usize, b: usize) {
        self.tau[a] = FREE;
        self.tau[b] = FREE;
    }

    /// Extends a partial canonical matching whose smallest unmatched
    /// labelled halfedge is at or after `from`.
    fn search(&mut self, from: usize) {
        if self.overflow {
            return;
        }
        let i = self.first_free(from);
        if i == self.next_block {
            if self.next_block == self.total {
                if self.out.len() == MAX_ENUMERATED_MAPS {
                    self.overflow = true;
                } else {
                    self.out.push(self.tau.clone());
                }
            }
            // otherwise the component closed before reaching every vertex
            return;
        }
        for j in i + 1..self.next_block {
            if self.tau[j] == FREE {
                self.pair(i, j);
                self.search(i + 1);
                self.unpair(i, j);
            }
        }
        if self.next_block < self.total {
            let j = self.next_block;
            self.next_block += self.p;
            self.pair(i, j);
            self.search(i + 1);
            self.unpair(i, j);
            self.next_block -= self.p;
        }
    }

    /// The choices available for halfedge 0, as seeds for parallel search.
    fn root_choices(&self) -> Vec<usize> {
        let mut c: Vec<usize> = (1..self.next_block).collect();
        if self.next_block < self.total {
            c.push(self.next_block);
        }
        c
    }
}

/// One canonical representative of every rooted connected `p`-regular map
/// with `n` vertices, sorted by canonical code.
///
/// Matchings are generated directly in canonical-traversal labels: the
/// smallest unmatched labelled halfedge is paired either with a later
/// labelled halfedge or with the first halfedge of a fresh vertex. Each
/// rooted class therefore appears exactly once and every output is
/// connected.
pub fn enumerate_rooted_connected(p: usize, n: usize) -> Result<Vec<CombinatorialMap>> {
    if p < 2 || n == 0 {
        return Err(Error::ContractViolation(format!(
            "enumeration needs p >= 2 and n >= 1, got p = {p}, n = {n}"
        )));
    }
    if (p * n) % 2 == 1 {
        return Ok(Vec::new());
    }
    let seed = Orderly::new(p, n);
    let branches: Vec<Result<Vec<Vec<usize>>>> = seed
        .root_choices()
        .into_par_iter()
        .map(|j| {
            let mut g = Orderly::new(p, n);
            if j == g.next_block {
                g.next_block += p;
            }
            g.pair(0, j);
            g.search(1);
            if g.overflow {
                Err(Error::Resource(format!(
                    "more than {MAX_ENUMERATED_MAPS} rooted maps for p = {p}, n = {n}"
                )))
            } else {
                Ok(g.out)
            }
        })
        .collect();
    let mut all = Vec::new();
    for b in branches {
        all.extend(b?);
        if all.len() > MAX_ENUMERATED_MAPS {
            return Err(Error::Resource(format!(
                "more than {MAX_ENUMERATED_MAPS} rooted maps for p = {p}, n = {n}"
            )));
        }
    }
    // same p and n throughout, so code order is lexicographic order on τ
    all.par_sort_unstable();
    all.into_iter()
        .map(|tau| CombinatorialMap::from_matching(p, tau))
        .collect()
}

fn matchings(tau: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let Some(i) = tau.iter().position(|&t| t == FREE) else {
        out.push(tau.clone());
        return;
    };
    for j in i + 1..tau.len() {
        if tau[j] == FREE {
            tau[i] = j;
            tau[j] = i;
            matchings(tau, out);
            tau[i] = FREE;
            tau[j] = FREE;
        }
    }
}

/// Reference enumeration: every perfect matching on the standard `σ`,
/// filtered for connectivity and deduplicated by canonical code.
/// Exponentially slower than [`enumerate_rooted_connected`]; kept as a
/// cross-check.
pub fn enumerate_by_matchings(p: usize, n: usize) -> Result<Vec<CombinatorialMap>> {
    if p < 2 || n == 0 {
        return Err(Error::ContractViolation(format!(
            "enumeration needs p >= 2 and n >= 1, got p = {p}, n = {n}"
        )));
    }
    let q = p * n;
    if q % 2 == 1 {
        return Ok(Vec::new());
    }
    if q > MAX_MATCHING_HALFEDGES {
        return Err(Error::Resource(format!(
            "{q} halfedges exceeds the matching cap of {MAX_MATCHING_HALFEDGES}"
        )));
    }
    let mut all = Vec::new();
    matchings(&mut vec![FREE; q], &mut all);
    let mut classes = BTreeMap::new();
    for tau in all {
        let b = CombinatorialMap::from_matching(p, tau)?;
        if !b.is_connected() {
            continue;
        }
        let code = b.canonical_code()?;
        classes.entry(code).or_insert(b);
    }
    classes.into_values().map(|b| b.canonical_form()).collect()
}
