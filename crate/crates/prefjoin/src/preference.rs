//! The two result-set preferences and their early-termination upper bounds.
//!
//! Both scorers consume `join^=` groups incrementally as the threshold sweep
//! descends:
//!
//! - `MaxGroups` counts non-trivial connected components of the bipartite
//!   join graph (each component is one matched entity). Since every joined
//!   pair is an R-S edge, a component containing any edge always has one
//!   node on each side, so components of the edge-induced graph are exactly
//!   the non-trivial ones.
//! - `MinOutJoin` minimizes the full outer-join size, tracked without the
//!   constant `|R| + |S|` shift as `|cover_R| + |cover_S| - |join|`. The
//!   shift never changes the argmax; the identity with the outer-join size
//!   is asserted separately.

use std::collections::HashSet;

use crate::model::{ExactSim, JoinResult, Pair};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreferenceKind {
    MaxGroups,
    MinOutJoin,
}

/// Union-find with union by size and path compression.
#[derive(Debug, Clone)]
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// Parent-pointer hops performed, for amortized-cost assertions.
    steps: u64,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n], steps: 0 }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut x = x;
        while self.parent[x as usize] != x {
            self.steps += 1;
            let grandparent = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Returns false if the two nodes were already in the same set.
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Incremental scorer state shared by both preferences. Nodes of the
/// union-find forest are R ordinals followed by S ordinals.
#[derive(Debug, Clone)]
pub struct PreferenceState {
    kind: PreferenceKind,
    r_size: usize,
    s_size: usize,
    covered_r: Vec<bool>,
    covered_s: Vec<bool>,
    covered_r_count: usize,
    covered_s_count: usize,
    join_count: usize,
    dsu: UnionFind,
    component_count: i64,
    applied: HashSet<Pair>,
}

impl PreferenceState {
    pub fn new(kind: PreferenceKind, r_size: usize, s_size: usize) -> Self {
        PreferenceState {
            kind,
            r_size,
            s_size,
            covered_r: vec![false; r_size],
            covered_s: vec![false; s_size],
            covered_r_count: 0,
            covered_s_count: 0,
            join_count: 0,
            dsu: UnionFind::new(r_size + s_size),
            component_count: 0,
            applied: HashSet::new(),
        }
    }

    pub fn kind(&self) -> PreferenceKind {
        self.kind
    }

    /// Apply one `join^=` group. Pairs must not repeat across the whole run.
    pub fn apply_pairs(&mut self, pairs: &[Pair]) -> Result<i64> {
        for &pair in pairs {
            if !self.applied.insert(pair) {
                return Err(Error::DuplicatePair(pair.r, pair.s));
            }
            let r_node = pair.r;
            let s_node = self.r_size as u32 + pair.s;
            let r_was_covered = self.covered_r[pair.r as usize];
            let s_was_covered = self.covered_s[pair.s as usize];

            self.join_count += 1;
            if !r_was_covered {
                self.covered_r[pair.r as usize] = true;
                self.covered_r_count += 1;
            }
            if !s_was_covered {
                self.covered_s[pair.s as usize] = true;
                self.covered_s_count += 1;
            }

            match (r_was_covered, s_was_covered) {
                (false, false) => {
                    self.dsu.union(r_node, s_node);
                    self.component_count += 1;
                }
                (true, true) => {
                    if self.dsu.union(r_node, s_node) {
                        self.component_count -= 1;
                    }
                }
                // An uncovered endpoint is isolated: attaching it can
                // neither create nor merge components.
                _ => {
                    self.dsu.union(r_node, s_node);
                }
            }
        }
        Ok(self.score())
    }

    pub fn score(&self) -> i64 {
        match self.kind {
            PreferenceKind::MaxGroups => self.component_count,
            PreferenceKind::MinOutJoin => {
                self.covered_r_count as i64 + self.covered_s_count as i64 - self.join_count as i64
            }
        }
    }

    /// Largest score any smaller threshold could still reach: each extra
    /// score point needs a previously uncovered record on *both* sides.
    pub fn upper_bound(&self) -> i64 {
        let free_r = (self.r_size - self.covered_r_count) as i64;
        let free_s = (self.s_size - self.covered_s_count) as i64;
        self.score() + free_r.min(free_s)
    }

    pub fn covered_r_count(&self) -> usize {
        self.covered_r_count
    }

    pub fn covered_s_count(&self) -> usize {
        self.covered_s_count
    }

    pub fn join_count(&self) -> usize {
        self.join_count
    }

    /// Union-find parent hops so far (used by complexity tests).
    pub fn dsu_steps(&self) -> u64 {
        self.dsu.steps
    }
}

/// One row of a full outer join: a matched pair, or a record of either side
/// with no partner.
pub type OutJoinRow = (Option<u32>, Option<u32>);

/// `join(theta)` followed by NULL-padded rows for unmatched R records (by
/// ordinal) and then unmatched S records.
pub fn full_outer_join(
    result: &JoinResult,
    theta: ExactSim,
    r_size: usize,
    s_size: usize,
) -> Result<Vec<OutJoinRow>> {
    let pairs = result.join_at(theta)?;
    let mut covered_r = vec![false; r_size];
    let mut covered_s = vec![false; s_size];
    let mut rows: Vec<OutJoinRow> = Vec::with_capacity(pairs.len());
    for pair in pairs {
        covered_r[pair.r as usize] = true;
        covered_s[pair.s as usize] = true;
        rows.push((Some(pair.r), Some(pair.s)));
    }
    rows.extend(
        covered_r
            .iter()
            .enumerate()
            .filter(|(_, c)| !**c)
            .map(|(r, _)| (Some(r as u32), None)),
    );
    rows.extend(
        covered_s
            .iter()
            .enumerate()
            .filter(|(_, c)| !**c)
            .map(|(s, _)| (None, Some(s as u32))),
    );
    Ok(rows)
}
