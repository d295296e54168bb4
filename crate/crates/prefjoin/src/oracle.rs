//! Brute-force reference: all-pairs similarity, exhaustive threshold
//! enumeration, and from-scratch scoring.
//!
//! This path deliberately shares no code with the engine's similarity,
//! candidate generation, or scoring: intersections use hash sets instead of
//! ordered merges, components come from a fresh BFS per threshold instead of
//! an incremental union-find, and covers are recomputed with set algebra.
//! Differential tests compare the two; the comparison is only as good as
//! this independence.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;

use crate::model::{Dataset, ExactSim, Pair, TokenSet};
use crate::sim::{MeasureKind, SimilarityMeasure};
use crate::{Error, Result};

/// Pair-count threshold below which the all-pairs pass stays serial.
const PARALLEL_PAIRS_MIN: usize = 1 << 16;

/// Scores and sizes at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleRow {
    pub theta: ExactSim,
    pub h_c: i64,
    pub h_o: i64,
    pub join_size: usize,
    pub cover_r: usize,
    pub cover_s: usize,
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    /// Every positive pair similarity with its pairs, ascending by value.
    pub all_sims: BTreeMap<ExactSim, Vec<Pair>>,
    /// One row per distinct positive similarity, descending.
    pub per_threshold: Vec<OracleRow>,
    /// Largest threshold maximizing each preference; `None` when no pair has
    /// positive similarity.
    pub theta_star_c: Option<ExactSim>,
    pub theta_star_o: Option<ExactSim>,
}

impl OracleOutcome {
    pub fn best_score_c(&self) -> Option<i64> {
        self.per_threshold.iter().map(|row| row.h_c).max()
    }

    pub fn best_score_o(&self) -> Option<i64> {
        self.per_threshold.iter().map(|row| row.h_o).max()
    }

    /// All pairs with similarity at least `theta`.
    pub fn join_at(&self, theta: ExactSim) -> Vec<Pair> {
        self.all_sims
            .range(theta..)
            .flat_map(|(_, pairs)| pairs.iter().copied())
            .collect()
    }
}

/// Similarity by direct set algebra, independent of the merge-scan path.
fn plain_similarity(measure: &SimilarityMeasure, r: &TokenSet, s: &TokenSet) -> Result<ExactSim> {
    if r.is_empty() || s.is_empty() {
        return Err(Error::EmptySet);
    }
    let set_r: HashSet<u32> = r.tokens().iter().copied().collect();
    let set_s: HashSet<u32> = s.tokens().iter().copied().collect();
    let o = set_r.intersection(&set_s).count() as u128;
    let union = set_r.union(&set_s).count() as u128;
    let (rl, sl) = (r.len() as u128, s.len() as u128);
    match measure.kind() {
        MeasureKind::Jaccard => ExactSim::rational_wide(o, union),
        MeasureKind::Overlap => ExactSim::rational_wide(o, rl.max(sl)),
        MeasureKind::Dice => ExactSim::rational_wide(2 * o, rl + sl),
        MeasureKind::Cosine => ExactSim::squared_wide(o * o, rl * sl),
        MeasureKind::Tversky => {
            let (p, q) = measure.alpha().expect("tversky requires alpha");
            let (p, q) = (p as u128, q as u128);
            ExactSim::rational_wide(o * q, p * rl + (q - p) * sl)
        }
    }
}

fn bfs_component_count(pairs: &[Pair], r_size: usize, s_size: usize) -> i64 {
    let n = r_size + s_size;
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for pair in pairs {
        let (a, b) = (pair.r as usize, r_size + pair.s as usize);
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut visited = vec![false; n];
    let mut components = 0;
    let mut queue = Vec::new();
    for start in 0..n {
        if visited[start] || adjacency[start].is_empty() {
            continue;
        }
        components += 1;
        visited[start] = true;
        queue.push(start);
        while let Some(v) = queue.pop() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push(w);
                }
            }
        }
    }
    components
}

/// Compute every pair similarity, enumerate the distinct positive values in
/// descending order, and score both preferences from scratch at each one.
pub fn oracle_run(
    r_side: &Dataset,
    s_side: &Dataset,
    measure: &SimilarityMeasure,
) -> Result<OracleOutcome> {
    if r_side.is_empty() || s_side.is_empty() {
        return Err(Error::EmptyInput);
    }
    // Parallel over R rows with an ordered merge, so the grouping is byte
    // for byte the same as a serial scan.
    let scan_row = |(r_ord, r_rec): (usize, &TokenSet)| -> Result<Vec<(ExactSim, Pair)>> {
        let mut row = Vec::new();
        for (s_ord, s_rec) in s_side.records().iter().enumerate() {
            let sim = plain_similarity(measure, r_rec, s_rec)?;
            if !sim.is_zero() {
                row.push((sim, Pair::new(r_ord as u32, s_ord as u32)));
            }
        }
        Ok(row)
    };
    let rows: Vec<Vec<(ExactSim, Pair)>> =
        if r_side.len().saturating_mul(s_side.len()) >= PARALLEL_PAIRS_MIN {
            r_side.records().par_iter().enumerate().map(scan_row).collect::<Result<_>>()?
        } else {
            r_side.records().iter().enumerate().map(scan_row).collect::<Result<_>>()?
        };
    let mut all_sims: BTreeMap<ExactSim, Vec<Pair>> = BTreeMap::new();
    for (sim, pair) in rows.into_iter().flatten() {
        all_sims.entry(sim).or_default().push(pair);
    }

    let mut per_threshold = Vec::with_capacity(all_sims.len());
    for (&theta, _) in all_sims.iter().rev() {
        let joined: Vec<Pair> = all_sims
            .range(theta..)
            .flat_map(|(_, pairs)| pairs.iter().copied())
            .collect();
        let cover_r: HashSet<u32> = joined.iter().map(|p| p.r).collect();
        let cover_s: HashSet<u32> = joined.iter().map(|p| p.s).collect();
        per_threshold.push(OracleRow {
            theta,
            h_c: bfs_component_count(&joined, r_side.len(), s_side.len()),
            h_o: cover_r.len() as i64 + cover_s.len() as i64 - joined.len() as i64,
            join_size: joined.len(),
            cover_r: cover_r.len(),
            cover_s: cover_s.len(),
        });
    }

    let argmax = |score: &dyn Fn(&OracleRow) -> i64| -> Option<ExactSim> {
        let best = per_threshold.iter().map(score).max()?;
        per_threshold.iter().find(|row| score(row) == best).map(|row| row.theta)
    };
    Ok(OracleOutcome {
        theta_star_c: argmax(&|row| row.h_c),
        theta_star_o: argmax(&|row| row.h_o),
        all_sims,
        per_threshold,
    })
}
