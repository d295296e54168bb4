//! Per-record best matches (with ties) and the pivotal threshold set.
//!
//! A threshold can only improve on every larger threshold if some pair
//! joining exactly at it is a *mutual* best match: the similarities of
//! mutually-top pairs are therefore the only thresholds the engine needs to
//! score. Evaluating them in descending order covers the global optimum for
//! both preferences.

use std::collections::BTreeSet;

use crate::index::InvertedIndex;
use crate::model::{Dataset, ExactSim};
use crate::sim::{similarity_from_overlap, SimilarityMeasure};
use crate::Result;

/// One record's most similar opposite-side records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopEntry {
    pub sim: ExactSim,
    /// Opposite-side ordinals achieving `sim`, ascending, ties included.
    pub set: Vec<u32>,
}

/// Best matches for every record of one side. `None` means the record shares
/// no token with the other side (similarity 0 against everything).
#[derive(Debug, Clone, Default)]
pub struct TopMatches {
    entries: Vec<Option<TopEntry>>,
}

impl TopMatches {
    pub fn get(&self, ordinal: u32) -> Option<&TopEntry> {
        self.entries[ordinal as usize].as_ref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn update(slot: &mut Option<TopEntry>, sim: ExactSim, partner: u32) {
    match slot {
        Some(entry) if entry.sim > sim => {}
        Some(entry) if entry.sim == sim => entry.set.push(partner),
        _ => *slot = Some(TopEntry { sim, set: vec![partner] }),
    }
}

/// Exact top-1-with-ties in both directions, by scanning each R record's
/// token-sharing partners through the inverted index and accumulating
/// overlap counts. Every pair with positive similarity is visited exactly
/// once, so the result equals the brute-force definition.
pub fn compute_tops(
    r_side: &Dataset,
    s_side: &Dataset,
    measure: &SimilarityMeasure,
    index: &InvertedIndex,
) -> Result<(TopMatches, TopMatches)> {
    let mut tops_r: Vec<Option<TopEntry>> = vec![None; r_side.len()];
    let mut tops_s: Vec<Option<TopEntry>> = vec![None; s_side.len()];
    let mut counts: Vec<u32> = vec![0; s_side.len()];
    let mut touched: Vec<u32> = Vec::new();

    for (r_ord, record) in r_side.records().iter().enumerate() {
        for &token in record.tokens() {
            for &s_ord in index.posting(token) {
                if counts[s_ord as usize] == 0 {
                    touched.push(s_ord);
                }
                counts[s_ord as usize] += 1;
            }
        }
        for &s_ord in &touched {
            let overlap = counts[s_ord as usize] as usize;
            counts[s_ord as usize] = 0;
            let sim = similarity_from_overlap(
                measure,
                overlap,
                record.len(),
                s_side.record(s_ord).len(),
            )?;
            update(&mut tops_r[r_ord], sim, s_ord);
            update(&mut tops_s[s_ord as usize], sim, r_ord as u32);
        }
        touched.clear();
    }

    for entry in tops_r.iter_mut().chain(tops_s.iter_mut()).flatten() {
        entry.set.sort_unstable();
    }
    Ok((TopMatches { entries: tops_r }, TopMatches { entries: tops_s }))
}

/// How the pivotal set is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotalMode {
    /// Similarities of pairs that are each other's best match.
    #[default]
    Mutual,
    /// Similarities of pairs that are a best match in at least one
    /// direction — a superset of [`PivotalMode::Mutual`], useful as a
    /// conservative cross check.
    Relaxed,
}

/// The candidate thresholds, strictly descending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotalThresholds {
    values: Vec<ExactSim>,
}

impl PivotalThresholds {
    pub fn values(&self) -> &[ExactSim] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Collect the distinct similarities of qualifying top pairs, descending.
pub fn pivotal_thresholds(
    tops_r: &TopMatches,
    tops_s: &TopMatches,
    mode: PivotalMode,
) -> PivotalThresholds {
    let mut values: BTreeSet<ExactSim> = BTreeSet::new();
    match mode {
        PivotalMode::Mutual => {
            for (r_ord, entry) in tops_r.entries.iter().enumerate() {
                let Some(entry) = entry else { continue };
                for &s_ord in &entry.set {
                    let mutual = tops_s
                        .get(s_ord)
                        .is_some_and(|back| back.set.binary_search(&(r_ord as u32)).is_ok());
                    if mutual {
                        values.insert(entry.sim);
                        break;
                    }
                }
            }
        }
        PivotalMode::Relaxed => {
            for entry in tops_r.entries.iter().chain(&tops_s.entries).flatten() {
                values.insert(entry.sim);
            }
        }
    }
    PivotalThresholds { values: values.into_iter().rev().collect() }
}
