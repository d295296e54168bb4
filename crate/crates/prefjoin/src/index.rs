//! Inverted index over S and incremental prefix-filtered candidate
//! generation for descending threshold intervals.
//!
//! The index stores *all* elements of each S record; filtering power comes
//! from probing successively longer prefixes of each R record as the
//! threshold drops. Indexing only prefixes of S would have to be redone per
//! threshold, since the threshold sequence is unknown up front.

use std::collections::{BTreeSet, HashMap};

use crate::model::{Dataset, ExactSim, Pair};
use crate::sim::{prefix_length, SimilarityMeasure};
use crate::{Error, Result};

/// Token id -> ascending list of S ordinals containing that token.
#[derive(Debug, Clone, Default)]
pub struct InvertedIndex {
    postings: HashMap<u32, Vec<u32>>,
}

impl InvertedIndex {
    pub fn posting(&self, token: u32) -> &[u32] {
        self.postings.get(&token).map_or(&[], Vec::as_slice)
    }

    pub fn token_count(&self) -> usize {
        self.postings.len()
    }
}

/// Build the index over the S side. Ordinals are pushed in ascending record
/// order, so every posting list is sorted.
pub fn build_index(s: &Dataset) -> InvertedIndex {
    let mut postings: HashMap<u32, Vec<u32>> = HashMap::new();
    for (ordinal, record) in s.records().iter().enumerate() {
        for &token in record.tokens() {
            postings.entry(token).or_default().push(ordinal as u32);
        }
    }
    InvertedIndex { postings }
}

/// Per-R-record probing progress across the descending threshold sweep.
#[derive(Debug)]
pub struct ProbeState {
    /// How many prefix positions of each r have been merged so far.
    probed: Vec<usize>,
    /// S ordinals already emitted for each r; a pair is emitted at most once
    /// across the whole run.
    seen: Vec<BTreeSet<u32>>,
    last_theta: Option<ExactSim>,
}

impl ProbeState {
    pub fn new(r_count: usize) -> Self {
        ProbeState {
            probed: vec![0; r_count],
            seen: vec![BTreeSet::new(); r_count],
            last_theta: None,
        }
    }

    pub fn probed_prefix_len(&self, r: u32) -> usize {
        self.probed[r as usize]
    }
}

/// Extend each r's probed prefix to `prefix_length(measure, theta, |r|)` and
/// emit every not-yet-seen S ordinal on the newly probed posting lists.
///
/// Thresholds must not increase across calls. A repeated threshold is a
/// no-op (no prefix growth, empty result). Together with the overlap
/// threshold guarantee this is complete: every pair with `sim >= theta` has
/// been emitted by some call with threshold `>= theta`.
pub fn candidates_for(
    theta: &ExactSim,
    index: &InvertedIndex,
    r_side: &Dataset,
    measure: &SimilarityMeasure,
    state: &mut ProbeState,
) -> Result<Vec<Pair>> {
    if let Some(prev) = state.last_theta {
        if *theta > prev {
            return Err(Error::ThresholdOrder { prev: prev.to_string(), got: theta.to_string() });
        }
    }
    state.last_theta = Some(*theta);

    let mut out = Vec::new();
    for (ordinal, record) in r_side.records().iter().enumerate() {
        let target = prefix_length(measure, theta, record.len());
        let start = state.probed[ordinal];
        if target <= start {
            continue;
        }
        let seen = &mut state.seen[ordinal];
        for pos in start..target {
            for &s in index.posting(record.get(pos)) {
                if seen.insert(s) {
                    out.push(Pair::new(ordinal as u32, s));
                }
            }
        }
        state.probed[ordinal] = target;
    }
    Ok(out)
}
