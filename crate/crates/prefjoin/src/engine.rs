//! The end-to-end preference-driven join: pivotal thresholds, descending
//! incremental join with lazy evaluation and postponement, incremental
//! scoring, early termination, and result extraction at the winning
//! threshold.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::index::{build_index, candidates_for, InvertedIndex, ProbeState};
use crate::model::{Dataset, ExactSim, JoinResult, Pair};
use crate::pivotal::{compute_tops, pivotal_thresholds, PivotalThresholds};
use crate::preference::{PreferenceKind, PreferenceState};
use crate::sim::{length_bound, similarity_from_overlap, LazyEvalState, SimilarityMeasure};
use crate::Result;

pub use crate::pivotal::PivotalMode;

/// Below this many candidates a threshold step is verified serially; the
/// rayon dispatch overhead dominates on tiny batches.
const PARALLEL_VERIFY_MIN: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct EngineConfig {
    pub measure: SimilarityMeasure,
    pub preference: PreferenceKind,
    pub pivotal_mode: PivotalMode,
    /// Suspend fresh candidates straight into a postponement bucket when
    /// their length-only similarity bound already rules out the current
    /// threshold. Observable behavior is identical either way; off matches
    /// the literal two-step candidate handling for differential testing.
    pub length_filter: bool,
    /// Stop the sweep once the score upper bound cannot beat the best score.
    /// Disabling never changes the outcome, only the work done.
    pub early_termination: bool,
}

impl EngineConfig {
    pub fn new(measure: SimilarityMeasure, preference: PreferenceKind) -> Self {
        EngineConfig {
            measure,
            preference,
            pivotal_mode: PivotalMode::Mutual,
            length_filter: true,
            early_termination: true,
        }
    }
}

/// Score and upper bound observed at one evaluated pivotal threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdScore {
    pub theta: ExactSim,
    pub score: i64,
    pub upper_bound: i64,
}

#[derive(Debug, Clone)]
pub struct EngineOutcome {
    /// Largest evaluated threshold achieving `best_score`.
    pub theta_star: ExactSim,
    pub best_score: i64,
    /// Joined pairs grouped by exact similarity; boundaries exist for every
    /// distinct similarity applied, so `join_at` also works at non-pivotal
    /// values inside the swept range.
    pub result: JoinResult,
    pub pivotal: PivotalThresholds,
    pub thresholds_evaluated: usize,
    pub terminated_early: bool,
    pub per_threshold_scores: Vec<ThresholdScore>,
    /// Largest candidate batch verified at one threshold.
    pub peak_candidates: usize,
}

impl EngineOutcome {
    /// The winning join as pairs of user-facing identifiers.
    pub fn join_at_star<'a>(
        &self,
        r_side: &'a Dataset,
        s_side: &'a Dataset,
    ) -> Vec<(&'a str, &'a str)> {
        self.result
            .join_at(self.theta_star)
            .expect("theta_star is always a recorded boundary")
            .iter()
            .map(|pair| (r_side.external_id(pair.r), s_side.external_id(pair.s)))
            .collect()
    }

    /// The winning join, one `(similarity, pairs)` group per exact value.
    pub fn star_slices(&self) -> Vec<(ExactSim, &[Pair])> {
        self.result
            .slices()
            .take_while(|(theta, _)| *theta >= self.theta_star)
            .collect()
    }
}

enum Verdict {
    /// Converged with an exact similarity reaching the threshold.
    Join(ExactSim),
    /// The max bound fell below the threshold; value is that bound.
    Postpone(ExactSim),
}

/// Advance one candidate until its similarity is pinned or ruled out.
///
/// Joining pairs are scanned to convergence: the sweep groups them by exact
/// similarity, so "at least theta" is not enough. The savings of lazy
/// evaluation come from the postponed pairs, which stop as soon as their
/// upper bound drops.
fn verify(
    state: &mut LazyEvalState,
    theta: &ExactSim,
    measure: &SimilarityMeasure,
    r_side: &Dataset,
    s_side: &Dataset,
) -> Result<Verdict> {
    let r = r_side.record(state.r);
    let s = s_side.record(state.s);
    loop {
        let hi = similarity_from_overlap(measure, state.bound_max(r, s), r.len(), s.len())?;
        if hi < *theta {
            return Ok(Verdict::Postpone(hi));
        }
        if state.converged(r, s) {
            // bound_max equals the overlap once a side is exhausted.
            return Ok(Verdict::Join(hi));
        }
        state.advance(r, s);
    }
}

struct Sweep<'a> {
    r_side: &'a Dataset,
    s_side: &'a Dataset,
    measure: SimilarityMeasure,
    thresholds: &'a [ExactSim],
    index: &'a InvertedIndex,
    probe: ProbeState,
    buckets: Vec<Vec<LazyEvalState>>,
    length_filter: bool,
    peak_candidates: usize,
}

impl Sweep<'_> {
    /// Park a pair whose similarity upper bound `ub` fell below the current
    /// threshold into the bucket for the first threshold at or below `ub`,
    /// or drop it when no remaining threshold can admit it.
    fn suspend(&mut self, current: usize, state: LazyEvalState, ub: ExactSim) {
        let rest = &self.thresholds[current + 1..];
        let offset = rest.partition_point(|t| *t > ub);
        if offset < rest.len() {
            self.buckets[current + 1 + offset].push(state);
        }
    }

    /// Compute the `join^=` groups for `[theta_i, theta_{i-1})`: fresh
    /// prefix-filter candidates plus previously postponed pairs, verified
    /// lazily, grouped by exact similarity (descending when iterated in
    /// reverse).
    fn incremental_join(&mut self, i: usize) -> Result<BTreeMap<ExactSim, Vec<Pair>>> {
        let theta = self.thresholds[i];
        let fresh =
            candidates_for(&theta, self.index, self.r_side, &self.measure, &mut self.probe)?;
        let mut states = std::mem::take(&mut self.buckets[i]);
        states.reserve(fresh.len());
        for pair in fresh {
            let state = LazyEvalState::new(pair.r, pair.s);
            if self.length_filter {
                let ub = length_bound(
                    &self.measure,
                    self.r_side.record(pair.r).len(),
                    self.s_side.record(pair.s).len(),
                )?;
                if ub < theta {
                    self.suspend(i, state, ub);
                    continue;
                }
            }
            states.push(state);
        }
        self.peak_candidates = self.peak_candidates.max(states.len());

        let verdicts: Vec<(LazyEvalState, Verdict)> = if states.len() >= PARALLEL_VERIFY_MIN {
            states
                .into_par_iter()
                .map(|mut state| {
                    let verdict =
                        verify(&mut state, &theta, &self.measure, self.r_side, self.s_side)?;
                    Ok((state, verdict))
                })
                .collect::<Result<_>>()?
        } else {
            states
                .into_iter()
                .map(|mut state| {
                    let verdict =
                        verify(&mut state, &theta, &self.measure, self.r_side, self.s_side)?;
                    Ok((state, verdict))
                })
                .collect::<Result<_>>()?
        };

        let mut groups: BTreeMap<ExactSim, Vec<Pair>> = BTreeMap::new();
        for (state, verdict) in verdicts {
            match verdict {
                Verdict::Join(sim) => {
                    groups.entry(sim).or_default().push(Pair::new(state.r, state.s));
                }
                Verdict::Postpone(ub) => self.suspend(i, state, ub),
            }
        }
        Ok(groups)
    }
}

/// Run the full preference-driven join.
pub fn run(r_side: &Dataset, s_side: &Dataset, config: &EngineConfig) -> Result<EngineOutcome> {
    if r_side.is_empty() || s_side.is_empty() {
        return Err(crate::Error::EmptyInput);
    }
    if r_side.records().iter().chain(s_side.records()).any(|rec| rec.is_empty()) {
        return Err(crate::Error::EmptySet);
    }

    let index = build_index(s_side);
    let (tops_r, tops_s) = compute_tops(r_side, s_side, &config.measure, &index)?;
    let pivotal = pivotal_thresholds(&tops_r, &tops_s, config.pivotal_mode);
    if pivotal.is_empty() {
        return Err(crate::Error::NoCandidatePairs);
    }

    let thresholds = pivotal.values().to_vec();
    let mut sweep = Sweep {
        r_side,
        s_side,
        measure: config.measure,
        thresholds: &thresholds,
        index: &index,
        probe: ProbeState::new(r_side.len()),
        buckets: vec![Vec::new(); thresholds.len()],
        length_filter: config.length_filter,
        peak_candidates: 0,
    };

    let mut preference = PreferenceState::new(config.preference, r_side.len(), s_side.len());
    let mut result = JoinResult::new();
    let mut per_threshold_scores = Vec::new();
    let mut best: Option<(ExactSim, i64)> = None;
    let mut terminated_early = false;
    let mut thresholds_evaluated = 0;

    for (i, &theta) in thresholds.iter().enumerate() {
        let groups = sweep.incremental_join(i)?;
        // Apply the whole interval in descending exact-similarity groups so
        // the score is read at join(theta) and every distinct value gets a
        // boundary.
        for (&sim, pairs) in groups.iter().rev() {
            let mut pairs = pairs.clone();
            pairs.sort_unstable();
            result.push_group(sim, &pairs)?;
            preference.apply_pairs(&pairs)?;
        }
        // Every pivotal threshold is itself a mutual-top pair similarity, so
        // its group is normally non-empty; still record the boundary if not,
        // since the score below is read at exactly this threshold.
        if groups.keys().next() != Some(&theta) {
            result.push_group(theta, &[])?;
        }
        let score = preference.score();
        let upper_bound = preference.upper_bound();
        per_threshold_scores.push(ThresholdScore { theta, score, upper_bound });
        thresholds_evaluated += 1;

        match best {
            None => best = Some((theta, score)),
            // Strict improvement keeps the largest threshold on ties.
            Some((_, best_score)) if score > best_score => best = Some((theta, score)),
            Some((_, best_score)) => {
                if config.early_termination && upper_bound <= best_score {
                    terminated_early = true;
                    break;
                }
            }
        }
    }

    let (theta_star, best_score) = best.expect("at least one threshold was evaluated");
    Ok(EngineOutcome {
        theta_star,
        best_score,
        result,
        pivotal,
        thresholds_evaluated,
        terminated_early,
        per_threshold_scores,
        peak_candidates: sweep.peak_candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Side, TokenSet};
    use crate::testdata::{toy_corpus, toy_r_ord, toy_s_ord};
    use crate::tokenize::{build_datasets, TokenizerConfig};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: u64, d: u64) -> ExactSim {
        ExactSim::rational(n, d).unwrap()
    }

    #[test]
    fn toy_max_groups_outcome() {
        let built = toy_corpus();
        let config =
            EngineConfig::new(SimilarityMeasure::jaccard(), PreferenceKind::MaxGroups);
        let outcome = run(&built.r, &built.s, &config).unwrap();

        assert_eq!(outcome.theta_star, rat(2, 3));
        assert_eq!(outcome.best_score, 3);
        assert_eq!(outcome.result.join_at(rat(2, 3)).unwrap().len(), 8);
        assert_eq!(outcome.thresholds_evaluated, 3);

        let scores: Vec<(ExactSim, i64)> = outcome
            .per_threshold_scores
            .iter()
            .map(|t| (t.theta, t.score))
            .collect();
        assert_eq!(scores, vec![(rat(1, 1), 1), (rat(4, 5), 2), (rat(2, 3), 3)]);

        // The first join^= slice is the unique similarity-1 pair.
        let slices: Vec<(ExactSim, Vec<Pair>)> = outcome
            .result
            .slices()
            .map(|(t, p)| (t, p.to_vec()))
            .collect();
        assert_eq!(
            slices[0],
            (rat(1, 1), vec![Pair::new(toy_r_ord("db_ms"), toy_s_ord("dbms_"))])
        );
        // The 0.8 slice holds its three pairs, including the non-mutual one
        // whose similarity equals the pivotal threshold exactly.
        assert_eq!(slices[1].0, rat(4, 5));
        assert_eq!(slices[1].1.len(), 3);
        assert!(slices[1]
            .1
            .contains(&Pair::new(toy_r_ord("db_ms"), toy_s_ord("dbms"))));
        // 0.75 is not pivotal but still gets a boundary inside the interval.
        assert_eq!(slices[2].0, rat(3, 4));
        assert_eq!(
            slices[2].1,
            vec![Pair::new(toy_r_ord("dbs"), toy_s_ord("dbms"))]
        );
        assert_eq!(outcome.result.join_at(rat(3, 4)).unwrap().len(), 5);
    }

    #[test]
    fn toy_min_out_join_takes_largest_tied_threshold() {
        let built = toy_corpus();
        let config =
            EngineConfig::new(SimilarityMeasure::jaccard(), PreferenceKind::MinOutJoin);
        let outcome = run(&built.r, &built.s, &config).unwrap();
        assert_eq!(outcome.theta_star, rat(4, 5));
        assert_eq!(outcome.best_score, 2);
        assert_eq!(outcome.result.join_at(rat(4, 5)).unwrap().len(), 4);

        let mut ids = outcome.join_at_star(&built.r, &built.s);
        ids.sort_unstable();
        assert_eq!(
            ids,
            vec![
                ("db_ms", "dbms"),
                ("db_ms", "dbms_"),
                ("vldb", "pvldb"),
                ("vldb", "vl_db"),
            ]
        );
    }

    #[test]
    fn identical_single_records() {
        let rows = vec![("x".to_string(), "abc".to_string())];
        let built = build_datasets(&rows, &rows, &TokenizerConfig::qgrams(1));
        for kind in [PreferenceKind::MaxGroups, PreferenceKind::MinOutJoin] {
            let config = EngineConfig::new(SimilarityMeasure::jaccard(), kind);
            let outcome = run(&built.r, &built.s, &config).unwrap();
            assert!(outcome.theta_star.is_one());
            assert_eq!(outcome.best_score, 1);
        }
    }

    #[test]
    fn empty_and_disjoint_inputs_error() {
        let empty = Dataset::new(Side::R, vec![], vec![]);
        let one = Dataset::new(
            Side::S,
            vec![TokenSet::new(vec![0])],
            vec!["a".into()],
        );
        let config = EngineConfig::new(SimilarityMeasure::jaccard(), PreferenceKind::MaxGroups);
        assert!(matches!(run(&empty, &one, &config), Err(crate::Error::EmptyInput)));

        let r = Dataset::new(Side::R, vec![TokenSet::new(vec![0])], vec!["a".into()]);
        let s = Dataset::new(Side::S, vec![TokenSet::new(vec![1])], vec!["b".into()]);
        assert!(matches!(run(&r, &s, &config), Err(crate::Error::NoCandidatePairs)));
    }

    fn random_sides(rng: &mut StdRng) -> (Dataset, Dataset) {
        let gen_side = |rng: &mut StdRng, side: Side| {
            let n = rng.gen_range(1..15);
            let sets: Vec<TokenSet> = (0..n)
                .map(|_| {
                    let len = rng.gen_range(1..7);
                    TokenSet::from_unsorted((0..len).map(|_| rng.gen_range(0u32..10)).collect())
                })
                .collect();
            let ids = (0..sets.len()).map(|i| format!("{i}")).collect();
            Dataset::new(side, sets, ids)
        };
        (gen_side(rng, Side::R), gen_side(rng, Side::S))
    }

    #[test]
    fn length_filter_does_not_change_the_outcome() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..50 {
            let (r, s) = random_sides(&mut rng);
            let mut config =
                EngineConfig::new(SimilarityMeasure::jaccard(), PreferenceKind::MaxGroups);
            let Ok(with_filter) = run(&r, &s, &config) else { continue };
            config.length_filter = false;
            let without_filter = run(&r, &s, &config).unwrap();
            assert_eq!(with_filter.theta_star, without_filter.theta_star);
            assert_eq!(with_filter.best_score, without_filter.best_score);
            assert_eq!(
                with_filter.result.join_at(with_filter.theta_star).unwrap(),
                without_filter.result.join_at(without_filter.theta_star).unwrap()
            );
        }
    }

    #[test]
    fn outcome_is_invariant_under_record_permutation() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..30 {
            let (r, s) = random_sides(&mut rng);
            let config =
                EngineConfig::new(SimilarityMeasure::dice(), PreferenceKind::MinOutJoin);
            let Ok(base) = run(&r, &s, &config) else { continue };

            // Reverse the R records and map the result back.
            let n = r.len();
            let flipped = Dataset::new(
                Side::R,
                r.records().iter().rev().cloned().collect(),
                (0..n).rev().map(|i| r.external_id(i as u32).to_owned()).collect(),
            );
            let permuted = run(&flipped, &s, &config).unwrap();
            assert_eq!(base.theta_star, permuted.theta_star);
            assert_eq!(base.best_score, permuted.best_score);

            let mut base_pairs: Vec<Pair> =
                base.result.join_at(base.theta_star).unwrap().to_vec();
            let mut mapped: Vec<Pair> = permuted
                .result
                .join_at(permuted.theta_star)
                .unwrap()
                .iter()
                .map(|p| Pair::new((n - 1) as u32 - p.r, p.s))
                .collect();
            base_pairs.sort_unstable();
            mapped.sort_unstable();
            assert_eq!(base_pairs, mapped);
        }
    }
}
