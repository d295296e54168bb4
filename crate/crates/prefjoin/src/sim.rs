//! The five set-based similarity measures with exact arithmetic, the
//! overlap thresholds and prefix lengths used by prefix filtering, and the
//! lazy min/max bound machinery used to verify candidates incrementally.

use crate::model::{ExactSim, SimKind, TokenSet};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Jaccard,
    Overlap,
    Dice,
    Cosine,
    Tversky,
}

/// A similarity measure. With overlap `o = |r ∩ s|`:
///
/// - Jaccard: `o / (|r| + |s| - o)`
/// - Overlap: `o / max(|r|, |s|)`
/// - Dice:    `2o / (|r| + |s|)`
/// - Cosine:  `o / sqrt(|r| * |s|)`, tracked exactly as the square
///   `o^2 / (|r| * |s|)`
/// - Tversky: `o / (alpha * |r| + (1 - alpha) * |s|)`
///
/// Tversky is asymmetric: `alpha` always weights the R-side record.
/// Swapping the input collections changes Tversky results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimilarityMeasure {
    kind: MeasureKind,
    /// Reduced `(p, q)` with `0 < p < q`, meaning `alpha = p/q`. Tversky only.
    alpha: Option<(u64, u64)>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

impl SimilarityMeasure {
    pub fn jaccard() -> Self {
        SimilarityMeasure { kind: MeasureKind::Jaccard, alpha: None }
    }

    pub fn overlap() -> Self {
        SimilarityMeasure { kind: MeasureKind::Overlap, alpha: None }
    }

    pub fn dice() -> Self {
        SimilarityMeasure { kind: MeasureKind::Dice, alpha: None }
    }

    pub fn cosine() -> Self {
        SimilarityMeasure { kind: MeasureKind::Cosine, alpha: None }
    }

    /// Tversky with `alpha = p/q`. Requires `0 < p/q < 1` exactly; the
    /// fraction is stored reduced.
    pub fn tversky(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 || p >= q {
            return Err(Error::Overflow("tversky alpha must satisfy 0 < p/q < 1"));
        }
        let g = gcd(p, q);
        Ok(SimilarityMeasure { kind: MeasureKind::Tversky, alpha: Some((p / g, q / g)) })
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn alpha(&self) -> Option<(u64, u64)> {
        self.alpha
    }

    /// The value kind this measure produces.
    pub fn sim_kind(&self) -> SimKind {
        match self.kind {
            MeasureKind::Cosine => SimKind::SquaredRational,
            _ => SimKind::Rational,
        }
    }

    fn alpha_parts(&self) -> (u128, u128) {
        let (p, q) = self.alpha.expect("tversky requires alpha");
        (p as u128, q as u128)
    }
}

/// Intersection size of two token sets by ordered merge.
pub fn intersection_size(r: &TokenSet, s: &TokenSet) -> usize {
    let (a, b) = (r.tokens(), s.tokens());
    let (mut i, mut j, mut o) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                o += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    o
}

/// The exact similarity value implied by an overlap of `o` between records
/// of the given lengths.
pub fn similarity_from_overlap(
    measure: &SimilarityMeasure,
    o: usize,
    r_len: usize,
    s_len: usize,
) -> Result<ExactSim> {
    if r_len == 0 || s_len == 0 {
        return Err(Error::EmptySet);
    }
    debug_assert!(o <= r_len.min(s_len));
    let (o, rl, sl) = (o as u128, r_len as u128, s_len as u128);
    match measure.kind {
        MeasureKind::Jaccard => ExactSim::rational_wide(o, rl + sl - o),
        MeasureKind::Overlap => ExactSim::rational_wide(o, rl.max(sl)),
        MeasureKind::Dice => ExactSim::rational_wide(2 * o, rl + sl),
        MeasureKind::Cosine => ExactSim::squared_wide(o * o, rl * sl),
        MeasureKind::Tversky => {
            let (p, q) = measure.alpha_parts();
            ExactSim::rational_wide(o * q, p * rl + (q - p) * sl)
        }
    }
}

/// Exact similarity of two token sets.
pub fn similarity(measure: &SimilarityMeasure, r: &TokenSet, s: &TokenSet) -> Result<ExactSim> {
    if r.is_empty() || s.is_empty() {
        return Err(Error::EmptySet);
    }
    similarity_from_overlap(measure, intersection_size(r, s), r.len(), s.len())
}

fn div_ceil(num: u128, den: u128) -> u64 {
    num.div_ceil(den) as u64
}

/// Minimum overlap `t_theta` implied by `sim(r, s) >= theta` for a record of
/// length `r_len` on the probing side. Computed with exact ceilings:
///
/// - Jaccard, Overlap: `ceil(theta * |r|)`
/// - Dice:             `ceil(theta/2 * |r|)`
/// - Cosine:           `ceil(theta^2 * |r|)`
/// - Tversky:          `ceil(theta * alpha * |r|)`
pub fn overlap_threshold(measure: &SimilarityMeasure, theta: &ExactSim, r_len: usize) -> u64 {
    debug_assert_eq!(theta.kind(), measure.sim_kind());
    let a = theta.numerator() as u128;
    let b = theta.denominator() as u128;
    let l = r_len as u128;
    if a == 0 {
        return 0;
    }
    match measure.kind {
        MeasureKind::Jaccard | MeasureKind::Overlap => div_ceil(a * l, b),
        MeasureKind::Dice => div_ceil(a * l, 2 * b),
        // theta is stored squared for cosine, so a/b already is theta^2.
        MeasureKind::Cosine => div_ceil(a * l, b),
        MeasureKind::Tversky => {
            let (p, q) = measure.alpha_parts();
            div_ceil(a * p * l, b * q)
        }
    }
}

/// Prefix length `|r| - t_theta + 1`, clamped to `[0, |r|]`.
pub fn prefix_length(measure: &SimilarityMeasure, theta: &ExactSim, r_len: usize) -> usize {
    let t = overlap_threshold(measure, theta, r_len);
    (r_len as u64 + 1).saturating_sub(t).min(r_len as u64) as usize
}

/// Largest similarity two records of the given lengths can reach (overlap
/// equal to the shorter length). Used as a length-only upper bound.
pub fn length_bound(measure: &SimilarityMeasure, r_len: usize, s_len: usize) -> Result<ExactSim> {
    similarity_from_overlap(measure, r_len.min(s_len), r_len, s_len)
}

/// Scan state for lazily evaluating one candidate pair: positions `i`, `j`
/// into the two sorted token sequences and the overlap seen so far.
/// `bound_min = overlap` and `bound_max = overlap + min(|r|-i, |s|-j)`
/// sandwich the true overlap and converge when either side is exhausted.
#[derive(Debug, Clone, Copy)]
pub struct LazyEvalState {
    pub r: u32,
    pub s: u32,
    i: u32,
    j: u32,
    overlap: u32,
}

impl LazyEvalState {
    pub fn new(r: u32, s: u32) -> Self {
        LazyEvalState { r, s, i: 0, j: 0, overlap: 0 }
    }

    pub fn positions(&self) -> (usize, usize) {
        (self.i as usize, self.j as usize)
    }

    pub fn bound_min(&self) -> usize {
        self.overlap as usize
    }

    pub fn bound_max(&self, r: &TokenSet, s: &TokenSet) -> usize {
        self.overlap as usize + (r.len() - self.i as usize).min(s.len() - self.j as usize)
    }

    pub fn converged(&self, r: &TokenSet, s: &TokenSet) -> bool {
        self.i as usize == r.len() || self.j as usize == s.len()
    }

    /// The exact overlap; only meaningful once converged.
    pub fn exact_overlap(&self, r: &TokenSet, s: &TokenSet) -> usize {
        debug_assert!(self.converged(r, s));
        self.overlap as usize
    }

    /// One ordered-merge step. Panics if either side is already exhausted.
    pub fn advance(&mut self, r: &TokenSet, s: &TokenSet) {
        assert!(!self.converged(r, s), "advance on an exhausted scan");
        let a = r.get(self.i as usize);
        let b = s.get(self.j as usize);
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => {
                self.overlap += 1;
                self.i += 1;
                self.j += 1;
            }
            std::cmp::Ordering::Less => self.i += 1,
            std::cmp::Ordering::Greater => self.j += 1,
        }
    }

    /// Current `(sim_min, sim_max)`: the similarity formula evaluated with
    /// `bound_min` and `bound_max` substituted for the overlap (Jaccard's
    /// denominator uses the same bound as its numerator).
    pub fn bounds(
        &self,
        measure: &SimilarityMeasure,
        r: &TokenSet,
        s: &TokenSet,
    ) -> Result<(ExactSim, ExactSim)> {
        let lo = similarity_from_overlap(measure, self.bound_min(), r.len(), s.len())?;
        let hi = similarity_from_overlap(measure, self.bound_max(r, s), r.len(), s.len())?;
        Ok((lo, hi))
    }
}

pub const ALL_MEASURE_NAMES: [&str; 5] = ["jaccard", "overlap", "dice", "cosine", "tversky"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::{build_dictionary, disambiguate, encode, tokenize_string, TokenizerConfig};
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Encode a list of strings as 1-gram token sets over a shared dictionary.
    fn char_sets(texts: &[&str]) -> Vec<TokenSet> {
        let cfg = TokenizerConfig::qgrams(1);
        let records: Vec<_> = texts
            .iter()
            .map(|t| disambiguate(&tokenize_string(t, &cfg)))
            .collect();
        let dict = build_dictionary(&records, &[]);
        records.iter().map(|r| encode(r, &dict).unwrap()).collect()
    }

    fn all_measures() -> Vec<SimilarityMeasure> {
        vec![
            SimilarityMeasure::jaccard(),
            SimilarityMeasure::overlap(),
            SimilarityMeasure::dice(),
            SimilarityMeasure::cosine(),
            SimilarityMeasure::tversky(1, 10).unwrap(),
        ]
    }

    #[test]
    fn jaccard_known_values() {
        let sets = char_sets(&["dblp_", "_db", "db_ms", "dbms_", "dbs", "dbms"]);
        let m = SimilarityMeasure::jaccard();
        assert_eq!(
            similarity(&m, &sets[0], &sets[1]).unwrap(),
            ExactSim::rational(3, 5).unwrap()
        );
        assert_eq!(
            similarity(&m, &sets[2], &sets[3]).unwrap(),
            ExactSim::rational(1, 1).unwrap()
        );
        assert_eq!(
            similarity(&m, &sets[4], &sets[5]).unwrap(),
            ExactSim::rational(3, 4).unwrap()
        );
    }

    #[test]
    fn self_similarity_is_one_for_every_measure() {
        let sets = char_sets(&["dblp_", "a", "xyzzy"]);
        for m in all_measures() {
            for s in &sets {
                assert!(similarity(&m, s, s).unwrap().is_one(), "{:?}", m.kind());
            }
        }
    }

    #[test]
    fn empty_set_similarity_is_an_error() {
        let sets = char_sets(&["ab"]);
        let empty = TokenSet::new(vec![]);
        let m = SimilarityMeasure::jaccard();
        assert_eq!(similarity(&m, &empty, &sets[0]).unwrap_err(), Error::EmptySet);
        assert_eq!(similarity(&m, &sets[0], &empty).unwrap_err(), Error::EmptySet);
    }

    #[test]
    fn overlap_threshold_known_values() {
        let jac = SimilarityMeasure::jaccard();
        let theta = ExactSim::rational(3, 5).unwrap();
        assert_eq!(overlap_threshold(&jac, &theta, 5), 3);
        let one = ExactSim::rational(1, 1).unwrap();
        assert_eq!(overlap_threshold(&jac, &one, 7), 7);

        let tv = SimilarityMeasure::tversky(1, 10).unwrap();
        let half = ExactSim::rational(1, 2).unwrap();
        assert_eq!(overlap_threshold(&tv, &half, 20), 1);

        let cos = SimilarityMeasure::cosine();
        let theta_sq = ExactSim::squared(1, 2).unwrap();
        assert_eq!(overlap_threshold(&cos, &theta_sq, 8), 4);
    }

    #[test]
    fn prefix_length_known_values() {
        let jac = SimilarityMeasure::jaccard();
        let one = ExactSim::rational(1, 1).unwrap();
        assert_eq!(prefix_length(&jac, &one, 9), 1);
        // t = 3 at |r| = 5 gives 5 - 3 + 1 = 3.
        let theta = ExactSim::rational(3, 5).unwrap();
        assert_eq!(prefix_length(&jac, &theta, 5), 3);
        // Tiny theta with t = 1 probes the whole record.
        let tiny = ExactSim::rational(1, 1000).unwrap();
        assert_eq!(prefix_length(&jac, &tiny, 5), 5);
    }

    /// All subsets of a small universe, as token sets.
    fn all_subsets(universe: u32) -> Vec<TokenSet> {
        (1u32..(1 << universe))
            .map(|mask| {
                TokenSet::new((0..universe).filter(|b| mask & (1 << b) != 0).collect())
            })
            .collect()
    }

    #[test]
    fn overlap_threshold_is_sound_exhaustively() {
        // For every pair over a small universe and every threshold drawn from
        // the realized similarity values: sim >= theta implies o >= t_theta.
        let sets = all_subsets(6);
        for m in all_measures() {
            let mut sims = HashSet::new();
            for r in &sets {
                for s in &sets {
                    sims.insert(similarity(&m, r, s).unwrap());
                }
            }
            for theta in &sims {
                if theta.is_zero() {
                    continue;
                }
                for r in &sets {
                    let t = overlap_threshold(&m, theta, r.len());
                    for s in &sets {
                        let o = intersection_size(r, s);
                        let sim = similarity(&m, r, s).unwrap();
                        if sim >= *theta {
                            assert!(
                                o as u64 >= t,
                                "{:?}: sim {} >= {} but o {} < t {}",
                                m.kind(),
                                sim,
                                theta,
                                o,
                                t
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cosine_threshold_sound_at_full_universe() {
        // theta^2 = 1/2 with |r| = 8 demands overlap >= 4; no subset pair
        // over an 8-token universe with sim >= theta may fall short.
        let cos = SimilarityMeasure::cosine();
        let theta = ExactSim::squared(1, 2).unwrap();
        let r = TokenSet::new((0..8).collect());
        assert_eq!(overlap_threshold(&cos, &theta, r.len()), 4);
        for s in all_subsets(8) {
            let sim = similarity(&cos, &r, &s).unwrap();
            if sim >= theta {
                assert!(intersection_size(&r, &s) >= 4);
            }
        }
    }

    #[test]
    fn merge_matches_hash_intersection() {
        let sets = all_subsets(6);
        for r in sets.iter().step_by(7) {
            for s in sets.iter().step_by(5) {
                let hash_r: HashSet<u32> = r.tokens().iter().copied().collect();
                let expected = s.tokens().iter().filter(|t| hash_r.contains(t)).count();
                assert_eq!(intersection_size(r, s), expected);
            }
        }
    }

    #[test]
    fn bounds_converge_on_full_scan() {
        let sets = char_sets(&["dbs", "dbms"]);
        let m = SimilarityMeasure::jaccard();
        let (r, s) = (&sets[0], &sets[1]);
        let mut st = LazyEvalState::new(0, 0);
        while !st.converged(r, s) {
            st.advance(r, s);
        }
        let (lo, hi) = st.bounds(&m, r, s).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo, similarity(&m, r, s).unwrap());
    }

    #[test]
    fn initial_bounds_are_trivial() {
        let sets = char_sets(&["abc", "abcd"]);
        let (r, s) = (&sets[0], &sets[1]);
        for m in all_measures() {
            let st = LazyEvalState::new(0, 0);
            let (lo, hi) = st.bounds(&m, r, s).unwrap();
            assert!(lo.is_zero());
            assert_eq!(hi, length_bound(&m, r.len(), s.len()).unwrap());
        }
    }

    #[test]
    fn identical_and_disjoint_scans() {
        let r = TokenSet::new(vec![1, 2, 3, 4]);
        let mut st = LazyEvalState::new(0, 0);
        while !st.converged(&r, &r) {
            st.advance(&r, &r);
        }
        assert_eq!(st.exact_overlap(&r, &r), 4);

        let s = TokenSet::new(vec![5, 6, 7]);
        let mut st = LazyEvalState::new(0, 0);
        while !st.converged(&r, &s) {
            st.advance(&r, &s);
            assert_eq!(st.bound_min(), 0);
        }
    }

    #[test]
    fn squared_domain_comparisons_match_float_sqrt() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..1_000_000 {
            let d1 = rng.gen_range(1u64..5000);
            let n1 = rng.gen_range(0..=d1);
            let d2 = rng.gen_range(1u64..5000);
            let n2 = rng.gen_range(0..=d2);
            let a = ExactSim::squared(n1, d1).unwrap();
            let b = ExactSim::squared(n2, d2).unwrap();
            let fa = (n1 as f64 / d1 as f64).sqrt();
            let fb = (n2 as f64 / d2 as f64).sqrt();
            if (fa - fb).abs() > 1e-9 {
                assert_eq!(a < b, fa < fb, "sqrt({n1}/{d1}) vs sqrt({n2}/{d2})");
            }
        }
    }

    proptest! {
        // At every scan step: sim_min never decreases, sim_max never
        // increases, and the true similarity stays sandwiched.
        #[test]
        fn lazy_bounds_tighten_monotonically(
            a in proptest::collection::btree_set(0u32..16, 1..10),
            b in proptest::collection::btree_set(0u32..16, 1..10),
            midx in 0usize..5,
        ) {
            let r = TokenSet::new(a.into_iter().collect());
            let s = TokenSet::new(b.into_iter().collect());
            let m = all_measures()[midx];
            let truth = similarity(&m, &r, &s).unwrap();
            let mut st = LazyEvalState::new(0, 0);
            let (mut lo, mut hi) = st.bounds(&m, &r, &s).unwrap();
            while !st.converged(&r, &s) {
                st.advance(&r, &s);
                let (nlo, nhi) = st.bounds(&m, &r, &s).unwrap();
                prop_assert!(nlo >= lo);
                prop_assert!(nhi <= hi);
                prop_assert!(nlo <= truth && truth <= nhi);
                lo = nlo;
                hi = nhi;
            }
            prop_assert_eq!(lo, truth);
            prop_assert_eq!(hi, truth);
        }

        // Cosine comparisons in the squared domain agree with float sqrt
        // comparisons whenever the float gap is unambiguous.
        #[test]
        fn cosine_squared_order_matches_floats(
            n1 in 0u64..1000, d1 in 1u64..1000,
            n2 in 0u64..1000, d2 in 1u64..1000,
        ) {
            prop_assume!(n1 <= d1 && n2 <= d2);
            let a = ExactSim::squared(n1, d1).unwrap();
            let b = ExactSim::squared(n2, d2).unwrap();
            let fa = (n1 as f64 / d1 as f64).sqrt();
            let fb = (n2 as f64 / d2 as f64).sqrt();
            if (fa - fb).abs() > 1e-9 {
                prop_assert_eq!(a < b, fa < fb);
            }
            // Exact equality must hold exactly when the fractions match.
            prop_assert_eq!(a == b, n1 * d2 == n2 * d1);
        }
    }
}
