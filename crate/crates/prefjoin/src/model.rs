//! Core domain types shared by every other module: records, token sets,
//! exact similarity values, datasets, and join results.
//!
//! Similarity values are exact rationals, never floats. The engine groups
//! joined pairs by exact similarity value, and float equality would corrupt
//! those group boundaries. Cosine values are kept in the squared domain
//! (`sim^2` is rational even when `sim` is not); since `x^2` is strictly
//! increasing on `[0, 1]`, ordering in the squared domain equals ordering of
//! the true values.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::{Error, Result};

/// Which input collection a record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    R,
    S,
}

/// Handle to one record of one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecordId {
    pub side: Side,
    pub ordinal: u32,
}

impl RecordId {
    pub fn r(ordinal: u32) -> Self {
        RecordId { side: Side::R, ordinal }
    }

    pub fn s(ordinal: u32) -> Self {
        RecordId { side: Side::S, ordinal }
    }
}

/// A joined `(r, s)` pair, as ordinals into the R and S datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub r: u32,
    pub s: u32,
}

impl Pair {
    pub fn new(r: u32, s: u32) -> Self {
        Pair { r, s }
    }
}

/// A record as a strictly ascending sequence of token ids under the global
/// token order. Multiset occurrences are disambiguated at tokenization time,
/// so there are never duplicate ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSet {
    tokens: Vec<u32>,
}

impl TokenSet {
    /// Build from an already sorted, duplicate-free token id sequence.
    ///
    /// Panics if the sequence is not strictly ascending; callers are expected
    /// to encode through the dictionary, which sorts.
    pub fn new(tokens: Vec<u32>) -> Self {
        assert!(
            tokens.windows(2).all(|w| w[0] < w[1]),
            "token ids must be strictly ascending"
        );
        TokenSet { tokens }
    }

    /// Convenience for tests and synthetic data: sorts and deduplicates.
    pub fn from_unsorted(mut tokens: Vec<u32>) -> Self {
        tokens.sort_unstable();
        tokens.dedup();
        TokenSet { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[u32] {
        &self.tokens
    }

    pub fn get(&self, i: usize) -> u32 {
        self.tokens[i]
    }
}

/// Maximum magnitude of a reduced numerator or denominator.
///
/// Keeping components within `u32` range makes every comparison below exact
/// in `u128` even across kinds (squaring a component stays within `u64`).
const COMPONENT_MAX: u64 = u32::MAX as u64;

/// How the stored fraction relates to the similarity value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimKind {
    /// The fraction is the similarity itself.
    Rational,
    /// The fraction is the *square* of the similarity (Cosine only).
    SquaredRational,
}

/// An exactly comparable similarity value in `[0, 1]`, stored as a fraction
/// in lowest terms. Comparison is by cross-multiplication in 128-bit
/// arithmetic; equality is exact, never epsilon-based.
#[derive(Debug, Clone, Copy)]
pub struct ExactSim {
    kind: SimKind,
    num: u64,
    den: u64,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

impl ExactSim {
    fn build(kind: SimKind, num: u128, den: u128) -> Result<Self> {
        assert!(den > 0, "similarity denominator must be positive");
        assert!(num <= den, "similarity must not exceed 1");
        // den > 0 makes gcd(num, den) positive even when num is 0.
        let g = gcd(num, den);
        let (num, den) = (num / g, den / g);
        if num > COMPONENT_MAX as u128 || den > COMPONENT_MAX as u128 {
            return Err(Error::Overflow("similarity fraction reduction"));
        }
        Ok(ExactSim { kind, num: num as u64, den: den as u64 })
    }

    /// A plain rational similarity `num / den`.
    pub fn rational(num: u64, den: u64) -> Result<Self> {
        Self::build(SimKind::Rational, num as u128, den as u128)
    }

    /// A squared-domain similarity: the true value is `sqrt(num / den)`.
    pub fn squared(num: u64, den: u64) -> Result<Self> {
        Self::build(SimKind::SquaredRational, num as u128, den as u128)
    }

    /// Like [`ExactSim::rational`] but accepting unreduced 128-bit products.
    pub fn rational_wide(num: u128, den: u128) -> Result<Self> {
        Self::build(SimKind::Rational, num, den)
    }

    /// Like [`ExactSim::squared`] but accepting unreduced 128-bit products.
    pub fn squared_wide(num: u128, den: u128) -> Result<Self> {
        Self::build(SimKind::SquaredRational, num, den)
    }

    pub fn zero(kind: SimKind) -> Self {
        ExactSim { kind, num: 0, den: 1 }
    }

    pub fn one(kind: SimKind) -> Self {
        ExactSim { kind, num: 1, den: 1 }
    }

    pub fn kind(&self) -> SimKind {
        self.kind
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// The fraction lifted to the squared domain, reduced.
    ///
    /// For a reduced `a/b`, `a^2/b^2` is also reduced, so this is canonical:
    /// two values are equal iff their squared forms are componentwise equal.
    fn squared_form(&self) -> (u64, u64) {
        match self.kind {
            SimKind::Rational => (self.num * self.num, self.den * self.den),
            SimKind::SquaredRational => (self.num, self.den),
        }
    }

    /// Approximate similarity for human-readable output only. All engine
    /// decisions compare exact fractions.
    pub fn to_f64(&self) -> f64 {
        let v = self.num as f64 / self.den as f64;
        match self.kind {
            SimKind::Rational => v,
            SimKind::SquaredRational => v.sqrt(),
        }
    }
}

impl PartialEq for ExactSim {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExactSim {}

impl PartialOrd for ExactSim {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactSim {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.kind == other.kind {
            let lhs = self.num as u128 * other.den as u128;
            let rhs = other.num as u128 * self.den as u128;
            lhs.cmp(&rhs)
        } else {
            // Mixed kinds compare in the squared domain, which is exact and
            // order-preserving on [0, 1].
            let (a, b) = self.squared_form();
            let (c, d) = other.squared_form();
            let lhs = a as u128 * d as u128;
            let rhs = c as u128 * b as u128;
            lhs.cmp(&rhs)
        }
    }
}

impl Hash for ExactSim {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Hash the canonical squared form so that cross-kind equal values
        // (e.g. 1/2 and sqrt(1/4)) hash identically.
        let (n, d) = self.squared_form();
        n.hash(state);
        d.hash(state);
    }
}

impl fmt::Display for ExactSim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SimKind::Rational => {
                if self.den == 1 {
                    write!(f, "{}", self.num)
                } else {
                    write!(f, "{}/{}", self.num, self.den)
                }
            }
            SimKind::SquaredRational => {
                let sn = (self.num as f64).sqrt() as u64;
                let sd = (self.den as f64).sqrt() as u64;
                if sn * sn == self.num && sd * sd == self.den {
                    if sd == 1 {
                        write!(f, "{sn}")
                    } else {
                        write!(f, "{sn}/{sd}")
                    }
                } else {
                    write!(f, "sqrt({}/{})", self.num, self.den)
                }
            }
        }
    }
}

/// One side's records plus their user-facing identifiers.
#[derive(Debug, Clone)]
pub struct Dataset {
    side: Side,
    records: Vec<TokenSet>,
    external_ids: Vec<String>,
}

impl Dataset {
    pub fn new(side: Side, records: Vec<TokenSet>, external_ids: Vec<String>) -> Self {
        assert_eq!(records.len(), external_ids.len());
        Dataset { side, records, external_ids }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, ordinal: u32) -> &TokenSet {
        &self.records[ordinal as usize]
    }

    pub fn records(&self) -> &[TokenSet] {
        &self.records
    }

    pub fn external_id(&self, ordinal: u32) -> &str {
        &self.external_ids[ordinal as usize]
    }

    pub fn record_id(&self, ordinal: u32) -> RecordId {
        assert!((ordinal as usize) < self.records.len());
        RecordId { side: self.side, ordinal }
    }
}

/// Cumulative join result: an append-only pair list plus, for each evaluated
/// threshold in descending order, the prefix length of `pairs` that equals
/// `join(theta)`. The slice between two consecutive boundaries holds exactly
/// the pairs whose similarity equals the lower boundary's threshold.
#[derive(Debug, Clone, Default)]
pub struct JoinResult {
    pairs: Vec<Pair>,
    boundaries: Vec<(ExactSim, usize)>,
}

impl JoinResult {
    pub fn new() -> Self {
        JoinResult::default()
    }

    /// Append the pairs whose exact similarity is `theta`. Thresholds must
    /// strictly decrease across calls; an empty group still records a
    /// boundary (the join did not grow at that threshold).
    pub fn push_group(&mut self, theta: ExactSim, group: &[Pair]) -> Result<()> {
        if let Some(&(prev, _)) = self.boundaries.last() {
            if theta >= prev {
                return Err(Error::ThresholdOrder {
                    prev: prev.to_string(),
                    got: theta.to_string(),
                });
            }
        }
        self.pairs.extend_from_slice(group);
        self.boundaries.push((theta, self.pairs.len()));
        Ok(())
    }

    /// All pairs with similarity at least `theta`; `theta` must be one of the
    /// recorded boundary thresholds.
    pub fn join_at(&self, theta: ExactSim) -> Result<&[Pair]> {
        // Boundaries are stored in descending threshold order.
        let idx = self
            .boundaries
            .binary_search_by(|(t, _)| theta.cmp(t))
            .map_err(|_| Error::UnknownThreshold(theta.to_string()))?;
        Ok(&self.pairs[..self.boundaries[idx].1])
    }

    /// The `join^=` slices: each recorded threshold with exactly the pairs
    /// whose similarity equals it.
    pub fn slices(&self) -> impl Iterator<Item = (ExactSim, &[Pair])> {
        self.boundaries.iter().enumerate().map(|(i, &(theta, end))| {
            let start = if i == 0 { 0 } else { self.boundaries[i - 1].1 };
            (theta, &self.pairs[start..end])
        })
    }

    pub fn boundaries(&self) -> &[(ExactSim, usize)] {
        &self.boundaries
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }
}
