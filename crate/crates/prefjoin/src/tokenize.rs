//! String-to-token-set conversion: tokenizer selection, multiset
//! disambiguation, dictionary construction, and the document-frequency
//! global ordering used by prefix filtering.
//!
//! Tokenization produces a *bag* (duplicates preserved). The k-th occurrence
//! of a token `t` is then rewritten to the pair `(t, k)`, which makes the bag
//! a plain set while preserving multiset intersection sizes: the occurrence
//! pairs shared by two records are exactly `min(count_r(t), count_s(t))` for
//! each surface token `t`.

use std::collections::HashMap;

use crate::model::{Dataset, Side, TokenSet};
use crate::{Error, Result};

/// Tokenizer selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenizerMode {
    /// Split on whitespace runs.
    Words,
    /// All contiguous character substrings of length `q`.
    QGrams(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub mode: TokenizerMode,
    pub case_fold: bool,
    pub whitespace_normalize: bool,
}

impl TokenizerConfig {
    /// Word tokens with case folding and whitespace normalization on, the
    /// usual setup for natural-language fields.
    pub fn words() -> Self {
        TokenizerConfig { mode: TokenizerMode::Words, case_fold: true, whitespace_normalize: true }
    }

    /// Character q-grams with no folding or normalization.
    pub fn qgrams(q: u32) -> Self {
        assert!(q >= 1, "q-gram length must be at least 1");
        TokenizerConfig {
            mode: TokenizerMode::QGrams(q),
            case_fold: false,
            whitespace_normalize: false,
        }
    }

    pub fn with_case_fold(mut self, on: bool) -> Self {
        self.case_fold = on;
        self
    }

    pub fn with_whitespace_normalize(mut self, on: bool) -> Self {
        self.whitespace_normalize = on;
        self
    }
}

/// Convert raw text to a bag of surface tokens. Duplicates are preserved;
/// empty text yields an empty bag.
pub fn tokenize_string(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let mut owned = text.to_owned();
    if config.case_fold {
        owned = owned.to_lowercase();
    }
    if config.whitespace_normalize {
        owned = owned.split_whitespace().collect::<Vec<_>>().join(" ");
    }
    match config.mode {
        TokenizerMode::Words => owned.split_whitespace().map(str::to_owned).collect(),
        TokenizerMode::QGrams(q) => {
            let q = q as usize;
            let chars: Vec<char> = owned.chars().collect();
            if chars.is_empty() {
                Vec::new()
            } else if chars.len() < q {
                // Strings shorter than q become a single whole-string gram;
                // an empty token set would leave similarity undefined.
                vec![owned]
            } else {
                chars.windows(q).map(|w| w.iter().collect()).collect()
            }
        }
    }
}

/// A disambiguated token: surface string plus 1-based occurrence index.
pub type OccToken = (String, u32);

/// Rewrite a bag into a duplicate-free set of (token, occurrence) pairs.
pub fn disambiguate(bag: &[String]) -> Vec<OccToken> {
    let mut counts: HashMap<&str, u32> = HashMap::new();
    bag.iter()
        .map(|t| {
            let k = counts.entry(t.as_str()).or_insert(0);
            *k += 1;
            (t.clone(), *k)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct DictEntry {
    surface: String,
    occ: u32,
    doc_freq: u32,
}

/// Token dictionary over `R ∪ S`: assigns each disambiguated token an id
/// equal to its global rank. Ranks ascend by document frequency (rarest
/// first) with ties broken by surface string, then occurrence index, so
/// construction is deterministic.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    ids: HashMap<OccToken, u32>,
    entries: Vec<DictEntry>,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id_of(&self, surface: &str, occ: u32) -> Option<u32> {
        self.ids.get(&(surface.to_owned(), occ)).copied()
    }

    pub fn doc_freq(&self, id: u32) -> u32 {
        self.entries[id as usize].doc_freq
    }

    pub fn surface(&self, id: u32) -> (&str, u32) {
        let e = &self.entries[id as usize];
        (&e.surface, e.occ)
    }
}

/// Build the dictionary from the disambiguated records of both sides.
/// `doc_freq[t]` counts the records (across R and S) containing `t`.
pub fn build_dictionary(r_records: &[Vec<OccToken>], s_records: &[Vec<OccToken>]) -> Dictionary {
    let mut freq: HashMap<&OccToken, u32> = HashMap::new();
    for record in r_records.iter().chain(s_records) {
        for token in record {
            *freq.entry(token).or_insert(0) += 1;
        }
    }
    let mut entries: Vec<DictEntry> = freq
        .into_iter()
        .map(|((surface, occ), doc_freq)| DictEntry {
            surface: surface.clone(),
            occ: *occ,
            doc_freq,
        })
        .collect();
    entries.sort_by(|a, b| {
        a.doc_freq
            .cmp(&b.doc_freq)
            .then_with(|| a.surface.cmp(&b.surface))
            .then_with(|| a.occ.cmp(&b.occ))
    });
    let ids = entries
        .iter()
        .enumerate()
        .map(|(rank, e)| ((e.surface.clone(), e.occ), rank as u32))
        .collect();
    Dictionary { ids, entries }
}

/// Encode one disambiguated record against a frozen dictionary. Ids are the
/// global ranks, so sorting them sorts the record by the global order.
pub fn encode(record: &[OccToken], dictionary: &Dictionary) -> Result<TokenSet> {
    let mut ids = Vec::with_capacity(record.len());
    for (surface, occ) in record {
        match dictionary.id_of(surface, *occ) {
            Some(id) => ids.push(id),
            None => return Err(Error::UnknownToken(surface.clone(), *occ)),
        }
    }
    ids.sort_unstable();
    Ok(TokenSet::new(ids))
}

/// A record dropped at ingestion because it tokenized to nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedRecord {
    pub side: Side,
    pub external_id: String,
}

/// Result of building both datasets from raw `(external_id, text)` rows.
#[derive(Debug)]
pub struct CorpusBuild {
    pub r: Dataset,
    pub s: Dataset,
    pub dictionary: Dictionary,
    pub skipped: Vec<SkippedRecord>,
}

/// Tokenize, disambiguate, and encode both sides against one shared
/// dictionary. Records that tokenize to an empty bag are excluded (Jaccard
/// and friends are undefined on empty sets) and reported in `skipped`.
pub fn build_datasets(
    r_rows: &[(String, String)],
    s_rows: &[(String, String)],
    config: &TokenizerConfig,
) -> CorpusBuild {
    let mut skipped = Vec::new();
    let mut prepare = |rows: &[(String, String)], side: Side| {
        let mut ids = Vec::new();
        let mut records = Vec::new();
        for (external_id, text) in rows {
            let bag = tokenize_string(text, config);
            if bag.is_empty() {
                skipped.push(SkippedRecord { side, external_id: external_id.clone() });
                continue;
            }
            ids.push(external_id.clone());
            records.push(disambiguate(&bag));
        }
        (ids, records)
    };
    let (r_ids, r_records) = prepare(r_rows, Side::R);
    let (s_ids, s_records) = prepare(s_rows, Side::S);

    let dictionary = build_dictionary(&r_records, &s_records);
    let encode_all = |records: &[Vec<OccToken>]| {
        records
            .iter()
            .map(|rec| encode(rec, &dictionary).expect("record was in the dictionary corpus"))
            .collect::<Vec<_>>()
    };
    CorpusBuild {
        r: Dataset::new(Side::R, encode_all(&r_records), r_ids),
        s: Dataset::new(Side::S, encode_all(&s_records), s_ids),
        dictionary,
        skipped,
    }
}
