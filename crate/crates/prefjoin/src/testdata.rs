//! Shared fixtures for unit tests.

use crate::tokenize::{build_datasets, CorpusBuild, TokenizerConfig};

pub(crate) const TOY_R: [&str; 5] = ["db_ms", "vldb", "dbs", "db", "dblp_"];
pub(crate) const TOY_S: [&str; 5] = ["dbms_", "dbms", "pvldb", "vl_db", "_db"];

/// The ten-record running example, tokenized into character sets.
pub(crate) fn toy_corpus() -> CorpusBuild {
    let rows = |texts: &[&str]| -> Vec<(String, String)> {
        texts.iter().map(|t| (t.to_string(), t.to_string())).collect()
    };
    build_datasets(&rows(&TOY_R), &rows(&TOY_S), &TokenizerConfig::qgrams(1))
}

/// Ordinal of an external id within the toy sides.
pub(crate) fn toy_r_ord(id: &str) -> u32 {
    TOY_R.iter().position(|t| *t == id).unwrap() as u32
}

pub(crate) fn toy_s_ord(id: &str) -> u32 {
    TOY_S.iter().position(|t| *t == id).unwrap() as u32
}
