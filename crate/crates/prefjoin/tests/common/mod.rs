//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use prefjoin::model::{Dataset, Side, TokenSet};
use prefjoin::tokenize::{build_datasets, CorpusBuild, TokenizerConfig};
use prefjoin::SimilarityMeasure;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const TOY_R: [&str; 5] = ["db_ms", "vldb", "dbs", "db", "dblp_"];
pub const TOY_S: [&str; 5] = ["dbms_", "dbms", "pvldb", "vl_db", "_db"];

pub fn toy_corpus() -> CorpusBuild {
    let rows = |texts: &[&str]| -> Vec<(String, String)> {
        texts.iter().map(|t| (t.to_string(), t.to_string())).collect()
    };
    build_datasets(&rows(&TOY_R), &rows(&TOY_S), &TokenizerConfig::qgrams(1))
}

/// One randomly generated pair of datasets: up to 30 records per side over a
/// token universe of at most 12, record lengths at most 8.
#[derive(Debug, Clone)]
pub struct Instance {
    pub r: Dataset,
    pub s: Dataset,
}

impl Instance {
    /// Readable dump for counterexample reports.
    pub fn dump(&self) -> String {
        let side = |d: &Dataset| {
            d.records()
                .iter()
                .map(|rec| format!("{:?}", rec.tokens()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!("R = [{}]\nS = [{}]", side(&self.r), side(&self.s))
    }
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let universe = rng.gen_range(3..=12usize);
    let mut gen_side = |side: Side| {
        let n = rng.gen_range(1..=30usize);
        let sets: Vec<TokenSet> = (0..n)
            .map(|_| {
                let len = rng.gen_range(1..=8.min(universe));
                let tokens = rand::seq::index::sample(&mut rng, universe, len)
                    .into_iter()
                    .map(|t| t as u32)
                    .collect();
                TokenSet::from_unsorted(tokens)
            })
            .collect();
        let ids = (0..sets.len()).map(|i| format!("{i}")).collect();
        Dataset::new(side, sets, ids)
    };
    let r = gen_side(Side::R);
    let s = gen_side(Side::S);
    Instance { r, s }
}

/// The five measures, with the Tversky alpha rotated per instance.
pub fn measures_for(seed: u64) -> Vec<SimilarityMeasure> {
    let alpha = [(1, 10), (1, 3), (2, 3)][(seed % 3) as usize];
    vec![
        SimilarityMeasure::jaccard(),
        SimilarityMeasure::overlap(),
        SimilarityMeasure::dice(),
        SimilarityMeasure::cosine(),
        SimilarityMeasure::tversky(alpha.0, alpha.1).unwrap(),
    ]
}

/// Synthetic near-duplicate corpus for the threshold-count smoke benchmark:
/// every R record has one S-side copy with exactly a fifth of its tokens
/// replaced, so all duplicate pairs share Jaccard 2/3 while cross noise
/// scatters over many small distinct values.
pub fn smoke_instance(per_side: usize, seed: u64) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let universe = 30_000u32;
    let mut r_sets = Vec::with_capacity(per_side);
    let mut s_sets = Vec::with_capacity(per_side);
    for _ in 0..per_side {
        let len = 5 * rng.gen_range(3..=8usize);
        let mut tokens: Vec<u32> = Vec::with_capacity(len);
        let mut used = std::collections::HashSet::new();
        while tokens.len() < len {
            let t = rng.gen_range(0..universe);
            if used.insert(t) {
                tokens.push(t);
            }
        }
        let r_set = TokenSet::from_unsorted(tokens.clone());

        let replaced = len / 5;
        let mut copy = tokens;
        for slot in copy.iter_mut().take(replaced) {
            loop {
                let t = rng.gen_range(0..universe);
                if used.insert(t) {
                    *slot = t;
                    break;
                }
            }
        }
        s_sets.push(TokenSet::from_unsorted(copy));
        r_sets.push(r_set);
    }
    let ids = |n: usize| (0..n).map(|i| format!("{i}")).collect::<Vec<_>>();
    Instance {
        r: Dataset::new(Side::R, r_sets, ids(per_side)),
        s: Dataset::new(Side::S, s_sets, ids(per_side)),
    }
}
