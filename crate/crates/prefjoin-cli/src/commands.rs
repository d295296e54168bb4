use std::collections::HashSet;
use std::io::{BufWriter, Write};
use std::time::Instant;

use prefjoin::model::ExactSim;
use prefjoin::preference::full_outer_join;
use prefjoin::tokenize::{build_datasets, CorpusBuild, TokenizerConfig};
use prefjoin::{oracle, EngineConfig, PivotalMode, PreferenceKind, SimilarityMeasure};

use crate::error::CliError;
use crate::ingest::{read_rows, read_truth, IngestOptions};
use crate::report::{append_line, EvalReport, JoinReport};
use crate::{EvalArgs, InputArgs, JoinArgs, MeasureArgs, OracleArgs, PivotalArg, PrefArg, SimArg};

const NULL: &str = "NULL";

fn parse_tokenizer(args: &InputArgs) -> Result<TokenizerConfig, CliError> {
    let mut config = if args.tokenizer == "words" {
        TokenizerConfig::words()
    } else if let Some(q) = args.tokenizer.strip_prefix("qgrams:") {
        let q: u32 = q
            .parse()
            .ok()
            .filter(|q| *q >= 1)
            .ok_or_else(|| CliError::Usage(format!("bad q-gram length in {:?}", args.tokenizer)))?;
        TokenizerConfig::qgrams(q)
    } else {
        return Err(CliError::Usage(format!(
            "unknown tokenizer {:?} (expected `words` or `qgrams:N`)",
            args.tokenizer
        )));
    };
    if let Some(fold) = args.case_fold {
        config = config.with_case_fold(fold);
    }
    if let Some(norm) = args.ws_norm {
        config = config.with_whitespace_normalize(norm);
    }
    Ok(config)
}

fn parse_measure(args: &MeasureArgs) -> Result<SimilarityMeasure, CliError> {
    match (args.sim, &args.alpha) {
        (SimArg::Tversky, Some(alpha)) => {
            let parts: Vec<&str> = alpha.split('/').collect();
            let parsed = match parts.as_slice() {
                [p, q] => p.parse::<u64>().ok().zip(q.parse::<u64>().ok()),
                _ => None,
            };
            let (p, q) = parsed.ok_or_else(|| {
                CliError::Usage(format!("--alpha must be an exact fraction P/Q, got {alpha:?}"))
            })?;
            SimilarityMeasure::tversky(p, q)
                .map_err(|_| CliError::Usage(format!("--alpha must satisfy 0 < P/Q < 1, got {alpha:?}")))
        }
        (SimArg::Tversky, None) => {
            Err(CliError::Usage("--sim tversky requires --alpha P/Q".into()))
        }
        (_, Some(_)) => Err(CliError::Usage("--alpha only applies to --sim tversky".into())),
        (SimArg::Jaccard, None) => Ok(SimilarityMeasure::jaccard()),
        (SimArg::Overlap, None) => Ok(SimilarityMeasure::overlap()),
        (SimArg::Dice, None) => Ok(SimilarityMeasure::dice()),
        (SimArg::Cosine, None) => Ok(SimilarityMeasure::cosine()),
    }
}

fn measure_name(args: &MeasureArgs) -> String {
    match &args.alpha {
        Some(alpha) => format!("tversky({alpha})"),
        None => format!("{:?}", args.sim).to_lowercase(),
    }
}

fn parse_delim(delim: Option<char>) -> Result<Option<u8>, CliError> {
    match delim {
        None => Ok(None),
        Some(c) if c.is_ascii() => Ok(Some(c as u8)),
        Some(c) => Err(CliError::Usage(format!("--delim must be a single ASCII character, got {c:?}"))),
    }
}

fn ingest_options(args: &InputArgs) -> Result<IngestOptions, CliError> {
    Ok(IngestOptions {
        id_col: args.id_col.clone(),
        text_cols: args.text_col.clone(),
        delim: parse_delim(args.delim)?,
    })
}

/// Ingest and encode both sides, reporting skipped empty records on stderr.
fn load_corpus(args: &InputArgs) -> Result<CorpusBuild, CliError> {
    let tokenizer = parse_tokenizer(args)?;
    let options = ingest_options(args)?;
    let left = read_rows(&args.left, &options)?;
    let right = read_rows(&args.right, &options)?;
    let built = build_datasets(&left, &right, &tokenizer);
    for skipped in &built.skipped {
        eprintln!(
            "prefjoin: warning: record {:?} ({:?} side) tokenized to nothing; excluded",
            skipped.external_id, skipped.side
        );
    }
    if built.r.is_empty() || built.s.is_empty() {
        return Err(CliError::Input("a side has no usable records after filtering".into()));
    }
    Ok(built)
}

fn render_pair_row(r_id: &str, s_id: &str, sim: ExactSim) -> String {
    format!("{r_id}\t{s_id}\t{sim}\t{:.6}", sim.to_f64())
}

pub fn join(args: JoinArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let measure = parse_measure(&args.measure)?;
    let built = load_corpus(&args.input)?;

    let mut config = EngineConfig::new(
        measure,
        match args.pref {
            PrefArg::Maxgroups => PreferenceKind::MaxGroups,
            PrefArg::Minoutjoin => PreferenceKind::MinOutJoin,
        },
    );
    config.pivotal_mode = match args.pivotal {
        PivotalArg::Mutual => PivotalMode::Mutual,
        PivotalArg::Relaxed => PivotalMode::Relaxed,
    };
    config.length_filter = !args.no_length_filter;
    config.early_termination = !args.no_early_termination;

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());

    let outcome = match prefjoin::engine::run(&built.r, &built.s, &config) {
        Ok(outcome) => outcome,
        Err(prefjoin::Error::NoCandidatePairs) => {
            eprintln!("prefjoin: warning: {}", prefjoin::Error::NoCandidatePairs);
            if args.outer {
                for i in 0..built.r.len() as u32 {
                    writeln!(out, "{}\t{NULL}\t{NULL}\t{NULL}", built.r.external_id(i))?;
                }
                for i in 0..built.s.len() as u32 {
                    writeln!(out, "{NULL}\t{}\t{NULL}\t{NULL}", built.s.external_id(i))?;
                }
                out.flush()?;
            }
            if let Some(path) = &args.report {
                append_line(
                    path,
                    &JoinReport {
                        command: "join",
                        measure: measure_name(&args.measure),
                        preference: format!("{:?}", args.pref).to_lowercase(),
                        theta_star: None,
                        theta_star_decimal: None,
                        best_score: None,
                        pairs: 0,
                        outer_rows: args.outer.then_some(built.r.len() + built.s.len()),
                        pivotal_count: 0,
                        thresholds_evaluated: 0,
                        terminated_early: false,
                        peak_candidates: 0,
                        skipped_records: built.skipped.len(),
                        wall_time_ms: started.elapsed().as_millis(),
                    },
                )?;
            }
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };

    // Pairs at theta*, sorted by (r ordinal, s ordinal) for byte-identical
    // output across runs.
    let mut matched: Vec<(u32, u32, ExactSim)> = outcome
        .star_slices()
        .iter()
        .flat_map(|(sim, pairs)| pairs.iter().map(move |p| (p.r, p.s, *sim)))
        .collect();
    matched.sort_unstable_by_key(|(r, s, _)| (*r, *s));
    for (r, s, sim) in &matched {
        let row = render_pair_row(built.r.external_id(*r), built.s.external_id(*s), *sim);
        writeln!(out, "{row}")?;
    }

    let mut outer_rows = None;
    if args.outer {
        let rows =
            full_outer_join(&outcome.result, outcome.theta_star, built.r.len(), built.s.len())?;
        outer_rows = Some(rows.len());
        for (r, s) in &rows {
            match (r, s) {
                (Some(_), Some(_)) => {} // matched pairs already printed
                (Some(r), None) => {
                    writeln!(out, "{}\t{NULL}\t{NULL}\t{NULL}", built.r.external_id(*r))?
                }
                (None, Some(s)) => {
                    writeln!(out, "{NULL}\t{}\t{NULL}\t{NULL}", built.s.external_id(*s))?
                }
                (None, None) => unreachable!(),
            }
        }
    }
    out.flush()?;

    eprintln!(
        "prefjoin: theta* = {} ({:.6}), score {}, {} pairs, {} of {} pivotal thresholds evaluated{}",
        outcome.theta_star,
        outcome.theta_star.to_f64(),
        outcome.best_score,
        matched.len(),
        outcome.thresholds_evaluated,
        outcome.pivotal.len(),
        if outcome.terminated_early { " (early termination)" } else { "" },
    );

    if let Some(path) = &args.report {
        append_line(
            path,
            &JoinReport {
                command: "join",
                measure: measure_name(&args.measure),
                preference: format!("{:?}", args.pref).to_lowercase(),
                theta_star: Some(outcome.theta_star.to_string()),
                theta_star_decimal: Some(outcome.theta_star.to_f64()),
                best_score: Some(outcome.best_score),
                pairs: matched.len(),
                outer_rows,
                pivotal_count: outcome.pivotal.len(),
                thresholds_evaluated: outcome.thresholds_evaluated,
                terminated_early: outcome.terminated_early,
                peak_candidates: outcome.peak_candidates,
                skipped_records: built.skipped.len(),
                wall_time_ms: started.elapsed().as_millis(),
            },
        )?;
    }
    Ok(())
}

/// Read a join output TSV back as id pairs, skipping NULL-padded rows.
fn read_predictions(path: &std::path::Path) -> Result<HashSet<(String, String)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut pairs = HashSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            CliError::Input(format!("{}: malformed row {}: {e}", path.display(), i + 1))
        })?;
        let r = record.get(0).unwrap_or("");
        let s = record.get(1).unwrap_or("");
        if r.is_empty() || s.is_empty() || r == NULL || s == NULL {
            continue;
        }
        pairs.insert((r.to_owned(), s.to_owned()));
    }
    Ok(pairs)
}

pub fn eval(args: EvalArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let predictions = read_predictions(&args.pred)?;
    let truth_rows = read_truth(&args.truth, parse_delim(args.delim)?)?;

    // With datasets supplied, ground-truth pairs referencing unknown ids are
    // dropped (warned and counted) rather than silently scored as misses.
    let known_ids = |path: &Option<std::path::PathBuf>| -> Result<Option<HashSet<String>>, CliError> {
        let Some(path) = path else { return Ok(None) };
        let options = IngestOptions {
            id_col: args.id_col.clone(),
            text_cols: Vec::new(),
            delim: parse_delim(args.delim)?,
        };
        Ok(Some(read_rows(path, &options)?.into_iter().map(|(id, _)| id).collect()))
    };
    let known_r = known_ids(&args.left)?;
    let known_s = known_ids(&args.right)?;

    let mut truth: HashSet<(String, String)> = HashSet::new();
    let mut dropped = 0usize;
    for (r, s) in truth_rows {
        let r_known = known_r.as_ref().is_none_or(|ids| ids.contains(&r));
        let s_known = known_s.as_ref().is_none_or(|ids| ids.contains(&s));
        if r_known && s_known {
            truth.insert((r, s));
        } else {
            eprintln!("prefjoin: warning: ground-truth pair ({r:?}, {s:?}) references an unknown id; dropped");
            dropped += 1;
        }
    }

    let tp = predictions.intersection(&truth).count();
    let fp = predictions.len() - tp;
    let fn_ = truth.len() - tp;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    writeln!(out, "precision\t{precision:.6}")?;
    writeln!(out, "recall\t{recall:.6}")?;
    writeln!(out, "f1\t{f1:.6}")?;
    writeln!(out, "true_positives\t{tp}")?;
    writeln!(out, "false_positives\t{fp}")?;
    writeln!(out, "false_negatives\t{fn_}")?;
    writeln!(out, "dropped_truth_pairs\t{dropped}")?;
    out.flush()?;

    if let Some(path) = &args.report {
        append_line(
            path,
            &EvalReport {
                command: "eval",
                precision,
                recall,
                f1,
                true_positives: tp,
                false_positives: fp,
                false_negatives: fn_,
                dropped_truth_pairs: dropped,
                wall_time_ms: started.elapsed().as_millis(),
            },
        )?;
    }
    Ok(())
}

pub fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let measure = parse_measure(&args.measure)?;
    let built = load_corpus(&args.input)?;
    let pair_count = built.r.len() as u64 * built.s.len() as u64;
    if pair_count > args.max_pairs {
        return Err(CliError::Input(format!(
            "{pair_count} pairs exceeds --max-pairs {}; the oracle enumerates every pair",
            args.max_pairs
        )));
    }
    let outcome = oracle::oracle_run(&built.r, &built.s, &measure)?;

    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    writeln!(out, "theta\ttheta_decimal\th_c\th_o\tjoin\tcover_r\tcover_s")?;
    for row in &outcome.per_threshold {
        writeln!(
            out,
            "{}\t{:.6}\t{}\t{}\t{}\t{}\t{}",
            row.theta,
            row.theta.to_f64(),
            row.h_c,
            row.h_o,
            row.join_size,
            row.cover_r,
            row.cover_s
        )?;
    }
    out.flush()?;

    let star = |name: &str, theta: Option<ExactSim>| match theta {
        Some(theta) => eprintln!("prefjoin: theta*({name}) = {theta} ({:.6})", theta.to_f64()),
        None => eprintln!("prefjoin: theta*({name}) undefined (no positive similarities)"),
    };
    star("maxgroups", outcome.theta_star_c);
    star("minoutjoin", outcome.theta_star_o);
    Ok(())
}
