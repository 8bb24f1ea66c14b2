//! Subtitle-level evaluation: recall, IoU and temporal coverage of predicted
//! signs, plus the vocabulary oracle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keywords::{KeywordTables, SynonymTable, Tier};
use crate::model::{Spotting, SubtitleRecord};
use crate::pseudo::PredictionSequence;

/// Frames credited to each correctly predicted sign.
pub const SIGN_DURATION: u64 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub keyword: String,
    pub frame: u64,
}

impl Prediction {
    pub fn new(keyword: impl Into<String>, frame: u64) -> Self {
        Prediction {
            keyword: keyword.into(),
            frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub reference: BTreeSet<String>,
    /// Lemmatized predictions in frame order, before repetition removal.
    pub all: Vec<Prediction>,
    /// `all` with consecutive repeats of a keyword collapsed onto the earliest frame.
    pub deduped: Vec<Prediction>,
}

/// Builds the reference lemma set and cleans the predictions; `None` when the
/// subtitle has no content words and is dropped from evaluation.
pub fn preprocess(
    subtitle: &SubtitleRecord,
    predictions: &[Prediction],
    tables: &KeywordTables,
) -> Option<Preprocessed> {
    let reference = tables.reference_set(&subtitle.text);
    if reference.is_empty() {
        return None;
    }
    let mut all: Vec<Prediction> = predictions
        .iter()
        .map(|p| Prediction::new(tables.canonical(&p.keyword), p.frame))
        .filter(|p| !p.keyword.is_empty())
        .collect();
    all.sort_by_key(|p| p.frame);
    let mut deduped: Vec<Prediction> = Vec::with_capacity(all.len());
    for p in &all {
        if deduped.last().is_some_and(|last| last.keyword == p.keyword) {
            continue;
        }
        deduped.push(p.clone());
    }
    Some(Preprocessed {
        reference,
        all,
        deduped,
    })
}

/// Largest set of reference words that distinct predicted words can be
/// credited to, each word on either side used at most once.
fn max_matching(reference: &[&str], predicted: &[&str], synonyms: &SynonymTable) -> usize {
    let edges: Vec<Vec<usize>> = predicted
        .iter()
        .map(|p| {
            reference
                .iter()
                .enumerate()
                .filter(|(_, r)| *r == p || synonyms.is_synonym(p, r, Tier::Two))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; reference.len()];

    fn augment(i: usize, edges: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &edges[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, edges, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    let mut matched = 0;
    for i in 0..predicted.len() {
        let mut seen = vec![false; reference.len()];
        if augment(i, &edges, &mut owner, &mut seen) {
            matched += 1;
        }
    }
    matched
}

/// Recall and IoU (both in `[0, 100]`) of predicted keywords against the reference.
///
/// Predicted words are compared as a set. A reference word is credited when
/// it is predicted or has a tier-2 synonym predicted, each at most once.
/// Predicted words matching nothing in the reference enlarge the IoU union.
pub fn recall_iou<'a>(
    reference: &BTreeSet<String>,
    predictions: impl IntoIterator<Item = &'a str>,
    synonyms: &SynonymTable,
) -> Result<(f64, f64)> {
    if reference.is_empty() {
        return Err(Error::Contract(
            "empty reference set; the subtitle should have been dropped".into(),
        ));
    }
    let predicted: BTreeSet<&str> = predictions.into_iter().collect();
    let predicted: Vec<&str> = predicted.into_iter().collect();
    let refs: Vec<&str> = reference.iter().map(String::as_str).collect();
    let matched = max_matching(&refs, &predicted, synonyms);
    let unmatched = predicted
        .iter()
        .filter(|p| !crate::keywords::matches(p, reference, synonyms))
        .count();
    let recall = matched as f64 / refs.len() as f64 * 100.0;
    let iou = matched as f64 / (refs.len() + unmatched) as f64 * 100.0;
    Ok((recall, iou))
}

/// Percentage of `clip` frames covered by `[f, f + sign_duration)` over the given frames.
pub fn coverage(frames: &[u64], clip: Range<u64>, sign_duration: u64) -> Result<f64> {
    if clip.end <= clip.start {
        return Err(Error::Argument(format!("empty clip {clip:?}")));
    }
    let mut intervals: Vec<(u64, u64)> = frames
        .iter()
        .map(|&f| (f.max(clip.start), f.saturating_add(sign_duration).min(clip.end)))
        .filter(|(a, b)| a < b)
        .collect();
    intervals.sort_unstable();
    let mut covered = 0;
    let mut cursor = clip.start;
    for (a, b) in intervals {
        let a = a.max(cursor);
        if b > a {
            covered += b - a;
            cursor = b;
        }
    }
    Ok(covered as f64 / (clip.end - clip.start) as f64 * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtitleScore {
    pub subtitle_id: String,
    pub video_id: String,
    pub n_reference: usize,
    pub n_predictions: usize,
    pub recall: f64,
    pub iou: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_subtitles_retained: usize,
    pub n_subtitles_dropped: usize,
    pub recall: f64,
    pub iou: f64,
    pub coverage: f64,
    pub rows: Vec<SubtitleScore>,
}

impl EvalReport {
    /// Macro-averages over the retained rows.
    pub fn from_rows(rows: Vec<SubtitleScore>, n_dropped: usize) -> Self {
        let n = rows.len();
        let mean = |f: fn(&SubtitleScore) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / n as f64
            }
        };
        EvalReport {
            n_subtitles_retained: n,
            n_subtitles_dropped: n_dropped,
            recall: mean(|r| r.recall),
            iou: mean(|r| r.iou),
            coverage: mean(|r| r.coverage),
            rows,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("subtitle_id\tvideo_id\tn_reference\tn_predictions\trecall\tiou\tcoverage\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
                r.subtitle_id, r.video_id, r.n_reference, r.n_predictions, r.recall, r.iou, r.coverage
            );
        }
        out
    }
}

/// Scores one subtitle; `None` when it is dropped.
pub fn score_subtitle(
    subtitle: &SubtitleRecord,
    predictions: &[Prediction],
    tables: &KeywordTables,
) -> Result<Option<SubtitleScore>> {
    let Some(pre) = preprocess(subtitle, predictions, tables) else {
        return Ok(None);
    };
    let (recall, iou) = recall_iou(
        &pre.reference,
        pre.deduped.iter().map(|p| p.keyword.as_str()),
        &tables.synonyms,
    )?;
    let correct: Vec<u64> = pre
        .all
        .iter()
        .filter(|p| tables.matches(&p.keyword, &pre.reference))
        .map(|p| p.frame)
        .collect();
    let cov = coverage(&correct, subtitle.start_frame..subtitle.end_frame, SIGN_DURATION)?;
    Ok(Some(SubtitleScore {
        subtitle_id: subtitle.subtitle_id.clone(),
        video_id: subtitle.video_id.clone(),
        n_reference: pre.reference.len(),
        n_predictions: pre.deduped.len(),
        recall,
        iou,
        coverage: cov,
    }))
}

/// Upper bound assuming every in-vocabulary reference word is signed and
/// predicted, each sign taking 16 frames without overlap.
pub fn oracle(subtitles: &[SubtitleRecord], vocab: &BTreeSet<String>, tables: &KeywordTables) -> EvalReport {
    let mut rows = Vec::new();
    let mut dropped = 0;
    for sub in subtitles {
        let reference = tables.reference_set(&sub.text);
        if reference.is_empty() {
            dropped += 1;
            continue;
        }
        let matched = reference
            .iter()
            .filter(|r| vocab.contains(*r) || tables.synonyms.synonyms(r, Tier::Two).any(|s| vocab.contains(s)))
            .count();
        let score = matched as f64 / reference.len() as f64 * 100.0;
        let clip = sub.n_frames() as f64;
        rows.push(SubtitleScore {
            subtitle_id: sub.subtitle_id.clone(),
            video_id: sub.video_id.clone(),
            n_reference: reference.len(),
            n_predictions: matched,
            recall: score,
            iou: score,
            coverage: ((SIGN_DURATION * matched as u64) as f64 / clip).min(1.0) * 100.0,
        });
    }
    EvalReport::from_rows(rows, dropped)
}

/// Where predicted signs come from.
#[derive(Debug, Clone, Copy)]
pub enum EvalSource<'a> {
    /// Subtitle-dependent spottings, assigned to the subtitle containing their frame.
    Spottings(&'a [Spotting]),
    /// Classifier outputs, read as argmax runs inside each subtitle window.
    Predictions(&'a BTreeMap<String, PredictionSequence>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Spottings (or argmax peaks) below this confidence are ignored.
    pub min_confidence: f32,
    /// Reject corpora containing unaligned subtitles.
    pub strict: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            min_confidence: 0.0,
            strict: false,
        }
    }
}

fn predictions_for(
    source: EvalSource<'_>,
    by_video: &HashMap<&str, Vec<&Spotting>>,
    subtitle: &SubtitleRecord,
    min_confidence: f32,
) -> Vec<Prediction> {
    match source {
        EvalSource::Spottings(_) => {
            let Some(spots) = by_video.get(subtitle.video_id.as_str()) else {
                return Vec::new();
            };
            let lo = spots.partition_point(|s| s.frame < subtitle.start_frame);
            spots[lo..]
                .iter()
                .take_while(|s| s.frame < subtitle.end_frame)
                .filter(|s| s.confidence >= min_confidence)
                .map(|s| Prediction::new(s.keyword.as_str(), s.frame))
                .collect()
        }
        EvalSource::Predictions(preds) => {
            let Some(seq) = preds.get(&subtitle.video_id) else {
                return Vec::new();
            };
            let steps = seq.steps_for_frames(subtitle.start_frame, subtitle.end_frame);
            seq.argmax_runs(steps)
                .into_iter()
                .filter(|&(_, _, p)| p >= min_confidence)
                .map(|(class, step, _)| Prediction::new(seq.vocab()[class].as_str(), step as u64 * seq.stride() as u64))
                .collect()
        }
    }
}

/// Per-subtitle metrics macro-averaged over retained subtitles.
pub fn evaluate_corpus(
    source: EvalSource<'_>,
    subtitles: &[SubtitleRecord],
    tables: &KeywordTables,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if opts.strict {
        if let Some(bad) = subtitles.iter().find(|s| !s.aligned) {
            return Err(Error::Config(format!(
                "subtitle {:?} is not aligned and strict evaluation was requested",
                bad.subtitle_id
            )));
        }
    }
    let mut by_video: HashMap<&str, Vec<&Spotting>> = HashMap::new();
    if let EvalSource::Spottings(spots) = source {
        for s in spots {
            by_video.entry(s.video_id.as_str()).or_default().push(s);
        }
        for v in by_video.values_mut() {
            v.sort_by_key(|s| s.frame);
        }
    }
    let scored: Vec<Option<SubtitleScore>> = subtitles
        .par_iter()
        .map(|sub| {
            let preds = predictions_for(source, &by_video, sub, opts.min_confidence);
            score_subtitle(sub, &preds, tables)
        })
        .collect::<Result<_>>()?;
    let dropped = scored.iter().filter(|s| s.is_none()).count();
    Ok(EvalReport::from_rows(scored.into_iter().flatten().collect(), dropped))
}
