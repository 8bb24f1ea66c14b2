//! Pseudo-labelling (source `P`): per-step classifier predictions kept only
//! when the predicted word occurs in the subtitle.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::keywords::{normalize_token, KeywordTables, Tier};
use crate::model::{positions_for_frames, Source, Spotting, SubtitleRecord};

/// Tolerance on each probability row summing to one.
pub const SIMPLEX_TOLERANCE: f32 = 1e-5;
pub const DEFAULT_THRESHOLD: f32 = 0.5;

/// `T x V` class probabilities, one row per feature position.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSequence {
    video_id: String,
    stride: u32,
    vocab: Vec<String>,
    probs: Vec<f32>,
}

impl PredictionSequence {
    pub fn new(video_id: impl Into<String>, stride: u32, vocab: Vec<String>, probs: Vec<f32>) -> Result<Self> {
        let v = vocab.len();
        if stride == 0 {
            return Err(Error::Data("stride must be at least 1".into()));
        }
        if v == 0 || probs.is_empty() || !probs.len().is_multiple_of(v) {
            return Err(Error::Shape(format!(
                "{} probabilities do not form rows over {v} classes",
                probs.len()
            )));
        }
        for (t, row) in probs.chunks_exact(v).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Data(format!("row {t} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().map(|&p| p as f64).sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE as f64 {
                return Err(Error::Data(format!("row {t} sums to {sum}")));
            }
        }
        Ok(PredictionSequence {
            video_id: video_id.into(),
            stride,
            vocab,
            probs,
        })
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn probs(&self) -> &[f32] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len() / self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f32] {
        let v = self.vocab.len();
        &self.probs[t * v..(t + 1) * v]
    }

    /// First class attaining the row maximum, with its probability.
    pub fn argmax(&self, t: usize) -> (usize, f32) {
        let row = self.row(t);
        let mut best = 0;
        for (c, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = c;
            }
        }
        (best, row[best])
    }

    /// Positions whose span start falls inside `[start_frame, end_frame)`.
    pub fn steps_for_frames(&self, start_frame: u64, end_frame: u64) -> std::ops::RangeInclusive<usize> {
        let (a, b) = positions_for_frames(self.stride, self.len(), start_frame, end_frame);
        a..=b
    }

    /// Maximal runs of identical argmax class within `steps`, as
    /// `(class, peak step, peak probability)`; the peak is the first step
    /// attaining the run maximum.
    pub fn argmax_runs(&self, steps: std::ops::RangeInclusive<usize>) -> Vec<(usize, usize, f32)> {
        let mut runs: Vec<(usize, usize, f32)> = Vec::new();
        let mut prev: Option<usize> = None;
        for t in steps {
            let (c, p) = self.argmax(t);
            match runs.last_mut() {
                Some(run) if prev == Some(c) => {
                    if p > run.2 {
                        run.1 = t;
                        run.2 = p;
                    }
                }
                _ => runs.push((c, t, p)),
            }
            prev = Some(c);
        }
        runs
    }
}

/// Spottings for the subtitle from the classifier's argmax track.
///
/// Consecutive steps with the same argmax class form one run; a run yields a
/// single spotting at its peak step when the peak probability reaches
/// `threshold` and the class word (normalized and lemmatized) is in
/// `keyword_set`. The emitted keyword is that canonical form.
pub fn pseudo_label(
    preds: &PredictionSequence,
    subtitle: &SubtitleRecord,
    keyword_set: &BTreeSet<String>,
    tables: &KeywordTables,
    threshold: f32,
) -> Result<Vec<Spotting>> {
    if preds.video_id != subtitle.video_id {
        return Err(Error::Argument(format!(
            "predictions for {:?} applied to a subtitle of {:?}",
            preds.video_id, subtitle.video_id
        )));
    }
    if let Some(bad) = keyword_set.iter().find(|k| k.is_empty() || normalize_token(k) != **k) {
        return Err(Error::Argument(format!(
            "keyword set entry {bad:?} is not in normalized form"
        )));
    }
    let canonical: Vec<String> = preds.vocab.iter().map(|w| tables.canonical(w)).collect();
    let mut out = Vec::new();
    for (class, step, prob) in preds.argmax_runs(preds.steps_for_frames(subtitle.start_frame, subtitle.end_frame)) {
        if prob >= threshold && keyword_set.contains(&canonical[class]) {
            out.push(Spotting::new(
                &preds.video_id,
                &canonical[class],
                step as u64 * preds.stride as u64,
                prob.clamp(0.0, 1.0),
                Source::P,
            )?);
        }
    }
    Ok(out)
}

/// Pseudo-labels every subtitle whose video has predictions, filtering with
/// the subtitle's words expanded by synonyms of `tier`.
pub fn pseudo_label_corpus(
    subtitles: &[SubtitleRecord],
    predictions: &BTreeMap<String, PredictionSequence>,
    tables: &KeywordTables,
    threshold: f32,
    tier: Tier,
) -> Result<Vec<Spotting>> {
    let mut out = Vec::new();
    for sub in subtitles {
        let Some(preds) = predictions.get(&sub.video_id) else {
            continue;
        };
        let keywords = tables.expand_query(&sub.text, tier);
        out.extend(pseudo_label(preds, sub, &keywords, tables, threshold)?);
    }
    Ok(out)
}
