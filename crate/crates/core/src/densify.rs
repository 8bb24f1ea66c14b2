//! Merging annotation sources into one dense spotting set.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{Source, Spotting};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DensifyConfig {
    /// Sources to keep; empty keeps every source.
    pub sources: BTreeSet<Source>,
    /// Per-source minimum confidence (inclusive).
    pub min_confidence: BTreeMap<Source, f32>,
    /// Collapse same-word spottings of a video within this many feature
    /// positions of a more confident one.
    pub dedup_window: Option<u64>,
    pub stride: u32,
}

impl DensifyConfig {
    pub fn new(stride: u32) -> Self {
        DensifyConfig {
            stride,
            ..Default::default()
        }
    }

    fn keeps(&self, s: &Spotting) -> bool {
        (self.sources.is_empty() || self.sources.contains(&s.source))
            && self.min_confidence.get(&s.source).is_none_or(|&m| s.confidence >= m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SourceStats {
    pub input: usize,
    pub kept: usize,
    pub vocabulary: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DensifyStats {
    pub per_source: BTreeMap<String, SourceStats>,
    pub total_kept: usize,
    pub removed_as_duplicates: usize,
    pub output: usize,
    pub vocabulary: usize,
}

/// Counts and distinct keywords per source.
pub fn source_stats(spottings: &[Spotting]) -> BTreeMap<String, SourceStats> {
    let mut out: BTreeMap<String, (usize, BTreeSet<&str>)> = BTreeMap::new();
    for s in spottings {
        let e = out.entry(s.source.to_string()).or_default();
        e.0 += 1;
        e.1.insert(&s.keyword);
    }
    out.into_iter()
        .map(|(k, (n, vocab))| {
            (
                k,
                SourceStats {
                    input: n,
                    kept: n,
                    vocabulary: vocab.len(),
                },
            )
        })
        .collect()
}

fn order(a: &Spotting, b: &Spotting) -> std::cmp::Ordering {
    a.video_id
        .cmp(&b.video_id)
        .then(a.frame.cmp(&b.frame))
        .then_with(|| a.keyword.cmp(&b.keyword))
        .then(a.source.cmp(&b.source))
        .then(b.confidence.total_cmp(&a.confidence))
}

/// Union of the selected sources after confidence filtering, sorted by
/// `(video, frame, keyword, source)`.
pub fn densify(inputs: &[Spotting], cfg: &DensifyConfig) -> (Vec<Spotting>, DensifyStats) {
    let mut stats = DensifyStats::default();
    let mut kept: Vec<Spotting> = Vec::new();
    for s in inputs {
        let e = stats.per_source.entry(s.source.to_string()).or_default();
        e.input += 1;
        if cfg.keeps(s) {
            e.kept += 1;
            kept.push(s.clone());
        }
    }
    for (tag, e) in stats.per_source.iter_mut() {
        e.vocabulary = kept
            .iter()
            .filter(|s| s.source.as_str() == tag)
            .map(|s| s.keyword.as_str())
            .collect::<BTreeSet<_>>()
            .len();
    }
    stats.total_kept = kept.len();

    if let Some(window) = cfg.dedup_window {
        let reach = window * cfg.stride as u64;
        kept.sort_by(|a, b| {
            (&a.video_id, &a.keyword)
                .cmp(&(&b.video_id, &b.keyword))
                .then(b.confidence.total_cmp(&a.confidence))
                .then(a.frame.cmp(&b.frame))
                .then(a.source.cmp(&b.source))
        });
        let mut survivors: Vec<Spotting> = Vec::with_capacity(kept.len());
        let mut group_start = 0;
        for s in kept {
            if survivors
                .get(group_start)
                .is_some_and(|g| g.video_id != s.video_id || g.keyword != s.keyword)
            {
                group_start = survivors.len();
            }
            let clash = survivors[group_start..]
                .iter()
                .any(|k| k.frame.abs_diff(s.frame) <= reach);
            if !clash {
                survivors.push(s);
            }
        }
        stats.removed_as_duplicates = stats.total_kept - survivors.len();
        kept = survivors;
    }
    kept.sort_by(order);
    stats.output = kept.len();
    stats.vocabulary = kept.iter().map(|s| s.keyword.as_str()).collect::<BTreeSet<_>>().len();
    (kept, stats)
}
