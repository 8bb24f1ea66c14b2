//! Mining new instances of already-annotated sign classes (source `E`).
//!
//! Each existing spotting yields an 8-feature exemplar. For a subtitle word
//! that has no annotation yet, the exemplars of that word are matched against
//! the padded subtitle window and the score maps are aggregated by voting or
//! by avg/max pooling.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::corpus::{AnnotationIndex, Corpus};
use crate::error::{Error, Result};
use crate::keywords::Tier;
use crate::model::{
    FeatureSequence, FeatureWindow, MatrixView, PoolMethod, Source, SpotMethod, SpotterConfig, Spotting,
};
use crate::scoremap::{self, UnitRows};

/// Feature positions per sign exemplar.
pub const EXEMPLAR_LEN: usize = 8;
/// Positions taken before the anchor; the remaining four follow it.
const BEFORE_ANCHOR: i64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SignExemplar {
    pub keyword: String,
    pub positions: [usize; EXEMPLAR_LEN],
    pub source_confidence: f32,
    pub origin: Spotting,
    dim: usize,
    features: Vec<f32>,
}

impl SignExemplar {
    pub fn view(&self) -> MatrixView<'_> {
        MatrixView::new(&self.features, self.dim).expect("exemplar rows are well formed")
    }
}

/// Cuts the 8 positions `[c-3, c+4]` around the spotting's feature position `c`,
/// replicating edge positions where the window runs off the sequence.
pub fn build_exemplar(spotting: &Spotting, seq: &FeatureSequence) -> Result<SignExemplar> {
    if spotting.video_id != seq.video_id() {
        return Err(Error::Argument(format!(
            "spotting from video {:?} applied to features of {:?}",
            spotting.video_id,
            seq.video_id()
        )));
    }
    let c = seq.frame_to_feature_index(spotting.frame) as i64;
    let last = seq.len() as i64 - 1;
    let mut positions = [0usize; EXEMPLAR_LEN];
    for (k, p) in positions.iter_mut().enumerate() {
        *p = (c - BEFORE_ANCHOR + k as i64).clamp(0, last) as usize;
    }
    let features = positions.iter().flat_map(|&p| seq.row(p).iter().copied()).collect();
    Ok(SignExemplar {
        keyword: spotting.keyword.clone(),
        positions,
        source_confidence: spotting.confidence,
        origin: spotting.clone(),
        dim: seq.dim(),
        features,
    })
}

/// Localizes `keyword` inside `reference` using sign exemplars.
///
/// The emitted frame is the span start of the winning feature position.
pub fn spot_known(
    reference: FeatureWindow<'_>,
    keyword: &str,
    exemplars: &[SignExemplar],
    cfg: &SpotterConfig,
) -> Result<Option<Spotting>> {
    if exemplars.is_empty() {
        return Err(Error::Argument(format!("no exemplars for {keyword:?}")));
    }
    if let Some(bad) = exemplars.iter().find(|e| e.keyword != keyword) {
        return Err(Error::Argument(format!(
            "exemplar for {:?} used to spot {keyword:?}",
            bad.keyword
        )));
    }
    let views: Vec<MatrixView<'_>> = exemplars.iter().map(SignExemplar::view).collect();
    let hit = localize_with_exemplars(reference.view(), &views, cfg.method, cfg.h)?;
    let Some((p, confidence)) = hit else {
        return Ok(None);
    };
    let seq = reference.parent();
    let frame = seq.feature_to_frame_span(reference.first_index() + p)?.start;
    Spotting::new(
        seq.video_id(),
        keyword,
        frame,
        (confidence as f32).clamp(0.0, 1.0),
        Source::E,
    )
    .map(Some)
}

/// Aggregates the score maps of `reference` against each exemplar and returns
/// the winning reference position (relative to the window) with its signal value.
pub fn localize_with_exemplars(
    reference: MatrixView<'_>,
    exemplars: &[MatrixView<'_>],
    method: SpotMethod,
    h: f64,
) -> Result<Option<(usize, f64)>> {
    if exemplars.is_empty() {
        return Err(Error::Argument("no exemplars".into()));
    }
    let units = UnitRows::new(reference);
    let exemplar_units: Vec<UnitRows> = exemplars.iter().map(|e| UnitRows::new(*e)).collect();
    let hit = match method {
        SpotMethod::Vote => {
            let ms = exemplar_units
                .iter()
                .map(|e| units.match_vector(e))
                .collect::<Result<Vec<_>>>()?;
            let l = scoremap::vote(&ms, h)?;
            scoremap::localize_vote(&l).map(|loc| (loc.position, loc.confidence))
        }
        SpotMethod::Avg | SpotMethod::Max => {
            let maps = exemplar_units
                .iter()
                .map(|e| units.score_map(e))
                .collect::<Result<Vec<_>>>()?;
            let pool_method = if method == SpotMethod::Avg {
                PoolMethod::Avg
            } else {
                PoolMethod::Max
            };
            let l = scoremap::pool(&maps, pool_method)?;
            scoremap::localize_first_above(&l, h).map(|p| (p, l.values()[p]))
        }
    };
    Ok(hit)
}

/// Up to `cfg.n_exemplars` exemplars per canonical keyword, most confident first,
/// ties broken by `(video_id, frame)`.
pub fn select_exemplars(
    corpus: &Corpus,
    existing: &[Spotting],
    cfg: &SpotterConfig,
) -> Result<BTreeMap<String, Vec<SignExemplar>>> {
    let mut by_keyword: BTreeMap<String, Vec<&Spotting>> = BTreeMap::new();
    for s in existing {
        if s.confidence >= cfg.min_exemplar_confidence {
            by_keyword
                .entry(corpus.tables.canonical(&s.keyword))
                .or_default()
                .push(s);
        }
    }
    let mut out = BTreeMap::new();
    for (keyword, mut spots) in by_keyword {
        spots.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.video_id.cmp(&b.video_id))
                .then_with(|| a.frame.cmp(&b.frame))
        });
        spots.truncate(cfg.n_exemplars);
        let mut exemplars = Vec::with_capacity(spots.len());
        for s in spots {
            let mut ex = build_exemplar(s, corpus.sequence(&s.video_id)?)?;
            ex.keyword = keyword.clone();
            exemplars.push(ex);
        }
        out.insert(keyword, exemplars);
    }
    Ok(out)
}

/// Runs exemplar spotting over every subtitle for its not-yet-annotated words.
///
/// Output is ordered by subtitle, then keyword, independent of thread count.
pub fn mine_corpus(corpus: &Corpus, existing: &[Spotting], cfg: &SpotterConfig) -> Result<Vec<Spotting>> {
    cfg.validate()?;
    let exemplars = select_exemplars(corpus, existing, cfg)?;
    let index = AnnotationIndex::build(&corpus.subtitles, existing, &corpus.tables);
    let per_subtitle: Vec<Vec<Spotting>> = corpus
        .subtitles
        .par_iter()
        .enumerate()
        .map(|(i, sub)| {
            let queries: BTreeSet<String> = if cfg.expand_synonyms {
                corpus.tables.expand_query(&sub.text, Tier::One)
            } else {
                corpus.tables.reference_set(&sub.text)
            };
            let annotated = index.annotated(i);
            let seq = corpus.sequence(&sub.video_id)?;
            let window = seq.padded_window(sub.start_frame, sub.end_frame, cfg.pad_frames);
            let mut found = Vec::new();
            for kw in queries.difference(annotated) {
                let Some(ex) = exemplars.get(kw) else {
                    continue;
                };
                if let Some(s) = spot_known(window, kw, ex, cfg)? {
                    found.push(s);
                }
            }
            Ok(found)
        })
        .collect::<Result<_>>()?;
    Ok(per_subtitle.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(t: usize) -> FeatureSequence {
        let data = (0..t).flat_map(|i| [i as f32, 1.0]).collect();
        FeatureSequence::new("v", 4, 16, 2, data).unwrap()
    }

    fn spot(frame: u64) -> Spotting {
        Spotting::new("v", "cat", frame, 0.9, Source::Mstar).unwrap()
    }

    #[test]
    fn exemplar_positions() {
        let seq = ramp(100);
        assert_eq!(
            build_exemplar(&spot(40), &seq).unwrap().positions,
            [7, 8, 9, 10, 11, 12, 13, 14]
        );
        assert_eq!(
            build_exemplar(&spot(0), &seq).unwrap().positions,
            [0, 0, 0, 0, 1, 2, 3, 4]
        );
        assert_eq!(
            build_exemplar(&spot(10_000), &seq).unwrap().positions,
            [96, 97, 98, 99, 99, 99, 99, 99]
        );
        let ex = build_exemplar(&spot(40), &seq).unwrap();
        assert_eq!(ex.view().row(0), &[7.0, 1.0]);
        let other = FeatureSequence::new("w", 4, 16, 2, vec![0.0; 20]).unwrap();
        assert!(matches!(build_exemplar(&spot(0), &other), Err(Error::Argument(_))));
    }

    /// Orthogonal one-hot rows: position i carries axis `pattern[i]`.
    fn one_hot(pattern: &[usize], dim: usize, video: &str) -> FeatureSequence {
        let mut data = vec![0.0; pattern.len() * dim];
        for (i, &a) in pattern.iter().enumerate() {
            data[i * dim + a] = 1.0;
        }
        FeatureSequence::new(video, 4, 16, dim, data).unwrap()
    }

    #[test]
    fn finds_planted_pattern() {
        // reference: pause (axis 0) with the sign (axis 1) at positions 10..18
        let mut pattern = vec![0usize; 30];
        pattern[10..18].fill(1);
        let reference = one_hot(&pattern, 4, "ref");
        let sign = one_hot(&[1; 20], 4, "ex");
        let exemplars: Vec<_> = (0..10)
            .map(|k| {
                let s = Spotting::new("ex", "cat", 40 + k, 1.0, Source::Mstar).unwrap();
                build_exemplar(&s, &sign).unwrap()
            })
            .collect();
        let window = reference.window(0, 29).unwrap();
        let cfg = SpotterConfig::default();
        let hit = spot_known(window, "cat", &exemplars, &cfg).unwrap().unwrap();
        assert_eq!(hit.confidence, 1.0);
        assert_eq!(hit.source, Source::E);
        assert_eq!(reference.frame_to_feature_index(hit.frame), 13);

        for method in [SpotMethod::Avg, SpotMethod::Max] {
            let hit = spot_known(window, "cat", &exemplars, &SpotterConfig::for_method(method))
                .unwrap()
                .unwrap();
            assert_eq!(reference.frame_to_feature_index(hit.frame), 10);
            assert_eq!(hit.confidence, 1.0);
        }
    }

    #[test]
    fn orthogonal_reference_is_absent() {
        let reference = one_hot(&[2; 30], 4, "ref");
        let sign = one_hot(&[1; 20], 4, "ex");
        let ex = vec![build_exemplar(&Spotting::new("ex", "cat", 40, 1.0, Source::M).unwrap(), &sign).unwrap()];
        let window = reference.window(0, 29).unwrap();
        for method in [SpotMethod::Vote, SpotMethod::Avg, SpotMethod::Max] {
            assert_eq!(
                spot_known(window, "cat", &ex, &SpotterConfig::for_method(method)).unwrap(),
                None
            );
        }
        assert!(matches!(
            spot_known(window, "cat", &[], &SpotterConfig::default()),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            spot_known(window, "dog", &ex, &SpotterConfig::default()),
            Err(Error::Argument(_))
        ));
    }
}
