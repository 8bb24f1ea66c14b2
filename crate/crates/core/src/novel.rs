//! Discovering novel sign classes (source `N`) from weak subtitle exemplars.
//!
//! Positive exemplars are whole subtitle windows whose text contains the
//! keyword; negatives are subtitles without it. Both vote exactly as in
//! exemplar spotting, and the localization signal is `L = L+ - L-`, which
//! cancels patterns common to all subtitles (pointing, pauses). No padding is
//! applied to any window.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::{AnnotationIndex, Corpus};
use crate::error::{Error, Result};
use crate::keywords::KeywordTables;
use crate::model::{FeatureWindow, MatrixView, Source, Spotting, SubtitleRecord, VoteKind, VoteVector};
use crate::scoremap::{self, UnitRows};

#[derive(Debug, Clone, PartialEq)]
pub struct NovelConfig {
    pub h: f64,
    pub n_positives: usize,
    pub n_negatives: usize,
    /// Spottings are emitted only when `max(L+)` exceeds this.
    pub min_confidence: f64,
    pub seed: u64,
}

impl Default for NovelConfig {
    fn default() -> Self {
        NovelConfig {
            h: 0.8,
            n_positives: 9,
            n_negatives: 27,
            min_confidence: 0.0,
            seed: 0,
        }
    }
}

/// The three localization vectors for one reference window.
#[derive(Debug, Clone, PartialEq)]
pub struct NovelVotes {
    pub positive: VoteVector,
    pub negative: Option<VoteVector>,
    pub difference: VoteVector,
}

/// Builds `L+`, `L-` and `L = L+ - L-`.
///
/// The difference is computed from integer vote counts over a common
/// denominator, so equal rationals compare equal during tie-breaking.
pub fn novel_votes(
    reference: MatrixView<'_>,
    positives: &[MatrixView<'_>],
    negatives: &[MatrixView<'_>],
    h: f64,
) -> Result<NovelVotes> {
    if positives.is_empty() {
        return Err(Error::Argument("novel spotting needs at least one positive".into()));
    }
    let units = UnitRows::new(reference);
    let match_vectors = |views: &[MatrixView<'_>]| {
        views
            .iter()
            .map(|v| units.match_vector(&UnitRows::new(*v)))
            .collect::<Result<Vec<_>>>()
    };
    let pos_m = match_vectors(positives)?;
    let pos_counts = scoremap::vote_counts(&pos_m, h)?;
    let np = positives.len();
    let positive = scoremap::vote(&pos_m, h)?;
    let positive = VoteVector::new(VoteKind::Positive, positive.values().to_vec())?;

    if negatives.is_empty() {
        let difference = VoteVector::new(VoteKind::Difference, positive.values().to_vec())?;
        return Ok(NovelVotes {
            positive,
            negative: None,
            difference,
        });
    }
    let neg_m = match_vectors(negatives)?;
    let neg_counts = scoremap::vote_counts(&neg_m, h)?;
    let nn = negatives.len();
    let negative = scoremap::vote(&neg_m, h)?;
    let negative = VoteVector::new(VoteKind::Negative, negative.values().to_vec())?;
    let denom = (np * nn) as f64;
    let diff = pos_counts
        .iter()
        .zip(&neg_counts)
        .map(|(&a, &b)| ((a * nn) as f64 - (b * np) as f64) / denom)
        .collect();
    Ok(NovelVotes {
        positive,
        negative: Some(negative),
        difference: VoteVector::new(VoteKind::Difference, diff)?,
    })
}

/// Localizes a novel sign for `keyword` in `reference`.
///
/// Position comes from `L`; confidence is `max(L+)`.
pub fn spot_novel(
    reference: FeatureWindow<'_>,
    keyword: &str,
    positives: &[MatrixView<'_>],
    negatives: &[MatrixView<'_>],
    cfg: &NovelConfig,
) -> Result<Option<Spotting>> {
    let votes = novel_votes(reference.view(), positives, negatives, cfg.h)?;
    let confidence = votes.positive.max();
    if confidence <= cfg.min_confidence {
        return Ok(None);
    }
    let Some(loc) = scoremap::localize_vote(&votes.difference) else {
        return Ok(None);
    };
    let seq = reference.parent();
    let frame = seq.feature_to_frame_span(reference.first_index() + loc.position)?.start;
    Spotting::new(seq.video_id(), keyword, frame, confidence as f32, Source::N).map(Some)
}

/// Subtitles with their content-lemma sets, for keyword presence tests.
#[derive(Debug, Clone)]
pub struct SubtitlePool<'a> {
    subtitles: &'a [SubtitleRecord],
    lemmas: Vec<BTreeSet<String>>,
}

impl<'a> SubtitlePool<'a> {
    pub fn new(subtitles: &'a [SubtitleRecord], tables: &KeywordTables) -> Self {
        let lemmas = subtitles.iter().map(|s| tables.reference_set(&s.text)).collect();
        SubtitlePool { subtitles, lemmas }
    }

    pub fn subtitles(&self) -> &'a [SubtitleRecord] {
        self.subtitles
    }

    pub fn contains(&self, index: usize, keyword: &str) -> bool {
        self.lemmas[index].contains(keyword)
    }

    pub fn lemmas(&self, index: usize) -> &BTreeSet<String> {
        &self.lemmas[index]
    }
}

fn sample_sorted(candidates: Vec<usize>, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if candidates.len() <= n {
        return candidates;
    }
    let mut picked: Vec<usize> = index::sample(rng, candidates.len(), n)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    picked.sort_unstable();
    picked
}

/// Seeded choice of positive and negative subtitle indices for `keyword`,
/// excluding the reference subtitle itself.
pub fn select_exemplar_subtitles(
    pool: &SubtitlePool<'_>,
    keyword: &str,
    exclude: Option<usize>,
    n_positives: usize,
    n_negatives: usize,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..pool.subtitles.len())
        .filter(|&i| Some(i) != exclude)
        .partition(|&i| pool.contains(i, keyword));
    let positives = sample_sorted(pos, n_positives, &mut rng);
    let negatives = sample_sorted(neg, n_negatives, &mut rng);
    (positives, negatives)
}

/// Stable per-(subtitle, keyword) seed derived from the run seed.
pub fn derive_seed(seed: u64, subtitle_id: &str, keyword: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in subtitle_id.bytes().chain([0u8]).chain(keyword.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Novel-class discovery over the whole corpus.
///
/// Queries every content word that is neither in `known_vocab` nor already
/// annotated inside the subtitle. Output is ordered by subtitle, then keyword.
pub fn mine_novel(
    corpus: &Corpus,
    known_vocab: &BTreeSet<String>,
    existing: &[Spotting],
    cfg: &NovelConfig,
) -> Result<Vec<Spotting>> {
    let pool = SubtitlePool::new(&corpus.subtitles, &corpus.tables);
    let index = AnnotationIndex::build(&corpus.subtitles, existing, &corpus.tables);
    let window_of = |i: usize| -> Result<FeatureWindow<'_>> {
        let s = &corpus.subtitles[i];
        Ok(corpus
            .sequence(&s.video_id)?
            .window_for_frames(s.start_frame, s.end_frame))
    };
    let per_subtitle: Vec<Vec<Spotting>> = corpus
        .subtitles
        .par_iter()
        .enumerate()
        .map(|(i, sub)| {
            let reference = window_of(i)?;
            let mut found = Vec::new();
            for kw in pool.lemmas(i) {
                if known_vocab.contains(kw) || index.annotated(i).contains(kw) {
                    continue;
                }
                let seed = derive_seed(cfg.seed, &sub.subtitle_id, kw);
                let (pos, neg) = select_exemplar_subtitles(&pool, kw, Some(i), cfg.n_positives, cfg.n_negatives, seed);
                if pos.is_empty() {
                    continue;
                }
                let pos_w = pos.iter().map(|&j| window_of(j)).collect::<Result<Vec<_>>>()?;
                let neg_w = neg.iter().map(|&j| window_of(j)).collect::<Result<Vec<_>>>()?;
                let pos_v: Vec<_> = pos_w.iter().map(FeatureWindow::view).collect();
                let neg_v: Vec<_> = neg_w.iter().map(FeatureWindow::view).collect();
                if let Some(s) = spot_novel(reference, kw, &pos_v, &neg_v, cfg)? {
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
    use crate::exemplar::localize_with_exemplars;
    use crate::model::{FeatureSequence, SpotMethod};
    use proptest::prelude::*;

    fn one_hot(pattern: &[usize], dim: usize) -> FeatureSequence {
        let mut data = vec![0.0; pattern.len() * dim];
        for (i, &a) in pattern.iter().enumerate() {
            data[i * dim + a] = 1.0;
        }
        FeatureSequence::new("v", 4, 16, dim, data).unwrap()
    }

    #[test]
    fn planted_target_found_with_full_confidence() {
        // axis 0 pause, 1 target, 2 filler, 3.. other words
        let reference = one_hot(&[3, 3, 0, 1, 1, 1, 0, 2, 2, 0], 12);
        let positives: Vec<_> = (0..9).map(|k| one_hot(&[4 + k % 6, 0, 1, 1, 0, 2], 12)).collect();
        let negatives: Vec<_> = (0..27).map(|k| one_hot(&[4 + k % 6, 0, 2, 2, 0], 12)).collect();
        let pv: Vec<_> = positives.iter().map(FeatureSequence::view).collect();
        let nv: Vec<_> = negatives.iter().map(FeatureSequence::view).collect();
        let window = reference.window(0, 9).unwrap();
        let hit = spot_novel(window, "x", &pv, &nv, &NovelConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(hit.confidence, 1.0);
        assert_eq!(hit.source, Source::N);
        assert_eq!(reference.frame_to_feature_index(hit.frame), 4);

        let votes = novel_votes(window.view(), &pv, &nv, 0.8).unwrap();
        assert!(votes.difference.values()[7] <= 0.0);
        assert!(votes.difference.values()[2] <= 0.0);
    }

    #[test]
    fn no_positive_match_is_absent() {
        let reference = one_hot(&[1, 1, 1], 4);
        let positives = [one_hot(&[2, 2], 4)];
        let pv: Vec<_> = positives.iter().map(FeatureSequence::view).collect();
        let window = reference.window(0, 2).unwrap();
        assert_eq!(
            spot_novel(window, "x", &pv, &[], &NovelConfig::default()).unwrap(),
            None
        );
        assert!(matches!(
            spot_novel(window, "x", &[], &[], &NovelConfig::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn exemplar_selection() {
        let subs: Vec<_> = ["cat dog", "dog", "cat", "bird", "fish", "cat fish"]
            .iter()
            .enumerate()
            .map(|(i, t)| SubtitleRecord::new(format!("s{i}"), "v", 0, 10, *t, true).unwrap())
            .collect();
        let pool = SubtitlePool::new(&subs, &KeywordTables::default());
        let (pos, neg) = select_exemplar_subtitles(&pool, "cat", Some(0), 9, 27, 1);
        assert_eq!(pos, vec![2, 5]);
        assert_eq!(neg, vec![1, 3, 4]);
        let (pos, neg) = select_exemplar_subtitles(&pool, "dog", Some(0), 9, 2, 7);
        assert_eq!(pos, vec![1]);
        assert_eq!(neg.len(), 2);
        assert_eq!(select_exemplar_subtitles(&pool, "dog", Some(0), 9, 2, 7).1, neg);
        let d = NovelConfig::default();
        assert_eq!((d.n_positives, d.n_negatives), (9, 27));
    }

    fn random_seq(vals: &[f32], dim: usize) -> FeatureSequence {
        FeatureSequence::new("v", 4, 16, dim, vals.to_vec()).unwrap()
    }

    proptest! {
        #[test]
        fn without_negatives_matches_exemplar_vote(
            r in proptest::collection::vec(-1.0f32..1.0, 6 * 3),
            ps in proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 4 * 3), 1..5),
            h in 0.55f64..0.95,
        ) {
            let reference = random_seq(&r, 3);
            let pos: Vec<_> = ps.iter().map(|p| random_seq(p, 3)).collect();
            let pv: Vec<_> = pos.iter().map(FeatureSequence::view).collect();
            let cfg = NovelConfig { h, n_negatives: 0, ..NovelConfig::default() };
            let window = reference.window(0, 5).unwrap();
            let novel = spot_novel(window, "k", &pv, &[], &cfg).unwrap();
            let known = localize_with_exemplars(window.view(), &pv, SpotMethod::Vote, h).unwrap();
            prop_assert_eq!(novel.as_ref().map(|s| reference.frame_to_feature_index(s.frame)), known.map(|k| k.0));
            prop_assert_eq!(novel.map(|s| s.confidence), known.map(|k| k.1 as f32));
        }

        #[test]
        fn adding_a_negative_never_raises_l(
            r in proptest::collection::vec(-1.0f32..1.0, 5 * 3),
            ps in proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 4 * 3), 1..4),
            ns in proptest::collection::vec(proptest::collection::vec(-1.0f32..1.0, 4 * 3), 1..4),
            extra in proptest::collection::vec(-1.0f32..1.0, 4 * 3),
        ) {
            let reference = random_seq(&r, 3);
            let pos: Vec<_> = ps.iter().map(|p| random_seq(p, 3)).collect();
            let mut neg: Vec<_> = ns.iter().map(|p| random_seq(p, 3)).collect();
            let pv: Vec<_> = pos.iter().map(FeatureSequence::view).collect();
            let before_views: Vec<_> = neg.iter().map(FeatureSequence::view).collect();
            let before = novel_votes(reference.view(), &pv, &before_views, 0.7).unwrap();
            let nb = before_views.len() as f64;
            drop(before_views);
            neg.push(random_seq(&extra, 3));
            let after_views: Vec<_> = neg.iter().map(FeatureSequence::view).collect();
            let after = novel_votes(reference.view(), &pv, &after_views, 0.7).unwrap();
            let added = novel_votes(reference.view(), &pv, &after_views[after_views.len() - 1..], 0.7).unwrap();
            for p in 0..5 {
                // negative evidence (vote count) never shrinks
                let before_count = before.negative.as_ref().unwrap().values()[p] * nb;
                let after_count = after.negative.as_ref().unwrap().values()[p] * (nb + 1.0);
                prop_assert!(after_count + 1e-9 >= before_count);
                // wherever the added negative votes, L cannot rise
                if added.negative.as_ref().unwrap().values()[p] > 0.0 {
                    prop_assert!(after.difference.values()[p] <= before.difference.values()[p] + 1e-12);
                }
            }
            let conf = after.positive.max();
            prop_assert!(after.positive.values().iter().all(|&v| v <= conf));
        }
    }
}
