//! In-memory corpus: features, subtitles, existing annotations and keyword tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::io::{self, CorpusManifest};
use crate::keywords::KeywordTables;
use crate::model::{FeatureSequence, Spotting, SubtitleRecord};

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub features: BTreeMap<String, FeatureSequence>,
    pub subtitles: Vec<SubtitleRecord>,
    pub annotations: Vec<Spotting>,
    pub tables: KeywordTables,
}

impl Corpus {
    pub fn load(manifest: &CorpusManifest) -> Result<Self> {
        let mut features = BTreeMap::new();
        for v in &manifest.videos {
            let seq = io::read_features(&mut io::open(&v.feature_path)?, &v.video_id)?.with_n_frames(v.n_frames);
            features.insert(v.video_id.clone(), seq);
        }
        let subtitles = io::read_subtitles(io::open(&manifest.subtitle_path)?)?;
        let mut annotations = Vec::new();
        for a in &manifest.annotation_paths {
            let spots = io::read_spottings(io::open(&a.path)?)?;
            if let Some(bad) = spots.iter().find(|s| s.source != a.source) {
                log::warn!(
                    "{} lists source {} but contains a {} spotting",
                    a.path.display(),
                    a.source,
                    bad.source
                );
            }
            annotations.extend(spots);
        }
        let mut tables = KeywordTables::default();
        if let Some(p) = &manifest.lemma_path {
            tables.lemmas = io::read_lemmas(io::open(p)?)?;
        }
        if let Some(p) = &manifest.stopword_path {
            tables.stopwords = io::read_stopwords(io::open(p)?)?;
        }
        if let Some(p) = &manifest.synonym_path {
            tables.synonyms = io::read_synonyms(io::open(p)?)?;
        }
        Ok(Corpus {
            features,
            subtitles,
            annotations,
            tables,
        })
    }

    pub fn sequence(&self, video_id: &str) -> Result<&FeatureSequence> {
        self.features.get(video_id).ok_or_else(|| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no feature file for video {video_id:?}"),
            ))
        })
    }

    /// Distinct canonical keywords across the existing annotations.
    pub fn annotated_vocabulary(&self) -> BTreeSet<String> {
        self.annotations
            .iter()
            .map(|s| self.tables.canonical(&s.keyword))
            .collect()
    }
}

/// Canonical keywords already annotated inside each subtitle's span.
#[derive(Debug, Clone)]
pub struct AnnotationIndex {
    per_subtitle: Vec<BTreeSet<String>>,
}

impl AnnotationIndex {
    pub fn build(subtitles: &[SubtitleRecord], spottings: &[Spotting], tables: &KeywordTables) -> Self {
        let mut by_video: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, s) in subtitles.iter().enumerate() {
            by_video.entry(s.video_id.as_str()).or_default().push(i);
        }
        let mut per_subtitle = vec![BTreeSet::new(); subtitles.len()];
        for spot in spottings {
            let Some(idx) = by_video.get(spot.video_id.as_str()) else {
                continue;
            };
            for &i in idx {
                if subtitles[i].contains_frame(spot.frame) {
                    per_subtitle[i].insert(tables.canonical(&spot.keyword));
                }
            }
        }
        AnnotationIndex { per_subtitle }
    }

    pub fn annotated(&self, subtitle_index: usize) -> &BTreeSet<String> {
        &self.per_subtitle[subtitle_index]
    }
}

/// Spottings of `video_id` whose frame falls inside `subtitle`.
pub fn spottings_in<'a>(
    subtitle: &'a SubtitleRecord,
    spottings: &'a [Spotting],
) -> impl Iterator<Item = &'a Spotting> + 'a {
    spottings
        .iter()
        .filter(move |s| s.video_id == subtitle.video_id && subtitle.contains_frame(s.frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Source;

    #[test]
    fn index_assigns_spottings_to_subtitles() {
        let subs = vec![
            SubtitleRecord::new("s1", "v1", 0, 100, "a b", true).unwrap(),
            SubtitleRecord::new("s2", "v1", 100, 200, "c", true).unwrap(),
            SubtitleRecord::new("s3", "v2", 0, 100, "a", true).unwrap(),
        ];
        let mut tables = KeywordTables::default();
        tables.lemmas.insert("cats", "cat");
        let spots = vec![
            Spotting::new("v1", "Cats", 50, 0.9, Source::Mstar).unwrap(),
            Spotting::new("v1", "dog", 100, 0.9, Source::D).unwrap(),
            Spotting::new("v3", "dog", 10, 0.9, Source::D).unwrap(),
        ];
        let idx = AnnotationIndex::build(&subs, &spots, &tables);
        assert!(idx.annotated(0).contains("cat"));
        assert!(idx.annotated(1).contains("dog"));
        assert!(idx.annotated(2).is_empty());
        assert_eq!(spottings_in(&subs[1], &spots).count(), 1);
    }
}
