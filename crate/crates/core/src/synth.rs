//! Synthetic corpora with planted sign prototypes, used as ground truth for
//! the spotters and metrics.
//!
//! Every word of a subtitle is realized as `sign_len` copies of its class
//! prototype plus Gaussian noise, followed by a short neutral pause. Subtitles
//! are separated by longer pauses so that padded search windows never reach a
//! neighbouring subtitle's signs. An optional shared filler pattern stands in
//! for pointing signs and other non-lexical gestures.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::io::{self, manifest::AnnotationEntry, CorpusManifest, VideoEntry};
use crate::keywords::{KeywordTables, Tier};
use crate::model::{FeatureSequence, MatrixView, Source, Spotting, SubtitleRecord};
use crate::scoremap::UnitRows;

/// Ground-truth anchor offset inside a planted sign (matches exemplar cutting).
pub const ANCHOR_OFFSET: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_classes: usize,
    pub dim: usize,
    pub sign_len: usize,
    pub pause_len: usize,
    /// Pause positions between consecutive subtitles (and at both video ends).
    pub subtitle_gap: usize,
    pub filler_len: usize,
    pub noise_sigma: f64,
    pub n_videos: usize,
    pub subtitles_per_video: usize,
    pub words_per_subtitle: usize,
    pub filler_rate: f64,
    /// Fraction of class pairs `(2i, 2i+1)` listed as synonyms.
    pub synonym_fraction: f64,
    /// Fraction of known-class instances emitted as `M*` annotations.
    pub annotate_fraction: f64,
    /// Fraction of classes that never receive annotations.
    pub novel_fraction: f64,
    pub stride: u32,
    pub receptive_field: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_classes: 20,
            dim: 32,
            sign_len: 8,
            pause_len: 2,
            subtitle_gap: 14,
            filler_len: 12,
            noise_sigma: 0.05,
            n_videos: 4,
            subtitles_per_video: 20,
            words_per_subtitle: 3,
            filler_rate: 0.0,
            synonym_fraction: 0.0,
            annotate_fraction: 0.5,
            novel_fraction: 0.2,
            stride: 4,
            receptive_field: 16,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.n_classes < 2 || self.dim < 8 || self.noise_sigma.is_nan() || self.noise_sigma < 0.0 {
            return Err(Error::Config("need K >= 2, D >= 8 and noise_sigma >= 0".into()));
        }
        if self.sign_len == 0 || self.filler_len == 0 || self.words_per_subtitle == 0 {
            return Err(Error::Config(
                "segment lengths and words per subtitle must be positive".into(),
            ));
        }
        if self.words_per_subtitle > self.n_classes {
            return Err(Error::Config("more words per subtitle than classes".into()));
        }
        if self.n_videos == 0 || self.subtitles_per_video == 0 {
            return Err(Error::Config("empty corpus".into()));
        }
        if ![
            self.filler_rate,
            self.synonym_fraction,
            self.annotate_fraction,
            self.novel_fraction,
        ]
        .into_iter()
        .all(unit)
        {
            return Err(Error::Config("rates must lie in [0, 1]".into()));
        }
        if self.stride == 0 || self.receptive_field < self.stride {
            return Err(Error::Config("bad stride or receptive field".into()));
        }
        Ok(())
    }
}

pub fn class_word(class: usize) -> String {
    format!("w{class:03}")
}

/// One planted sign instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSign {
    pub subtitle_index: usize,
    pub video_id: String,
    pub class: usize,
    /// First feature position of the segment.
    pub position: usize,
}

impl PlantedSign {
    pub fn anchor(&self) -> usize {
        self.position + ANCHOR_OFFSET
    }

    pub fn frame(&self, stride: u32) -> u64 {
        self.anchor() as u64 * stride as u64
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub config: SynthConfig,
    pub corpus: Corpus,
    pub prototypes: Vec<Vec<f32>>,
    pub pause: Vec<f32>,
    pub filler: Vec<f32>,
    pub planted: Vec<PlantedSign>,
    /// Filler segment positions per subtitle, if one was inserted.
    pub fillers: Vec<Option<Range<usize>>>,
    pub novel_classes: BTreeSet<usize>,
}

impl SynthCorpus {
    pub fn vocab(&self) -> Vec<String> {
        (0..self.config.n_classes).map(class_word).collect()
    }

    /// Every planted sign as a spotting at its anchor frame.
    pub fn ground_truth(&self) -> Vec<Spotting> {
        self.planted
            .iter()
            .map(|p| {
                Spotting::new(
                    &p.video_id,
                    class_word(p.class),
                    p.frame(self.config.stride),
                    1.0,
                    Source::M,
                )
                .expect("valid ground truth")
            })
            .collect()
    }

    /// `sign_len` rows of the noiseless prototype.
    pub fn prototype_segment(&self, class: usize) -> Vec<f32> {
        self.prototypes[class].repeat(self.config.sign_len)
    }
}

fn unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<f32> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|x| (x / norm) as f32).collect();
        }
    }
}

struct Builder<'a, R> {
    rows: Vec<f32>,
    noise: Option<Normal<f64>>,
    rng: &'a mut R,
}

impl<R: Rng> Builder<'_, R> {
    fn position(&self, dim: usize) -> usize {
        self.rows.len() / dim
    }

    fn push(&mut self, base: &[f32], count: usize) {
        for _ in 0..count {
            for &b in base {
                let n = self.noise.map_or(0.0, |d| d.sample(self.rng));
                self.rows.push((b as f64 + n) as f32);
            }
        }
    }
}

/// Builds the corpus in memory. Identical configs give identical corpora.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let prototypes: Vec<Vec<f32>> = (0..cfg.n_classes).map(|_| unit_vector(cfg.dim, &mut rng)).collect();
    let pause = unit_vector(cfg.dim, &mut rng);
    let filler = unit_vector(cfg.dim, &mut rng);

    let n_novel = (cfg.novel_fraction * cfg.n_classes as f64).round() as usize;
    let novel_classes: BTreeSet<usize> = index::sample(&mut rng, cfg.n_classes, n_novel).into_iter().collect();

    let mut tables = KeywordTables::default();
    for i in (0..cfg.n_classes.saturating_sub(1)).step_by(2) {
        if rng.random_bool(cfg.synonym_fraction) {
            let tier = if rng.random_bool(0.5) { Tier::One } else { Tier::Two };
            tables.synonyms.insert(&class_word(i), &class_word(i + 1), 0.9, tier)?;
        }
    }
    for c in 0..cfg.n_classes {
        tables.lemmas.insert(class_word(c), class_word(c));
    }
    for w in ["the", "a", "is"] {
        tables.stopwords.insert(w);
    }

    let noise = if cfg.noise_sigma > 0.0 {
        Some(Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let stride = cfg.stride as u64;
    let mut features = BTreeMap::new();
    let mut subtitles = Vec::new();
    let mut planted = Vec::new();
    let mut fillers = Vec::new();
    let mut annotations = Vec::new();

    for v in 0..cfg.n_videos {
        let video_id = format!("vid{v:03}");
        let mut b = Builder {
            rows: Vec::new(),
            noise,
            rng: &mut rng,
        };
        b.push(&pause, cfg.subtitle_gap);
        for s in 0..cfg.subtitles_per_video {
            let classes: Vec<usize> = index::sample(b.rng, cfg.n_classes, cfg.words_per_subtitle).into_vec();
            let filler_slot = b
                .rng
                .random_bool(cfg.filler_rate)
                .then(|| b.rng.random_range(0..=classes.len()));
            let start = b.position(cfg.dim);
            let mut filler_span = None;
            for slot in 0..=classes.len() {
                if filler_slot == Some(slot) {
                    let p = b.position(cfg.dim);
                    b.push(&filler, cfg.filler_len);
                    filler_span = Some(p..p + cfg.filler_len);
                    b.push(&pause, cfg.pause_len);
                }
                if let Some(&class) = classes.get(slot) {
                    planted.push(PlantedSign {
                        subtitle_index: subtitles.len(),
                        video_id: video_id.clone(),
                        class,
                        position: b.position(cfg.dim),
                    });
                    b.push(&prototypes[class], cfg.sign_len);
                    b.push(&pause, cfg.pause_len);
                }
            }
            let end = b.position(cfg.dim);
            let text = classes.iter().map(|&c| class_word(c)).collect::<Vec<_>>().join(" ");
            subtitles.push(SubtitleRecord::new(
                format!("{video_id}-s{s:03}"),
                &video_id,
                start as u64 * stride,
                end as u64 * stride,
                text,
                true,
            )?);
            fillers.push(filler_span);
            b.push(&pause, cfg.subtitle_gap);
        }
        let rows = std::mem::take(&mut b.rows);
        let t = rows.len() / cfg.dim;
        let seq = FeatureSequence::new(&video_id, cfg.stride, cfg.receptive_field, cfg.dim, rows)?
            .with_n_frames((t as u64 - 1) * stride + cfg.receptive_field as u64);
        features.insert(video_id, seq);
    }
    for p in &planted {
        if !novel_classes.contains(&p.class) && rng.random_bool(cfg.annotate_fraction) {
            annotations.push(Spotting::new(
                &p.video_id,
                class_word(p.class),
                p.frame(cfg.stride),
                1.0,
                Source::Mstar,
            )?);
        }
    }

    Ok(SynthCorpus {
        config: cfg.clone(),
        corpus: Corpus {
            features,
            subtitles,
            annotations,
            tables,
        },
        prototypes,
        pause,
        filler,
        planted,
        fillers,
        novel_classes,
    })
}

/// Exhaustive alignment of `prototype` against `reference`: the earliest
/// offset maximizing the mean rescaled cosine similarity, with that mean.
pub fn brute_force_spot(reference: MatrixView<'_>, prototype: MatrixView<'_>) -> Result<(usize, f64)> {
    if prototype.rows() == 0 || prototype.rows() > reference.rows() {
        return Err(Error::Argument("prototype longer than reference".into()));
    }
    let map = UnitRows::new(reference).score_map(&UnitRows::new(prototype))?;
    let len = prototype.rows();
    let mut best = (0, f64::NEG_INFINITY);
    for p in 0..=reference.rows() - len {
        let mean = (0..len).map(|k| map.get(p + k, k)).sum::<f64>() / len as f64;
        if mean > best.1 {
            best = (p, mean);
        }
    }
    Ok(best)
}

pub const GROUND_TRUTH_FILE: &str = "gt.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes features, subtitles, `M*` annotations, tables, the ground truth and
/// a manifest into `dir`; returns the manifest path.
pub fn write_corpus(synth: &SynthCorpus, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("features"))?;
    let c = &synth.corpus;
    let mut videos = Vec::new();
    for (id, seq) in &c.features {
        let rel = PathBuf::from("features").join(format!("{id}.dsf"));
        io::create_with(dir.join(&rel), |w| write_features_to(seq, w))?;
        videos.push(VideoEntry {
            video_id: id.clone(),
            feature_path: rel,
            n_frames: seq.n_frames().unwrap_or(seq.len() as u64 * seq.stride() as u64),
        });
    }
    io::create_with(dir.join("subtitles.jsonl"), |w| io::write_subtitles(&c.subtitles, w))?;
    io::create_with(dir.join("annotations_mstar.jsonl"), |w| {
        io::write_spottings(&c.annotations, w)
    })?;
    io::create_with(dir.join(GROUND_TRUTH_FILE), |w| {
        io::write_spottings(&synth.ground_truth(), w)
    })?;
    io::create_with(dir.join("lemmas.tsv"), |w| io::write_lemmas(&c.tables.lemmas, w))?;
    io::create_with(dir.join("stopwords.txt"), |w| {
        io::write_stopwords(&c.tables.stopwords, w)
    })?;
    io::create_with(dir.join("synonyms.tsv"), |w| io::write_synonyms(&c.tables.synonyms, w))?;
    let manifest = CorpusManifest {
        videos,
        subtitle_path: "subtitles.jsonl".into(),
        annotation_paths: vec![AnnotationEntry {
            source: Source::Mstar,
            path: "annotations_mstar.jsonl".into(),
        }],
        lemma_path: Some("lemmas.tsv".into()),
        stopword_path: Some("stopwords.txt".into()),
        synonym_path: Some("synonyms.tsv".into()),
    };
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_json())?;
    Ok(path)
}

fn write_features_to<W: std::io::Write>(seq: &FeatureSequence, w: &mut W) -> Result<()> {
    io::write_features(seq, w).map(|_| ())
}
