//! Shared domain types and the frame / feature-position arithmetic.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frames per feature position used throughout the toolkit unless a file says otherwise.
pub const DEFAULT_STRIDE: u32 = 4;
/// Frames covered by one feature.
pub const DEFAULT_RECEPTIVE_FIELD: u32 = 16;
/// Two seconds of padding at 25 fps.
pub const DEFAULT_PAD_FRAMES: u64 = 50;

/// Borrowed row-major `rows x dim` matrix of feature rows.
#[derive(Debug, Clone, Copy)]
pub struct MatrixView<'a> {
    data: &'a [f32],
    dim: usize,
}

impl<'a> MatrixView<'a> {
    pub fn new(data: &'a [f32], dim: usize) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values do not form rows of width {dim}",
                data.len()
            )));
        }
        Ok(MatrixView { data, dim })
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &'a [f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &'a [f32] {
        self.data
    }
}

/// A `T x D` matrix of frame-window embeddings sampled every `stride` frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    video_id: String,
    stride: u32,
    receptive_field: u32,
    dim: usize,
    data: Vec<f32>,
    n_frames: Option<u64>,
}

impl FeatureSequence {
    pub fn new(
        video_id: impl Into<String>,
        stride: u32,
        receptive_field: u32,
        dim: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Data("stride must be at least 1".into()));
        }
        if receptive_field < stride {
            return Err(Error::Data(format!(
                "receptive field {receptive_field} is smaller than stride {stride}"
            )));
        }
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Shape(format!(
                "{} values do not form a non-empty matrix of width {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite feature value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(FeatureSequence {
            video_id: video_id.into(),
            stride,
            receptive_field,
            dim,
            data,
            n_frames: None,
        })
    }

    /// Records the video length so frame spans can be clamped to it.
    pub fn with_n_frames(mut self, n_frames: u64) -> Self {
        self.n_frames = Some(n_frames);
        self
    }

    pub fn with_video_id(mut self, video_id: impl Into<String>) -> Self {
        self.video_id = video_id.into();
        self
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn receptive_field(&self) -> u32 {
        self.receptive_field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of feature positions `T`.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn n_frames(&self) -> Option<u64> {
        self.n_frames
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.data[index * self.dim..(index + 1) * self.dim]
    }

    pub fn view(&self) -> MatrixView<'_> {
        MatrixView {
            data: &self.data,
            dim: self.dim,
        }
    }

    /// Half-open frame interval summarized by feature `index`.
    pub fn feature_to_frame_span(&self, index: usize) -> Result<Range<u64>> {
        if index >= self.len() {
            return Err(Error::Range { index, len: self.len() });
        }
        let start = index as u64 * self.stride as u64;
        let mut end = start + self.receptive_field as u64;
        if let Some(n) = self.n_frames {
            end = end.min(n.max(start + 1));
        }
        Ok(start..end)
    }

    /// Nearest feature position for a frame, rounding half up and clamping to `[0, T-1]`.
    pub fn frame_to_feature_index(&self, frame: u64) -> usize {
        let stride = self.stride as u64;
        let rounded = (2 * frame + stride) / (2 * stride);
        (rounded.min(self.len() as u64 - 1)) as usize
    }

    pub fn window(&self, first_index: usize, last_index: usize) -> Result<FeatureWindow<'_>> {
        FeatureWindow::new(self, first_index, last_index)
    }

    /// Feature positions whose span start lies in `[start_frame, end_frame)`, clamped
    /// to the sequence. Never empty: a span shorter than the stride maps to the
    /// nearest position of `start_frame`.
    pub fn window_for_frames(&self, start_frame: u64, end_frame: u64) -> FeatureWindow<'_> {
        let (first_index, last_index) = positions_for_frames(self.stride, self.len(), start_frame, end_frame);
        FeatureWindow {
            parent: self,
            first_index,
            last_index,
        }
    }

    /// Window for a subtitle span with `pad_frames` added on either side.
    pub fn padded_window(&self, start_frame: u64, end_frame: u64, pad_frames: u64) -> FeatureWindow<'_> {
        self.window_for_frames(start_frame.saturating_sub(pad_frames), end_frame + pad_frames)
    }
}

/// Inclusive range of positions `i < len` with `i * stride` in
/// `[start_frame, end_frame)`, clamped to the sequence. A span too short to
/// contain any position start collapses to the nearest position of `start_frame`.
pub fn positions_for_frames(stride: u32, len: usize, start_frame: u64, end_frame: u64) -> (usize, usize) {
    let stride = stride as u64;
    let last_pos = len as u64 - 1;
    let first = start_frame.div_ceil(stride).min(last_pos);
    let last = if end_frame == 0 {
        0
    } else {
        ((end_frame - 1) / stride).min(last_pos)
    };
    if last < first {
        let p = ((2 * start_frame + stride) / (2 * stride)).min(last_pos) as usize;
        return (p, p);
    }
    (first as usize, last as usize)
}

/// A contiguous inclusive range of feature positions in a parent sequence.
#[derive(Debug, Clone, Copy)]
pub struct FeatureWindow<'a> {
    parent: &'a FeatureSequence,
    first_index: usize,
    last_index: usize,
}

impl<'a> FeatureWindow<'a> {
    pub fn new(parent: &'a FeatureSequence, first_index: usize, last_index: usize) -> Result<Self> {
        if first_index > last_index {
            return Err(Error::Argument(format!(
                "window start {first_index} after end {last_index}"
            )));
        }
        if last_index >= parent.len() {
            return Err(Error::Range {
                index: last_index,
                len: parent.len(),
            });
        }
        Ok(FeatureWindow {
            parent,
            first_index,
            last_index,
        })
    }

    pub fn parent(&self) -> &'a FeatureSequence {
        self.parent
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn last_index(&self) -> usize {
        self.last_index
    }

    pub fn len(&self) -> usize {
        self.last_index - self.first_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn view(&self) -> MatrixView<'a> {
        let dim = self.parent.dim;
        MatrixView {
            data: &self.parent.data[self.first_index * dim..(self.last_index + 1) * dim],
            dim,
        }
    }

    /// Frames covered by the window, from the first span start to the last span end.
    pub fn frame_span(&self) -> Range<u64> {
        let first = self.parent.feature_to_frame_span(self.first_index).unwrap();
        let last = self.parent.feature_to_frame_span(self.last_index).unwrap();
        first.start..last.end
    }
}

/// Subtitle text with frame-accurate timings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubtitleRecord {
    pub subtitle_id: String,
    pub video_id: String,
    pub start_frame: u64,
    pub end_frame: u64,
    pub text: String,
    pub aligned: bool,
}

impl SubtitleRecord {
    pub fn new(
        subtitle_id: impl Into<String>,
        video_id: impl Into<String>,
        start_frame: u64,
        end_frame: u64,
        text: impl Into<String>,
        aligned: bool,
    ) -> Result<Self> {
        if end_frame <= start_frame {
            return Err(Error::Data(format!(
                "subtitle ends at frame {end_frame}, not after its start {start_frame}"
            )));
        }
        Ok(SubtitleRecord {
            subtitle_id: subtitle_id.into(),
            video_id: video_id.into(),
            start_frame,
            end_frame,
            text: text.into(),
            aligned,
        })
    }

    pub fn n_frames(&self) -> u64 {
        self.end_frame - self.start_frame
    }

    pub fn contains_frame(&self, frame: u64) -> bool {
        (self.start_frame..self.end_frame).contains(&frame)
    }
}

/// Provenance of an automatic annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    M,
    D,
    A,
    Mstar,
    Dstar,
    P,
    E,
    N,
}

impl Source {
    pub const ALL: [Source; 8] = [
        Source::M,
        Source::D,
        Source::A,
        Source::Mstar,
        Source::Dstar,
        Source::P,
        Source::E,
        Source::N,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Source::M => "M",
            Source::D => "D",
            Source::A => "A",
            Source::Mstar => "Mstar",
            Source::Dstar => "Dstar",
            Source::P => "P",
            Source::E => "E",
            Source::N => "N",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;

    /// Accepts the file tags (`Mstar`) and, case-insensitively, `m*` style aliases.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let tag = match lower.as_str() {
            "m" => Source::M,
            "d" => Source::D,
            "a" => Source::A,
            "mstar" | "m*" => Source::Mstar,
            "dstar" | "d*" => Source::Dstar,
            "p" => Source::P,
            "e" => Source::E,
            "n" => Source::N,
            _ => {
                return Err(Error::UnknownTag {
                    line: 0,
                    tag: s.to_string(),
                })
            }
        };
        Ok(tag)
    }
}

/// One automatic annotation of `keyword` at `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spotting {
    pub video_id: String,
    pub keyword: String,
    pub frame: u64,
    pub confidence: f32,
    pub source: Source,
}

impl Spotting {
    pub fn new(
        video_id: impl Into<String>,
        keyword: impl Into<String>,
        frame: u64,
        confidence: f32,
        source: Source,
    ) -> Result<Self> {
        let keyword = keyword.into();
        if keyword.is_empty() {
            return Err(Error::Data("spotting keyword is empty".into()));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Data(format!("spotting confidence {confidence} outside [0, 1]")));
        }
        Ok(Spotting {
            video_id: video_id.into(),
            keyword,
            frame,
            confidence,
            source,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoteKind {
    Vote,
    Avg,
    Max,
    Positive,
    Negative,
    Difference,
}

/// Aggregated localization signal over reference candidate positions.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteVector {
    kind: VoteKind,
    values: Vec<f64>,
}

impl VoteVector {
    pub fn new(kind: VoteKind, values: Vec<f64>) -> Result<Self> {
        let in_range = |lo: f64, hi: f64| values.iter().all(|v| (lo..=hi).contains(v));
        let ok = match kind {
            VoteKind::Vote | VoteKind::Positive | VoteKind::Negative => in_range(0.0, 1.0),
            VoteKind::Difference => in_range(-1.0, 1.0),
            VoteKind::Avg | VoteKind::Max => values.iter().all(|v| v.is_finite()),
        };
        if !ok {
            return Err(Error::Data(format!("{kind:?} vector has values outside its range")));
        }
        Ok(VoteVector { kind, values })
    }

    pub fn kind(&self) -> VoteKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// How exemplar score maps are aggregated before localization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpotMethod {
    Vote,
    Avg,
    Max,
}

impl SpotMethod {
    pub fn default_threshold(&self) -> f64 {
        match self {
            SpotMethod::Vote => 0.8,
            SpotMethod::Avg => 0.7,
            SpotMethod::Max => 0.8,
        }
    }
}

impl FromStr for SpotMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vote" => Ok(SpotMethod::Vote),
            "avg" => Ok(SpotMethod::Avg),
            "max" => Ok(SpotMethod::Max),
            other => Err(Error::Config(format!("unknown spotting method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolMethod {
    Avg,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpotterConfig {
    pub h: f64,
    pub n_exemplars: usize,
    pub n_negatives: usize,
    pub pad_frames: u64,
    pub method: SpotMethod,
    pub min_exemplar_confidence: f32,
    /// Add tier-1 synonyms of subtitle words to the query set.
    pub expand_synonyms: bool,
}

impl SpotterConfig {
    pub fn for_method(method: SpotMethod) -> Self {
        SpotterConfig {
            h: method.default_threshold(),
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::Config(format!("threshold h={} outside (0, 1)", self.h)));
        }
        if self.n_exemplars == 0 {
            return Err(Error::Config("n_exemplars must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SpotterConfig {
    fn default() -> Self {
        SpotterConfig {
            h: 0.8,
            n_exemplars: 20,
            n_negatives: 0,
            pad_frames: DEFAULT_PAD_FRAMES,
            method: SpotMethod::Vote,
            min_exemplar_confidence: 0.8,
            expand_synonyms: false,
        }
    }
}
