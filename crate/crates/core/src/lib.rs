//! Densification of automatic sign annotations over continuous signing video.
//!
//! Everything operates on pre-extracted per-frame feature sequences and
//! subtitle records. The crate provides:
//!
//! - [`scoremap`]: cosine score maps, vote / pool aggregation and localization.
//! - [`exemplar`]: mining new instances of known signs from sign exemplars (source `E`).
//! - [`novel`]: discovering novel signs from positive/negative subtitle exemplars (source `N`).
//! - [`pseudo`]: classifier pseudo-labels filtered by subtitle words (source `P`).
//! - [`mlp`]: the residual MLP classifier with sliding-window prediction.
//! - [`eval`]: recall / IoU / temporal coverage over subtitles, plus the vocabulary oracle.
//! - [`synth`]: a seeded synthetic corpus with planted signs and a brute-force oracle.
//! - [`io`]: the binary and line-oriented file formats.

pub mod corpus;
pub mod densify;
pub mod error;
pub mod eval;
pub mod exemplar;
pub mod io;
pub mod keywords;
pub mod mlp;
pub mod model;
pub mod novel;
pub mod pseudo;
pub mod scoremap;
pub mod synth;

pub use error::{Error, Result};
pub use model::{
    FeatureSequence, FeatureWindow, MatrixView, PoolMethod, Source, SpotMethod, SpotterConfig, Spotting,
    SubtitleRecord, VoteKind, VoteVector,
};
