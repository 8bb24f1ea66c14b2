//! File formats.
//!
//! Binary tensors (`DSF1` features, `DSP1` predictions, `DSM1` models) are
//! little-endian with a 4-byte magic and a `u32` version. Subtitles and
//! spottings are UTF-8 JSON Lines; lemma, stop-word and synonym tables are
//! tab-separated or one-entry-per-line text.

mod binary;
pub mod features;
pub mod manifest;
pub mod mlp_model;
pub mod predictions;
pub mod records;
pub mod tables;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::Result;

pub use features::{read_features, write_features};
pub use manifest::{CorpusManifest, VideoEntry};
pub use mlp_model::{read_model, write_model};
pub use predictions::{read_predictions, write_predictions};
pub use records::{read_spottings, read_subtitles, write_spottings, write_subtitles};
pub use tables::{read_lemmas, read_stopwords, read_synonyms, write_lemmas, write_stopwords, write_synonyms};

pub fn open(path: impl AsRef<Path>) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

/// Writes a file through a buffered writer, flushing before returning.
pub fn create_with<F>(path: impl AsRef<Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}
