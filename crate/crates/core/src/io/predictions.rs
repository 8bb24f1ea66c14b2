//! `DSP1` prediction files.
//!
//! Layout: magic `DSP1`, version, `T`, `V`, stride as `u32`, then `V`
//! length-prefixed UTF-8 class names and `T * V` `f32` probabilities.

use std::io::{Read, Write};

use byteorder::{LittleEndian, WriteBytesExt};

use super::binary::{expect_eof, read_f32s, read_header, read_u32, read_vocab, write_f32s, write_header, write_vocab};
use crate::error::{Error, Result};
use crate::pseudo::PredictionSequence;

pub const MAGIC: &[u8; 4] = b"DSP1";

pub fn write_predictions<W: Write>(preds: &PredictionSequence, sink: &mut W) -> Result<usize> {
    let mut n = write_header(sink, MAGIC)?;
    for v in [preds.len() as u32, preds.vocab().len() as u32, preds.stride()] {
        sink.write_u32::<LittleEndian>(v)?;
        n += 4;
    }
    n += write_vocab(sink, preds.vocab())?;
    n += write_f32s(sink, preds.probs().iter().copied())?;
    Ok(n)
}

pub fn read_predictions<R: Read>(source: &mut R, video_id: &str) -> Result<PredictionSequence> {
    read_header(source, MAGIC)?;
    let t = read_u32(source)? as usize;
    let v = read_u32(source)? as usize;
    let stride = read_u32(source)?;
    if t == 0 || v == 0 {
        return Err(Error::Format(format!("empty prediction matrix {t}x{v}")));
    }
    let vocab = read_vocab(source, v)?;
    let probs = read_f32s(source, t * v)?;
    expect_eof(source, t * v * 4)?;
    PredictionSequence::new(video_id, stride, vocab, probs)
}
