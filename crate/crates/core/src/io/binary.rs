use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{Error, Result};

pub(crate) const VERSION: u32 = 1;

pub(crate) fn write_header<W: Write>(sink: &mut W, magic: &[u8; 4]) -> Result<usize> {
    sink.write_all(magic)?;
    sink.write_u32::<LittleEndian>(VERSION)?;
    Ok(8)
}

pub(crate) fn read_header<R: Read>(source: &mut R, magic: &[u8; 4]) -> Result<()> {
    let mut found = [0u8; 4];
    source.read_exact(&mut found).map_err(|_| {
        Error::Format(format!(
            "stream too short for magic {:?}",
            String::from_utf8_lossy(magic)
        ))
    })?;
    if &found != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&found),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = read_u32(source)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    Ok(())
}

pub(crate) fn read_u32<R: Read>(source: &mut R) -> Result<u32> {
    source
        .read_u32::<LittleEndian>()
        .map_err(|_| Error::Format("truncated header".into()))
}

pub(crate) fn read_f32_header<R: Read>(source: &mut R) -> Result<f32> {
    source
        .read_f32::<LittleEndian>()
        .map_err(|_| Error::Format("truncated header".into()))
}

pub(crate) fn write_f32s<W: Write>(sink: &mut W, values: impl IntoIterator<Item = f32>) -> Result<usize> {
    let mut n = 0;
    for v in values {
        sink.write_f32::<LittleEndian>(v)?;
        n += 4;
    }
    Ok(n)
}

/// Reads exactly `count` reals, reporting a truncation error when fewer bytes remain.
pub(crate) fn read_f32s<R: Read>(source: &mut R, count: usize) -> Result<Vec<f32>> {
    let expected = count * 4;
    let mut bytes = Vec::with_capacity(expected);
    source.take(expected as u64).read_to_end(&mut bytes)?;
    if bytes.len() != expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite value at offset {pos}")));
    }
    Ok(values)
}

/// Fails if anything follows the declared payload.
pub(crate) fn expect_eof<R: Read>(source: &mut R, expected: usize) -> Result<()> {
    let mut rest = Vec::new();
    source.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Truncated {
            expected,
            actual: expected + rest.len(),
        });
    }
    Ok(())
}

pub(crate) fn write_vocab<W: Write>(sink: &mut W, vocab: &[String]) -> Result<usize> {
    let mut n = 0;
    for word in vocab {
        sink.write_u32::<LittleEndian>(word.len() as u32)?;
        sink.write_all(word.as_bytes())?;
        n += 4 + word.len();
    }
    Ok(n)
}

pub(crate) fn read_vocab<R: Read>(source: &mut R, count: usize) -> Result<Vec<String>> {
    let mut vocab = Vec::with_capacity(count);
    for i in 0..count {
        let len = read_u32(source)? as usize;
        let mut bytes = Vec::with_capacity(len);
        source.take(len as u64).read_to_end(&mut bytes)?;
        if bytes.len() != len {
            return Err(Error::Truncated {
                expected: len,
                actual: bytes.len(),
            });
        }
        let word = String::from_utf8(bytes).map_err(|_| Error::Format(format!("vocabulary entry {i} is not UTF-8")))?;
        vocab.push(word);
    }
    Ok(vocab)
}
