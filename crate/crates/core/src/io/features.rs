//! `DSF1` feature files.
//!
//! Layout, all little-endian: magic `DSF1`, version `u32 = 1`, `T`, `D`,
//! stride and receptive field as `u32`, then `T * D` `f32` values row-major.
//! The video id is not stored; it comes from the manifest.

use std::io::{Read, Write};

use byteorder::{LittleEndian, WriteBytesExt};

use super::binary::{expect_eof, read_f32s, read_header, read_u32, write_f32s, write_header};
use crate::error::{Error, Result};
use crate::model::FeatureSequence;

pub const MAGIC: &[u8; 4] = b"DSF1";
pub const HEADER_BYTES: usize = 24;

/// Writes `seq` and returns the number of bytes emitted.
pub fn write_features<W: Write>(seq: &FeatureSequence, sink: &mut W) -> Result<usize> {
    let mut n = write_header(sink, MAGIC)?;
    for v in [seq.len() as u32, seq.dim() as u32, seq.stride(), seq.receptive_field()] {
        sink.write_u32::<LittleEndian>(v)?;
        n += 4;
    }
    n += write_f32s(sink, seq.data().iter().copied())?;
    Ok(n)
}

pub fn read_features<R: Read>(source: &mut R, video_id: &str) -> Result<FeatureSequence> {
    read_header(source, MAGIC)?;
    let t = read_u32(source)? as usize;
    let d = read_u32(source)? as usize;
    let stride = read_u32(source)?;
    let receptive_field = read_u32(source)?;
    if t == 0 || d == 0 {
        return Err(Error::Format(format!("empty feature matrix {t}x{d}")));
    }
    let data = read_f32s(source, t * d)?;
    expect_eof(source, t * d * 4)?;
    FeatureSequence::new(video_id, stride, receptive_field, d, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn byte_layout() {
        let seq = FeatureSequence::new("v", 4, 16, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut buf = Vec::new();
        assert_eq!(write_features(&seq, &mut buf).unwrap(), 48);
        assert_eq!(buf.len(), 48);
        assert_eq!(&buf[..4], b"DSF1");
        assert_eq!(&buf[4..8], &[1, 0, 0, 0]);
        assert_eq!(&buf[8..12], &[2, 0, 0, 0]);
        assert_eq!(&buf[12..16], &[3, 0, 0, 0]);
        assert_eq!(&buf[16..20], &[4, 0, 0, 0]);
        assert_eq!(&buf[20..24], &[16, 0, 0, 0]);
        assert_eq!(&buf[24..28], &1.0f32.to_le_bytes());

        let zero = FeatureSequence::new("v", 4, 16, 1, vec![0.0]).unwrap();
        let mut buf = Vec::new();
        write_features(&zero, &mut buf).unwrap();
        assert_eq!(&buf[24..], &[0, 0, 0, 0]);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let mut bad = b"XXXX".to_vec();
        bad.extend_from_slice(&[1, 0, 0, 0]);
        assert!(matches!(read_features(&mut bad.as_slice(), "v"), Err(Error::Format(_))));

        let mut buf = b"DSF1".to_vec();
        for v in [1u32, 10, 4, 4, 16] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&[0u8; 100]);
        assert!(matches!(
            read_features(&mut buf.as_slice(), "v"),
            Err(Error::Truncated {
                expected: 160,
                actual: 100
            })
        ));
    }

    #[test]
    fn rejects_trailing_bytes_and_nan() {
        let seq = FeatureSequence::new("v", 4, 16, 1, vec![1.0]).unwrap();
        let mut buf = Vec::new();
        write_features(&seq, &mut buf).unwrap();
        let mut longer = buf.clone();
        longer.push(0);
        assert!(matches!(
            read_features(&mut longer.as_slice(), "v"),
            Err(Error::Truncated { .. })
        ));
        buf[24..28].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(read_features(&mut buf.as_slice(), "v"), Err(Error::Data(_))));
    }

    proptest! {
        #[test]
        fn round_trip_bit_exact(
            t in 1usize..12,
            d in 1usize..9,
            stride in 1u32..8,
            seed in proptest::collection::vec(-1e6f32..1e6, 96),
        ) {
            let data: Vec<f32> = (0..t * d).map(|i| seed[i % seed.len()] * (i as f32 + 0.5)).collect();
            let seq = FeatureSequence::new("v", stride, stride * 4, d, data).unwrap();
            let mut a = Vec::new();
            write_features(&seq, &mut a).unwrap();
            let back = read_features(&mut a.as_slice(), "v").unwrap();
            prop_assert_eq!(&back, &seq);
            let mut b = Vec::new();
            write_features(&back, &mut b).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
