//! `DSM1` classifier files.
//!
//! Layout: magic `DSM1`, version, `F` and `V` as `u32`, the leaky slope as
//! `f32`, `V` length-prefixed class names, then per layer `rows`, `cols`
//! (`u32`), the row-major weights and the bias, all `f32`.

use std::io::{Read, Write};

use byteorder::{LittleEndian, WriteBytesExt};
use ndarray::{Array1, Array2};

use super::binary::{
    expect_eof, read_f32_header, read_f32s, read_header, read_u32, read_vocab, write_f32s, write_header, write_vocab,
};
use crate::error::{Error, Result};
use crate::mlp::{Layer, MlpModel, N_LAYERS};

pub const MAGIC: &[u8; 4] = b"DSM1";

/// Writes the model with parameters rounded to 32 bits.
pub fn write_model<W: Write>(model: &MlpModel, sink: &mut W) -> Result<usize> {
    let mut n = write_header(sink, MAGIC)?;
    sink.write_u32::<LittleEndian>(model.input_dim() as u32)?;
    sink.write_u32::<LittleEndian>(model.n_classes() as u32)?;
    sink.write_f32::<LittleEndian>(model.leaky_slope() as f32)?;
    n += 12;
    n += write_vocab(sink, model.vocab())?;
    for layer in model.layers() {
        sink.write_u32::<LittleEndian>(layer.weight.nrows() as u32)?;
        sink.write_u32::<LittleEndian>(layer.weight.ncols() as u32)?;
        n += 8;
        n += write_f32s(sink, layer.weight.iter().map(|&v| v as f32))?;
        n += write_f32s(sink, layer.bias.iter().map(|&v| v as f32))?;
    }
    Ok(n)
}

pub fn read_model<R: Read>(source: &mut R) -> Result<MlpModel> {
    read_header(source, MAGIC)?;
    let f = read_u32(source)? as usize;
    let v = read_u32(source)? as usize;
    let slope = read_f32_header(source)?;
    if f == 0 || v == 0 {
        return Err(Error::Format(format!("empty model {f}->{v}")));
    }
    let vocab = read_vocab(source, v)?;
    let mut layers = Vec::with_capacity(N_LAYERS);
    for _ in 0..N_LAYERS {
        let rows = read_u32(source)? as usize;
        let cols = read_u32(source)? as usize;
        let weight = read_f32s(source, rows * cols)?;
        let bias = read_f32s(source, rows)?;
        layers.push(Layer {
            weight: Array2::from_shape_vec((rows, cols), weight.into_iter().map(f64::from).collect())
                .map_err(|e| Error::Format(e.to_string()))?,
            bias: Array1::from_iter(bias.into_iter().map(f64::from)),
        });
    }
    expect_eof(source, 0)?;
    let model = MlpModel::from_layers(layers, slope as f64, vocab).map_err(|e| match e {
        Error::Shape(m) => Error::Format(m),
        other => other,
    })?;
    if model.input_dim() != f {
        return Err(Error::Format(format!(
            "header says F = {f}, layers say {}",
            model.input_dim()
        )));
    }
    Ok(model)
}
