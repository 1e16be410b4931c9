//! Binary checkpoint format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "TTCK" | format version u32
//! hyperparameter block (fixed field order, see below)
//! tensor count u32
//! per tensor: name len u16 | name bytes | rank u8 | dims u64... | f32 data
//! ```
//!
//! Tensor data is row-major. Weights are stored as raw 32-bit floats, so a
//! save → load → save round trip is byte-identical.

use crate::error::{Error, Result};
use crate::model::params::{Hyperparams, ModelParams};
use std::fs;
use std::path::Path;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"TTCK";
pub const CHECKPOINT_VERSION: u32 = 1;

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint(format!(
                "truncated: wanted {n} bytes at offset {}, file has {}",
                self.pos,
                self.buf.len()
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        Ok(self.u64()? as usize)
    }
}

/// Serializes hyperparameters and weights to checkpoint bytes.
pub fn checkpoint_to_bytes(hyper: &Hyperparams, params: &ModelParams<f32>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());

    out.extend_from_slice(&(hyper.embedding_dim as u64).to_le_bytes());
    out.extend_from_slice(&(hyper.hidden_dim as u64).to_le_bytes());
    out.extend_from_slice(&hyper.learning_rate.to_le_bytes());
    out.extend_from_slice(&hyper.gradient_clip.to_le_bytes());
    out.extend_from_slice(&(hyper.batch_size as u64).to_le_bytes());
    out.extend_from_slice(&(hyper.max_source_len as u64).to_le_bytes());
    out.extend_from_slice(&hyper.init_magnitude.to_le_bytes());
    out.extend_from_slice(&hyper.accumulator_init.to_le_bytes());
    out.extend_from_slice(&(hyper.patience as u64).to_le_bytes());
    out.extend_from_slice(&hyper.seed.to_le_bytes());
    out.extend_from_slice(&(hyper.eval_every as u64).to_le_bytes());
    out.extend_from_slice(&(hyper.max_steps as u64).to_le_bytes());
    out.push(hyper.pgen_bias as u8);
    out.extend_from_slice(&(params.vocab_size as u64).to_le_bytes());

    let tensors = params.tensors();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, tensor) in tensors {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(tensor.ndim() as u8);
        for &dim in tensor.shape() {
            out.extend_from_slice(&(dim as u64).to_le_bytes());
        }
        for &value in tensor.iter() {
            out.extend_from_slice(&value.to_le_bytes());
        }
    }
    out
}

/// Parses checkpoint bytes back into hyperparameters and weights.
pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<(Hyperparams, ModelParams<f32>)> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }

    let hyper = Hyperparams {
        embedding_dim: r.usize()?,
        hidden_dim: r.usize()?,
        learning_rate: r.f64()?,
        gradient_clip: r.f64()?,
        batch_size: r.usize()?,
        max_source_len: r.usize()?,
        init_magnitude: r.f64()?,
        accumulator_init: r.f64()?,
        patience: r.usize()?,
        seed: r.u64()?,
        eval_every: r.usize()?,
        max_steps: r.usize()?,
        pgen_bias: r.u8()? != 0,
    };
    let vocab_size = r.usize()?;
    hyper
        .validate()
        .map_err(|e| Error::Checkpoint(format!("bad hyperparameters: {e}")))?;

    let mut params = ModelParams::<f32>::zeros(vocab_size, &hyper);
    let count = r.u32()? as usize;
    let mut filled = 0usize;
    for _ in 0..count {
        let name_len = r.u16()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        let rank = r.u8()? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(r.usize()?);
        }
        let len: usize = dims.iter().product();
        let data = r.take(len * 4)?;

        let mut tensors = params.tensors_mut();
        let (_, tensor) = tensors
            .iter_mut()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Checkpoint(format!("unknown tensor {name:?}")))?;
        if tensor.shape() != dims.as_slice() {
            return Err(Error::Checkpoint(format!(
                "tensor {name:?} has shape {dims:?}, expected {:?}",
                tensor.shape()
            )));
        }
        for (slot, chunk) in tensor.iter_mut().zip(data.chunks_exact(4)) {
            *slot = f32::from_le_bytes(chunk.try_into().unwrap());
        }
        filled += 1;
    }
    let expected = params.tensors().len();
    if filled != expected {
        return Err(Error::Checkpoint(format!(
            "checkpoint holds {filled} tensors, model needs {expected}"
        )));
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the last tensor",
            bytes.len() - r.pos
        )));
    }
    Ok((hyper, params))
}

/// Writes a checkpoint file.
pub fn save_checkpoint(path: &Path, hyper: &Hyperparams, params: &ModelParams<f32>) -> Result<()> {
    fs::write(path, checkpoint_to_bytes(hyper, params))?;
    Ok(())
}

/// Reads a checkpoint file.
pub fn load_checkpoint(path: &Path) -> Result<(Hyperparams, ModelParams<f32>)> {
    checkpoint_from_bytes(&fs::read(path)?)
}
