//! Counter-based random streams.
//!
//! Every draw comes from a ChaCha20 keystream selected by `(seed, stream id)`,
//! so a replicate produces the same numbers no matter which thread runs it or
//! in which order. Gaussians use the inverse CDF of a 53-bit uniform, one
//! uniform per normal.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

const CELL_BITS: u32 = 24;
const REPLICATE_BITS: u32 = 32;

/// What a stream is used for inside one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Original = 0,
    Surrogate = 1,
    Validation = 2,
    Test = 3,
}

/// Stream id `cell << 40 | replicate << 8 | purpose`.
pub fn stream_id(cell: u64, replicate: u64, purpose: Purpose) -> Result<u64> {
    if cell >= 1 << CELL_BITS {
        return Err(Error::invalid("cell", format!("index {cell} exceeds 2^24 - 1")));
    }
    if replicate >= 1 << REPLICATE_BITS {
        return Err(Error::invalid(
            "replicates",
            format!("index {replicate} exceeds 2^32 - 1"),
        ));
    }
    Ok(cell << (REPLICATE_BITS + 8) | replicate << 8 | purpose as u64)
}

pub struct SimRng {
    inner: ChaCha20Rng,
    normal: Normal,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            inner,
            normal: Normal::standard(),
        }
    }

    pub fn for_replicate(seed: u64, cell: u64, replicate: u64, purpose: Purpose) -> Result<Self> {
        Ok(Self::new(seed, stream_id(cell, replicate, purpose)?))
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        let bits = self.inner.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u = self.uniform();
        self.normal.inverse_cdf(u)
    }

    /// `+1.0` or `-1.0` with equal probability.
    pub fn sign(&mut self) -> f64 {
        if self.inner.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
