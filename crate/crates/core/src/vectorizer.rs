//! b-bit one-hot feature vectors from 0-bit sketches.
//!
//! Slot `k` of a sketch becomes a one-hot block of width `2^b`: the selected
//! id is passed through [`mix64`] and its low `b` bits pick the position.
//! Mixing first keeps bucket collisions between different ids near `2^-b`
//! regardless of how ids are numbered.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::rng::mix64;
use crate::sketch::{Sketch, SketchOrigin};

pub const MAX_BITS: u32 = 16;

/// Sparse binary vector with exactly one set index per sketch slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BBitVector {
    bits: u32,
    indices: Vec<u64>,
}

impl BBitVector {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of sketch slots K, which is also the number of nonzeros.
    pub fn slots(&self) -> usize {
        self.indices.len()
    }

    /// `K * 2^b`.
    pub fn dimension(&self) -> u64 {
        (self.indices.len() as u64) << self.bits
    }

    /// 0-based nonzero positions, ascending; slot `k` owns `[k * 2^b, (k + 1) * 2^b)`.
    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    /// Count of shared nonzeros.
    pub fn dot(&self, other: &BBitVector) -> usize {
        self.indices
            .iter()
            .zip(&other.indices)
            .filter(|(a, b)| a == b)
            .count()
    }
}

/// Bucket of a selected id within its slot.
#[inline]
pub fn bucket(id: u64, bits: u32) -> u64 {
    mix64(id) & ((1u64 << bits) - 1)
}

pub fn vectorize(sketch: &Sketch, bits: u32) -> Result<BBitVector> {
    if !(1..=MAX_BITS).contains(&bits) {
        return Err(Error::InvalidBits(bits));
    }
    if !sketch.scheme().is_zero_bit() {
        return Err(Error::WrongScheme(sketch.scheme()));
    }
    let indices = sketch
        .ids()
        .iter()
        .enumerate()
        .map(|(k, z)| ((k as u64) << bits) + bucket(z.0, bits))
        .collect();
    Ok(BBitVector { bits, indices })
}

/// Header comment for an emitted feature file.
pub fn libsvm_header(sketch: &Sketch, bits: u32) -> String {
    let origin = match sketch.origin() {
        SketchOrigin::Seed(s) => format!("seed={s}"),
        SketchOrigin::Pool(fp) => format!(
            "pool_seed={} pool_size={} p1={} p2={} precision={:?}",
            fp.seed, fp.size, fp.p1, fp.p2, fp.precision
        ),
    };
    format!(
        "# K={} b={} scheme={} {}",
        sketch.len(),
        bits,
        sketch.scheme(),
        origin
    )
}

/// One LIBSVM row with 1-based indices. Values are 1, or `1/sqrt(K)` when
/// `normalize` is set so each row has unit norm.
pub fn format_libsvm_row(label: i64, v: &BBitVector, normalize: bool) -> String {
    let mut out = label.to_string();
    let value = if normalize {
        format!("{}", 1.0 / (v.slots() as f64).sqrt())
    } else {
        "1".to_string()
    };
    for idx in &v.indices {
        write!(out, " {}:{}", idx + 1, value).unwrap();
    }
    out
}

pub fn write_libsvm<W: Write>(
    mut w: W,
    header: &str,
    rows: &[(i64, BBitVector)],
    normalize: bool,
) -> Result<()> {
    writeln!(w, "{header}")?;
    for (label, v) in rows {
        writeln!(w, "{}", format_libsvm_row(*label, v, normalize))?;
    }
    Ok(())
}
