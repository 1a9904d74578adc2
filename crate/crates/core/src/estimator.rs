//! Exact weighted Jaccard similarity and its sketch-based estimate.

use std::fmt;

use crate::error::{Error, Result};
use crate::sketch::Sketch;
use crate::weighted_set::WeightedSet;

/// A similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(SimilarityScore(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for SimilarityScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<SimilarityScore> for f64 {
    fn from(s: SimilarityScore) -> f64 {
        s.0
    }
}

/// Min-max kernel: `sum min(w_s, w_o) / sum max(w_s, w_o)` over the union of
/// supports. Linear merge over the sorted ids.
pub fn wjs_exact(s: &WeightedSet, o: &WeightedSet) -> Result<SimilarityScore> {
    if s.is_empty() && o.is_empty() {
        return Err(Error::BothEmpty);
    }
    let (sid, sw) = (s.ids(), s.weights());
    let (oid, ow) = (o.ids(), o.weights());
    let (mut i, mut j) = (0, 0);
    let mut num = 0.0;
    let mut den = 0.0;
    while i < sid.len() && j < oid.len() {
        match sid[i].cmp(&oid[j]) {
            std::cmp::Ordering::Equal => {
                num += sw[i].min(ow[j]);
                den += sw[i].max(ow[j]);
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                den += sw[i];
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                den += ow[j];
                j += 1;
            }
        }
    }
    den += sw[i..].iter().sum::<f64>() + ow[j..].iter().sum::<f64>();
    // min <= max termwise, so num <= den up to rounding
    Ok(SimilarityScore((num / den).clamp(0.0, 1.0)))
}

/// Matching slots among the first `len` positions. Sketches must be compatible.
pub fn match_count(a: &Sketch, b: &Sketch, len: usize) -> Result<usize> {
    a.check_compatible(b)?;
    if len > a.len() {
        return Err(Error::LengthMismatch(len, a.len()));
    }
    Ok((0..len).filter(|&k| a.slot_matches(b, k)).count())
}

/// Running match counts: entry `k` is the number of matches in slots `0..=k`.
/// `cumulative[K' - 1] / K'` is the estimate at every prefix length `K'`.
pub fn cumulative_matches(a: &Sketch, b: &Sketch) -> Result<Vec<usize>> {
    a.check_compatible(b)?;
    let mut acc = 0;
    Ok((0..a.len())
        .map(|k| {
            acc += a.slot_matches(b, k) as usize;
            acc
        })
        .collect())
}

/// Fraction of slots where the two sketches agree.
pub fn estimate(a: &Sketch, b: &Sketch) -> Result<SimilarityScore> {
    let m = match_count(a, b, a.len())?;
    Ok(SimilarityScore(m as f64 / a.len() as f64))
}
