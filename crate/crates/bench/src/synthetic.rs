//! Synthetic heavy-tailed weighted data.
//!
//! Weights are Pareto distributed with shape `tail` (smaller is heavier).
//! Corpus rows are noisy copies of a handful of prototypes so that rows have
//! genuine near neighbors: each row keeps a prototype feature with
//! probability 0.8, multiplies its weight by a log-normal factor
//! (sigma 0.5), and tops up with fresh random features.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Pareto};
use scws_core::{Dataset, WeightedSet};

use crate::error::{invalid, BenchError, Result};

const KEEP_PROB: f64 = 0.8;
const WEIGHT_JITTER: f64 = 0.5;
const ROWS_PER_PROTOTYPE: usize = 20;

/// `rows,dim,density,tail`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub dim: u64,
    pub density: f64,
    pub tail: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.dim == 0 {
            return invalid("synthetic rows and dim must be positive");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return invalid(format!("density {} not in (0, 1]", self.density));
        }
        if !(self.tail > 0.0 && self.tail.is_finite()) {
            return invalid(format!("tail exponent {} must be positive", self.tail));
        }
        Ok(())
    }

    /// Expected nonzeros per row.
    pub fn nnz(&self) -> usize {
        ((self.dim as f64 * self.density).round() as usize).clamp(1, self.dim as usize)
    }

    pub fn label(&self) -> String {
        format!(
            "synthetic-{}x{}-d{}-t{}",
            self.rows, self.dim, self.density, self.tail
        )
    }
}

impl FromStr for SyntheticSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return invalid(format!("expected rows,dim,density,tail, got {s:?}"));
        }
        let bad = |what: &str| BenchError::Invalid(format!("bad {what} in {s:?}"));
        let spec = SyntheticSpec {
            rows: parts[0].parse().map_err(|_| bad("rows"))?,
            dim: parts[1].parse().map_err(|_| bad("dim"))?,
            density: parts[2].parse().map_err(|_| bad("density"))?,
            tail: parts[3].parse().map_err(|_| bad("tail"))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    weight: Pareto<f64>,
    jitter: LogNormal<f64>,
}

impl Sampler {
    fn new(tail: f64, jitter: f64, seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            weight: Pareto::new(1.0, tail).expect("tail validated"),
            jitter: LogNormal::new(0.0, jitter).expect("jitter validated"),
        }
    }

    fn weight(&mut self) -> f64 {
        self.weight.sample(&mut self.rng)
    }

    fn jitter(&mut self) -> f64 {
        self.jitter.sample(&mut self.rng)
    }

    fn features(&mut self, dim: u64, count: usize) -> Vec<u64> {
        let count = count.min(dim as usize);
        if (dim as usize) < 4 * count.max(1) {
            index::sample(&mut self.rng, dim as usize, count)
                .into_iter()
                .map(|i| i as u64)
                .collect()
        } else {
            let mut seen = std::collections::BTreeSet::new();
            while seen.len() < count {
                seen.insert(self.rng.random_range(0..dim));
            }
            seen.into_iter().collect()
        }
    }

    fn fresh_row(&mut self, dim: u64, nnz: usize) -> BTreeMap<u64, f64> {
        self.features(dim, nnz)
            .into_iter()
            .map(|f| (f + 1, self.weight()))
            .collect()
    }

    /// Noisy copy of `base`: each entry kept with `keep` probability and
    /// jittered, then topped up with fresh features to about `nnz` entries.
    fn derived(&mut self, base: &BTreeMap<u64, f64>, keep: f64, dim: u64, nnz: usize) -> BTreeMap<u64, f64> {
        let mut row: BTreeMap<u64, f64> = BTreeMap::new();
        for (&f, &w) in base {
            if self.rng.random_bool(keep) {
                row.insert(f, w * self.jitter());
            }
        }
        let target = nnz.min(dim as usize);
        if (dim as usize) < 4 * target {
            let free: Vec<u64> = (1..=dim).filter(|f| !row.contains_key(f)).collect();
            let need = target.saturating_sub(row.len()).min(free.len());
            for i in index::sample(&mut self.rng, free.len(), need) {
                let w = self.weight();
                row.insert(free[i], w);
            }
        } else {
            while row.len() < target {
                let f = self.rng.random_range(1..=dim);
                if let Entry::Vacant(slot) = row.entry(f) {
                    slot.insert(self.weight());
                }
            }
        }
        row
    }
}

fn to_set(row: BTreeMap<u64, f64>) -> WeightedSet {
    WeightedSet::from_pairs(row).expect("generated weights are positive and finite")
}

/// Corpus of `spec.rows` rows clustered around `rows / 20` prototypes.
/// Feature ids are 1-based.
pub fn generate(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let nnz = spec.nnz();
    let mut s = Sampler::new(spec.tail, WEIGHT_JITTER, seed);
    let n_proto = (spec.rows / ROWS_PER_PROTOTYPE).max(1);
    let prototypes: Vec<_> = (0..n_proto).map(|_| s.fresh_row(spec.dim, nnz)).collect();
    let rows = (0..spec.rows)
        .map(|_| {
            let p = s.rng.random_range(0..n_proto);
            to_set(s.derived(&prototypes[p], KEEP_PROB, spec.dim, nnz))
        })
        .collect();
    Ok(Dataset::new(rows))
}

/// Two related sets: the first has `nnz` Pareto-weighted features; the
/// second keeps each of them with probability `overlap`, multiplies kept
/// weights by a log-normal factor with sigma `jitter`, and is filled back to
/// `nnz` features with fresh ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSpec {
    pub dim: u64,
    pub nnz: usize,
    pub tail: f64,
    pub overlap: f64,
    pub jitter: f64,
}

impl PairSpec {
    /// Pair drawn with the dimension, density and tail of a corpus spec.
    pub fn from_corpus(spec: &SyntheticSpec, overlap: f64, jitter: f64) -> Self {
        PairSpec {
            dim: spec.dim,
            nnz: spec.nnz(),
            tail: spec.tail,
            overlap,
            jitter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.overlap) {
            return invalid(format!("overlap {} not in [0, 1]", self.overlap));
        }
        if self.nnz == 0 || self.dim == 0 {
            return invalid("pair needs at least one feature");
        }
        if !(self.tail > 0.0 && self.tail.is_finite()) {
            return invalid(format!("tail exponent {} must be positive", self.tail));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return invalid(format!("jitter {} must be finite and non-negative", self.jitter));
        }
        Ok(())
    }
}

pub fn synthetic_pair(spec: &PairSpec, seed: u64) -> Result<(WeightedSet, WeightedSet)> {
    spec.validate()?;
    let mut s = Sampler::new(spec.tail, spec.jitter, seed);
    let a = s.fresh_row(spec.dim, spec.nnz);
    let b = s.derived(&a, spec.overlap, spec.dim, spec.nnz);
    Ok((to_set(a), to_set(b)))
}
