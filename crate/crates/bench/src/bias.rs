//! Mean estimation bias as a function of sketch length.
//!
//! Every repetition draws fresh randomness: a new base seed for the ICWS
//! variants and a new pool for SCWS. One sketch pair of length `k_max` is
//! built per repetition and every shorter length is read off its prefix.

use rayon::prelude::*;
use scws_core::rng::mix64;
use scws_core::{
    build_pool, build_sketch, cumulative_matches, wjs_exact, Scheme, SketchConfig, WeightedSet,
};
use serde::Serialize;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::output;

#[derive(Debug, Clone)]
pub struct BiasConfig {
    pub schemes: Vec<Scheme>,
    pub k_max: usize,
    pub reps: usize,
    pub seed: u64,
    pub pool_size: usize,
}

impl BiasConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return invalid("bias needs at least one repetition");
        }
        if self.k_max == 0 {
            return invalid("bias needs K of at least 1");
        }
        if self.pool_size == 0 {
            return invalid("pool size must be at least 1");
        }
        if self.schemes.is_empty() {
            return invalid("no schemes selected");
        }
        Ok(())
    }
}

/// One CSV row: `mean_bias` is the mean over repetitions of
/// `estimate - true_wjs` at sketch length `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasPoint {
    pub pair: String,
    #[serde(serialize_with = "output::scheme")]
    pub scheme: Scheme,
    #[serde(rename = "K")]
    pub k: usize,
    pub true_wjs: f64,
    pub mean_bias: f64,
    pub reps: usize,
}

/// Randomness for repetition `rep`: ICWS base seed and SCWS pool seed.
pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    mix64(seed ^ mix64(rep as u64))
}

fn sketch_config(scheme: Scheme, k: usize, seed: u64, pool_size: usize) -> Result<SketchConfig> {
    Ok(match scheme {
        Scheme::Scws => SketchConfig::scws(k, Arc::new(build_pool(pool_size, seed)?))?,
        Scheme::Icws => SketchConfig::icws(k, seed)?,
        Scheme::Icws0 => SketchConfig::icws0(k, seed)?,
    })
}

/// Total matches at each prefix length, summed over repetitions.
fn match_totals(s: &WeightedSet, o: &WeightedSet, scheme: Scheme, cfg: &BiasConfig) -> Result<Vec<u64>> {
    let per_rep = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let config = sketch_config(scheme, cfg.k_max, rep_seed(cfg.seed, rep), cfg.pool_size)?;
            let a = build_sketch(s, &config)?;
            let b = build_sketch(o, &config)?;
            Ok(cumulative_matches(&a, &b)?)
        })
        .collect::<Result<Vec<Vec<usize>>>>()?;
    let mut totals = vec![0u64; cfg.k_max];
    for cum in per_rep {
        for (t, c) in totals.iter_mut().zip(cum) {
            *t += c as u64;
        }
    }
    Ok(totals)
}

/// Bias curve of every configured scheme for `K = 1..=k_max`.
pub fn bias_curve(pair: &str, s: &WeightedSet, o: &WeightedSet, cfg: &BiasConfig) -> Result<Vec<BiasPoint>> {
    cfg.validate()?;
    let true_wjs = wjs_exact(s, o)?.value();
    let mut out = Vec::with_capacity(cfg.schemes.len() * cfg.k_max);
    for &scheme in &cfg.schemes {
        let totals = match_totals(s, o, scheme, cfg)?;
        for (i, total) in totals.into_iter().enumerate() {
            let k = i + 1;
            let mean = total as f64 / (cfg.reps as f64 * k as f64);
            out.push(BiasPoint {
                pair: pair.to_string(),
                scheme,
                k,
                true_wjs,
                mean_bias: mean - true_wjs,
                reps: cfg.reps,
            });
        }
    }
    Ok(out)
}

/// Mean bias of `scheme` at exactly `k`.
pub fn bias_at(curve: &[BiasPoint], scheme: Scheme, k: usize) -> Option<f64> {
    curve
        .iter()
        .find(|p| p.scheme == scheme && p.k == k)
        .map(|p| p.mean_bias)
}
