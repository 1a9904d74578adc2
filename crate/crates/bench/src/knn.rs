//! Precision at kappa of sketch-ranked neighbors against exact neighbors.
//!
//! Queries are corpus rows sampled without replacement and are excluded from
//! their own candidate lists. Each scheme is sketched once at the largest
//! requested length; shorter lengths compare prefixes.

use std::sync::Arc;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scws_core::retrieval::{exact_neighbors, mean_precision};
use scws_core::{sketch_corpus, PrecisionReport, SamplePool, Scheme, SketchConfig, WeightedSet};

use crate::error::{invalid, Result};

#[derive(Debug, Clone)]
pub struct KnnConfig {
    pub schemes: Vec<Scheme>,
    pub ks: Vec<usize>,
    pub kappa: usize,
    pub queries: usize,
    /// Drives query sampling and the ICWS base seed.
    pub seed: u64,
}

/// Sorted query rows drawn from `0..rows` with a seeded generator.
pub fn sample_queries(rows: usize, queries: usize, seed: u64) -> Result<Vec<usize>> {
    if queries == 0 {
        return invalid("need at least one query");
    }
    if queries > rows {
        return invalid(format!("{queries} queries requested from {rows} rows"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = index::sample(&mut rng, rows, queries).into_vec();
    q.sort_unstable();
    Ok(q)
}

/// Exact neighbor lists computed once and reused across schemes and lengths.
pub struct GroundTruth {
    pub queries: Vec<usize>,
    pub neighbors: Vec<Vec<usize>>,
    pub kappa: usize,
}

impl GroundTruth {
    pub fn new(corpus: &[WeightedSet], queries: Vec<usize>, kappa: usize) -> Result<Self> {
        if kappa == 0 {
            return invalid("kappa must be at least 1");
        }
        let neighbors = exact_neighbors(corpus, &queries, kappa)?;
        Ok(GroundTruth {
            queries,
            neighbors,
            kappa,
        })
    }

    /// Mean precision of `scheme` at each length in `ks`.
    pub fn precision(
        &self,
        corpus: &[WeightedSet],
        scheme: Scheme,
        ks: &[usize],
        seed: u64,
        pool: &Arc<SamplePool>,
    ) -> Result<Vec<f64>> {
        let Some(&k_max) = ks.iter().max() else {
            return invalid("no sketch lengths given");
        };
        let config = SketchConfig::for_scheme(scheme, k_max, seed, pool.clone())?;
        let sketches = sketch_corpus(corpus, &config)?;
        ks.iter()
            .map(|&k| Ok(mean_precision(&self.neighbors, &sketches, &self.queries, self.kappa, k)?))
            .collect()
    }
}

/// One report per (scheme, K).
pub fn run_knn(
    dataset: &str,
    corpus: &[WeightedSet],
    cfg: &KnnConfig,
    pool: Arc<SamplePool>,
) -> Result<Vec<PrecisionReport>> {
    if cfg.schemes.is_empty() || cfg.ks.is_empty() {
        return invalid("need at least one scheme and one K");
    }
    if corpus.iter().any(WeightedSet::is_empty) {
        return invalid("corpus contains empty rows");
    }
    let queries = sample_queries(corpus.len(), cfg.queries, cfg.seed)?;
    let truth = GroundTruth::new(corpus, queries, cfg.kappa)?;
    let mut out = Vec::new();
    for &scheme in &cfg.schemes {
        let precisions = truth.precision(corpus, scheme, &cfg.ks, cfg.seed, &pool)?;
        for (&k, precision) in cfg.ks.iter().zip(precisions) {
            out.push(PrecisionReport {
                dataset: dataset.to_string(),
                scheme,
                k,
                kappa: cfg.kappa,
                queries: cfg.queries,
                corpus_size: corpus.len(),
                seed: cfg.seed,
                precision,
            });
        }
    }
    Ok(out)
}

pub fn reports_csv(reports: &[PrecisionReport]) -> String {
    let mut out = String::from(PrecisionReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}
