//! SCWS quality as a function of pool size, all else held fixed.

use std::sync::Arc;

use scws_core::{build_pool, Scheme, WeightedSet};
use serde::Serialize;

use crate::bias::{bias_at, bias_curve, BiasConfig};
use crate::error::{invalid, Result};
use crate::knn::{sample_queries, GroundTruth};

pub enum SweepTask<'a> {
    /// Mean bias at `k` over `reps` fresh pools of each size.
    Bias {
        pair: &'a str,
        s: &'a WeightedSet,
        o: &'a WeightedSet,
        k: usize,
        reps: usize,
        seed: u64,
    },
    /// Mean precision at `kappa` with one pool of each size.
    Precision {
        dataset: &'a str,
        corpus: &'a [WeightedSet],
        k: usize,
        kappa: usize,
        queries: usize,
        seed: u64,
        pool_seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub task: String,
    pub pool_size: usize,
    pub scheme: &'static str,
    #[serde(rename = "K")]
    pub k: usize,
    pub metric: &'static str,
    pub value: f64,
}

pub fn run_sweep(task: &SweepTask, sizes: &[usize]) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return invalid("no pool sizes given");
    }
    if let Some(bad) = sizes.iter().find(|&&s| s == 0) {
        return invalid(format!("pool size {bad} must be at least 1"));
    }
    match *task {
        SweepTask::Bias {
            pair,
            s,
            o,
            k,
            reps,
            seed,
        } => sizes
            .iter()
            .map(|&pool_size| {
                let cfg = BiasConfig {
                    schemes: vec![Scheme::Scws],
                    k_max: k,
                    reps,
                    seed,
                    pool_size,
                };
                let curve = bias_curve(pair, s, o, &cfg)?;
                Ok(SweepRow {
                    task: format!("bias:{pair}"),
                    pool_size,
                    scheme: Scheme::Scws.as_str(),
                    k,
                    metric: "mean_bias",
                    value: bias_at(&curve, Scheme::Scws, k).expect("curve covers k_max"),
                })
            })
            .collect(),
        SweepTask::Precision {
            dataset,
            corpus,
            k,
            kappa,
            queries,
            seed,
            pool_seed,
        } => {
            let q = sample_queries(corpus.len(), queries, seed)?;
            let truth = GroundTruth::new(corpus, q, kappa)?;
            sizes
                .iter()
                .map(|&pool_size| {
                    let pool = Arc::new(build_pool(pool_size, pool_seed)?);
                    let value = truth.precision(corpus, Scheme::Scws, &[k], seed, &pool)?[0];
                    Ok(SweepRow {
                        task: format!("precision:{dataset}"),
                        pool_size,
                        scheme: Scheme::Scws.as_str(),
                        k,
                        metric: "precision",
                        value,
                    })
                })
                .collect()
        }
    }
}
