//! Brute-force k-NN under exact and sketch-estimated similarity, and
//! precision at kappa between the two rankings.
//!
//! Both rankings sort by descending similarity and break ties by ascending row
//! index, so results are deterministic. When a query is itself a corpus row it
//! can be excluded from its own candidates.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{match_count, wjs_exact};
use crate::sketch::{Scheme, Sketch};
use crate::weighted_set::WeightedSet;

fn top_kappa(mut scored: Vec<(usize, f64)>, kappa: usize) -> Vec<usize> {
    scored.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(kappa);
    scored.into_iter().map(|(i, _)| i).collect()
}

fn check_kappa(kappa: usize, available: usize) -> Result<()> {
    if kappa > available {
        return Err(Error::KappaTooLarge { kappa, available });
    }
    Ok(())
}

fn candidate_count(len: usize, exclude: Option<usize>) -> usize {
    match exclude {
        Some(e) if e < len => len - 1,
        _ => len,
    }
}

/// Top-`kappa` corpus rows by exact weighted Jaccard similarity to `query`.
pub fn exact_knn(
    query: &WeightedSet,
    corpus: &[WeightedSet],
    kappa: usize,
    exclude: Option<usize>,
) -> Result<Vec<usize>> {
    if query.is_empty() {
        return Err(Error::EmptySet);
    }
    check_kappa(kappa, candidate_count(corpus.len(), exclude))?;
    let scored = corpus
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, row)| Ok((i, wjs_exact(query, row)?.value())))
        .collect::<Result<Vec<_>>>()?;
    Ok(top_kappa(scored, kappa))
}

/// Top-`kappa` corpus rows by sketch match rate against `query`.
pub fn sketch_knn(
    query: &Sketch,
    corpus: &[Sketch],
    kappa: usize,
    exclude: Option<usize>,
) -> Result<Vec<usize>> {
    check_kappa(kappa, candidate_count(corpus.len(), exclude))?;
    let scored = corpus
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, s)| Ok((i, match_count(query, s, query.len())? as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(top_kappa(scored, kappa))
}

/// `|truth[..kappa] ∩ retrieved[..kappa]| / kappa`.
pub fn precision_at(truth: &[usize], retrieved: &[usize], kappa: usize) -> Result<f64> {
    for len in [truth.len(), retrieved.len()] {
        if len < kappa {
            return Err(Error::ListTooShort { len, kappa });
        }
    }
    if kappa == 0 {
        return Ok(1.0);
    }
    let truth: HashSet<usize> = truth[..kappa].iter().copied().collect();
    let hits = retrieved[..kappa].iter().filter(|i| truth.contains(i)).count();
    Ok(hits as f64 / kappa as f64)
}

/// Outcome of one precision run.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub dataset: String,
    pub scheme: Scheme,
    pub k: usize,
    pub kappa: usize,
    pub queries: usize,
    pub corpus_size: usize,
    pub seed: u64,
    pub precision: f64,
}

impl PrecisionReport {
    pub const CSV_HEADER: &'static str = "dataset,scheme,K,kappa,queries,precision";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6}",
            self.dataset, self.scheme, self.k, self.kappa, self.queries, self.precision
        )
    }
}

/// Exact neighbors of each query row, excluding the row itself.
pub fn exact_neighbors(
    corpus: &[WeightedSet],
    queries: &[usize],
    kappa: usize,
) -> Result<Vec<Vec<usize>>> {
    queries
        .par_iter()
        .map(|&q| exact_knn(&corpus[q], corpus, kappa, Some(q)))
        .collect()
}

/// Mean precision at `kappa` of sketch neighbors against precomputed truth.
/// Sketches longer than `k` are compared on their first `k` slots.
pub fn mean_precision(
    truth: &[Vec<usize>],
    sketches: &[Sketch],
    queries: &[usize],
    kappa: usize,
    k: usize,
) -> Result<f64> {
    assert_eq!(truth.len(), queries.len(), "one truth list per query");
    if queries.is_empty() {
        return Ok(0.0);
    }
    let sketches: Vec<Sketch> = if sketches.iter().any(|s| s.len() != k) {
        sketches.iter().map(|s| s.prefix(k)).collect::<Result<_>>()?
    } else {
        sketches.to_vec()
    };
    let per_query = queries
        .par_iter()
        .zip(truth)
        .map(|(&q, t)| {
            let got = sketch_knn(&sketches[q], &sketches, kappa, Some(q))?;
            precision_at(t, &got, kappa)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_query.iter().sum::<f64>() / per_query.len() as f64)
}
