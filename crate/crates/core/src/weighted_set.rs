//! Sparse weighted sets, datasets of them, and LIBSVM text ingestion.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Index of a feature (an element of the set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FeatureId(pub u64);

impl From<u64> for FeatureId {
    fn from(v: u64) -> Self {
        FeatureId(v)
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A set whose members carry strictly positive finite weights.
///
/// Entries are held sorted by feature id, so two sets built from the same
/// pairs in any order are identical and every operation is order-invariant.
/// A weight of zero means the feature is absent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedSet {
    ids: Vec<FeatureId>,
    weights: Vec<f64>,
}

impl WeightedSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from `(id, weight)` pairs in any order.
    ///
    /// Zero weights are dropped. Negative or non-finite weights and repeated
    /// ids are rejected.
    pub fn from_pairs<I, F>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (F, f64)>,
        F: Into<FeatureId>,
    {
        let mut entries: Vec<(FeatureId, f64)> = Vec::new();
        for (id, w) in pairs {
            let id = id.into();
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { feature: id });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight {
                    feature: id,
                    value: w,
                });
            }
            entries.push((id, w));
        }
        entries.sort_unstable_by_key(|e| e.0);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateFeature(w[0].0));
        }
        let (ids, weights) = entries.into_iter().filter(|e| e.1 > 0.0).unzip();
        Ok(WeightedSet { ids, weights })
    }

    /// Builds from entries already known to be sorted, unique and positive.
    fn from_sorted_unchecked(ids: Vec<FeatureId>, weights: Vec<f64>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(weights.iter().all(|w| w.is_finite() && *w > 0.0));
        WeightedSet { ids, weights }
    }

    /// Number of features with non-zero weight.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[FeatureId] {
        &self.ids
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (FeatureId, f64)> + '_ {
        self.ids.iter().copied().zip(self.weights.iter().copied())
    }

    /// Weight of `id`, zero when absent.
    pub fn weight(&self, id: FeatureId) -> f64 {
        match self.ids.binary_search(&id) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Every weight multiplied by `alpha`, which must be positive and finite.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidScale(alpha));
        }
        let weights: Vec<f64> = self.weights.iter().map(|w| w * alpha).collect();
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::NonFiniteWeight {
                feature: self.ids[i],
            });
        }
        Ok(Self::from_sorted_unchecked(self.ids.clone(), weights))
    }

    /// Per-feature maximum of two sets over the union of their supports.
    pub fn elementwise_max(&self, other: &WeightedSet) -> WeightedSet {
        let mut ids = Vec::with_capacity(self.len() + other.len());
        let mut weights = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let a = self.ids.get(i);
            let b = other.ids.get(j);
            match (a, b) {
                (Some(x), Some(y)) if x == y => {
                    ids.push(*x);
                    weights.push(self.weights[i].max(other.weights[j]));
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    ids.push(*x);
                    weights.push(self.weights[i]);
                    i += 1;
                }
                (Some(x), None) => {
                    ids.push(*x);
                    weights.push(self.weights[i]);
                    i += 1;
                }
                (_, Some(y)) => {
                    ids.push(*y);
                    weights.push(other.weights[j]);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self::from_sorted_unchecked(ids, weights)
    }
}

/// Rows of weighted sets with optional class labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<WeightedSet>,
    pub labels: Option<Vec<i64>>,
    /// Column maxima used by the last [`rescale_unit`]; empty before rescaling.
    pub feature_max: BTreeMap<FeatureId, f64>,
}

impl Dataset {
    pub fn new(rows: Vec<WeightedSet>) -> Self {
        Dataset {
            rows,
            labels: None,
            feature_max: BTreeMap::new(),
        }
    }

    pub fn with_labels(rows: Vec<WeightedSet>, labels: Vec<i64>) -> Self {
        assert_eq!(rows.len(), labels.len(), "one label per row");
        Dataset {
            rows,
            labels: Some(labels),
            feature_max: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Drops rows with no features (they cannot be min-hashed).
    pub fn without_empty_rows(self) -> Dataset {
        let Dataset {
            rows,
            labels,
            feature_max,
        } = self;
        let keep: Vec<bool> = rows.iter().map(|r| !r.is_empty()).collect();
        let labels = labels.map(|ls| {
            ls.into_iter()
                .zip(&keep)
                .filter_map(|(l, k)| k.then_some(l))
                .collect()
        });
        let rows = rows.into_iter().filter(|r| !r.is_empty()).collect();
        Dataset {
            rows,
            labels,
            feature_max,
        }
    }

    /// Divides a query's weights by the recorded column maxima. Features the
    /// dataset never saw are left as they are.
    pub fn rescale_query(&self, query: &WeightedSet) -> WeightedSet {
        let weights = query
            .iter()
            .map(|(id, w)| match self.feature_max.get(&id) {
                Some(m) => w / m,
                None => w,
            })
            .collect();
        WeightedSet::from_sorted_unchecked(query.ids.clone(), weights)
    }
}

/// Divides every weight by its column's maximum over the whole dataset, so
/// all weights land in `(0, 1]`.
pub fn rescale_unit(dataset: Dataset) -> Result<Dataset> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut feature_max: BTreeMap<FeatureId, f64> = BTreeMap::new();
    for row in &dataset.rows {
        for (id, w) in row.iter() {
            let m = feature_max.entry(id).or_insert(w);
            if w > *m {
                *m = w;
            }
        }
    }
    let rows = dataset
        .rows
        .iter()
        .map(|row| {
            let weights = row.iter().map(|(id, w)| w / feature_max[&id]).collect();
            WeightedSet::from_sorted_unchecked(row.ids.clone(), weights)
        })
        .collect();
    Ok(Dataset {
        rows,
        labels: dataset.labels,
        feature_max,
    })
}

fn parse_label(tok: &str) -> Result<i64> {
    let tok = tok.strip_prefix('+').unwrap_or(tok);
    if let Ok(v) = tok.parse::<i64>() {
        return Ok(v);
    }
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 => Ok(v as i64),
        _ => Err(Error::MalformedLine(format!("bad label {tok:?}"))),
    }
}

/// Parses `<label> <idx>:<val> ...` with 1-based strictly increasing indices.
/// Anything after `#` is a comment. Zero values are dropped.
pub fn parse_libsvm_line(line: &str) -> Result<(i64, WeightedSet)> {
    let body = match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    };
    let mut tokens = body.split_whitespace();
    let label = match tokens.next() {
        Some(tok) => parse_label(tok)?,
        None => return Err(Error::MalformedLine("missing label".into())),
    };

    let mut ids = Vec::new();
    let mut weights = Vec::new();
    let mut prev: Option<u64> = None;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| Error::MalformedLine(format!("expected idx:val, got {tok:?}")))?;
        let idx: u64 = idx
            .parse()
            .map_err(|_| Error::MalformedLine(format!("bad feature index {idx:?}")))?;
        if idx == 0 {
            return Err(Error::MalformedLine("feature indices are 1-based".into()));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| Error::MalformedLine(format!("bad feature value {val:?}")))?;
        if let Some(p) = prev {
            if idx <= p {
                return Err(Error::NonMonotonicIndex { prev: p, next: idx });
            }
        }
        prev = Some(idx);
        let id = FeatureId(idx);
        if !val.is_finite() {
            return Err(Error::NonFiniteWeight { feature: id });
        }
        if val < 0.0 {
            return Err(Error::NegativeWeight {
                feature: id,
                value: val,
            });
        }
        if val > 0.0 {
            ids.push(id);
            weights.push(val);
        }
    }
    Ok((label, WeightedSet::from_sorted_unchecked(ids, weights)))
}

/// Inverse of [`parse_libsvm_line`]. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn format_libsvm_line(label: i64, set: &WeightedSet) -> String {
    use std::fmt::Write;
    let mut out = label.to_string();
    for (id, w) in set.iter() {
        write!(out, " {id}:{w}").unwrap();
    }
    out
}

/// Reads a whole LIBSVM file. Blank and comment-only lines are skipped;
/// errors carry the 1-based line number.
pub fn read_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::from(e).at_line(n + 1))?;
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let (label, set) = parse_libsvm_line(&line).map_err(|e| e.at_line(n + 1))?;
        labels.push(label);
        rows.push(set);
    }
    Ok(Dataset::with_labels(rows, labels))
}
