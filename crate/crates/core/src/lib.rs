//! Weighted Jaccard similarity and consistent weighted sampling.
//!
//! The crate provides exact weighted Jaccard similarity (the min-max kernel)
//! and three min-hash schemes whose per-slot collision rate estimates it:
//! ICWS, its 0-bit projection, and the simplified pooled scheme SCWS, which
//! reduces per-(feature, hash) work to one table lookup and one multiply.
//! Around them sit LIBSVM ingestion, b-bit vectorization for linear learners,
//! and a brute-force k-NN precision harness.
//!
//! ```
//! use std::sync::Arc;
//! use scws_core::{build_sketch, estimate, wjs_exact, SamplePool, SketchConfig, WeightedSet};
//!
//! let s = WeightedSet::from_pairs([(1u64, 2.0), (4, 1.0), (9, 0.5)]).unwrap();
//! let o = WeightedSet::from_pairs([(1u64, 1.0), (4, 1.0), (7, 3.0)]).unwrap();
//! let exact = wjs_exact(&s, &o).unwrap();
//!
//! let pool = Arc::new(SamplePool::default_pool());
//! let config = SketchConfig::scws(1024, pool).unwrap();
//! let approx = estimate(&build_sketch(&s, &config).unwrap(), &build_sketch(&o, &config).unwrap()).unwrap();
//! assert!((0.0..=1.0).contains(&approx.value()));
//! # let _ = exact;
//! ```

pub mod error;
pub mod estimator;
pub mod pool;
pub mod retrieval;
pub mod rng;
pub mod sketch;
pub mod vectorizer;
pub mod weighted_set;

pub use error::{Error, Result};
pub use estimator::{cumulative_matches, estimate, match_count, wjs_exact, SimilarityScore};
pub use pool::{
    build_pool, build_pool_with, pool_index, PoolFingerprint, Precision, SamplePool,
    DEFAULT_P1, DEFAULT_P2, DEFAULT_POOL_SEED, DEFAULT_POOL_SIZE,
};
pub use retrieval::{exact_knn, precision_at, sketch_knn, PrecisionReport};
pub use sketch::{
    build_sketch, icws0_minhash, icws_minhash, icws_minhash_with, scws_minhash, sketch_corpus,
    DrawSource, IcwsHash, IcwsPerFeatureDraw, IcwsRandom, Scheme, SeededDraws, Sketch,
    SketchConfig, SketchOrigin,
};
pub use vectorizer::{vectorize, BBitVector};
pub use weighted_set::{
    format_libsvm_line, parse_libsvm_line, read_libsvm, rescale_unit, Dataset, FeatureId,
    WeightedSet,
};
