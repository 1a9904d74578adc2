//! Consistent weighted sampling sketches.
//!
//! Three schemes share one sketch type:
//!
//! * [`Scheme::Icws`]: improved consistent weighted sampling. Each hash is a `(z*, t*)` pair.
//! * [`Scheme::Icws0`]: the same computation keeping only `z*`.
//! * [`Scheme::Scws`]: the simplified scheme. With the floor removed, `y_z`
//!   collapses to `w(S, z)` and `a_z = w(S, z)^-1 * c_z * exp(-r_z)`. The random
//!   factor is read from a [`SamplePool`], leaving one multiply per feature and
//!   hash.
//!
//! Hash indices run `0..K`, so the sketch of length `K - 1` is a prefix of
//! the sketch of length `K`. Ties in the argmin go to the smallest feature id.
//!
//! Sketch file layout, all integers little-endian:
//!
//! ```text
//! magic    8 bytes  b"SCWSSKCH"
//! version  u32      1
//! scheme   u8       0 = icws, 1 = icws0, 2 = scws
//! K        u64
//! origin   icws/icws0: base seed u64
//!          scws: pool seed u64, size u64, p1 u64, p2 u64, precision u8
//! hashes   icws: K * (id u64, t i64); otherwise K * id u64
//! ```
//!
//! A file may hold any number of sketches back to back.

use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pool::{read_u32, read_u64, PoolFingerprint, PoolValues, Precision, SamplePool};
use crate::rng::{feature_hash_seed, gamma21, unit_f64, SplitMix64};
use crate::weighted_set::{FeatureId, WeightedSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Icws,
    Icws0,
    Scws,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Icws, Scheme::Icws0, Scheme::Scws];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Icws => "icws",
            Scheme::Icws0 => "icws0",
            Scheme::Scws => "scws",
        }
    }

    /// Whether hashes carry only the selected id.
    pub fn is_zero_bit(self) -> bool {
        !matches!(self, Scheme::Icws)
    }

    fn tag(self) -> u8 {
        match self {
            Scheme::Icws => 0,
            Scheme::Icws0 => 1,
            Scheme::Scws => 2,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Scheme::Icws),
            1 => Ok(Scheme::Icws0),
            2 => Ok(Scheme::Scws),
            t => Err(bad_sketch(format!("unknown scheme tag {t}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icws" => Ok(Scheme::Icws),
            "icws0" | "icws-0bit" | "icws0bit" => Ok(Scheme::Icws0),
            "scws" => Ok(Scheme::Scws),
            other => Err(format!("unknown scheme {other:?} (expected icws, icws0 or scws)")),
        }
    }
}

/// One full ICWS hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IcwsHash {
    pub z_star: FeatureId,
    pub t_star: i64,
}

/// The three random variates ICWS draws per (feature, hash index).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcwsRandom {
    pub r: f64,
    pub c: f64,
    pub beta: f64,
}

/// Supplies ICWS variates as a pure function of `(z, k)`.
pub trait DrawSource: Sync {
    fn draw(&self, z: u64, k: u64) -> IcwsRandom;
}

/// The production draw source: a SplitMix64 stream seeded from `(z, k, base_seed)`.
/// Five uniforms per call, in the order `r`, `c`, `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededDraws {
    pub base_seed: u64,
}

impl DrawSource for SeededDraws {
    #[inline]
    fn draw(&self, z: u64, k: u64) -> IcwsRandom {
        let mut rng = SplitMix64::new(feature_hash_seed(z, k, self.base_seed));
        let r = gamma21(&mut rng);
        let c = gamma21(&mut rng);
        let beta = unit_f64(&mut rng);
        IcwsRandom { r, c, beta }
    }
}

/// Everything ICWS computes for one feature at one hash index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcwsPerFeatureDraw {
    pub r: f64,
    pub c: f64,
    pub beta: f64,
    pub t: i64,
    pub y: f64,
    pub a: f64,
}

impl IcwsPerFeatureDraw {
    /// `ln w / r + beta - 1 < t <= ln w / r + beta`.
    pub fn satisfies_floor_bound(&self, ln_weight: f64) -> bool {
        let x = ln_weight / self.r + self.beta;
        (x - 1.0) < self.t as f64 && self.t as f64 <= x
    }
}

/// ICWS per-feature step given the feature's log weight.
#[inline]
pub fn icws_feature_draw(ln_weight: f64, rand: IcwsRandom) -> IcwsPerFeatureDraw {
    let IcwsRandom { r, c, beta } = rand;
    let t = (ln_weight / r + beta).floor();
    let y = (r * (t - beta)).exp();
    let a = c / (y * r.exp());
    let draw = IcwsPerFeatureDraw {
        r,
        c,
        beta,
        t: t as i64,
        y,
        a,
    };
    debug_assert!(draw.satisfies_floor_bound(ln_weight));
    draw
}

#[inline]
fn icws_hash_at<D: DrawSource + ?Sized>(
    ids: &[FeatureId],
    ln_weights: &[f64],
    k: u64,
    draws: &D,
) -> IcwsHash {
    let mut best_a = f64::INFINITY;
    let mut best = IcwsHash {
        z_star: ids[0],
        t_star: 0,
    };
    for (&z, &ln_w) in ids.iter().zip(ln_weights) {
        let d = icws_feature_draw(ln_w, draws.draw(z.0, k));
        // strict: ids ascend, so the smallest id keeps a tie
        if d.a < best_a {
            best_a = d.a;
            best = IcwsHash {
                z_star: z,
                t_star: d.t,
            };
        }
    }
    best
}

fn ln_weights(set: &WeightedSet) -> Vec<f64> {
    set.weights().iter().map(|w| w.ln()).collect()
}

/// ICWS min-hash of `set` at hash index `k` using an arbitrary draw source.
pub fn icws_minhash_with<D: DrawSource + ?Sized>(
    set: &WeightedSet,
    k: u64,
    draws: &D,
) -> Result<IcwsHash> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(icws_hash_at(set.ids(), &ln_weights(set), k, draws))
}

pub fn icws_minhash(set: &WeightedSet, k: u64, base_seed: u64) -> Result<IcwsHash> {
    icws_minhash_with(set, k, &SeededDraws { base_seed })
}

/// [`icws_minhash`] with `t*` dropped.
pub fn icws0_minhash(set: &WeightedSet, k: u64, base_seed: u64) -> Result<FeatureId> {
    icws_minhash(set, k, base_seed).map(|h| h.z_star)
}

/// Per-set values hoisted out of the SCWS hash loop.
struct ScwsPrep {
    ids: Vec<FeatureId>,
    z_p1: Vec<u64>,
    inv_w: Vec<f64>,
}

impl ScwsPrep {
    fn new(set: &WeightedSet, p1: u64) -> Self {
        ScwsPrep {
            ids: set.ids().to_vec(),
            z_p1: set.ids().iter().map(|z| z.0.wrapping_mul(p1)).collect(),
            inv_w: set.weights().iter().map(|w| w.recip()).collect(),
        }
    }

    #[inline]
    fn hash_at<T: Copy + Into<f64>>(&self, table: &[T], b: u64) -> FeatureId {
        let len = table.len() as u64;
        let mut best_a = f64::INFINITY;
        let mut best = 0;
        for (i, (&zp, &inv)) in self.z_p1.iter().zip(&self.inv_w).enumerate() {
            let gamma = (zp.wrapping_add(b) % len) as usize;
            let a = inv * table[gamma].into();
            if a < best_a {
                best_a = a;
                best = i;
            }
        }
        self.ids[best]
    }

    fn fill(&self, pool: &SamplePool, k_range: std::ops::Range<u64>, out: &mut Vec<FeatureId>) {
        let (_, p2) = pool.primes();
        match &pool.values {
            PoolValues::Single(t) => {
                out.extend(k_range.map(|k| self.hash_at(t, k.wrapping_mul(p2))))
            }
            PoolValues::Double(t) => {
                out.extend(k_range.map(|k| self.hash_at(t, k.wrapping_mul(p2))))
            }
        }
    }
}

/// SCWS min-hash of `set` at hash index `k`.
pub fn scws_minhash(set: &WeightedSet, k: u64, pool: &SamplePool) -> Result<FeatureId> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let prep = ScwsPrep::new(set, pool.primes().0);
    let mut out = Vec::with_capacity(1);
    prep.fill(pool, k..k + 1, &mut out);
    Ok(out[0])
}

/// What a sketch's hashes depend on besides the set itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SketchOrigin {
    Seed(u64),
    Pool(PoolFingerprint),
}

/// Length-K min-hash sketch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    scheme: Scheme,
    origin: SketchOrigin,
    ids: Vec<FeatureId>,
    /// `t*` per slot, only for [`Scheme::Icws`].
    t_stars: Vec<i64>,
}

impl Sketch {
    fn from_parts(
        scheme: Scheme,
        origin: SketchOrigin,
        ids: Vec<FeatureId>,
        t_stars: Vec<i64>,
    ) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::ZeroLength);
        }
        let origin_ok = matches!(
            (scheme, origin),
            (Scheme::Scws, SketchOrigin::Pool(_))
                | (Scheme::Icws | Scheme::Icws0, SketchOrigin::Seed(_))
        );
        if !origin_ok {
            return Err(bad_sketch(format!("{scheme} sketch cannot have origin {origin:?}")));
        }
        let t_ok = match scheme {
            Scheme::Icws => t_stars.len() == ids.len(),
            _ => t_stars.is_empty(),
        };
        if !t_ok {
            return Err(bad_sketch("t* count does not match scheme".into()));
        }
        Ok(Sketch {
            scheme,
            origin,
            ids,
            t_stars,
        })
    }

    /// A 0-bit sketch assembled from externally computed ids.
    pub fn zero_bit(scheme: Scheme, origin: SketchOrigin, ids: Vec<FeatureId>) -> Result<Self> {
        if !scheme.is_zero_bit() {
            return Err(Error::WrongScheme(scheme));
        }
        Self::from_parts(scheme, origin, ids, Vec::new())
    }

    /// A full ICWS sketch assembled from externally computed hashes.
    pub fn icws(base_seed: u64, hashes: &[IcwsHash]) -> Result<Self> {
        Self::from_parts(
            Scheme::Icws,
            SketchOrigin::Seed(base_seed),
            hashes.iter().map(|h| h.z_star).collect(),
            hashes.iter().map(|h| h.t_star).collect(),
        )
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn origin(&self) -> SketchOrigin {
        self.origin
    }

    pub fn pool_fingerprint(&self) -> Option<PoolFingerprint> {
        match self.origin {
            SketchOrigin::Pool(fp) => Some(fp),
            SketchOrigin::Seed(_) => None,
        }
    }

    /// Sketch length K.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Selected feature id per slot.
    pub fn ids(&self) -> &[FeatureId] {
        &self.ids
    }

    /// `t*` per slot for full ICWS sketches.
    pub fn t_stars(&self) -> Option<&[i64]> {
        (self.scheme == Scheme::Icws).then_some(&self.t_stars[..])
    }

    pub fn icws_hashes(&self) -> Option<Vec<IcwsHash>> {
        self.t_stars().map(|ts| {
            self.ids
                .iter()
                .zip(ts)
                .map(|(&z_star, &t_star)| IcwsHash { z_star, t_star })
                .collect()
        })
    }

    /// Whether slot `k` holds the same hash in both sketches. Both tuple fields
    /// must agree for full ICWS.
    #[inline]
    pub(crate) fn slot_matches(&self, other: &Sketch, k: usize) -> bool {
        self.ids[k] == other.ids[k]
            && (self.scheme != Scheme::Icws || self.t_stars[k] == other.t_stars[k])
    }

    /// The first `len` hashes, equal to the sketch built with `K = len`.
    pub fn prefix(&self, len: usize) -> Result<Sketch> {
        if len == 0 {
            return Err(Error::ZeroLength);
        }
        if len > self.len() {
            return Err(Error::LengthMismatch(len, self.len()));
        }
        let t_stars = if self.scheme == Scheme::Icws {
            self.t_stars[..len].to_vec()
        } else {
            Vec::new()
        };
        Ok(Sketch {
            scheme: self.scheme,
            origin: self.origin,
            ids: self.ids[..len].to_vec(),
            t_stars,
        })
    }

    /// Drops `t*` from a full ICWS sketch; 0-bit sketches come back unchanged.
    pub fn to_zero_bit(&self) -> Sketch {
        match self.scheme {
            Scheme::Icws => Sketch {
                scheme: Scheme::Icws0,
                origin: self.origin,
                ids: self.ids.clone(),
                t_stars: Vec::new(),
            },
            _ => self.clone(),
        }
    }

    /// Errors unless `other` was built by the same scheme, length and pool or seed.
    pub fn check_compatible(&self, other: &Sketch) -> Result<()> {
        if self.scheme != other.scheme {
            return Err(Error::SchemeMismatch(self.scheme, other.scheme));
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        if self.origin != other.origin {
            return Err(Error::PoolMismatch);
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(SKETCH_MAGIC)?;
        w.write_all(&SKETCH_VERSION.to_le_bytes())?;
        w.write_all(&[self.scheme.tag()])?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        match self.origin {
            SketchOrigin::Seed(s) => w.write_all(&s.to_le_bytes())?,
            SketchOrigin::Pool(fp) => {
                for v in [fp.seed, fp.size, fp.p1, fp.p2] {
                    w.write_all(&v.to_le_bytes())?;
                }
                let tag = match fp.precision {
                    Precision::Single => 0u8,
                    Precision::Double => 1,
                };
                w.write_all(&[tag])?;
            }
        }
        match self.scheme {
            Scheme::Icws => {
                for (z, t) in self.ids.iter().zip(&self.t_stars) {
                    w.write_all(&z.0.to_le_bytes())?;
                    w.write_all(&t.to_le_bytes())?;
                }
            }
            _ => {
                for z in &self.ids {
                    w.write_all(&z.0.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Reads one sketch; `Ok(None)` at a clean end of input.
    pub fn read_from<R: Read>(mut r: R) -> Result<Option<Sketch>> {
        let mut magic = [0u8; 8];
        match read_exact_or_eof(&mut r, &mut magic)? {
            false => return Ok(None),
            true if &magic != SKETCH_MAGIC => return Err(bad_sketch("bad magic".into())),
            true => {}
        }
        let version = read_u32(&mut r)?;
        if version != SKETCH_VERSION {
            return Err(bad_sketch(format!("unsupported version {version}")));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let scheme = Scheme::from_tag(tag[0])?;
        let len = read_u64(&mut r)? as usize;
        let origin = match scheme {
            Scheme::Scws => {
                let seed = read_u64(&mut r)?;
                let size = read_u64(&mut r)?;
                let p1 = read_u64(&mut r)?;
                let p2 = read_u64(&mut r)?;
                r.read_exact(&mut tag)?;
                let precision = match tag[0] {
                    0 => Precision::Single,
                    1 => Precision::Double,
                    t => return Err(bad_sketch(format!("unknown precision tag {t}"))),
                };
                SketchOrigin::Pool(PoolFingerprint {
                    seed,
                    size,
                    p1,
                    p2,
                    precision,
                })
            }
            _ => SketchOrigin::Seed(read_u64(&mut r)?),
        };
        let mut ids = Vec::with_capacity(len.min(1 << 20));
        let mut t_stars = Vec::new();
        for _ in 0..len {
            ids.push(FeatureId(read_u64(&mut r)?));
            if scheme == Scheme::Icws {
                t_stars.push(read_u64(&mut r)? as i64);
            }
        }
        Sketch::from_parts(scheme, origin, ids, t_stars).map(Some)
    }
}

const SKETCH_MAGIC: &[u8; 8] = b"SCWSSKCH";
const SKETCH_VERSION: u32 = 1;

fn bad_sketch(reason: String) -> Error {
    Error::BadFormat {
        what: "sketch",
        reason,
    }
}

/// Like `read_exact`, but `Ok(false)` when the reader is already exhausted.
fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(false),
            Ok(0) => return Err(io::Error::from(io::ErrorKind::UnexpectedEof).into()),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

/// Writes sketches back to back.
pub fn write_sketches<'a, W, I>(mut w: W, sketches: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Sketch>,
{
    for s in sketches {
        s.write_to(&mut w)?;
    }
    Ok(())
}

/// Reads every sketch until end of input.
pub fn read_sketches<R: Read>(mut r: R) -> Result<Vec<Sketch>> {
    let mut out = Vec::new();
    while let Some(s) = Sketch::read_from(&mut r)? {
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Source {
    Seed(u64),
    Pool(Arc<SamplePool>),
}

/// Scheme, sketch length and randomness source.
#[derive(Debug, Clone)]
pub struct SketchConfig {
    scheme: Scheme,
    k: usize,
    source: Source,
}

impl SketchConfig {
    pub fn icws(k: usize, base_seed: u64) -> Result<Self> {
        Self::seeded(Scheme::Icws, k, base_seed)
    }

    pub fn icws0(k: usize, base_seed: u64) -> Result<Self> {
        Self::seeded(Scheme::Icws0, k, base_seed)
    }

    pub fn scws(k: usize, pool: Arc<SamplePool>) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLength);
        }
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        Ok(SketchConfig {
            scheme: Scheme::Scws,
            k,
            source: Source::Pool(pool),
        })
    }

    fn seeded(scheme: Scheme, k: usize, base_seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLength);
        }
        Ok(SketchConfig {
            scheme,
            k,
            source: Source::Seed(base_seed),
        })
    }

    /// Builds a config for `scheme`; ICWS variants use `seed`, SCWS uses `pool`.
    pub fn for_scheme(scheme: Scheme, k: usize, seed: u64, pool: Arc<SamplePool>) -> Result<Self> {
        match scheme {
            Scheme::Icws => Self::icws(k, seed),
            Scheme::Icws0 => Self::icws0(k, seed),
            Scheme::Scws => Self::scws(k, pool),
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same scheme and source with a different sketch length.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroLength);
        }
        Ok(SketchConfig {
            k,
            ..self.clone()
        })
    }

    pub fn origin(&self) -> SketchOrigin {
        match &self.source {
            Source::Seed(s) => SketchOrigin::Seed(*s),
            Source::Pool(p) => SketchOrigin::Pool(p.fingerprint()),
        }
    }
}

/// Sketch of `set`: slot `k` holds the scheme's min-hash at hash index `k`.
pub fn build_sketch(set: &WeightedSet, config: &SketchConfig) -> Result<Sketch> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = config.k as u64;
    match (&config.source, config.scheme) {
        (Source::Seed(seed), scheme) => {
            let draws = SeededDraws { base_seed: *seed };
            let ln_w = ln_weights(set);
            let hashes = (0..k).map(|i| icws_hash_at(set.ids(), &ln_w, i, &draws));
            let (ids, t_stars) = if scheme == Scheme::Icws {
                hashes.map(|h| (h.z_star, h.t_star)).unzip()
            } else {
                (hashes.map(|h| h.z_star).collect(), Vec::new())
            };
            Sketch::from_parts(scheme, config.origin(), ids, t_stars)
        }
        (Source::Pool(pool), _) => {
            let prep = ScwsPrep::new(set, pool.primes().0);
            let mut ids = Vec::with_capacity(config.k);
            prep.fill(pool, 0..k, &mut ids);
            Sketch::from_parts(Scheme::Scws, config.origin(), ids, Vec::new())
        }
    }
}

/// Sketches every row in parallel; row order is preserved.
pub fn sketch_corpus(rows: &[WeightedSet], config: &SketchConfig) -> Result<Vec<Sketch>> {
    rows.par_iter().map(|r| build_sketch(r, config)).collect()
}
