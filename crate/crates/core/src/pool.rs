//! The fixed pool of pre-sampled `c * exp(-r)` values behind SCWS.
//!
//! `c` and `r` are independent Gamma(2, 1) draws. A feature `z` at hash index
//! `k` reads slot `(z * p1 + k * p2) mod |T|`, with both products wrapping in
//! 64 bits. Pools are generated from [`SplitMix64`] and can be written to a
//! snapshot file so independent sketchers agree bit for bit.
//!
//! Snapshot layout, all integers little-endian:
//!
//! ```text
//! magic     8 bytes  b"SCWSPOOL"
//! version   u32      1
//! size      u64
//! seed      u64
//! p1        u64
//! p2        u64
//! precision u8       0 = f32, 1 = f64
//! values    size * (4 | 8) bytes
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng::{gamma21, SplitMix64};

pub const DEFAULT_POOL_SIZE: usize = 4000;
pub const DEFAULT_P1: u64 = 1_073_741_827;
pub const DEFAULT_P2: u64 = 1_073_741_831;
pub const DEFAULT_POOL_SEED: u64 = 0x5C35_2018_C0FF_EE01;

const POOL_MAGIC: &[u8; 8] = b"SCWSPOOL";
const POOL_VERSION: u32 = 1;

/// Storage width of pool values. Values are always generated in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    Single,
    Double,
}

impl Precision {
    fn tag(self) -> u8 {
        match self {
            Precision::Single => 0,
            Precision::Double => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Precision::Single),
            1 => Ok(Precision::Double),
            t => Err(bad_pool(format!("unknown precision tag {t}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum PoolValues {
    Single(Vec<f32>),
    Double(Vec<f64>),
}

/// Identifies a pool for sketch comparability checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PoolFingerprint {
    pub seed: u64,
    pub size: u64,
    pub p1: u64,
    pub p2: u64,
    pub precision: Precision,
}

/// Immutable array of positive pre-sampled values plus the two index primes.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePool {
    pub(crate) values: PoolValues,
    seed: u64,
    p1: u64,
    p2: u64,
}

/// One draw of `c * exp(-r)`.
fn draw_value(rng: &mut SplitMix64) -> f64 {
    let c = gamma21(rng);
    let r = gamma21(rng);
    c * (-r).exp()
}

/// Single-precision pool of `size` values with the default primes.
pub fn build_pool(size: usize, seed: u64) -> Result<SamplePool> {
    build_pool_with(size, seed, Precision::Single)
}

pub fn build_pool_with(size: usize, seed: u64, precision: Precision) -> Result<SamplePool> {
    if size == 0 {
        return Err(Error::ZeroSize);
    }
    let mut rng = SplitMix64::new(seed);
    let values = match precision {
        Precision::Double => PoolValues::Double((0..size).map(|_| draw_value(&mut rng)).collect()),
        Precision::Single => PoolValues::Single(
            (0..size)
                .map(|_| loop {
                    // an extreme r can underflow f32; draw again
                    let v = draw_value(&mut rng) as f32;
                    if v > 0.0 {
                        break v;
                    }
                })
                .collect(),
        ),
    };
    Ok(SamplePool {
        values,
        seed,
        p1: DEFAULT_P1,
        p2: DEFAULT_P2,
    })
}

/// Slot read by feature `z` at hash index `k`.
#[inline]
pub fn pool_index(z: u64, k: u64, pool: &SamplePool) -> usize {
    lcg_index(z, k, pool.p1, pool.p2, pool.len() as u64)
}

#[inline]
pub(crate) fn lcg_index(z: u64, k: u64, p1: u64, p2: u64, len: u64) -> usize {
    (z.wrapping_mul(p1).wrapping_add(k.wrapping_mul(p2)) % len) as usize
}

impl SamplePool {
    pub fn default_pool() -> SamplePool {
        build_pool(DEFAULT_POOL_SIZE, DEFAULT_POOL_SEED).expect("default size is nonzero")
    }

    /// Wraps caller-supplied values, e.g. a hand-built pool in tests.
    /// `seed` only labels the pool in its fingerprint.
    pub fn from_values(values: Vec<f64>, seed: u64, p1: u64, p2: u64) -> Result<SamplePool> {
        if values.is_empty() {
            return Err(Error::EmptyPool);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidPoolValue(*v));
        }
        Ok(SamplePool {
            values: PoolValues::Double(values),
            seed,
            p1,
            p2,
        })
    }

    pub fn len(&self) -> usize {
        match &self.values {
            PoolValues::Single(v) => v.len(),
            PoolValues::Double(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> f64 {
        match &self.values {
            PoolValues::Single(v) => v[i] as f64,
            PoolValues::Double(v) => v[i],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn primes(&self) -> (u64, u64) {
        (self.p1, self.p2)
    }

    pub fn precision(&self) -> Precision {
        match self.values {
            PoolValues::Single(_) => Precision::Single,
            PoolValues::Double(_) => Precision::Double,
        }
    }

    pub fn fingerprint(&self) -> PoolFingerprint {
        PoolFingerprint {
            seed: self.seed,
            size: self.len() as u64,
            p1: self.p1,
            p2: self.p2,
            precision: self.precision(),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(POOL_MAGIC)?;
        w.write_all(&POOL_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.p1.to_le_bytes())?;
        w.write_all(&self.p2.to_le_bytes())?;
        w.write_all(&[self.precision().tag()])?;
        match &self.values {
            PoolValues::Single(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            PoolValues::Double(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<SamplePool> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != POOL_MAGIC {
            return Err(bad_pool("bad magic".into()));
        }
        let version = read_u32(&mut r)?;
        if version != POOL_VERSION {
            return Err(bad_pool(format!("unsupported version {version}")));
        }
        let size = read_u64(&mut r)?;
        let seed = read_u64(&mut r)?;
        let p1 = read_u64(&mut r)?;
        let p2 = read_u64(&mut r)?;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let precision = Precision::from_tag(tag[0])?;
        if size == 0 {
            return Err(Error::EmptyPool);
        }
        let size = usize::try_from(size).map_err(|_| bad_pool("size overflows usize".into()))?;
        let values = match precision {
            Precision::Single => {
                let mut v = Vec::with_capacity(size.min(1 << 24));
                let mut buf = [0u8; 4];
                for _ in 0..size {
                    r.read_exact(&mut buf)?;
                    v.push(f32::from_le_bytes(buf));
                }
                if let Some(x) = v.iter().find(|x| !x.is_finite() || **x <= 0.0) {
                    return Err(Error::InvalidPoolValue(*x as f64));
                }
                PoolValues::Single(v)
            }
            Precision::Double => {
                let mut v = Vec::with_capacity(size.min(1 << 24));
                let mut buf = [0u8; 8];
                for _ in 0..size {
                    r.read_exact(&mut buf)?;
                    v.push(f64::from_le_bytes(buf));
                }
                if let Some(x) = v.iter().find(|x| !x.is_finite() || **x <= 0.0) {
                    return Err(Error::InvalidPoolValue(*x));
                }
                PoolValues::Double(v)
            }
        };
        Ok(SamplePool {
            values,
            seed,
            p1,
            p2,
        })
    }
}

fn bad_pool(reason: String) -> Error {
    Error::BadFormat {
        what: "pool",
        reason,
    }
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
