//! Strategy bitstrings and Hamming geometry on the hypercube `{0,1}^N`.
//!
//! A [`Strategy`] stores its decisions packed into an integer. Decision `0` is
//! the most significant bit, so the integer encoding orders strategies the same
//! way their `0`/`1` string form sorts lexicographically.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Longest supported strategy.
pub const MAX_LEN: usize = 32;

/// A fixed-length bitstring of binary decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    // `len` first so the derived ordering groups by length, then by index.
    len: u8,
    index: u64,
}

impl Strategy {
    /// Builds a strategy of `len` decisions from its integer encoding.
    pub fn new(index: u64, len: usize) -> Result<Self> {
        check_len(len)?;
        if index >> len != 0 {
            return Err(Error::InvalidInput(format!(
                "index {index} does not fit in {len} decisions"
            )));
        }
        Ok(Strategy {
            len: len as u8,
            index,
        })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(0, len)
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        check_len(bits.len())?;
        let index = bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
        Ok(Strategy {
            len: bits.len() as u8,
            index,
        })
    }

    /// All `2^len` strategies in ascending index order.
    pub fn all(len: usize) -> Result<impl Iterator<Item = Strategy>> {
        check_len(len)?;
        Ok((0..1u64 << len).map(move |index| Strategy {
            len: len as u8,
            index,
        }))
    }

    #[inline]
    pub fn index(&self) -> u64 {
        self.index
    }

    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    /// Value of decision `d` (0-based, leftmost first).
    #[inline]
    pub fn bit(&self, d: usize) -> bool {
        debug_assert!(d < self.len());
        (self.index >> (self.len() - 1 - d)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len()).map(|d| self.bit(d)).collect()
    }

    /// Hamming distance without a length check. Callers guarantee equal lengths.
    #[inline]
    pub fn distance(&self, other: &Strategy) -> usize {
        debug_assert_eq!(self.len, other.len);
        (self.index ^ other.index).count_ones() as usize
    }

    #[inline]
    pub(crate) fn xor_mask(&self, mask: u64) -> Strategy {
        Strategy {
            len: self.len,
            index: self.index ^ mask,
        }
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_LEN {
        Err(Error::UnsupportedLength(len))
    } else {
        Ok(())
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in 0..self.len() {
            f.write_str(if self.bit(d) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::ParseStrategy(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Strategy::from_bits(&bits).map_err(|_| Error::ParseStrategy(s.to_string()))
    }
}

/// Number of differing decisions between `a` and `b`.
pub fn hamming_distance(a: &Strategy, b: &Strategy) -> Result<usize> {
    if a.len != b.len {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.distance(b))
}

/// Inverts the decisions at `positions` (0-based). Repeated positions count once.
pub fn flip(center: &Strategy, positions: &[usize]) -> Result<Strategy> {
    let len = center.len();
    let mut mask = 0u64;
    for &p in positions {
        if p >= len {
            return Err(Error::PositionOutOfRange { index: p, len });
        }
        mask |= 1u64 << (len - 1 - p);
    }
    Ok(center.xor_mask(mask))
}

/// Precomputed flip masks for every strategy at distance `1..=radius` from a center.
///
/// Centers change each episode while `N` and `C` stay fixed, so the masks are
/// built once and reused.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    len: usize,
    radius: usize,
    masks: Vec<u64>,
}

impl Neighborhood {
    pub fn new(len: usize, radius: usize) -> Result<Self> {
        check_len(len)?;
        if radius == 0 || radius > len {
            return Err(Error::InvalidRadius { radius, len });
        }
        let mut masks = Vec::new();
        for k in 1..=radius {
            push_combinations(len, k, &mut masks);
        }
        Ok(Neighborhood { len, radius, masks })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Cardinality `sum_{k=1..C} binom(N, k)`.
    pub fn size(&self) -> usize {
        self.masks.len()
    }

    /// Members around `center`, sorted by integer encoding.
    pub fn around(&self, center: &Strategy) -> Result<Vec<Strategy>> {
        if center.len() != self.len {
            return Err(Error::LengthMismatch {
                left: center.len(),
                right: self.len,
            });
        }
        let mut out: Vec<Strategy> = self.masks.iter().map(|&m| center.xor_mask(m)).collect();
        out.sort_unstable();
        Ok(out)
    }
}

// All `len`-bit masks with exactly `k` ones (Gosper's hack).
fn push_combinations(len: usize, k: usize, out: &mut Vec<u64>) {
    let limit = 1u64 << len;
    let mut m = (1u64 << k) - 1;
    while m < limit {
        out.push(m);
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
}

/// All strategies `s` with `1 <= d_H(s, center) <= radius`, in ascending index order.
pub fn neighborhood(center: &Strategy, radius: usize) -> Result<Vec<Strategy>> {
    Neighborhood::new(center.len(), radius)?.around(center)
}
