//! Binary sequences, their streak counts and the hot hand statistic.
//!
//! For a sequence `x_1, ..., x_n` and a streak length `k`, the statistic is the
//! ratio of two window counts:
//!
//! * the denominator `D` counts the length-`k` windows of ones ending at
//!   positions `k..=n-1` (a streak that still has a successor);
//! * the numerator `N` counts the length-`k+1` windows of ones ending at
//!   positions `k+1..=n` (a streak that was followed by another one).
//!
//! `N / D` is only defined when `D > 0`, which [`HotHandValue`] makes explicit.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// A finite realization of `(X_1, ..., X_n)` with at least one bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinarySequence {
    bits: Vec<bool>,
}

impl BinarySequence {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::invalid("a binary sequence needs at least one bit"));
        }
        Ok(BinarySequence { bits })
    }

    /// From integer digits; anything other than 0 or 1 is rejected.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let bits = digits
            .iter()
            .enumerate()
            .map(|(i, &d)| match d {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::invalid(format!("element {i} is {other}, not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }

    /// The lowest `n` bits of `mask`, bit 0 first.
    pub fn from_mask(mask: u64, n: usize) -> Result<Self> {
        if n > 64 {
            return Err(Error::invalid("a u64 mask holds at most 64 bits"));
        }
        Self::new((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for BinarySequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinarySequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_sequence(s)
    }
}

/// Reads `'0'`/`'1'` characters in order, skipping whitespace.
///
/// The error offset is the byte offset of the first offending character.
pub fn parse_sequence(text: &str) -> Result<BinarySequence> {
    let mut bits = Vec::with_capacity(text.len());
    for (offset, c) in text.char_indices() {
        match c {
            '0' => bits.push(false),
            '1' => bits.push(true),
            c if c.is_whitespace() => {}
            c => {
                return Err(Error::Parse {
                    offset,
                    reason: format!("unexpected character {c:?}, expected '0', '1' or whitespace"),
                })
            }
        }
    }
    if bits.is_empty() {
        return Err(Error::Parse {
            offset: text.len(),
            reason: "no bits found".into(),
        });
    }
    Ok(BinarySequence { bits })
}

/// Numerator and denominator counts of the statistic for one sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreakCountPair {
    /// Windows of `k + 1` ones ending at positions `k+1..=n`.
    pub numerator: usize,
    /// Windows of `k` ones ending at positions `k..=n-1`.
    pub denominator: usize,
    pub k: usize,
    pub n: usize,
}

/// `N / D` in lowest terms, or `Undefined` when `D = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HotHandValue {
    Defined(Ratio<u64>),
    Undefined,
}

impl HotHandValue {
    pub fn is_defined(&self) -> bool {
        matches!(self, HotHandValue::Defined(_))
    }

    pub fn ratio(&self) -> Option<Ratio<u64>> {
        match self {
            HotHandValue::Defined(r) => Some(*r),
            HotHandValue::Undefined => None,
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.ratio().map(|r| *r.numer() as f64 / *r.denom() as f64)
    }
}

impl fmt::Display for HotHandValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HotHandValue::Defined(r) => write!(f, "{r}"),
            HotHandValue::Undefined => f.write_str("undefined (D=0)"),
        }
    }
}

pub(crate) fn check_streak_length(n: usize, k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::invalid("streak length k must be at least 1"));
    }
    if n < 2 {
        return Err(Error::invalid(format!(
            "sequence length n = {n} admits no streak length (need n >= 2)"
        )));
    }
    if k > n - 1 {
        return Err(Error::invalid(format!(
            "streak length k = {k} exceeds n - 1 = {} (k must satisfy k <= n - 1)",
            n - 1
        )));
    }
    Ok(())
}

/// Single pass over the bits tracking the trailing run of ones.
///
/// Callers must have validated `k` against `n`.
#[inline]
pub(crate) fn scan_counts(bits: impl IntoIterator<Item = bool>, n: usize, k: usize) -> (usize, usize) {
    let (mut run, mut num, mut den) = (0usize, 0usize, 0usize);
    for (pos, bit) in (1..=n).zip(bits) {
        if bit {
            run += 1;
        } else {
            run = 0;
        }
        if run >= k && pos < n {
            den += 1;
        }
        if run > k {
            num += 1;
        }
    }
    (num, den)
}

pub fn count_streak_terms(x: &BinarySequence, k: usize) -> Result<StreakCountPair> {
    let n = x.len();
    check_streak_length(n, k)?;
    let (numerator, denominator) = scan_counts(x.bits.iter().copied(), n, k);
    Ok(StreakCountPair {
        numerator,
        denominator,
        k,
        n,
    })
}

/// The hot hand statistic of streak length `k`.
///
/// ```
/// use hothand::seq_stats::{hot_hand_statistic, HotHandValue};
/// use num_rational::Ratio;
///
/// let x = "110".parse().unwrap();
/// assert_eq!(hot_hand_statistic(&x, 1).unwrap(), HotHandValue::Defined(Ratio::new(1, 2)));
/// ```
pub fn hot_hand_statistic(x: &BinarySequence, k: usize) -> Result<HotHandValue> {
    let counts = count_streak_terms(x, k)?;
    Ok(match counts.denominator {
        0 => HotHandValue::Undefined,
        d => HotHandValue::Defined(Ratio::new(counts.numerator as u64, d as u64)),
    })
}
