//! Arithmetic back ends and the success probability type.
//!
//! Every computation in the crate is generic over [`Scalar`], which has two
//! implementations:
//!
//! * [`Rational`] (arbitrary precision fractions): exact, used to check identities
//!   with `==` rather than a tolerance;
//! * `f64`: fast, used for large tables, with compensated formulas where plain
//!   powering would cancel catastrophically.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number with arbitrary precision numerator and denominator.
pub type Rational = BigRational;

/// Which arithmetic a computation ran in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    Rational,
    Double,
}

impl Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithmeticMode::Rational => "rational",
            ArithmeticMode::Double => "double",
        })
    }
}

impl FromStr for ArithmeticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rational" | "exact" => Ok(ArithmeticMode::Rational),
            "double" | "float" | "f64" => Ok(ArithmeticMode::Double),
            other => Err(Error::invalid(format!(
                "unknown arithmetic mode {other:?} (expected \"rational\" or \"double\")"
            ))),
        }
    }
}

/// A number type the probability machinery can run on.
///
/// `Weight` is the accumulator used by the dynamic program. For rationals it is
/// an integer numerator over the implicit common denominator `b^n` (with
/// `p = a/b`), which keeps the inner loop free of gcd reductions.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    type Weight: Clone + Debug + Zero + One + Send + Sync;

    const MODE: ArithmeticMode;

    fn from_u64(v: u64) -> Self;

    fn from_ratio(num: u64, den: u64) -> Self;

    fn to_f64(&self) -> f64;

    fn powu(&self, exp: u64) -> Self;

    /// `1 - (1 - p)^m`.
    fn complement_pow_mass(p: &Self, m: u64) -> Self {
        Self::one() - (Self::one() - p.clone()).powu(m)
    }

    /// `(1 - p)^m - 1 + m p`, which is nonnegative and of order `(m p)^2` when `m p` is small.
    fn complement_pow_deficit(p: &Self, m: u64) -> Self {
        (Self::one() - p.clone()).powu(m) - Self::one() + Self::from_u64(m) * p.clone()
    }

    /// Per-step weights `(success, failure)` of one Bernoulli draw.
    fn step_weights(p: &Self) -> (Self::Weight, Self::Weight);

    /// `acc += w * factor`
    fn weight_mul_add(acc: &mut Self::Weight, w: &Self::Weight, factor: &Self::Weight);

    fn weight_add(acc: &mut Self::Weight, w: &Self::Weight);

    /// Converts an accumulated weight after `n` steps back into a probability.
    fn weight_to_prob(w: &Self::Weight, p: &Self, n: u32) -> Self;

    /// JSON fields describing a probability value in this mode.
    fn json_prob_fields(&self, obj: &mut serde_json::Map<String, serde_json::Value>);

    /// JSON representation of a parameter value (for example `p`).
    fn json_value(&self) -> serde_json::Value;
}

impl Scalar for Rational {
    type Weight = BigInt;

    const MODE: ArithmeticMode = ArithmeticMode::Rational;

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn powu(&self, exp: u64) -> Self {
        let exp = u32::try_from(exp).expect("exponent fits in u32");
        // gcd(a, b) = 1 implies gcd(a^e, b^e) = 1, so no reduction is needed.
        Rational::new_raw(self.numer().pow(exp), self.denom().pow(exp))
    }

    fn step_weights(p: &Self) -> (BigInt, BigInt) {
        (p.numer().clone(), p.denom() - p.numer())
    }

    fn weight_mul_add(acc: &mut BigInt, w: &BigInt, factor: &BigInt) {
        *acc += w * factor;
    }

    fn weight_add(acc: &mut BigInt, w: &BigInt) {
        *acc += w;
    }

    fn weight_to_prob(w: &BigInt, p: &Self, n: u32) -> Self {
        Rational::new(w.clone(), p.denom().pow(n))
    }

    fn json_prob_fields(&self, obj: &mut serde_json::Map<String, serde_json::Value>) {
        obj.insert("prob_num".into(), self.numer().to_string().into());
        obj.insert("prob_den".into(), self.denom().to_string().into());
    }

    fn json_value(&self) -> serde_json::Value {
        format_rational(self).into()
    }
}

impl Scalar for f64 {
    type Weight = f64;

    const MODE: ArithmeticMode = ArithmeticMode::Double;

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, exp: u64) -> Self {
        match i32::try_from(exp) {
            Ok(e) => self.powi(e),
            Err(_) => self.powf(exp as f64),
        }
    }

    fn complement_pow_mass(p: &f64, m: u64) -> f64 {
        if m == 0 {
            return 0.0;
        }
        -((m as f64) * (-p).ln_1p()).exp_m1()
    }

    fn complement_pow_deficit(p: &f64, m: u64) -> f64 {
        let mf = m as f64;
        if m < 2 || *p == 0.0 {
            return 0.0;
        }
        if mf * p >= 0.5 {
            return (mf * (-p).ln_1p()).exp_m1() + mf * p;
        }
        // sum_{i >= 2} C(m, i) (-p)^i, alternating with ratio at most m p / 3
        let mut term = mf * (mf - 1.0) / 2.0 * p * p;
        let mut sum = 0.0;
        let mut i = 2.0;
        while term != 0.0 {
            sum += term;
            if term.abs() <= f64::EPSILON * 1e-3 * sum.abs() {
                break;
            }
            term *= -(mf - i) * p / (i + 1.0);
            i += 1.0;
        }
        sum
    }

    fn step_weights(p: &f64) -> (f64, f64) {
        (*p, 1.0 - p)
    }

    fn weight_mul_add(acc: &mut f64, w: &f64, factor: &f64) {
        *acc += w * factor;
    }

    fn weight_add(acc: &mut f64, w: &f64) {
        *acc += w;
    }

    fn weight_to_prob(w: &f64, _p: &f64, _n: u32) -> f64 {
        *w
    }

    fn json_prob_fields(&self, obj: &mut serde_json::Map<String, serde_json::Value>) {
        obj.insert("prob_float".into(), (*self).into());
    }

    fn json_value(&self) -> serde_json::Value {
        (*self).into()
    }
}

/// Correctly scaled conversion that survives numerators and denominators beyond `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    // Shift so the integer quotient carries 64 significant bits, then rescale.
    let num_bits = r.numer().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    let shift = 64 - (num_bits - den_bits);
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    let mantissa = scaled.to_f64().unwrap_or(f64::NAN);
    mantissa * 2f64.powi(-shift as i32)
}

/// `a/b` or `a` for integers; never uses a decimal point.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A success probability `p`, checked to lie in `[0, 1]`.
///
/// Individual operations narrow the range further: the reciprocal moment
/// formulas accept `(0, 1]`, the bias statements need `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliParam<T> {
    p: T,
}

impl<T: Scalar> BernoulliParam<T> {
    pub fn new(p: T) -> Result<Self> {
        if p.to_f64().is_nan() || p < T::zero() || p > T::one() {
            return Err(Error::invalid(format!("success probability {p} is outside [0, 1]")));
        }
        Ok(BernoulliParam { p })
    }

    pub fn value(&self) -> &T {
        &self.p
    }

    pub fn into_inner(self) -> T {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.p.is_one()
    }

    /// Accept `p` in `(0, 1]`.
    pub fn require_positive(&self) -> Result<&T> {
        if self.is_zero() {
            return Err(Error::ZeroProbability);
        }
        Ok(&self.p)
    }

    /// Accept `p` in `(0, 1)`.
    pub fn require_open(&self) -> Result<&T> {
        self.require_positive()?;
        if self.is_one() {
            return Err(Error::invalid("this operation needs p strictly below 1"));
        }
        Ok(&self.p)
    }

    pub fn to_f64(&self) -> BernoulliParam<f64> {
        BernoulliParam { p: self.p.to_f64() }
    }
}

impl BernoulliParam<Rational> {
    /// `p = num / den`.
    pub fn ratio(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("denominator of p is zero"));
        }
        Self::new(Rational::from_ratio(num, den))
    }
}

impl<T: Display> Display for BernoulliParam<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(&self.p, f)
    }
}

/// A probability literal as typed by a user.
///
/// `"a/b"` is read as an exact rational; anything else is parsed as a decimal
/// `f64`. Decimals are never silently promoted to rationals.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbLiteral {
    Exact(Rational),
    Float(f64),
}

impl ProbLiteral {
    pub fn natural_mode(&self) -> ArithmeticMode {
        match self {
            ProbLiteral::Exact(_) => ArithmeticMode::Rational,
            ProbLiteral::Float(_) => ArithmeticMode::Double,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ProbLiteral::Exact(r) => rational_to_f64(r),
            ProbLiteral::Float(x) => *x,
        }
    }

    /// The literal in `mode`. Asking for an exact value from a decimal literal is an error.
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            ProbLiteral::Exact(r) => Ok(r.clone()),
            ProbLiteral::Float(x) => Err(Error::invalid(format!(
                "decimal literal {x} cannot be used in rational mode; write p as a fraction a/b"
            ))),
        }
    }
}

impl Display for ProbLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbLiteral::Exact(r) => f.write_str(&format_rational(r)),
            ProbLiteral::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for ProbLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let parse = |part: &str, what: &str| {
                part.trim().parse::<BigInt>().map_err(|_| Error::Parse {
                    offset: 0,
                    reason: format!("{what} of {s:?} is not an integer"),
                })
            };
            let num = parse(num, "numerator")?;
            let den = parse(den, "denominator")?;
            if den.is_zero() {
                return Err(Error::invalid(format!("{s:?} has a zero denominator")));
            }
            if num.is_negative() || den.is_negative() {
                return Err(Error::invalid(format!("{s:?} is negative")));
            }
            let (num, den) = {
                let g = num.gcd(&den);
                (num / &g, den / &g)
            };
            return Ok(ProbLiteral::Exact(Rational::new_raw(num, den)));
        }
        s.parse::<f64>().map(ProbLiteral::Float).map_err(|_| Error::Parse {
            offset: 0,
            reason: format!("{s:?} is neither a fraction a/b nor a decimal number"),
        })
    }
}
