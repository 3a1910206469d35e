//! Hot hand streak statistic for binary sequences.
//!
//! For a 0/1 sequence `x_1..x_n` and streak length `k`, the hot hand statistic
//! `P_k` is the fraction of length-`k` runs of ones (ending before the last
//! position) that are followed by another one. Under i.i.d. Bernoulli(p) data
//! its mean, conditioned on being defined, sits strictly below `p`.
//!
//! The crate offers four layers:
//!
//! * [`seq_stats`]: sequences, the counts `N` and `D`, and `P_k = N / D`;
//! * [`closed_form`]: exact formulas for `k = 1` and the binomial reciprocal
//!   moments they rest on;
//! * [`exact_dist`]: the exact joint law of `(N, D)` for any `k`, by enumeration
//!   and by a run-length dynamic program;
//! * [`monte_carlo`]: a seeded rejection sampler for cross-checks at scale.
//!
//! Numeric code is generic over [`Scalar`], implemented for exact [`Rational`]s
//! and for `f64`.
//!
//! ```
//! use hothand::{closed_form, exact_dist, BernoulliParam, Rational};
//!
//! let p = BernoulliParam::ratio(1, 2).unwrap();
//! let dist = exact_dist::dp_joint::<Rational>(3, 1, &p).unwrap();
//! let exact = exact_dist::conditional_expectation(&dist).unwrap().value;
//! assert_eq!(exact, closed_form::expected_hot_hand_k1(3, &p).unwrap().value);
//! assert_eq!(exact.to_string(), "5/12");
//! ```

pub mod checks;
pub mod closed_form;
mod error;
pub mod exact_dist;
pub mod monte_carlo;
mod scalar;
pub mod seq_stats;

pub use error::{Error, Result};
pub use scalar::{
    format_rational, rational_to_f64, ArithmeticMode, BernoulliParam, ProbLiteral, Rational, Scalar,
};

// The guide's code listings run as doctests so they cannot drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/statistic.md")]
    mod statistic {}
    #[doc = include_str!("../../../book/src/reciprocal_moments.md")]
    mod reciprocal_moments {}
    #[doc = include_str!("../../../book/src/streak_length_one.md")]
    mod streak_length_one {}
    #[doc = include_str!("../../../book/src/exact_distribution.md")]
    mod exact_distribution {}
    #[doc = include_str!("../../../book/src/monte_carlo.md")]
    mod monte_carlo {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
