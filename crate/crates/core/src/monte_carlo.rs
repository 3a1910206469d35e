//! Seeded rejection sampler for `E[P_k | D_k != 0]`.
//!
//! Each draw is a fresh i.i.d. Bernoulli(p) sequence; draws with `D_k = 0` are
//! discarded, which is exactly conditioning on `D_k != 0`. Accepted draws feed a
//! running mean and variance.
//!
//! Randomness comes from ChaCha8 seeded with `seed`; shard `i` reads stream `i`
//! of that generator, so a fixed `(seed, shards)` pair reproduces the result bit
//! for bit on every platform.

use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seq_stats::check_streak_length;

/// Recorded in every exported result.
pub const GENERATOR_NAME: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), stream = shard index";

pub const DEFAULT_MAX_ATTEMPT_FACTOR: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    /// Number of accepted draws to collect.
    pub samples: u64,
    pub seed: u64,
    /// Total draws are capped at `max_attempt_factor * samples`.
    pub max_attempt_factor: u64,
    pub shards: u32,
}

impl SimulationConfig {
    pub fn new(n: usize, k: usize, p: f64, samples: u64, seed: u64) -> Result<Self> {
        let config = SimulationConfig {
            n,
            k,
            p,
            samples,
            seed,
            max_attempt_factor: DEFAULT_MAX_ATTEMPT_FACTOR,
            shards: 1,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_max_attempt_factor(mut self, factor: u64) -> Self {
        self.max_attempt_factor = factor;
        self
    }

    pub fn with_shards(mut self, shards: u32) -> Self {
        self.shards = shards;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_streak_length(self.n, self.k)?;
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid(format!(
                "simulation needs 0 < p < 1, got p = {}",
                self.p
            )));
        }
        if self.samples < 1 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        if self.max_attempt_factor < 1 {
            return Err(Error::invalid("max_attempt_factor must be at least 1"));
        }
        if self.shards < 1 || u64::from(self.shards) > self.samples {
            return Err(Error::invalid(format!(
                "shards must lie in 1..={} (one accepted sample per shard at least)",
                self.samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    /// Mean of the statistic over accepted draws.
    pub estimate: f64,
    /// Sample standard deviation over `sqrt(accepted)`.
    pub stderr: f64,
    pub accepted: u64,
    pub rejected: u64,
    /// `rejected / (accepted + rejected)`.
    pub empirical_p_d_zero: f64,
}

impl SimulationResult {
    pub fn draws(&self) -> u64 {
        self.accepted + self.rejected
    }
}

/// The result export `{config, estimate, stderr, accepted, rejected, empirical_p_d_zero, generator_name}`.
#[derive(Debug, Serialize)]
pub struct SimulationReport<'a> {
    pub config: &'a SimulationConfig,
    #[serde(flatten)]
    pub result: &'a SimulationResult,
    pub generator_name: &'static str,
}

impl<'a> SimulationReport<'a> {
    pub fn new(config: &'a SimulationConfig, result: &'a SimulationResult) -> Self {
        SimulationReport {
            config,
            result,
            generator_name: GENERATOR_NAME,
        }
    }
}

/// Welford accumulator; shards merge with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

struct ShardOutcome {
    moments: Moments,
    rejected: u64,
    capped: bool,
}

fn run_shard(config: &SimulationConfig, shard: u32, target: u64) -> ShardOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(u64::from(shard));
    let coin = Bernoulli::new(config.p).expect("p validated to lie in (0, 1)");
    let cap = target.saturating_mul(config.max_attempt_factor);
    let (n, k) = (config.n, config.k);

    let mut moments = Moments::default();
    let mut rejected = 0u64;
    let mut attempts = 0u64;
    while moments.count < target {
        if attempts == cap {
            return ShardOutcome {
                moments,
                rejected,
                capped: true,
            };
        }
        attempts += 1;
        let (mut run, mut num, mut den) = (0usize, 0u32, 0u32);
        for pos in 1..=n {
            if coin.sample(&mut rng) {
                run += 1;
                if run >= k && pos < n {
                    den += 1;
                }
                if run > k {
                    num += 1;
                }
            } else {
                run = 0;
            }
        }
        if den == 0 {
            rejected += 1;
        } else {
            moments.push(f64::from(num) / f64::from(den));
        }
    }
    ShardOutcome {
        moments,
        rejected,
        capped: false,
    }
}

/// Runs the rejection sampler described by `config`.
///
/// Shards run on separate threads; their results are merged in shard order.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationResult> {
    config.validate()?;
    let shards = u64::from(config.shards);
    let targets: Vec<u64> = (0..shards)
        .map(|i| config.samples / shards + u64::from(i < config.samples % shards))
        .collect();

    let outcomes: Vec<ShardOutcome> = if config.shards == 1 {
        vec![run_shard(config, 0, targets[0])]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = targets
                .iter()
                .enumerate()
                .map(|(i, &target)| scope.spawn(move || run_shard(config, i as u32, target)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("simulation shard panicked"))
                .collect()
        })
    };

    let mut moments = Moments::default();
    let mut rejected = 0;
    let mut capped = false;
    for outcome in &outcomes {
        moments.merge(&outcome.moments);
        rejected += outcome.rejected;
        capped |= outcome.capped;
    }
    if capped {
        return Err(Error::AttemptCapReached {
            target: config.samples,
            cap: config.samples.saturating_mul(config.max_attempt_factor),
            accepted: moments.count,
            rejected,
            partial_estimate: (moments.count > 0).then_some(moments.mean),
        });
    }
    let draws = moments.count + rejected;
    Ok(SimulationResult {
        estimate: moments.mean,
        stderr: moments.stderr(),
        accepted: moments.count,
        rejected,
        empirical_p_d_zero: rejected as f64 / draws as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SimulationConfig::new(3, 3, 0.5, 10, 1).is_err());
        assert!(SimulationConfig::new(3, 1, 0.0, 10, 1).is_err());
        assert!(SimulationConfig::new(3, 1, 1.0, 10, 1).is_err());
        assert!(SimulationConfig::new(3, 1, 0.5, 0, 1).is_err());
        let c = SimulationConfig::new(3, 1, 0.5, 10, 1).unwrap();
        assert!(c.clone().with_shards(11).validate().is_err());
        assert!(c.with_max_attempt_factor(0).validate().is_err());
    }

    #[test]
    fn deterministic() {
        let c = SimulationConfig::new(20, 2, 0.4, 5_000, 99).unwrap();
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let sharded = c.clone().with_shards(3);
        assert_eq!(simulate(&sharded).unwrap(), simulate(&sharded).unwrap());
        let other = SimulationConfig::new(20, 2, 0.4, 5_000, 100).unwrap();
        assert_ne!(simulate(&c).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn bookkeeping() {
        let c = SimulationConfig::new(3, 1, 0.5, 20_000, 7).unwrap().with_shards(4);
        let r = simulate(&c).unwrap();
        assert_eq!(r.accepted, 20_000);
        assert!((0.0..=1.0).contains(&r.estimate));
        assert_eq!(r.empirical_p_d_zero, r.rejected as f64 / r.draws() as f64);
        assert!((r.estimate - 5.0 / 12.0).abs() < 5.0 * r.stderr);
    }

    #[test]
    fn starvation_reports_partial_counts() {
        let c = SimulationConfig::new(50, 10, 0.01, 1_000_000, 3)
            .unwrap()
            .with_max_attempt_factor(1);
        match simulate(&c) {
            Err(Error::AttemptCapReached {
                target,
                cap,
                accepted,
                rejected,
                ..
            }) => {
                assert_eq!(target, 1_000_000);
                assert_eq!(accepted + rejected, cap);
                assert!(accepted < target);
            }
            other => panic!("expected a capped run, got {other:?}"),
        }
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 101.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count, whole.count);
        assert!((a.mean - whole.mean).abs() < 1e-14);
        assert!((a.m2 - whole.m2).abs() < 1e-10);
    }

    #[test]
    fn report_json_shape() {
        let c = SimulationConfig::new(3, 1, 0.5, 100, 7).unwrap();
        let r = simulate(&c).unwrap();
        let v = serde_json::to_value(SimulationReport::new(&c, &r)).unwrap();
        for key in ["config", "estimate", "stderr", "accepted", "rejected", "generator_name"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["config"]["seed"], 7);
    }
}
