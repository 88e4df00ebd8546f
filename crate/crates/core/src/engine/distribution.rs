use std::collections::BTreeMap;

use serde::Serialize;

use super::{WalkConfig, Walker};
use crate::error::Result;
use crate::lattice::LatticePoint;
use crate::measure::StepDistribution;
use crate::par::fold_trials;
use crate::stream::RandomStream;

/// Monte Carlo frequencies of lattice points.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<LatticePoint, u64>,
    pub total: u64,
}

impl EmpiricalDistribution {
    pub fn record(&mut self, z: &LatticePoint) {
        if let Some(c) = self.counts.get_mut(z) {
            *c += 1;
        } else {
            self.counts.insert(z.clone(), 1);
        }
        self.total += 1;
    }

    pub fn merge(&mut self, other: EmpiricalDistribution) {
        for (z, c) in other.counts {
            *self.counts.entry(z).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn probability(&self, z: &LatticePoint) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        *self.counts.get(z).unwrap_or(&0) as f64 / self.total as f64
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (&LatticePoint, f64)> + '_ {
        let total = self.total as f64;
        self.counts.iter().map(move |(z, &c)| (z, c as f64 / total))
    }

    pub fn tv_distance(&self, other: &EmpiricalDistribution) -> f64 {
        let mut sum = 0.0;
        for (z, p) in self.probabilities() {
            sum += (p - other.probability(z)).abs();
        }
        for (z, q) in other.probabilities() {
            if !self.counts.contains_key(z) {
                sum += q;
            }
        }
        0.5 * sum
    }

    /// Mass of `{x : ‖x‖ <= radius}`.
    pub fn ball_mass(&self, radius: f64, norm: crate::lattice::NormKind) -> f64 {
        self.probabilities()
            .filter(|(z, _)| z.norm(norm) <= radius)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Frequencies of the position after `n` steps over `config.trials`
/// independent walks.
pub fn endpoint_distribution(mu: &StepDistribution, config: &WalkConfig, n: u64) -> Result<EmpiricalDistribution> {
    config.validate(mu)?;
    fold_trials(
        config.trials,
        config.parallelism,
        EmpiricalDistribution::default,
        |i, acc| {
            let mut w = Walker::new(mu, config.mode, config.z0.clone(), RandomStream::for_trial(config.seed, i));
            for _ in 0..n {
                w.advance()?;
            }
            acc.record(&w.state);
            Ok(())
        },
        EmpiricalDistribution::merge,
    )
}

/// How the Cesàro average is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CesaroEstimator {
    /// Positions at steps `1..=n` pooled over all trials; unbiased for
    /// `(1/n) Σ_i ω_i`.
    Pooled,
    /// Occupation frequencies of one path of `n` steps (trial 0); an ergodic
    /// estimate of the stationary measure.
    Occupation,
}

pub fn cesaro_distribution(
    mu: &StepDistribution,
    config: &WalkConfig,
    n: u64,
    estimator: CesaroEstimator,
) -> Result<EmpiricalDistribution> {
    config.validate(mu)?;
    let trials = match estimator {
        CesaroEstimator::Pooled => config.trials,
        CesaroEstimator::Occupation => 1,
    };
    fold_trials(
        trials,
        config.parallelism,
        EmpiricalDistribution::default,
        |i, acc| {
            let mut w = Walker::new(mu, config.mode, config.z0.clone(), RandomStream::for_trial(config.seed, i));
            for _ in 0..n {
                w.advance()?;
                acc.record(&w.state);
            }
            Ok(())
        },
        EmpiricalDistribution::merge,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::WalkMode;
    use crate::measure::nu;
    use crate::par::Parallelism;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_steps_is_a_point_mass() {
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[2, 3])).with_trials(50);
        let d = endpoint_distribution(&nu(2).unwrap(), &cfg, 0).unwrap();
        assert_eq!(d.total, 50);
        assert_eq!(d.probability(&p(&[2, 3])), 1.0);
    }

    #[test]
    fn one_step_from_origin() {
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[0, 0])).with_trials(40_000).with_seed(5);
        let d = endpoint_distribution(&nu(2).unwrap(), &cfg, 1).unwrap();
        assert_eq!(d.counts.len(), 4);
        for (_, prob) in d.probabilities() {
            assert!((prob - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / 40_000.0).sqrt());
        }
    }

    #[test]
    fn cesaro_at_one_equals_endpoint() {
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[0, 0])).with_trials(1000).with_seed(8);
        let mu = nu(2).unwrap();
        let e = endpoint_distribution(&mu, &cfg, 1).unwrap();
        let c = cesaro_distribution(&mu, &cfg, 1, CesaroEstimator::Pooled).unwrap();
        assert_eq!(e, c);
    }

    #[test]
    fn totals_and_thread_independence() {
        let mu = nu(3).unwrap();
        let base = WalkConfig::new(WalkMode::CoprimeTo(3), p(&[1, 0, 0])).with_trials(3000).with_seed(77);
        let one = cesaro_distribution(&mu, &base.clone().with_parallelism(Parallelism::Threads(1)), 7, CesaroEstimator::Pooled)
            .unwrap();
        let many = cesaro_distribution(&mu, &base.with_parallelism(Parallelism::Threads(4)), 7, CesaroEstimator::Pooled)
            .unwrap();
        assert_eq!(one.total, 21_000);
        assert_eq!(one, many);
        let mass: f64 = one.probabilities().map(|(_, q)| q).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(one.counts.keys().all(|z| z.is_coprime_to(3)));
    }
}
