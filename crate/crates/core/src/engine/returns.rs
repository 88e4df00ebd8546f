use serde::Serialize;

use super::{WalkConfig, Walker};
use crate::error::{Result, WalkError};
use crate::measure::StepDistribution;
use crate::par::fold_trials;
use crate::stats::{MeanEstimate, Moments, Z99};
use crate::stream::{lanes, RandomStream};

/// Completed excursion lengths back to the start, plus censoring.
#[derive(Debug, Clone, Serialize)]
pub struct ReturnStats {
    pub completed_return_times: Vec<u64>,
    pub censored: u64,
    pub cap: u64,
    /// Mean of the completed excursions; `None` when all were censored.
    pub tau_hat: Option<MeanEstimate>,
    pub warning: Option<String>,
}

impl ReturnStats {
    pub fn excursions(&self) -> u64 {
        self.completed_return_times.len() as u64 + self.censored
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.excursions().max(1) as f64
    }
}

/// Runs `config.trials` excursions from `config.z0`, each on its own stream,
/// stopping at the first return or after `cap` steps. Censored excursions
/// are counted, never imputed.
pub fn estimate_return_time(mu: &StepDistribution, config: &WalkConfig, cap: u64) -> Result<ReturnStats> {
    config.validate(mu)?;
    if cap == 0 {
        return Err(WalkError::InvalidConfig("return-time cap must be >= 1".into()));
    }
    let (times, censored) = fold_trials(
        config.trials,
        config.parallelism,
        || (Vec::new(), 0u64),
        |i, (times, censored)| {
            let stream = RandomStream::for_lane(config.seed, lanes::RETURNS, i);
            let mut w = Walker::new(mu, config.mode, config.z0.clone(), stream);
            for t in 1..=cap {
                w.advance()?;
                if w.state == config.z0 {
                    times.push(t);
                    return Ok(());
                }
            }
            *censored += 1;
            Ok(())
        },
        |a, b| {
            a.0.extend(b.0);
            a.1 += b.1;
        },
    )?;
    let mut m = Moments::default();
    for &t in &times {
        m.push(t as f64);
    }
    let tau_hat = (!times.is_empty()).then(|| m.estimate(Z99));
    let mut stats = ReturnStats {
        completed_return_times: times,
        censored,
        cap,
        tau_hat,
        warning: None,
    };
    if stats.censored_fraction() > 0.01 {
        stats.warning = Some(format!(
            "{:.2}% of excursions hit the cap of {cap} steps",
            100.0 * stats.censored_fraction()
        ));
    }
    Ok(stats)
}

/// `ω̂(z0) · τ̂(z0)` with a propagated 99% interval.
#[derive(Debug, Clone, Serialize)]
pub struct KacReport {
    /// Occupation frequency of `z0` along one path, batch-means interval.
    pub occupation: MeanEstimate,
    pub tau: MeanEstimate,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub returns: ReturnStats,
}

const KAC_BATCHES: u64 = 100;

/// Compares the occupation frequency of `z0` on a path of `config.steps`
/// steps with the mean return time from `config.trials` excursions. The two
/// estimates use independent streams.
pub fn kac_check(mu: &StepDistribution, config: &WalkConfig, cap: u64) -> Result<KacReport> {
    config.validate(mu)?;
    if config.steps == 0 {
        return Err(WalkError::InvalidConfig("kac check needs steps >= 1 for the occupation path".into()));
    }
    let returns = estimate_return_time(mu, config, cap)?;
    let tau = returns
        .tau_hat
        .ok_or_else(|| WalkError::Undefined("every excursion was censored; τ̂ is undefined".into()))?;

    let batches = KAC_BATCHES.min(config.steps);
    let batch_len = config.steps / batches;
    let used = batch_len * batches;
    let stream = RandomStream::for_lane(config.seed, lanes::OCCUPATION, 0);
    let mut w = Walker::new(mu, config.mode, config.z0.clone(), stream);
    let mut batch = Moments::default();
    let mut hits = 0u64;
    for t in 1..=used {
        w.advance()?;
        if w.state == config.z0 {
            hits += 1;
        }
        if t % batch_len == 0 {
            batch.push(hits as f64 / batch_len as f64);
            hits = 0;
        }
    }
    let occupation = batch.estimate(Z99);
    let ratio = occupation.mean * tau.mean;
    let rel = |e: &MeanEstimate| if e.mean == 0.0 { 0.0 } else { e.std_err / e.mean };
    let rel_se = (rel(&occupation).powi(2) + rel(&tau).powi(2)).sqrt();
    Ok(KacReport {
        occupation,
        tau,
        ratio,
        ci_low: ratio * (1.0 - Z99 * rel_se),
        ci_high: ratio * (1.0 + Z99 * rel_se),
        returns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticePoint, WalkMode};

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn degenerate_chain_returns_immediately() {
        let mu = StepDistribution::dirac(p(&[1, 1]));
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[1, 1])).with_trials(20).with_steps(50);
        let r = estimate_return_time(&mu, &cfg, 10).unwrap();
        assert!(r.completed_return_times.iter().all(|&t| t == 1));
        assert_eq!(r.censored, 0);
        assert_eq!(r.tau_hat.unwrap().mean, 1.0);
        let kac = kac_check(&mu, &cfg, 10).unwrap();
        assert_eq!(kac.ratio, 1.0);
    }

    #[test]
    fn never_returning_walk_is_all_censored() {
        let mu = StepDistribution::dirac(p(&[1, 0]));
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[0, 1])).with_trials(5).with_steps(10);
        let r = estimate_return_time(&mu, &cfg, 100).unwrap();
        assert_eq!(r.censored, 5);
        assert!(r.tau_hat.is_none());
        assert!(r.warning.is_some());
        assert!(matches!(kac_check(&mu, &cfg, 100), Err(WalkError::Undefined(_))));
    }

    #[test]
    fn cap_must_be_positive() {
        let mu = StepDistribution::dirac(p(&[1, 1]));
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[1, 1]));
        assert!(estimate_return_time(&mu, &cfg, 0).is_err());
    }
}
