//! Seeded Monte Carlo for the normalized walks.
//!
//! Each trial `i` draws from `RandomStream::for_trial(seed, i)` (or a
//! dedicated lane), and per-trial results are merged in index order, so
//! every output is bit-identical for any thread count.

mod distribution;
mod drift;
mod returns;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::{check_dims, step_in_place, LatticePoint, NormKind, WalkMode};
use crate::measure::StepDistribution;
use crate::par::Parallelism;
use crate::stream::RandomStream;

pub use distribution::{cesaro_distribution, endpoint_distribution, CesaroEstimator, EmpiricalDistribution};
pub use drift::{
    default_starts, drift_estimate, recurrence_mass, DriftConfig, DriftReport, DriftRow, RecurrenceReport, RecurrenceRow,
};
pub use returns::{estimate_return_time, kac_check, KacReport, ReturnStats};

/// Default cap on distinct points tracked by occupation maps.
pub const DEFAULT_OCCUPATION_CAP: usize = 1_000_000;

/// Everything needed to run one family of walks.
#[derive(Debug, Clone, Serialize)]
pub struct WalkConfig {
    pub mode: WalkMode,
    pub z0: LatticePoint,
    pub steps: u64,
    pub trials: u64,
    pub seed: u64,
    pub norm: NormKind,
    #[serde(skip)]
    pub parallelism: Parallelism,
    pub occupation_cap: usize,
    pub bin_width: f64,
    /// Length of the consecutive windows for per-window norm histograms.
    pub window: Option<u64>,
}

impl WalkConfig {
    pub fn new(mode: WalkMode, z0: LatticePoint) -> Self {
        Self {
            mode,
            z0,
            steps: 0,
            trials: 1,
            seed: 0,
            norm: NormKind::L2,
            parallelism: Parallelism::Auto,
            occupation_cap: DEFAULT_OCCUPATION_CAP,
            bin_width: 1.0,
            window: None,
        }
    }

    pub fn with_steps(mut self, steps: u64) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_norm(mut self, norm: NormKind) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_parallelism(mut self, par: Parallelism) -> Self {
        self.parallelism = par;
        self
    }

    pub fn with_window(mut self, window: u64) -> Self {
        self.window = Some(window);
        self
    }

    pub fn dim(&self) -> usize {
        self.z0.dim()
    }

    pub fn validate(&self, mu: &StepDistribution) -> Result<()> {
        if self.dim() < 2 {
            return Err(WalkError::InvalidDimension(self.dim()));
        }
        check_dims(self.dim(), mu.dim())?;
        self.mode.check_state(&self.z0)?;
        if self.trials == 0 {
            return Err(WalkError::InvalidConfig("trials must be >= 1".into()));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(WalkError::InvalidConfig(format!("bin width must be positive, got {}", self.bin_width)));
        }
        if self.window == Some(0) {
            return Err(WalkError::InvalidConfig("window must be >= 1".into()));
        }
        Ok(())
    }
}

/// A running walk: current state plus its private stream.
pub(crate) struct Walker<'a> {
    mu: &'a StepDistribution,
    mode: WalkMode,
    pub state: LatticePoint,
    stream: RandomStream,
}

impl<'a> Walker<'a> {
    pub fn new(mu: &'a StepDistribution, mode: WalkMode, start: LatticePoint, stream: RandomStream) -> Self {
        Self {
            mu,
            mode,
            state: start,
            stream,
        }
    }

    /// One step; returns the division factor (gcd, or exponent `p`).
    #[inline]
    pub fn advance(&mut self) -> Result<u64> {
        let a = self.mu.sample(&mut self.stream);
        let f = step_in_place(self.mode, &mut self.state, a)?;
        debug_assert!(self.mode.admits(&self.state), "left the state space at {}", self.state);
        Ok(f)
    }
}

/// Whether a division factor returned by [`Walker::advance`] is a real division.
#[inline]
pub(crate) fn is_division(mode: WalkMode, factor: u64) -> bool {
    match mode {
        WalkMode::FullGcd => factor > 1,
        WalkMode::CoprimeTo(_) => factor > 0,
    }
}

/// Counts of norms in bins `[i w, (i + 1) w)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: BTreeMap<u64, u64>,
    pub total: u64,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Self {
        Self {
            bin_width,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    #[inline]
    pub fn record(&mut self, norm: f64) {
        let bin = (norm / self.bin_width).floor() as u64;
        *self.counts.entry(bin).or_insert(0) += 1;
        self.total += 1;
    }

    /// `(bin_lo, bin_hi, count)` rows in increasing order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.counts
            .iter()
            .map(|(&b, &c)| (b as f64 * self.bin_width, (b + 1) as f64 * self.bin_width, c))
    }

    /// Total-variation distance between the normalized histograms.
    pub fn tv_distance(&self, other: &Histogram) -> f64 {
        let (na, nb) = (self.total.max(1) as f64, other.total.max(1) as f64);
        let mut keys: Vec<u64> = self.counts.keys().chain(other.counts.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys
            .iter()
            .map(|k| {
                let a = *self.counts.get(k).unwrap_or(&0) as f64 / na;
                let b = *other.counts.get(k).unwrap_or(&0) as f64 / nb;
                (a - b).abs()
            })
            .sum::<f64>()
    }
}

/// Streaming statistics of a single trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryStats {
    pub steps: u64,
    /// Norms of all `steps + 1` visited points, start included.
    pub histogram: Histogram,
    /// Per-window histograms over positions `1..=steps`, if a window was set.
    pub windows: Vec<Histogram>,
    pub division_events: u64,
    /// For the full-gcd walk: gcd value -> count. For the coprime walk:
    /// exponent `p` -> count.
    pub division_factors: BTreeMap<u64, u64>,
    /// Visits per point, start included; empty once `occupation_overflow`.
    pub occupation: BTreeMap<LatticePoint, u64>,
    pub occupation_overflow: bool,
    pub max_norm: f64,
    pub final_state: LatticePoint,
}

/// One trajectory of `config.steps` steps from `config.z0` on trial stream 0.
pub fn run_walk(mu: &StepDistribution, config: &WalkConfig) -> Result<TrajectoryStats> {
    config.validate(mu)?;
    let mut walker = Walker::new(mu, config.mode, config.z0.clone(), RandomStream::for_trial(config.seed, 0));
    let mut histogram = Histogram::new(config.bin_width);
    let mut windows: Vec<Histogram> = Vec::new();
    let mut division_factors = BTreeMap::new();
    let mut division_events = 0;
    let mut occupation: HashMap<LatticePoint, u64> = HashMap::new();
    let mut overflow = false;

    let n0 = config.z0.norm(config.norm);
    histogram.record(n0);
    let mut max_norm = n0;
    occupation.insert(config.z0.clone(), 1);

    for t in 1..=config.steps {
        let f = walker.advance()?;
        if is_division(config.mode, f) {
            division_events += 1;
            *division_factors.entry(f).or_insert(0) += 1;
        }
        let norm = walker.state.norm(config.norm);
        histogram.record(norm);
        if let Some(w) = config.window {
            let idx = ((t - 1) / w) as usize;
            if idx == windows.len() {
                windows.push(Histogram::new(config.bin_width));
            }
            windows[idx].record(norm);
        }
        max_norm = max_norm.max(norm);
        if !overflow {
            if let Some(c) = occupation.get_mut(&walker.state) {
                *c += 1;
            } else if occupation.len() < config.occupation_cap {
                occupation.insert(walker.state.clone(), 1);
            } else {
                overflow = true;
                occupation = HashMap::new();
            }
        }
    }

    Ok(TrajectoryStats {
        steps: config.steps,
        histogram,
        windows,
        division_events,
        division_factors,
        occupation: occupation.into_iter().collect(),
        occupation_overflow: overflow,
        max_norm,
        final_state: walker.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::eta1;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_steps_records_only_start() {
        let mu = crate::measure::nu(2).unwrap();
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[2, 3]));
        let stats = run_walk(&mu, &cfg).unwrap();
        assert_eq!(stats.histogram.total, 1);
        let bin = (13f64.sqrt()).floor() as u64;
        assert_eq!(stats.histogram.counts.get(&bin), Some(&1));
    }

    #[test]
    fn degenerate_diagonal_walk() {
        let mu = StepDistribution::dirac(p(&[1, 1]));
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[1, 1])).with_steps(3);
        let stats = run_walk(&mu, &cfg).unwrap();
        assert_eq!(stats.final_state, p(&[1, 1]));
        assert_eq!(stats.division_events, 3);
        assert_eq!(stats.division_factors, BTreeMap::from([(2, 3)]));
        assert_eq!(stats.occupation.get(&p(&[1, 1])), Some(&4));
    }

    #[test]
    fn config_validation() {
        let mu = crate::measure::nu(2).unwrap();
        let bad_start = WalkConfig::new(WalkMode::FullGcd, p(&[2, 4]));
        assert!(matches!(run_walk(&mu, &bad_start), Err(WalkError::NotPrimitive(_))));
        let bad_k = WalkConfig::new(WalkMode::CoprimeTo(1), p(&[1, 0]));
        assert!(run_walk(&mu, &bad_k).is_err());
        let no_trials = WalkConfig::new(WalkMode::FullGcd, p(&[1, 0])).with_trials(0);
        assert!(no_trials.validate(&mu).is_err());
        let wrong_dim = WalkConfig::new(WalkMode::FullGcd, p(&[1, 0, 0]));
        assert!(matches!(wrong_dim.validate(&mu), Err(WalkError::DimensionMismatch { .. })));
    }

    #[test]
    fn occupation_cap_switches_to_histogram_only() {
        let mu = eta1();
        let mut cfg = WalkConfig::new(WalkMode::FullGcd, LatticePoint::unit(4, 0, 1)).with_steps(5000);
        cfg.occupation_cap = 3;
        let stats = run_walk(&mu, &cfg).unwrap();
        assert!(stats.occupation_overflow);
        assert!(stats.occupation.is_empty());
        assert_eq!(stats.histogram.total, 5001);
    }

    #[test]
    fn windows_partition_the_trajectory() {
        let mu = eta1();
        let cfg = WalkConfig::new(WalkMode::FullGcd, LatticePoint::unit(4, 0, 1))
            .with_steps(1000)
            .with_window(300);
        let stats = run_walk(&mu, &cfg).unwrap();
        let totals: Vec<u64> = stats.windows.iter().map(|h| h.total).collect();
        assert_eq!(totals, vec![300, 300, 300, 100]);
        assert_eq!(stats.windows[0].tv_distance(&stats.windows[0]), 0.0);
    }

    #[test]
    fn tv_distance_of_disjoint_histograms_is_one() {
        let mut a = Histogram::new(1.0);
        let mut b = Histogram::new(1.0);
        a.record(0.5);
        b.record(3.5);
        assert_eq!(a.tv_distance(&b), 1.0);
    }
}
