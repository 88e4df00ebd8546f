//! Small statistics helpers shared by the Monte Carlo routines.

use serde::Serialize;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;

/// Mean with a normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
}

impl MeanEstimate {
    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Sum and sum of squares; merged in a fixed order for reproducibility.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn estimate(&self, z: f64) -> MeanEstimate {
        let mean = self.mean();
        let std_err = (self.variance() / self.n.max(1) as f64).sqrt();
        MeanEstimate {
            mean,
            std_err,
            ci_low: mean - z * std_err,
            ci_high: mean + z * std_err,
            samples: self.n,
        }
    }
}

/// Binomial proportion `hits / n` with a normal-approximation interval.
pub fn proportion(hits: u64, n: u64, z: f64) -> MeanEstimate {
    if n == 0 {
        return MeanEstimate {
            mean: 0.0,
            std_err: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            samples: 0,
        };
    }
    let p = hits as f64 / n as f64;
    let std_err = (p * (1.0 - p) / n as f64).sqrt();
    MeanEstimate {
        mean: p,
        std_err,
        ci_low: (p - z * std_err).max(0.0),
        ci_high: (p + z * std_err).min(1.0),
        samples: n,
    }
}

/// Standard deviation of an empirical frequency for true probability `p`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct_formulae() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-12);
        let e = m.estimate(Z99);
        assert!(e.contains(2.5));
    }

    #[test]
    fn proportion_edges() {
        let p = proportion(0, 100, Z99);
        assert_eq!((p.mean, p.ci_low, p.ci_high), (0.0, 0.0, 0.0));
        let q = proportion(50, 100, Z99);
        assert!(q.ci_low > 0.37 && q.ci_high < 0.63);
    }
}
