use serde::Serialize;

use super::{WalkConfig, Walker};
use crate::error::{Result, WalkError};
use crate::lattice::{LatticePoint, NormKind, WalkMode};
use crate::measure::StepDistribution;
use crate::par::{fold_trials, Parallelism};
use crate::stats::{proportion, Moments, Z99};
use crate::stream::RandomStream;

/// First lane used by drift trials; start `j` uses lane `DRIFT_LANE_BASE + j`.
const DRIFT_LANE_BASE: u64 = 16;

#[derive(Debug, Clone, Serialize)]
pub struct DriftRow {
    pub z: LatticePoint,
    pub z_norm: f64,
    pub n: u64,
    pub mean_norm: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `‖z‖ + κ n`
    pub triangle_bound: f64,
}

/// Fitted contraction `E‖X_{n'}‖ < c ‖z‖ + M` and the derived radius constant.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub c_hat: f64,
    pub m_hat: f64,
    pub n0_prime: u64,
    /// `max(2M, M / (1 - c)) + κ (n' - 1)`
    pub m_prime: f64,
    pub kappa: f64,
    pub norm: NormKind,
    /// Rows with `‖z‖ >= large_norm_threshold` are used for selection and fit.
    pub large_norm_threshold: f64,
    pub rows: Vec<DriftRow>,
}

impl DriftReport {
    pub fn rows_at(&self, n: u64) -> impl Iterator<Item = &DriftRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }
}

#[derive(Debug, Clone)]
pub struct DriftConfig {
    pub mode: WalkMode,
    pub z_samples: Vec<LatticePoint>,
    pub n_grid: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
    pub norm: NormKind,
    pub parallelism: Parallelism,
    /// A row is "large" when `‖z‖ >= large_fraction * max ‖z‖`.
    pub large_fraction: f64,
}

impl DriftConfig {
    pub fn new(mode: WalkMode, z_samples: Vec<LatticePoint>, n_grid: Vec<u64>, trials: u64) -> Self {
        Self {
            mode,
            z_samples,
            n_grid,
            trials,
            seed: 0,
            norm: NormKind::L2,
            parallelism: Parallelism::Auto,
            large_fraction: 0.05,
        }
    }
}

/// Starting points `(r, 1, 0, ..., 0)` and `(1, r, 1, 0, ..., 0)` for each
/// radius `r`; these are primitive and coprime to every `k`.
pub fn default_starts(d: usize, radii: &[i64]) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    for &r in radii {
        let mut a = vec![0i64; d];
        a[0] = r;
        a[1] = 1;
        out.push(LatticePoint::new(a).expect("d >= 2"));
        let mut b = vec![0i64; d];
        b[0] = 1;
        b[1] = r;
        if d > 2 {
            b[2] = 1;
        }
        out.push(LatticePoint::new(b).expect("d >= 2"));
    }
    out
}

/// Mean endpoint norm for every `(z, n)`, the block length `n'` (smallest
/// `n >= 1` in the grid where every large-norm row shows a 99%-separated
/// decrease) and a least-squares fit of the contraction at `n'`.
pub fn drift_estimate(mu: &StepDistribution, cfg: &DriftConfig) -> Result<DriftReport> {
    if cfg.z_samples.is_empty() {
        return Err(WalkError::InvalidConfig("drift estimate needs at least one start".into()));
    }
    if cfg.trials < 2 {
        return Err(WalkError::InvalidConfig("drift estimate needs trials >= 2".into()));
    }
    for z in &cfg.z_samples {
        WalkConfig::new(cfg.mode, z.clone()).validate(mu)?;
    }
    let mut grid = cfg.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let max_n = *grid.last().ok_or_else(|| WalkError::InvalidConfig("empty step grid".into()))?;
    let kappa = mu.first_moment(cfg.norm).value;

    let mut rows = Vec::new();
    for (j, z) in cfg.z_samples.iter().enumerate() {
        let lane = DRIFT_LANE_BASE + j as u64;
        let moments = fold_trials(
            cfg.trials,
            cfg.parallelism,
            || vec![Moments::default(); grid.len()],
            |i, acc| {
                let stream = RandomStream::for_lane(cfg.seed, lane, i);
                let mut w = Walker::new(mu, cfg.mode, z.clone(), stream);
                let mut g = 0;
                for t in 0..=max_n {
                    if t > 0 {
                        w.advance()?;
                    }
                    while g < grid.len() && grid[g] == t {
                        acc[g].push(w.state.norm(cfg.norm));
                        g += 1;
                    }
                }
                Ok(())
            },
            |a, b| a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y)),
        )?;
        let z_norm = z.norm(cfg.norm);
        for (&n, m) in grid.iter().zip(moments) {
            let e = m.estimate(Z99);
            rows.push(DriftRow {
                z: z.clone(),
                z_norm,
                n,
                mean_norm: e.mean,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                triangle_bound: z_norm + kappa * n as f64,
            });
        }
    }

    let max_norm = rows.iter().map(|r| r.z_norm).fold(0.0, f64::max);
    let threshold = cfg.large_fraction * max_norm;
    let n0_prime = grid
        .iter()
        .copied()
        .filter(|&n| n >= 1)
        .find(|&n| {
            rows.iter()
                .filter(|r| r.n == n && r.z_norm >= threshold)
                .all(|r| r.ci_high < r.z_norm)
        })
        .ok_or(WalkError::NoContractionFound)?;

    let fit: Vec<&DriftRow> = rows.iter().filter(|r| r.n == n0_prime && r.z_norm >= threshold).collect();
    let c_hat = least_squares_slope(&fit).max(f64::MIN_POSITIVE);
    let m_hat = rows
        .iter()
        .filter(|r| r.n == n0_prime)
        .map(|r| r.ci_high - c_hat * r.z_norm)
        .fold(0.0, f64::max);
    let m_prime = if c_hat < 1.0 {
        (2.0 * m_hat).max(m_hat / (1.0 - c_hat)) + kappa * (n0_prime - 1) as f64
    } else {
        f64::INFINITY
    };
    Ok(DriftReport {
        c_hat,
        m_hat,
        n0_prime,
        m_prime,
        kappa,
        norm: cfg.norm,
        large_norm_threshold: threshold,
        rows,
    })
}

/// Slope of mean norm against `‖z‖`; through the origin when the norms are
/// within about 1% of each other.
fn least_squares_slope(rows: &[&DriftRow]) -> f64 {
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.z_norm).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.mean_norm).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.z_norm - mx).powi(2)).sum();
    if sxx <= 1e-4 * n * mx * mx {
        return rows.iter().map(|r| r.mean_norm * r.z_norm).sum::<f64>()
            / rows.iter().map(|r| r.z_norm * r.z_norm).sum::<f64>();
    }
    let sxy: f64 = rows.iter().map(|r| (r.z_norm - mx) * (r.mean_norm - my)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RecurrenceRow {
    pub n: u64,
    pub mass: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Empirical mass of the ball `K = {‖x‖ <= 2M'/ε}` under the endpoint law.
#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceReport {
    pub epsilon: f64,
    pub m_prime: f64,
    pub radius: f64,
    pub rows: Vec<RecurrenceRow>,
    /// Smallest grid `n` from which every later row has mass `> 1 - ε`.
    pub n_z: Option<u64>,
}

pub fn recurrence_mass(
    mu: &StepDistribution,
    config: &WalkConfig,
    epsilon: f64,
    m_prime: f64,
    n_grid: &[u64],
) -> Result<RecurrenceReport> {
    config.validate(mu)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(WalkError::Precondition(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(m_prime >= 0.0 && m_prime.is_finite()) {
        return Err(WalkError::Precondition(format!("M' must be finite and >= 0, got {m_prime}")));
    }
    let radius = 2.0 * m_prime / epsilon;
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let max_n = grid.last().copied().unwrap_or(0);
    let inside = fold_trials(
        config.trials,
        config.parallelism,
        || vec![0u64; grid.len()],
        |i, acc| {
            let mut w = Walker::new(mu, config.mode, config.z0.clone(), RandomStream::for_trial(config.seed, i));
            let mut g = 0;
            for t in 0..=max_n {
                if t > 0 {
                    w.advance()?;
                }
                while g < grid.len() && grid[g] == t {
                    acc[g] += u64::from(w.state.norm(config.norm) <= radius);
                    g += 1;
                }
            }
            Ok(())
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    )?;
    let rows: Vec<RecurrenceRow> = grid
        .iter()
        .zip(inside)
        .map(|(&n, c)| {
            let e = proportion(c, config.trials, Z99);
            RecurrenceRow {
                n,
                mass: e.mean,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
            }
        })
        .collect();
    let mut n_z = None;
    for r in rows.iter().rev() {
        if r.mass > 1.0 - epsilon {
            n_z = Some(r.n);
        } else {
            break;
        }
    }
    Ok(RecurrenceReport {
        epsilon,
        m_prime,
        radius,
        rows,
        n_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::eta3;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn zero_steps_mean_is_exact() {
        let mut cfg = DriftConfig::new(WalkMode::CoprimeTo(2), default_starts(3, &[100, 1000]), vec![0, 4, 16], 200);
        cfg.seed = 3;
        let rep = drift_estimate(&eta3(), &cfg).unwrap();
        for r in rep.rows_at(0) {
            assert!((r.mean_norm - r.z_norm).abs() < 1e-9 * r.z_norm);
        }
        for r in &rep.rows {
            assert!(r.mean_norm <= r.triangle_bound + 1e-9);
        }
    }

    #[test]
    fn contraction_for_eta3_mod_2() {
        let mut cfg = DriftConfig::new(WalkMode::CoprimeTo(2), default_starts(3, &[300, 1000, 3000]), vec![1, 2, 4, 8], 2000);
        cfg.seed = 1;
        let rep = drift_estimate(&eta3(), &cfg).unwrap();
        assert!(rep.c_hat < 1.0);
        assert!(rep.m_prime.is_finite());
    }

    #[test]
    fn no_contraction_is_reported() {
        // a fixed step never shrinks the norm
        let mut cfg = DriftConfig::new(WalkMode::FullGcd, vec![p(&[1_000_000, 1])], vec![1], 50);
        cfg.seed = 2;
        let r = drift_estimate(&StepDistribution::dirac(p(&[1, 0])), &cfg);
        assert!(matches!(r, Err(WalkError::NoContractionFound)));
    }

    #[test]
    fn recurrence_radius_and_degenerate_mass() {
        let mu = StepDistribution::dirac(p(&[1, 1]));
        let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[1, 1])).with_trials(10);
        let rep = recurrence_mass(&mu, &cfg, 0.5, 1.0, &[0, 1, 5]).unwrap();
        assert_eq!(rep.radius, 4.0);
        assert!(rep.rows.iter().all(|r| r.mass == 1.0));
        assert_eq!(rep.n_z, Some(0));
        assert!(recurrence_mass(&mu, &cfg, 1.5, 1.0, &[1]).is_err());
    }
}
