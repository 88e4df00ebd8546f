use std::collections::VecDeque;

use serde::Serialize;

use super::chain::{BoundaryPolicy, TruncatedChain};
use crate::error::{Result, WalkError};
use crate::lattice::LatticePoint;

/// A probability vector over the states of a chain, with its stationarity
/// residual `‖π P − π‖_TV`.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryEstimate {
    #[serde(skip)]
    pub pi: Vec<f64>,
    pub residual: f64,
    pub iterations: u64,
}

impl StationaryEstimate {
    pub fn mass(&self, chain: &TruncatedChain, z: &LatticePoint) -> f64 {
        chain.index_of(z).map_or(0.0, |i| self.pi[i])
    }

    /// `(state, probability)` pairs with positive mass, in chain order.
    pub fn support<'a>(&'a self, chain: &'a TruncatedChain) -> impl Iterator<Item = (&'a LatticePoint, f64)> + 'a {
        chain.states().iter().zip(self.pi.iter().copied()).filter(|(_, p)| *p > 0.0)
    }

    pub fn tv_distance(&self, other: &StationaryEstimate) -> f64 {
        0.5 * self.pi.iter().zip(&other.pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn require_reflecting(chain: &TruncatedChain) -> Result<()> {
    if chain.boundary != BoundaryPolicy::Reflecting {
        return Err(WalkError::Precondition("stationary analysis needs a reflecting chain".into()));
    }
    Ok(())
}

fn state_index(chain: &TruncatedChain, z0: &LatticePoint) -> Result<usize> {
    chain
        .index_of(z0)
        .ok_or_else(|| WalkError::Precondition(format!("{z0} is not a state of the truncated chain")))
}

/// Cesàro average `(1/n) Σ_{i=1}^n δ_{z0} P^i`, stopped at the first `n`
/// with `‖π̂ P − π̂‖_TV <= tol`.
///
/// The residual needs no extra multiplication: `π̂ P − π̂ = (v_{n+1} − v_1)/n`.
pub fn stationary_cesaro(chain: &TruncatedChain, z0: &LatticePoint, max_iters: u64, tol: f64) -> Result<StationaryEstimate> {
    require_reflecting(chain)?;
    let start = state_index(chain, z0)?;
    let n_states = chain.len();
    let mut v = vec![0.0; n_states];
    v[start] = 1.0;
    let mut next = vec![0.0; n_states];
    chain.apply(&v, &mut next);
    std::mem::swap(&mut v, &mut next);
    let first = v.clone();
    let mut sum = v.clone();
    let mut residual = f64::INFINITY;
    for n in 1..=max_iters {
        chain.apply(&v, &mut next);
        residual = tv(&next, &first) / n as f64;
        if residual <= tol {
            let pi = sum.iter().map(|s| s / n as f64).collect();
            return Ok(StationaryEstimate {
                pi,
                residual,
                iterations: n,
            });
        }
        std::mem::swap(&mut v, &mut next);
        sum.iter_mut().zip(&v).for_each(|(s, x)| *s += x);
    }
    Err(WalkError::NonConvergence {
        iterations: max_iters,
        residual,
    })
}

/// Lazy power iteration `π ← (π + π P)/2` from `start` until the
/// stationarity residual is at most `tol`. The lazy chain has the same
/// stationary law and is aperiodic.
pub fn refine_stationary(chain: &TruncatedChain, start: &StationaryEstimate, max_iters: u64, tol: f64) -> Result<StationaryEstimate> {
    require_reflecting(chain)?;
    let mut pi = start.pi.clone();
    let mut next = vec![0.0; pi.len()];
    let mut residual = f64::INFINITY;
    for it in 0..=max_iters {
        chain.apply(&pi, &mut next);
        residual = tv(&next, &pi);
        if residual <= tol {
            return Ok(StationaryEstimate {
                pi,
                residual,
                iterations: start.iterations + it,
            });
        }
        let total: f64 = pi.iter_mut().zip(&next).map(|(p, q)| {
            *p = 0.5 * (*p + q);
            *p
        }).sum();
        pi.iter_mut().for_each(|p| *p /= total);
    }
    Err(WalkError::NonConvergence {
        iterations: max_iters,
        residual,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReturnTime {
    pub value: f64,
    pub sweeps: u64,
    /// `max_x |h(x) − 1 − Σ_y P(x, y) h(y)|` over the hitting-time system.
    pub residual: f64,
}

/// Expected return time to `z0` from first-step analysis: hitting times
/// `h` of `z0` solve `h(x) = 1 + Σ_y P(x, y) h(y)` with `h(z0) = 0`, and the
/// return time is `1 + Σ_y P(z0, y) h(y)`. Solved by symmetric Gauss-Seidel
/// over the states reachable from `z0`.
pub fn expected_return_time(chain: &TruncatedChain, z0: &LatticePoint, max_sweeps: u64, tol: f64) -> Result<ReturnTime> {
    require_reflecting(chain)?;
    let target = state_index(chain, z0)?;
    let n = chain.len();

    let mut order = Vec::new();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([target]);
    seen[target] = true;
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &(j, _) in chain.row(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &i in &order {
        for &(j, _) in chain.row(i) {
            reverse[j].push(i);
        }
    }
    let mut reaches = vec![false; n];
    reaches[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(j) = queue.pop_front() {
        for &i in &reverse[j] {
            if !reaches[i] {
                reaches[i] = true;
                queue.push_back(i);
            }
        }
    }
    if let Some(&bad) = order.iter().find(|&&i| !reaches[i]) {
        return Err(WalkError::Singular(format!(
            "{} is reachable from {z0} but cannot return; {z0} is not recurrent in the truncation",
            chain.state(bad)
        )));
    }

    let den = chain.denominator as f64;
    let mut h = vec![0.0; n];
    let update = |h: &mut [f64], i: usize| -> f64 {
        let mut acc = 1.0;
        let mut stay = 0.0;
        for &(j, w) in chain.row(i) {
            let p = w as f64 / den;
            if j == i {
                stay = p;
            } else {
                acc += p * h[j];
            }
        }
        let new = acc / (1.0 - stay);
        let change = (new - h[i]).abs();
        h[i] = new;
        change
    };
    let unknowns: Vec<usize> = order.iter().copied().filter(|&i| i != target).collect();
    let mut sweeps = 0;
    loop {
        if sweeps >= max_sweeps {
            return Err(WalkError::NonConvergence {
                iterations: sweeps,
                residual: residual(chain, &h, target, &unknowns),
            });
        }
        let mut change: f64 = 0.0;
        for &i in &unknowns {
            change = change.max(update(&mut h, i));
        }
        for &i in unknowns.iter().rev() {
            change = change.max(update(&mut h, i));
        }
        sweeps += 1;
        let scale = unknowns.iter().map(|&i| h[i]).fold(1.0, f64::max);
        if change <= tol * scale {
            break;
        }
    }
    let value = 1.0
        + chain.row(target)
            .iter()
            .filter(|&&(j, _)| j != target)
            .map(|&(j, w)| w as f64 / den * h[j])
            .sum::<f64>();
    Ok(ReturnTime {
        value,
        sweeps,
        residual: residual(chain, &h, target, &unknowns),
    })
}

fn residual(chain: &TruncatedChain, h: &[f64], target: usize, unknowns: &[usize]) -> f64 {
    let den = chain.denominator as f64;
    unknowns
        .iter()
        .map(|&i| {
            let rhs = 1.0
                + chain.row(i)
                    .iter()
                    .filter(|&&(j, _)| j != target)
                    .map(|&(j, w)| w as f64 / den * h[j])
                    .sum::<f64>();
            (h[i] - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// `π(z0) · E[return to z0]` with both factors computed independently.
#[derive(Debug, Clone, Serialize)]
pub struct ExactKacReport {
    pub z0: LatticePoint,
    pub states: usize,
    pub pi_z0: f64,
    pub stationary: StationaryEstimate,
    pub expected_return: ReturnTime,
    pub product: f64,
}

/// Tolerances used by [`exact_kac`].
pub const KAC_CESARO_TOL: f64 = 1e-3;
pub const KAC_STATIONARY_TOL: f64 = 1e-14;
pub const KAC_RETURN_TOL: f64 = 1e-14;

pub fn exact_kac(chain: &TruncatedChain, z0: &LatticePoint, max_iters: u64) -> Result<ExactKacReport> {
    let rough = stationary_cesaro(chain, z0, max_iters, KAC_CESARO_TOL)?;
    let stationary = refine_stationary(chain, &rough, max_iters, KAC_STATIONARY_TOL)?;
    let expected_return = expected_return_time(chain, z0, max_iters, KAC_RETURN_TOL)?;
    let pi_z0 = stationary.mass(chain, z0);
    Ok(ExactKacReport {
        z0: z0.clone(),
        states: chain.len(),
        pi_z0,
        product: pi_z0 * expected_return.value,
        stationary,
        expected_return,
    })
}
