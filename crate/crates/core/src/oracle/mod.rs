//! Exact computations that the Monte Carlo engine is checked against.
//!
//! Endpoint laws are propagated in rational arithmetic. Long-run questions
//! (stationary mass, return times, irreducibility) are answered on a finite
//! box truncation of the chain whose transition rows are exact.

mod chain;
mod solve;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::{check_dims, step, LatticePoint, WalkMode};
use crate::measure::StepDistribution;
use crate::torus::ser_ratio;

pub use chain::{build_truncated_chain, irreducibility_scc, BoundaryPolicy, SccReport, TruncatedChain, DEFAULT_STATE_CAP};
pub use solve::{
    expected_return_time, exact_kac, refine_stationary, stationary_cesaro, ExactKacReport, ReturnTime,
    StationaryEstimate,
};

/// Default cap on the support size of an exact distribution.
pub const DEFAULT_SUPPORT_CAP: usize = 200_000;

/// Finitely supported law with exact rational masses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactDistribution {
    pub mass: BTreeMap<LatticePoint, BigRational>,
}

impl ExactDistribution {
    pub fn dirac(z: LatticePoint) -> Self {
        Self {
            mass: BTreeMap::from([(z, BigRational::one())]),
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn get(&self, z: &LatticePoint) -> BigRational {
        self.mass.get(z).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn get_f64(&self, z: &LatticePoint) -> f64 {
        self.mass.get(z).and_then(ToPrimitive::to_f64).unwrap_or(0.0)
    }

    pub fn total(&self) -> BigRational {
        self.mass.values().fold(BigRational::zero(), |acc, m| acc + m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, &BigRational)> {
        self.mass.iter()
    }

    pub fn mass_where(&self, mut pred: impl FnMut(&LatticePoint) -> bool) -> BigRational {
        self.mass
            .iter()
            .filter(|(z, _)| pred(z))
            .fold(BigRational::zero(), |acc, (_, m)| acc + m)
    }

    fn add(&mut self, z: LatticePoint, m: BigRational) {
        match self.mass.get_mut(&z) {
            Some(v) => *v += m,
            None => {
                self.mass.insert(z, m);
            }
        }
    }

    fn scale(&mut self, f: &BigRational) {
        for v in self.mass.values_mut() {
            *v *= f;
        }
    }
}

/// Exact one-step pushforward: `mass(x) μ(a)` accumulates at `step(mode, a, x)`.
pub fn propagate(dist: &ExactDistribution, mu: &StepDistribution, mode: WalkMode) -> Result<ExactDistribution> {
    let probs: Vec<BigRational> = (0..mu.len()).map(|i| mu.probability(i)).collect();
    let mut out = ExactDistribution::default();
    for (x, m) in dist.iter() {
        check_dims(x.dim(), mu.dim())?;
        mode.check_state(x)?;
        for (a, p) in mu.support().iter().zip(&probs) {
            out.add(step(mode, a, x)?, m * p);
        }
    }
    Ok(out)
}

/// `ω_{n,z}` by `n` propagations of `δ_z`.
pub fn exact_endpoint(z: &LatticePoint, mu: &StepDistribution, mode: WalkMode, n: u64) -> Result<ExactDistribution> {
    exact_endpoint_capped(z, mu, mode, n, DEFAULT_SUPPORT_CAP)
}

pub fn exact_endpoint_capped(
    z: &LatticePoint,
    mu: &StepDistribution,
    mode: WalkMode,
    n: u64,
    cap: usize,
) -> Result<ExactDistribution> {
    check_dims(z.dim(), mu.dim())?;
    mode.check_state(z)?;
    let mut d = ExactDistribution::dirac(z.clone());
    for i in 0..n {
        d = propagate(&d, mu, mode)?;
        check_cap(&d, cap, i + 1)?;
    }
    Ok(d)
}

/// `(1/n) Σ_{i=1}^n ω_{i,z}` exactly.
pub fn exact_cesaro(z: &LatticePoint, mu: &StepDistribution, mode: WalkMode, n: u64) -> Result<ExactDistribution> {
    if n == 0 {
        return Err(WalkError::Precondition("Cesàro average needs n >= 1".into()));
    }
    check_dims(z.dim(), mu.dim())?;
    mode.check_state(z)?;
    let mut d = ExactDistribution::dirac(z.clone());
    let mut sum = ExactDistribution::default();
    for i in 0..n {
        d = propagate(&d, mu, mode)?;
        check_cap(&d, DEFAULT_SUPPORT_CAP, i + 1)?;
        for (x, m) in d.iter() {
            sum.add(x.clone(), m.clone());
        }
    }
    sum.scale(&BigRational::new(BigInt::one(), BigInt::from(n)));
    Ok(sum)
}

fn check_cap(d: &ExactDistribution, cap: usize, step: u64) -> Result<()> {
    if d.len() > cap {
        return Err(WalkError::SizeCap(format!(
            "exact distribution has {} points after {step} steps (cap {cap})",
            d.len()
        )));
    }
    Ok(())
}

/// Base set `F` of primitive points spanning a cone `{m v : v ∈ F, m >= 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConeBase {
    /// All primitive points: the cone is the whole space.
    All,
    Finite(BTreeSet<LatticePoint>),
}

impl ConeBase {
    pub fn finite(points: impl IntoIterator<Item = LatticePoint>) -> Result<Self> {
        let set: BTreeSet<LatticePoint> = points.into_iter().collect();
        if let Some(bad) = set.iter().find(|v| !v.is_primitive()) {
            return Err(WalkError::NotPrimitive(bad.clone()));
        }
        Ok(ConeBase::Finite(set))
    }

    /// `x` lies in the cone iff `x / gcd(x)` is in `F`.
    pub fn contains(&self, x: &LatticePoint) -> bool {
        match self {
            ConeBase::All => true,
            ConeBase::Finite(set) => set.contains(&x.normalize()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeCheckReport {
    pub z: LatticePoint,
    pub n: u64,
    pub k: u64,
    /// Mass of the cone under the full-gcd endpoint law.
    #[serde(serialize_with = "ser_ratio")]
    pub full_gcd_mass: BigRational,
    /// Mass of the cone under the coprime-to-`k` endpoint law.
    #[serde(serialize_with = "ser_ratio")]
    pub coprime_mass: BigRational,
    /// `full_gcd_mass < coprime_mass`.
    pub violated: bool,
}

/// Exact masses of one cone under both walks after `n` steps from `z`.
pub fn cone_monotonicity_check(
    z: &LatticePoint,
    mu: &StepDistribution,
    n: u64,
    cone: &ConeBase,
    k: u64,
) -> Result<ConeCheckReport> {
    let coprime = WalkMode::coprime_to(k)?;
    WalkMode::FullGcd.check_state(z)?;
    coprime.check_state(z)?;
    let full = exact_endpoint(z, mu, WalkMode::FullGcd, n)?.mass_where(|x| cone.contains(x));
    let part = exact_endpoint(z, mu, coprime, n)?.mass_where(|x| cone.contains(x));
    Ok(ConeCheckReport {
        z: z.clone(),
        n,
        k,
        violated: full < part,
        full_gcd_mass: full,
        coprime_mass: part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::nu;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn one_step_from_origin() {
        let d = propagate(&ExactDistribution::dirac(p(&[0, 0])), &nu(2).unwrap(), WalkMode::FullGcd).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.iter().all(|(_, m)| *m == r(1, 4)));
    }

    #[test]
    fn two_steps_from_origin() {
        let d = exact_endpoint(&p(&[0, 0]), &nu(2).unwrap(), WalkMode::FullGcd, 2).unwrap();
        assert_eq!(d.get(&p(&[0, 0])), r(1, 4));
        for s in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            assert_eq!(d.get(&p(&s)), r(1, 8));
        }
        for s in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            assert_eq!(d.get(&p(&s)), r(1, 16));
        }
        assert_eq!(d.total(), BigRational::one());
    }

    #[test]
    fn zero_steps_and_mass_preservation() {
        let z = p(&[1, 0, 0]);
        let mu = nu(3).unwrap();
        assert_eq!(exact_endpoint(&z, &mu, WalkMode::FullGcd, 0).unwrap(), ExactDistribution::dirac(z.clone()));
        for n in 1..=5 {
            let d = exact_endpoint(&z, &mu, WalkMode::CoprimeTo(3), n).unwrap();
            assert_eq!(d.total(), BigRational::one());
            assert!(d.mass.keys().all(|x| x.is_coprime_to(3)));
        }
    }

    #[test]
    fn endpoint_at_one_is_one_propagation() {
        let z = p(&[2, 3]);
        let mu = nu(2).unwrap();
        assert_eq!(
            exact_endpoint(&z, &mu, WalkMode::CoprimeTo(2), 1).unwrap(),
            propagate(&ExactDistribution::dirac(z), &mu, WalkMode::CoprimeTo(2)).unwrap()
        );
    }

    #[test]
    fn cesaro_averages_endpoints() {
        let z = p(&[0, 0]);
        let mu = nu(2).unwrap();
        let c = exact_cesaro(&z, &mu, WalkMode::FullGcd, 2).unwrap();
        assert_eq!(c.get(&p(&[1, 0])), (r(1, 4) + r(1, 16)) / r(2, 1));
        assert_eq!(c.total(), BigRational::one());
    }

    #[test]
    fn size_cap_is_enforced() {
        let r = exact_endpoint_capped(&p(&[0, 0]), &nu(2).unwrap(), WalkMode::FullGcd, 3, 5);
        assert!(matches!(r, Err(WalkError::SizeCap(_))));
    }

    #[test]
    fn invalid_start_is_rejected() {
        assert!(exact_endpoint(&p(&[2, 4]), &nu(2).unwrap(), WalkMode::FullGcd, 1).is_err());
    }

    #[test]
    fn cone_full_space_and_trivial_cases() {
        let mu = nu(2).unwrap();
        let z = p(&[1, 1]);
        let all = cone_monotonicity_check(&z, &mu, 4, &ConeBase::All, 2).unwrap();
        assert_eq!(all.full_gcd_mass, BigRational::one());
        assert_eq!(all.coprime_mass, BigRational::one());
        assert!(!all.violated);
        let f = ConeBase::finite([z.clone()]).unwrap();
        let zero = cone_monotonicity_check(&z, &mu, 0, &f, 2).unwrap();
        assert_eq!((zero.full_gcd_mass.clone(), zero.coprime_mass.clone()), (BigRational::one(), BigRational::one()));
        assert!(ConeBase::finite([p(&[2, 2])]).is_err());
    }

    #[test]
    fn cone_membership_uses_primitive_direction() {
        let f = ConeBase::finite([p(&[1, 2])]).unwrap();
        assert!(f.contains(&p(&[3, 6])));
        assert!(!f.contains(&p(&[-1, -2])));
        assert!(!f.contains(&p(&[0, 0])));
    }
}
