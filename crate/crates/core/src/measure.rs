//! Finitely supported step distributions with exact rational weights.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{LatticePoint, NormKind};
use crate::stream::RandomStream;

/// Probability measure on `Z^d`: support point `i` has probability
/// `weights[i] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDistribution {
    support: Vec<LatticePoint>,
    weights: Vec<u64>,
    denominator: u64,
    cumulative: Vec<u64>,
}

impl StepDistribution {
    pub fn new(entries: Vec<(LatticePoint, u64)>, denominator: u64) -> Result<Self> {
        let problems = validate(&entries, denominator);
        if !problems.is_empty() {
            return Err(WalkError::InvalidMeasure(problems));
        }
        let (support, weights): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let cumulative = weights
            .iter()
            .scan(0u64, |acc, &w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            support,
            weights,
            denominator,
            cumulative,
        })
    }

    /// Point mass at `z`.
    pub fn dirac(z: LatticePoint) -> Self {
        Self::new(vec![(z, 1)], 1).expect("dirac is valid")
    }

    /// Uniform on the given distinct points.
    pub fn uniform(points: Vec<LatticePoint>) -> Result<Self> {
        let n = points.len() as u64;
        Self::new(points.into_iter().map(|p| (p, 1)).collect(), n)
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn support(&self) -> &[LatticePoint] {
        &self.support
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticePoint, u64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    pub fn probability(&self, i: usize) -> BigRational {
        BigRational::new(BigInt::from(self.weights[i]), BigInt::from(self.denominator))
    }

    pub fn probability_f64(&self, i: usize) -> f64 {
        self.weights[i] as f64 / self.denominator as f64
    }

    /// Exact probability of `z` (zero off the support).
    pub fn mass_of(&self, z: &LatticePoint) -> BigRational {
        match self.support.iter().position(|s| s == z) {
            Some(i) => self.probability(i),
            None => BigRational::zero(),
        }
    }

    /// Index of a support point drawn by cumulative-weight inversion of a
    /// single 64-bit uniform draw.
    #[inline]
    pub fn sample_index(&self, stream: &mut RandomStream) -> usize {
        let target = stream.below(self.denominator);
        self.cumulative.partition_point(|&c| c <= target)
    }

    #[inline]
    pub fn sample<'a>(&'a self, stream: &mut RandomStream) -> &'a LatticePoint {
        &self.support[self.sample_index(stream)]
    }

    /// `κ = Σ ‖z‖ μ(z)`. Exact whenever every support norm is an integer
    /// (always for L1 and L∞).
    pub fn first_moment(&self, norm: NormKind) -> FirstMoment {
        let den = BigInt::from(self.denominator);
        let mut exact = Some(BigRational::zero());
        let mut value = 0.0;
        for (z, w) in self.iter() {
            let nz = z.norm(norm);
            value += nz * w as f64;
            exact = match (exact, integer_norm(z, norm)) {
                (Some(acc), Some(n)) => Some(acc + BigRational::new(BigInt::from(n) * w, den.clone())),
                _ => None,
            };
        }
        let value = exact
            .as_ref()
            .and_then(|e| e.to_f64())
            .unwrap_or(value / self.denominator as f64);
        FirstMoment { value, exact }
    }

    /// Three-valued check of the generation assumption.
    pub fn generation_check(&self) -> GenerationVerdict {
        generation_check(self)
    }

    /// Whether the support residues reach every class of `(Z/kZ)^d` from 0.
    pub fn torus_coverage_check(&self, k: u64) -> Result<bool> {
        if k < 2 {
            return Err(WalkError::InvalidModulus(k));
        }
        let d = self.dim();
        let classes = torus_size(k, d)?;
        let steps: Vec<Vec<u64>> = self
            .support
            .iter()
            .map(|s| s.coords().iter().map(|&c| c.rem_euclid(k as i64) as u64).collect())
            .collect();
        let mut seen = vec![false; classes];
        seen[0] = true;
        let mut reached = 1usize;
        let mut queue = VecDeque::from([vec![0u64; d]]);
        while let Some(r) = queue.pop_front() {
            for s in &steps {
                let next: Vec<u64> = r.iter().zip(s).map(|(a, b)| (a + b) % k).collect();
                let idx = residue_index(&next, k);
                if !seen[idx] {
                    seen[idx] = true;
                    reached += 1;
                    queue.push_back(next);
                }
            }
        }
        Ok(reached == classes)
    }
}

fn integer_norm(z: &LatticePoint, norm: NormKind) -> Option<u64> {
    match norm {
        NormKind::L1 => Some(z.coords().iter().map(|c| c.unsigned_abs()).sum()),
        NormKind::LInf => Some(z.coords().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)),
        NormKind::L2 => {
            let sq: u128 = z.coords().iter().map(|&c| (c as i128 * c as i128) as u128).sum();
            let r = (sq as f64).sqrt().round() as u128;
            (r.checked_mul(r) == Some(sq)).then_some(r as u64)
        }
    }
}

pub(crate) fn torus_size(k: u64, d: usize) -> Result<usize> {
    (k as usize)
        .checked_pow(d as u32)
        .filter(|&n| n <= 1 << 26)
        .ok_or_else(|| WalkError::SizeCap(format!("torus of size {k}^{d} is too large")))
}

pub(crate) fn residue_index(r: &[u64], k: u64) -> usize {
    r.iter().fold(0usize, |acc, &c| acc * k as usize + c as usize)
}

/// Checks every invariant of a step distribution; returns one message per
/// violation.
pub fn validate(entries: &[(LatticePoint, u64)], denominator: u64) -> Vec<String> {
    let mut problems = Vec::new();
    if entries.is_empty() {
        problems.push("support is empty".to_string());
        return problems;
    }
    if denominator == 0 {
        problems.push("denominator must be positive".to_string());
    }
    let d = entries[0].0.dim();
    if d < 2 {
        problems.push(format!("dimension {d} < 2"));
    }
    let mut seen = HashSet::new();
    let mut sum: u128 = 0;
    for (z, w) in entries {
        if z.dim() != d {
            problems.push(format!("support point {z} has dimension {} != {d}", z.dim()));
        }
        if *w == 0 {
            problems.push(format!("weight of {z} is zero"));
        }
        if !seen.insert(z) {
            problems.push(format!("duplicate support point {z}"));
        }
        sum += *w as u128;
    }
    if sum != denominator as u128 {
        problems.push(format!("weights sum {sum} ≠ {denominator}"));
    }
    problems
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstMoment {
    pub value: f64,
    pub exact: Option<BigRational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GenerationKind {
    Generates,
    FailsGroup,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationVerdict {
    pub kind: GenerationKind,
    pub detail: String,
}

const MAX_FACET_CANDIDATES: u64 = 2_000_000;

fn generation_check(mu: &StepDistribution) -> GenerationVerdict {
    let d = mu.dim();
    let rows: Vec<Vec<i128>> = mu
        .support()
        .iter()
        .map(|z| z.coords().iter().map(|&c| c as i128).collect())
        .collect();
    let Some((rank, index)) = lattice_rank_and_index(rows.clone(), d) else {
        return GenerationVerdict {
            kind: GenerationKind::Inconclusive,
            detail: "overflow during lattice reduction".into(),
        };
    };
    if rank < d {
        return GenerationVerdict {
            kind: GenerationKind::FailsGroup,
            detail: format!("support spans a rank-{rank} sublattice of Z^{d}"),
        };
    }
    if index != 1 {
        return GenerationVerdict {
            kind: GenerationKind::FailsGroup,
            detail: format!("support generates an index-{index} sublattice of Z^{d}"),
        };
    }
    let combos = binomial(rows.len() as u64, (d - 1) as u64);
    if combos > MAX_FACET_CANDIDATES {
        return GenerationVerdict {
            kind: GenerationKind::Inconclusive,
            detail: format!("group generated; hull check skipped ({combos} facet candidates)"),
        };
    }
    match separating_normal(&rows, d) {
        Some(w) => GenerationVerdict {
            kind: GenerationKind::Inconclusive,
            detail: format!("group generated, but the origin is not interior to the hull (normal {w:?})"),
        },
        None => GenerationVerdict {
            kind: GenerationKind::Generates,
            detail: "group generated and the origin is interior to the hull".into(),
        },
    }
}

/// Integer row reduction to echelon form. Returns rank and the absolute
/// product of pivots (the index when the rank is full).
fn lattice_rank_and_index(mut rows: Vec<Vec<i128>>, d: usize) -> Option<(usize, i128)> {
    let mut pivot_row = 0;
    let mut index: i128 = 1;
    for col in 0..d {
        loop {
            // smallest nonzero entry in this column at or below pivot_row
            let best = (pivot_row..rows.len())
                .filter(|&r| rows[r][col] != 0)
                .min_by_key(|&r| rows[r][col].unsigned_abs());
            let Some(best) = best else { break };
            rows.swap(pivot_row, best);
            let piv = rows[pivot_row][col];
            let mut done = true;
            for r in pivot_row + 1..rows.len() {
                let q = rows[r][col] / piv;
                if q != 0 {
                    for c in col..d {
                        let delta = q.checked_mul(rows[pivot_row][c])?;
                        rows[r][c] = rows[r][c].checked_sub(delta)?;
                    }
                }
                if rows[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                index = index.checked_mul(piv.abs())?;
                pivot_row += 1;
                break;
            }
        }
        if pivot_row == rows.len() {
            break;
        }
    }
    Some((pivot_row, index))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Searches the normals of hyperplanes through the origin spanned by
/// `d - 1` support points for one leaving all points on a closed side.
fn separating_normal(rows: &[Vec<i128>], d: usize) -> Option<Vec<i128>> {
    let n = rows.len();
    let mut idx: Vec<usize> = (0..d - 1).collect();
    loop {
        let sub: Vec<&Vec<i128>> = idx.iter().map(|&i| &rows[i]).collect();
        let w = cross_product(&sub, d);
        if w.iter().any(|&c| c != 0) {
            let dots = rows.iter().map(|r| r.iter().zip(&w).map(|(a, b)| a * b).sum::<i128>());
            let (mut pos, mut neg) = (false, false);
            for dot in dots {
                pos |= dot > 0;
                neg |= dot < 0;
            }
            if !(pos && neg) {
                return Some(w);
            }
        }
        // next combination
        let mut i = d - 1;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] < n - (d - 1 - i) {
                idx[i] += 1;
                for j in i + 1..d - 1 {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if d - 1 == 0 {
            return None;
        }
    }
}

/// Generalized cross product of `d - 1` vectors in `Z^d` (cofactor expansion).
fn cross_product(vs: &[&Vec<i128>], d: usize) -> Vec<i128> {
    (0..d)
        .map(|j| {
            let minor: Vec<Vec<i128>> = vs
                .iter()
                .map(|v| v.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let det = determinant(minor);
            if j % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

/// Bareiss fraction-free determinant.
fn determinant(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            match (k + 1..n).find(|&r| m[r][k] != 0) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn signed_basis(d: usize, weights_pos: &[u64], weights_neg: &[u64]) -> Vec<(LatticePoint, u64)> {
    let pos = (0..d).map(|i| (LatticePoint::unit(d, i, 1), weights_pos[i]));
    let neg = (0..d).map(|i| (LatticePoint::unit(d, i, -1), weights_neg[i]));
    pos.chain(neg).collect()
}

/// η₁ on `Z^4`.
pub fn eta1() -> StepDistribution {
    StepDistribution::new(signed_basis(4, &[13, 3, 35, 36], &[36, 30, 42, 5]), 200).expect("eta1")
}

/// η₂ on `Z^6`.
pub fn eta2() -> StepDistribution {
    StepDistribution::new(signed_basis(6, &[13, 3, 35, 36, 5, 42], &[16, 36, 4, 49, 36, 30]), 305)
        .expect("eta2")
}

/// η₃ on `Z^3`.
pub fn eta3() -> StepDistribution {
    StepDistribution::new(signed_basis(3, &[11, 12, 8], &[9, 2, 9]), 51).expect("eta3")
}

/// ν: uniform on the `2d` signed basis vectors.
pub fn nu(d: usize) -> Result<StepDistribution> {
    if d < 2 {
        return Err(WalkError::InvalidDimension(d));
    }
    StepDistribution::new(signed_basis(d, &vec![1; d], &vec![1; d]), 2 * d as u64)
}

/// Config-file form of a measure: a name, or an inline weighted support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSpec {
    Named(String),
    Inline(InlineMeasure),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMeasure {
    pub denominator: u64,
    pub support: Vec<WeightedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPoint {
    pub vector: Vec<i64>,
    pub weight: u64,
}

impl MeasureSpec {
    /// `dim` is used only by `nu`, which exists in every dimension.
    pub fn build(&self, dim: Option<usize>) -> Result<StepDistribution> {
        match self {
            MeasureSpec::Named(name) => named(name, dim),
            MeasureSpec::Inline(m) => {
                let entries = m
                    .support
                    .iter()
                    .map(|wp| Ok((LatticePoint::new(wp.vector.clone())?, wp.weight)))
                    .collect::<Result<Vec<_>>>()?;
                StepDistribution::new(entries, m.denominator)
            }
        }
    }
}

pub fn named(name: &str, dim: Option<usize>) -> Result<StepDistribution> {
    match name {
        "eta1" => Ok(eta1()),
        "eta2" => Ok(eta2()),
        "eta3" => Ok(eta3()),
        "nu" => nu(dim.unwrap_or(2)),
        other => Err(WalkError::InvalidConfig(format!(
            "unknown measure {other:?} (expected eta1, eta2, eta3 or nu)"
        ))),
    }
}
