//! The plain (non-normalized) sum walk and its statistics on the discrete
//! torus `(Z/kZ)^d`: hit counts `Y`, the hit indicator `M`, the uniform
//! indicator `U`, covering words and the Chernoff tail experiment.
//!
//! A position counts as a hit when every coordinate is divisible by `k`
//! (the zero vector included). Residues are encoded as base-`k` indices so
//! the hot loops only do table lookups.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::lattice::{check_dims, LatticePoint, StepSequence};
use crate::measure::{residue_index, torus_size, StepDistribution};
use crate::par::{fold_trials, Parallelism};
use crate::stats::{proportion, MeanEstimate, Z99};
use crate::stream::RandomStream;

/// Largest torus the covering-word search accepts (`k^d`).
pub const MAX_TORUS_CLASSES: usize = 4096;

/// Cap on live states per layer of the covering-word search.
pub const MAX_SEARCH_STATES: usize = 200_000;

/// Partial sums `Σ_1, ..., Σ_n` of `n` steps drawn from `mu`, started at `z`.
pub fn plain_walk(
    mu: &StepDistribution,
    z: &LatticePoint,
    n: u64,
    stream: &mut RandomStream,
) -> Result<Vec<LatticePoint>> {
    check_dims(mu.dim(), z.dim())?;
    let mut pos = z.clone();
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        pos.add_assign_checked(mu.sample(stream))?;
        out.push(pos.clone());
    }
    Ok(out)
}

/// Number of positions in `path` with every coordinate divisible by `k`.
pub fn count_y(path: &[LatticePoint], k: u64) -> u64 {
    path.iter().filter(|p| p.is_zero_mod(k)).count() as u64
}

/// 1 when the path hits a multiple of `k` at least once.
pub fn indicator_m(path: &[LatticePoint], k: u64) -> u8 {
    u8::from(count_y(path, k) >= 1)
}

/// Residue arithmetic on `(Z/kZ)^d` for a fixed step distribution.
struct TorusTable {
    classes: usize,
    /// `add[r * steps + s]` is the class of `r + step_s`.
    add: Vec<u32>,
    steps: usize,
}

impl TorusTable {
    fn new(mu: &StepDistribution, k: u64) -> Result<Self> {
        if k < 2 {
            return Err(WalkError::InvalidModulus(k));
        }
        let d = mu.dim();
        let classes = torus_size(k, d)?;
        let step_res: Vec<Vec<u64>> = mu.support().iter().map(|s| residues(s, k)).collect();
        let steps = step_res.len();
        let mut add = vec![0u32; classes * steps];
        let mut digits = vec![0u64; d];
        for r in 0..classes {
            decode(r, k, &mut digits);
            for (s, sr) in step_res.iter().enumerate() {
                let sum: Vec<u64> = digits.iter().zip(sr).map(|(a, b)| (a + b) % k).collect();
                add[r * steps + s] = residue_index(&sum, k) as u32;
            }
        }
        Ok(Self { classes, add, steps })
    }

    #[inline]
    fn next(&self, r: u32, s: usize) -> u32 {
        self.add[r as usize * self.steps + s]
    }
}

fn residues(p: &LatticePoint, k: u64) -> Vec<u64> {
    p.coords().iter().map(|&c| c.rem_euclid(k as i64) as u64).collect()
}

fn decode(mut r: usize, k: u64, out: &mut [u64]) {
    for slot in out.iter_mut().rev() {
        *slot = (r % k as usize) as u64;
        r /= k as usize;
    }
}

fn visited_classes(prefix: &StepSequence, k: u64) -> Result<(Vec<bool>, usize)> {
    let Some(first) = prefix.steps.first() else {
        return Ok((Vec::new(), 0));
    };
    let d = first.dim();
    let classes = torus_size(k, d)?;
    let mut seen = vec![false; classes];
    let mut count = 0;
    let mut acc = vec![0u64; d];
    for s in &prefix.steps {
        for (a, b) in acc.iter_mut().zip(residues(s, k)) {
            *a = (*a + b) % k;
        }
        let idx = residue_index(&acc, k);
        if !seen[idx] {
            seen[idx] = true;
            count += 1;
        }
    }
    Ok((seen, count))
}

/// `U = min over torus starts x of M(prefix, x)`. Start `x` is hit iff some
/// partial sum is `≡ -x`, so `U = 1` iff the partial-sum residues cover
/// the whole torus.
pub fn uniform_min_u(prefix: &StepSequence, k: u64) -> Result<u8> {
    if k < 2 {
        return Err(WalkError::InvalidModulus(k));
    }
    let (seen, count) = visited_classes(prefix, k)?;
    Ok(u8::from(!seen.is_empty() && count == seen.len()))
}

/// Covering word and the constants derived from it.
#[derive(Debug, Clone, Serialize)]
pub struct TorusCalibration {
    pub k: u64,
    /// Word length, used as the block length `n0`.
    pub n0: usize,
    pub covering_word: StepSequence,
    /// `Π μ(a_i)` over the word; a certified lower bound for `E[U_{n0}]`.
    #[serde(serialize_with = "ser_ratio")]
    pub cylinder_bound: BigRational,
    /// Monte Carlo estimate of `E[U_{n0}]`, when computed.
    pub alpha_estimate: Option<MeanEstimate>,
}

impl TorusCalibration {
    /// The `α` used on the right-hand side of the Chernoff bound.
    pub fn certified_alpha(&self) -> f64 {
        self.cylinder_bound.to_f64().unwrap_or(0.0)
    }
}

pub(crate) fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

#[derive(Clone)]
struct SearchEntry {
    product: BigUint,
    word: Vec<u16>,
}

impl SearchEntry {
    fn beats(&self, other: &SearchEntry) -> bool {
        self.product > other.product || (self.product == other.product && self.word < other.word)
    }
}

/// Shortest word from `supp(mu)` whose partial-sum residues cover
/// `(Z/kZ)^d`.
///
/// Runs a layered search over (current class, visited set) states, keeping
/// the most probable word per state. The state space is exponential in
/// `k^d`; once a layer exceeds [`MAX_SEARCH_STATES`] the search switches to
/// a greedy word that repeatedly walks to the nearest unvisited class. The
/// greedy word still covers the torus but need not be shortest.
pub fn find_covering_word(mu: &StepDistribution, k: u64, max_len: usize) -> Result<TorusCalibration> {
    if !mu.torus_coverage_check(k)? {
        return Err(WalkError::Precondition(format!(
            "support residues do not reach every class of (Z/{k}Z)^{}",
            mu.dim()
        )));
    }
    let table = TorusTable::new(mu, k)?;
    if table.classes > MAX_TORUS_CLASSES {
        return Err(WalkError::SizeCap(format!(
            "torus has {} classes; the covering-word search is capped at {MAX_TORUS_CLASSES}",
            table.classes
        )));
    }
    let word = match layered_search(mu, &table, max_len)? {
        Some(word) => word,
        None => greedy_word(mu, &table),
    };
    if word.len() > max_len {
        return Err(WalkError::SearchCap(format!(
            "greedy covering word has length {} > {max_len}",
            word.len()
        )));
    }
    let product = word.iter().fold(BigUint::one(), |acc, &i| acc * mu.weights()[i as usize]);
    let den = BigInt::from(mu.denominator()).pow(word.len() as u32);
    let steps = word.iter().map(|&i| mu.support()[i as usize].clone()).collect();
    Ok(TorusCalibration {
        k,
        n0: word.len(),
        covering_word: StepSequence::new(steps)?,
        cylinder_bound: BigRational::new(BigInt::from(product), den),
        alpha_estimate: None,
    })
}

/// Exact search; `Ok(None)` when the state cap is hit.
fn layered_search(mu: &StepDistribution, table: &TorusTable, max_len: usize) -> Result<Option<Vec<u16>>> {
    let words = table.classes.div_ceil(64);
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let bits = (table.classes - w * 64).min(64);
            if bits == 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            }
        })
        .collect();

    let mut layer: BTreeMap<(u32, Vec<u64>), SearchEntry> = BTreeMap::new();
    layer.insert(
        (0, vec![0u64; words]),
        SearchEntry {
            product: BigUint::one(),
            word: Vec::new(),
        },
    );
    for _ in 1..=max_len {
        let mut next: BTreeMap<(u32, Vec<u64>), SearchEntry> = BTreeMap::new();
        for ((r, visited), entry) in &layer {
            for (s, &w) in mu.weights().iter().enumerate() {
                let r2 = table.next(*r, s);
                let mut v2 = visited.clone();
                v2[r2 as usize / 64] |= 1u64 << (r2 % 64);
                let mut word = entry.word.clone();
                word.push(s as u16);
                let cand = SearchEntry {
                    product: &entry.product * BigUint::from(w),
                    word,
                };
                match next.get_mut(&(r2, v2.clone())) {
                    Some(cur) => {
                        if cand.beats(cur) {
                            *cur = cand;
                        }
                    }
                    None => {
                        next.insert((r2, v2), cand);
                    }
                }
            }
            if next.len() > MAX_SEARCH_STATES {
                return Ok(None);
            }
        }
        let best = next
            .iter()
            .filter(|((_, v), _)| *v == full)
            .map(|(_, e)| e)
            .fold(None::<&SearchEntry>, |acc, e| match acc {
                Some(b) if !e.beats(b) => Some(b),
                _ => Some(e),
            });
        if let Some(best) = best {
            return Ok(Some(best.word.clone()));
        }
        layer = next;
    }
    Err(WalkError::SearchCap(format!("no covering word of length <= {max_len}")))
}

/// Greedy covering word: from the current class, append the most probable
/// shortest step path to the nearest unvisited class.
fn greedy_word(mu: &StepDistribution, table: &TorusTable) -> Vec<u16> {
    let log_w: Vec<f64> = mu.weights().iter().map(|&w| (w as f64).ln()).collect();
    let mut visited = vec![false; table.classes];
    let mut remaining = table.classes;
    let mut word = Vec::new();
    let mut cur = 0u32;
    while remaining > 0 {
        // BFS layers from `cur`, best log-weight path per class
        let mut best: Vec<Option<(f64, Vec<u16>)>> = vec![None; table.classes];
        let mut frontier = vec![(cur, 0.0f64, Vec::<u16>::new())];
        let found = loop {
            let mut next: BTreeMap<u32, (f64, Vec<u16>)> = BTreeMap::new();
            for (r, lw, path) in &frontier {
                for s in 0..table.steps {
                    let r2 = table.next(*r, s);
                    if best[r2 as usize].is_some() {
                        continue;
                    }
                    let cand = lw + log_w[s];
                    let better = match next.get(&r2) {
                        Some((b, _)) => cand > *b,
                        None => true,
                    };
                    if better {
                        let mut p = path.clone();
                        p.push(s as u16);
                        next.insert(r2, (cand, p));
                    }
                }
            }
            for (r, e) in &next {
                best[*r as usize] = Some(e.clone());
            }
            let target = next
                .iter()
                .filter(|(r, _)| !visited[**r as usize])
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(b.0.cmp(a.0)));
            if let Some((&r, (_, path))) = target {
                break (r, path.clone());
            }
            frontier = next.into_iter().map(|(r, (lw, p))| (r, lw, p)).collect();
        };
        // mark every class visited along the way
        let mut r = cur;
        for &s in &found.1 {
            r = table.next(r, s as usize);
            if !visited[r as usize] {
                visited[r as usize] = true;
                remaining -= 1;
            }
        }
        word.extend(found.1);
        cur = found.0;
    }
    word
}

/// Monte Carlo estimate of `E[U_n]` with a 99% interval.
pub fn estimate_eu(
    mu: &StepDistribution,
    k: u64,
    n: u64,
    trials: u64,
    seed: u64,
    par: Parallelism,
) -> Result<MeanEstimate> {
    let table = TorusTable::new(mu, k)?;
    if n == 0 || trials == 0 {
        return Ok(proportion(0, trials, Z99));
    }
    let classes = table.classes;
    let hits = fold_trials(
        trials,
        par,
        || (0u64, vec![0u64; classes]),
        |i, (hits, stamp)| {
            let mut stream = RandomStream::for_trial(seed, i);
            let tag = i + 1;
            let mut r = 0u32;
            let mut covered = 0usize;
            for _ in 0..n {
                r = table.next(r, mu.sample_index(&mut stream));
                let slot = &mut stamp[r as usize];
                if *slot != tag {
                    *slot = tag;
                    covered += 1;
                }
            }
            if covered == classes {
                *hits += 1;
            }
            Ok(())
        },
        |a, b| a.0 += b.0,
    )?
    .0;
    Ok(proportion(hits, trials, Z99))
}

/// Covering word plus a Monte Carlo `E[U_{n0}]`.
pub fn calibrate(
    mu: &StepDistribution,
    k: u64,
    max_len: usize,
    trials: u64,
    seed: u64,
    par: Parallelism,
) -> Result<TorusCalibration> {
    let mut cal = find_covering_word(mu, k, max_len)?;
    cal.alpha_estimate = Some(estimate_eu(mu, k, cal.n0 as u64, trials, seed, par)?);
    Ok(cal)
}

/// One line of the Chernoff table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffRow {
    pub n: u64,
    /// `(1 - ε) α n / (2 n0)`
    pub threshold: f64,
    /// Fraction of trials with `Y_n <= threshold`.
    pub empirical_tail: f64,
    /// `C_{ε,α} exp(-α ε² n / (2 n0))` with `C_{ε,α} = exp(α ε² / 2)`.
    pub bound: f64,
    pub trials: u64,
}

impl ChernoffRow {
    pub fn dominated(&self) -> bool {
        self.empirical_tail <= self.bound
    }
}

pub fn chernoff_threshold(alpha: f64, eps: f64, n0: usize, n: u64) -> f64 {
    (1.0 - eps) * alpha * n as f64 / (2.0 * n0 as f64)
}

pub fn chernoff_bound(alpha: f64, eps: f64, n0: usize, n: u64) -> f64 {
    let c = (alpha * eps * eps / 2.0).exp();
    c * (-alpha * eps * eps * n as f64 / (2.0 * n0 as f64)).exp()
}

/// Empirical lower tail of `Y_n` against the bound, for each `n` in the grid.
/// Every trial walks once to the largest `n` and reads `Y` at each grid point.
#[allow(clippy::too_many_arguments)]
pub fn chernoff_experiment(
    mu: &StepDistribution,
    k: u64,
    z: &LatticePoint,
    n_grid: &[u64],
    eps: f64,
    trials: u64,
    seed: u64,
    calibration: &TorusCalibration,
    par: Parallelism,
) -> Result<Vec<ChernoffRow>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(WalkError::Precondition(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if calibration.k != k {
        return Err(WalkError::Precondition(format!(
            "calibration is for k = {}, not {k}",
            calibration.k
        )));
    }
    check_dims(mu.dim(), z.dim())?;
    let table = TorusTable::new(mu, k)?;
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let Some(&max_n) = grid.last() else {
        return Ok(Vec::new());
    };
    let alpha = calibration.certified_alpha();
    let n0 = calibration.n0;
    let thresholds: Vec<f64> = grid.iter().map(|&n| chernoff_threshold(alpha, eps, n0, n)).collect();
    let start = residue_index(&residues(z, k), k) as u32;

    let tails = fold_trials(
        trials,
        par,
        || vec![0u64; grid.len()],
        |i, tails| {
            let mut stream = RandomStream::for_trial(seed, i);
            let mut r = start;
            let mut y = 0u64;
            let mut g = 0;
            // grid points at n = 0
            while g < grid.len() && grid[g] == 0 {
                tails[g] += u64::from((y as f64) <= thresholds[g]);
                g += 1;
            }
            for step in 1..=max_n {
                r = table.next(r, mu.sample_index(&mut stream));
                if r == 0 {
                    y += 1;
                }
                while g < grid.len() && grid[g] == step {
                    tails[g] += u64::from((y as f64) <= thresholds[g]);
                    g += 1;
                }
            }
            Ok(())
        },
        |a, b| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
    )?;

    Ok(grid
        .iter()
        .zip(&thresholds)
        .zip(tails)
        .map(|((&n, &threshold), tail)| ChernoffRow {
            n,
            threshold,
            empirical_tail: if trials == 0 { 0.0 } else { tail as f64 / trials as f64 },
            bound: chernoff_bound(alpha, eps, n0, n),
            trials,
        })
        .collect())
}

/// Exact `E[U_n]`: the probability that the first `n` partial sums cover
/// every class of `(Z/kZ)^d`. Walks the law of (current class, visited
/// set), which is all `|supp μ|^n` words grouped by their torus state.
pub fn exact_eu(mu: &StepDistribution, k: u64, n: u32) -> Result<BigRational> {
    let table = TorusTable::new(mu, k)?;
    if table.classes > 64 {
        return Err(WalkError::SizeCap(format!(
            "exact E[U] tracks visited sets as 64-bit masks; the torus has {} classes",
            table.classes
        )));
    }
    let full = if table.classes == 64 { u64::MAX } else { (1u64 << table.classes) - 1 };
    let mut layer: BTreeMap<(u32, u64), BigUint> = BTreeMap::from([((0, 0), BigUint::one())]);
    for _ in 0..n {
        let mut next: BTreeMap<(u32, u64), BigUint> = BTreeMap::new();
        for ((r, seen), w) in &layer {
            for (s, &ws) in mu.weights().iter().enumerate() {
                let t = table.next(*r, s);
                *next.entry((t, seen | (1u64 << t))).or_insert_with(BigUint::zero) += w * ws;
            }
        }
        layer = next;
    }
    let covered = layer
        .iter()
        .filter(|((_, seen), _)| *seen == full)
        .fold(BigUint::zero(), |acc, (_, w)| acc + w);
    let den = BigUint::from(mu.denominator()).pow(n);
    Ok(BigRational::new(covered.into(), den.into()))
}

/// Exact law of `Y_n` started at `z`, by enumerating all `|supp μ|^n` step
/// words. Exponential; meant for tiny `n`.
pub fn exact_hit_count_law(
    mu: &StepDistribution,
    z: &LatticePoint,
    n: u32,
    k: u64,
) -> Result<BTreeMap<u64, BigRational>> {
    check_dims(mu.dim(), z.dim())?;
    let words = (mu.len() as u64).checked_pow(n).filter(|&w| w <= 1 << 24).ok_or_else(|| {
        WalkError::SizeCap(format!("{}^{n} words is too many to enumerate", mu.len()))
    })?;
    let den = BigInt::from(mu.denominator()).pow(n);
    let mut law: BTreeMap<u64, BigInt> = BTreeMap::new();
    let mut idx = vec![0usize; n as usize];
    for _ in 0..words {
        let mut pos = z.clone();
        let mut weight = BigInt::one();
        let mut path = Vec::with_capacity(n as usize);
        for &i in &idx {
            pos = pos.checked_add(&mu.support()[i])?;
            path.push(pos.clone());
            weight *= mu.weights()[i];
        }
        *law.entry(count_y(&path, k)).or_insert_with(BigInt::zero) += weight;
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < mu.len() {
                break;
            }
            *slot = 0;
        }
    }
    Ok(law
        .into_iter()
        .map(|(y, w)| (y, BigRational::new(w, den.clone())))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{eta3, nu};

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    fn seq(steps: &[&[i64]]) -> StepSequence {
        StepSequence::new(steps.iter().map(|s| p(s)).collect()).unwrap()
    }

    #[test]
    fn exact_eu_small_cases() {
        let mu = nu(2).unwrap();
        assert!(exact_eu(&mu, 2, 3).unwrap().is_zero());
        // mod 2 each step flips one coordinate, so the four partial sums cover
        // the square iff they trace one of its 4 Hamiltonian paths from e_1 or e_2
        let e4 = exact_eu(&mu, 2, 4).unwrap();
        assert_eq!(e4, BigRational::new(BigInt::from(4 * 16), BigInt::from(256)));
    }

    #[test]
    fn plain_walk_examples() {
        let mut s = RandomStream::from_seed(0);
        let delta = StepDistribution::dirac(p(&[1, 0]));
        let path = plain_walk(&delta, &p(&[0, 0]), 3, &mut s).unwrap();
        assert_eq!(path, vec![p(&[1, 0]), p(&[2, 0]), p(&[3, 0])]);
        assert!(plain_walk(&delta, &p(&[0, 0]), 0, &mut s).unwrap().is_empty());
        let big = StepDistribution::dirac(p(&[i64::MAX, 0]));
        assert_eq!(plain_walk(&big, &p(&[1, 0]), 1, &mut s), Err(WalkError::Overflow));
    }

    #[test]
    fn y_and_m_examples() {
        let path = vec![p(&[2, 2]), p(&[3, 3]), p(&[3, 4])];
        assert_eq!(count_y(&path, 2), 1);
        assert_eq!(count_y(&[p(&[0, 0])], 7), 1);
        assert_eq!(count_y(&[p(&[1, 0]), p(&[1, 1])], 2), 0);
        assert_eq!(indicator_m(&path, 2), 1);
        assert_eq!(indicator_m(&[p(&[1, 0])], 2), 0);
        let three = vec![p(&[2, 2]), p(&[4, 0]), p(&[0, 0])];
        assert_eq!((count_y(&three, 2), indicator_m(&three, 2)), (3, 1));
    }

    #[test]
    fn u_examples() {
        assert_eq!(uniform_min_u(&seq(&[&[1, 0], &[0, 1], &[1, 0], &[0, 1]]), 2).unwrap(), 1);
        assert_eq!(uniform_min_u(&StepSequence::default(), 2).unwrap(), 0);
        assert_eq!(uniform_min_u(&seq(&[&[1, 0]]), 2).unwrap(), 0);
    }

    #[test]
    fn covering_word_for_nu() {
        let cal = find_covering_word(&nu(2).unwrap(), 2, 16).unwrap();
        assert_eq!(cal.n0, 4);
        assert_eq!(cal.covering_word.len(), 4);
        assert_eq!(cal.cylinder_bound, BigRational::new(1.into(), 256.into()));
        assert_eq!(uniform_min_u(&cal.covering_word, 2).unwrap(), 1);
    }

    #[test]
    fn covering_word_length_at_least_torus_size() {
        for k in 2..=4 {
            let cal = find_covering_word(&eta3(), k, 200).unwrap();
            assert!(cal.n0 >= (k as usize).pow(3));
            assert_eq!(uniform_min_u(&cal.covering_word, k).unwrap(), 1);
        }
    }

    #[test]
    fn covering_word_requires_coverage() {
        let even = StepDistribution::uniform(vec![p(&[2, 0]), p(&[0, 2])]).unwrap();
        assert!(matches!(find_covering_word(&even, 2, 10), Err(WalkError::Precondition(_))));
        assert!(matches!(find_covering_word(&nu(2).unwrap(), 2, 3), Err(WalkError::SearchCap(_))));
        assert!(matches!(find_covering_word(&nu(6).unwrap(), 5, 10), Err(WalkError::SizeCap(_))));
    }

    #[test]
    fn eu_edge_cases() {
        let nu2 = nu(2).unwrap();
        assert_eq!(estimate_eu(&nu2, 2, 0, 100, 1, Parallelism::Threads(1)).unwrap().mean, 0.0);
        let stuck = StepDistribution::dirac(p(&[1, 0]));
        assert_eq!(estimate_eu(&stuck, 2, 50, 1000, 1, Parallelism::Auto).unwrap().mean, 0.0);
    }

    #[test]
    fn bound_formula() {
        let (alpha, eps, n0): (f64, f64, usize) = (1.0 / 256.0, 0.5, 4);
        for n in [1u64, 10, 1000] {
            let expected = (alpha * eps * eps / 2.0).exp() * (-alpha * eps * eps * n as f64 / 8.0).exp();
            assert_eq!(chernoff_bound(alpha, eps, n0, n), expected);
        }
    }

    #[test]
    fn y_commutes_with_reduction() {
        let mu = eta3();
        let mut s = RandomStream::from_seed(9);
        let path = plain_walk(&mu, &p(&[5, -3, 7]), 200, &mut s).unwrap();
        for k in [2u64, 3, 5] {
            let reduced: Vec<LatticePoint> = path
                .iter()
                .map(|q| LatticePoint::new(residues(q, k).into_iter().map(|c| c as i64).collect::<Vec<_>>()).unwrap())
                .collect();
            assert_eq!(count_y(&path, k), count_y(&reduced, k));
        }
    }

    #[test]
    fn exact_law_sums_to_one() {
        let law = exact_hit_count_law(&nu(2).unwrap(), &p(&[1, 0]), 3, 2).unwrap();
        let total: BigRational = law.values().cloned().sum();
        assert!(total.is_one());
        // from (1,0) the first step hits (0,0) or (2,0) with probability 1/2
        assert_eq!(law[&0], BigRational::new(1.into(), 4.into()));
    }

    #[test]
    fn chernoff_rejects_bad_epsilon() {
        let nu2 = nu(2).unwrap();
        let cal = find_covering_word(&nu2, 2, 8).unwrap();
        for eps in [0.0, 1.0, -0.2] {
            assert!(chernoff_experiment(&nu2, 2, &p(&[0, 0]), &[4], eps, 10, 0, &cal, Parallelism::Auto).is_err());
        }
    }
}
