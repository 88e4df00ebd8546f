//! Integer lattice points, the two normalized step maps and the
//! constructive irreducibility path.
//!
//! A walk state is a [`LatticePoint`] in `Z^d` with `d >= 2`. The full-gcd
//! step adds a step vector and divides by the gcd of the sum; the
//! coprime-to-`k` step divides only by the largest power of `k` that divides
//! every coordinate. Both use the convention `gcd(0, ..., 0) = 1`, so the
//! zero vector is a valid state of every walk.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Result, WalkError};

pub type Coords = SmallVec<[i64; 6]>;

/// Integer vector in `Z^d`, `d >= 2`. All arithmetic is overflow-checked.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Coords);

impl LatticePoint {
    pub fn new(coords: impl Into<Vec<i64>>) -> Result<Self> {
        let coords: Vec<i64> = coords.into();
        if coords.len() < 2 {
            return Err(WalkError::InvalidDimension(coords.len()));
        }
        Ok(Self(Coords::from_vec(coords)))
    }

    pub fn zero(d: usize) -> Self {
        Self(SmallVec::from_elem(0, d))
    }

    /// Standard basis vector `sign * e_axis` (axis is 0-based).
    pub fn unit(d: usize, axis: usize, sign: i64) -> Self {
        let mut c = SmallVec::from_elem(0, d);
        c[axis] = sign;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &LatticePoint) -> Result<LatticePoint> {
        check_dims(self.dim(), other.dim())?;
        let mut out = self.clone();
        out.add_assign_checked(other)?;
        Ok(out)
    }

    pub(crate) fn add_assign_checked(&mut self, other: &LatticePoint) -> Result<()> {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a = a.checked_add(*b).ok_or(WalkError::Overflow)?;
        }
        Ok(())
    }

    pub fn checked_scale(&self, m: i64) -> Result<LatticePoint> {
        let mut c = self.0.clone();
        for x in c.iter_mut() {
            *x = x.checked_mul(m).ok_or(WalkError::Overflow)?;
        }
        Ok(Self(c))
    }

    /// gcd of the absolute values of the coordinates; 1 for the zero vector.
    pub fn gcd(&self) -> u64 {
        gcd_slice(&self.0)
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() == 1
    }

    /// `k` does not divide `gcd(self)`. The zero vector is coprime to every `k`.
    pub fn is_coprime_to(&self, k: u64) -> bool {
        !self.gcd().is_multiple_of(k)
    }

    /// `self / gcd(self)`; the zero vector maps to itself.
    pub fn normalize(&self) -> LatticePoint {
        let mut out = self.clone();
        out.divide_exact(self.gcd());
        out
    }

    fn divide_exact(&mut self, g: u64) {
        if g <= 1 {
            return;
        }
        let g = g as i128;
        for c in self.0.iter_mut() {
            *c = (*c as i128 / g) as i64;
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        kind.eval(&self.0)
    }

    /// Every coordinate divisible by `k` (this includes the zero vector).
    pub fn is_zero_mod(&self, k: u64) -> bool {
        let k = k as i64;
        self.0.iter().all(|c| c.rem_euclid(k) == 0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for LatticePoint {
    type Err = WalkError;

    /// Parses `"2,3"`, `"(2, 3)"` or `"[2 3]"`.
    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let coords = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|e| WalkError::InvalidConfig(format!("bad coordinate {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LatticePoint::new(coords)
    }
}

impl From<LatticePoint> for Vec<i64> {
    fn from(p: LatticePoint) -> Self {
        p.0.into_vec()
    }
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(WalkError::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// gcd of absolute values, with `gcd(0, ..., 0) = 1`.
pub fn gcd_slice(coords: &[i64]) -> u64 {
    let mut g = 0u64;
    for &c in coords {
        g = gcd_u64(g, c.unsigned_abs());
        if g == 1 {
            return 1;
        }
    }
    if g == 0 {
        1
    } else {
        g
    }
}

/// Norm used for statistics (`L2` by default) and truncation boxes (`LInf`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    #[default]
    L2,
    LInf,
}

impl NormKind {
    pub fn eval(self, coords: &[i64]) -> f64 {
        match self {
            NormKind::L1 => coords.iter().map(|c| c.unsigned_abs() as f64).sum(),
            NormKind::L2 => coords
                .iter()
                .map(|&c| {
                    let c = c as f64;
                    c * c
                })
                .sum::<f64>()
                .sqrt(),
            NormKind::LInf => coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
        }
    }
}

impl FromStr for NormKind {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" | "l-inf" | "max" => Ok(NormKind::LInf),
            other => Err(WalkError::InvalidConfig(format!("unknown norm {other:?}"))),
        }
    }
}

/// Which normalized walk is run: divide by the full gcd, or only by the
/// largest power of `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkMode {
    FullGcd,
    CoprimeTo(u64),
}

impl WalkMode {
    pub fn coprime_to(k: u64) -> Result<Self> {
        if k < 2 {
            return Err(WalkError::InvalidModulus(k));
        }
        Ok(WalkMode::CoprimeTo(k))
    }

    /// Index used in file names and reports: 0 for the full-gcd walk, `k` otherwise.
    pub fn index(self) -> u64 {
        match self {
            WalkMode::FullGcd => 0,
            WalkMode::CoprimeTo(k) => k,
        }
    }

    /// Whether `z` is a state of this walk.
    pub fn admits(self, z: &LatticePoint) -> bool {
        match self {
            WalkMode::FullGcd => z.is_primitive(),
            WalkMode::CoprimeTo(k) => z.is_coprime_to(k),
        }
    }

    pub fn check_state(self, z: &LatticePoint) -> Result<()> {
        if let WalkMode::CoprimeTo(k) = self {
            if k < 2 {
                return Err(WalkError::InvalidModulus(k));
            }
        }
        if self.admits(z) {
            return Ok(());
        }
        Err(match self {
            WalkMode::FullGcd => WalkError::NotPrimitive(z.clone()),
            WalkMode::CoprimeTo(k) => WalkError::NotCoprime { point: z.clone(), k },
        })
    }
}

impl fmt::Display for WalkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WalkMode::FullGcd => write!(f, "full"),
            WalkMode::CoprimeTo(k) => write!(f, "k={k}"),
        }
    }
}

/// Finite prefix of a step sequence; all members share the dimension.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepSequence {
    pub steps: Vec<LatticePoint>,
}

impl StepSequence {
    pub fn new(steps: Vec<LatticePoint>) -> Result<Self> {
        if let Some(first) = steps.first() {
            let d = first.dim();
            for s in &steps {
                check_dims(d, s.dim())?;
            }
        }
        Ok(Self { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Positions visited after each step (the start is not included).
    pub fn replay(&self, mode: WalkMode, start: &LatticePoint) -> Result<Vec<LatticePoint>> {
        let mut pos = start.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            pos = step(mode, s, &pos)?;
            out.push(pos.clone());
        }
        Ok(out)
    }
}

/// `a ĥ+ z = (a + z) / gcd(a + z)` for a primitive state `z`.
pub fn hat_plus(a: &LatticePoint, z: &LatticePoint) -> Result<LatticePoint> {
    check_dims(z.dim(), a.dim())?;
    if !z.is_primitive() {
        return Err(WalkError::NotPrimitive(z.clone()));
    }
    Ok(a.checked_add(z)?.normalize())
}

/// The coprime-to-`k` step: `(a + z) / k^p` with `p` maximal. A zero sum
/// maps to the zero vector with `p = 0`.
pub fn hat_plus_k(a: &LatticePoint, z: &LatticePoint, k: u64) -> Result<(LatticePoint, u32)> {
    if k < 2 {
        return Err(WalkError::InvalidModulus(k));
    }
    check_dims(z.dim(), a.dim())?;
    if !z.is_coprime_to(k) {
        return Err(WalkError::NotCoprime { point: z.clone(), k });
    }
    let mut sum = a.checked_add(z)?;
    let p = strip_powers(&mut sum, k);
    Ok((sum, p))
}

fn strip_powers(v: &mut LatticePoint, k: u64) -> u32 {
    if v.is_zero() {
        return 0;
    }
    let k = k as i64;
    let mut p = 0;
    while v.0.iter().all(|c| c % k == 0) {
        for c in v.0.iter_mut() {
            *c /= k;
        }
        p += 1;
    }
    p
}

/// Dispatch to [`hat_plus`] or [`hat_plus_k`] by mode.
pub fn step(mode: WalkMode, a: &LatticePoint, z: &LatticePoint) -> Result<LatticePoint> {
    match mode {
        WalkMode::FullGcd => hat_plus(a, z),
        WalkMode::CoprimeTo(k) => hat_plus_k(a, z, k).map(|(r, _)| r),
    }
}

/// In-place step for the hot loop. The caller guarantees `state` is valid
/// for `mode` and that dimensions agree. Returns the division factor: the
/// gcd for the full-gcd walk, the exponent `p` for the coprime walk
/// (1 resp. 0 meaning no division happened).
#[inline]
pub(crate) fn step_in_place(mode: WalkMode, state: &mut LatticePoint, a: &LatticePoint) -> Result<u64> {
    state.add_assign_checked(a)?;
    match mode {
        WalkMode::FullGcd => {
            let g = state.gcd();
            state.divide_exact(g);
            Ok(g)
        }
        WalkMode::CoprimeTo(k) => Ok(strip_powers(state, k) as u64),
    }
}

/// A triple showing the full-gcd step is not a group action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonActionWitness {
    pub a1: LatticePoint,
    pub a2: LatticePoint,
    pub z: LatticePoint,
    /// `a1 ĥ+ (a2 ĥ+ z)`
    pub sequential: LatticePoint,
    /// `(a1 + a2) ĥ+ z`
    pub combined: LatticePoint,
}

impl NonActionWitness {
    pub fn evaluate(a1: &LatticePoint, a2: &LatticePoint, z: &LatticePoint) -> Result<Self> {
        let sequential = hat_plus(a1, &hat_plus(a2, z)?)?;
        let combined = hat_plus(&a1.checked_add(a2)?, z)?;
        Ok(Self {
            a1: a1.clone(),
            a2: a2.clone(),
            z: z.clone(),
            sequential,
            combined,
        })
    }

    pub fn verify(&self) -> bool {
        Self::evaluate(&self.a1, &self.a2, &self.z)
            .map(|w| w.sequential != w.combined && w.sequential == self.sequential && w.combined == self.combined)
            .unwrap_or(false)
    }
}

/// Exhaustive search over `[-bound, bound]^d` for `(a1, a2, z)` with
/// `a1 ĥ+ (a2 ĥ+ z) != (a1 + a2) ĥ+ z`.
pub fn non_action_witness(d: usize, bound: i64) -> Result<Option<NonActionWitness>> {
    if d < 2 {
        return Err(WalkError::InvalidDimension(d));
    }
    if bound < 1 {
        return Err(WalkError::Precondition(format!("bound must be >= 1, got {bound}")));
    }
    let points = box_points(d, bound);
    for z in points.iter().filter(|p| p.is_primitive()) {
        for a2 in &points {
            let inner = hat_plus(a2, z)?;
            for a1 in &points {
                let sequential = hat_plus(a1, &inner)?;
                let combined = hat_plus(&a1.checked_add(a2)?, z)?;
                if sequential != combined {
                    return Ok(Some(NonActionWitness {
                        a1: a1.clone(),
                        a2: a2.clone(),
                        z: z.clone(),
                        sequential,
                        combined,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// All points of `[-r, r]^d` in lexicographic order.
pub fn box_points(d: usize, r: i64) -> Vec<LatticePoint> {
    let side = (2 * r + 1) as usize;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur: Coords = SmallVec::from_elem(-r, d);
    for _ in 0..total {
        out.push(LatticePoint(cur.clone()));
        for i in (0..d).rev() {
            if cur[i] < r {
                cur[i] += 1;
                break;
            }
            cur[i] = -r;
        }
    }
    out
}

/// Default cap on candidate multipliers in the `d = 2` prime search.
pub const DEFAULT_PRIME_SEARCH_LIMIT: u64 = 1_000_000;

/// Path of signed basis steps leading from the origin to a primitive `x`
/// under the full-gcd walk, with every intermediate point primitive.
///
/// For `d >= 3` the path passes through points with first coordinate 1 and
/// then slides along `e_1`. If the tail `(x_2, ..., x_d)` is not primitive
/// the path detours through a nearby point whose tail is. For `d = 2` it
/// climbs to `(±1, ±p)` with `p = |x_2| n + 1` prime, slides to
/// `(n x_1, ±p)` and lets the final `∓e_2` step divide by `n`.
pub fn connect_to_zero(x: &LatticePoint, prime_search_limit: u64) -> Result<StepSequence> {
    let d = x.dim();
    if d < 2 {
        return Err(WalkError::InvalidDimension(d));
    }
    if !x.is_primitive() {
        return Err(WalkError::NotPrimitive(x.clone()));
    }
    if x.is_zero() {
        return Ok(StepSequence::default());
    }
    let steps = if d == 2 {
        connect_plane(x, prime_search_limit)?
    } else {
        connect_higher(x)?
    };
    StepSequence::new(steps)
}

fn push_moves(steps: &mut Vec<LatticePoint>, d: usize, axis: usize, delta: i64) {
    let sign = delta.signum();
    for _ in 0..delta.unsigned_abs() {
        steps.push(LatticePoint::unit(d, axis, sign));
    }
}

fn tail_is_primitive(c: &[i64]) -> bool {
    gcd_slice(&c[1..]) == 1
}

/// Route for `d >= 3` to a point whose tail is primitive.
fn route_primitive_tail(y: &[i64]) -> Vec<LatticePoint> {
    let d = y.len();
    let mut steps = vec![LatticePoint::unit(d, 0, 1)];
    for (axis, &c) in y.iter().enumerate().skip(1) {
        push_moves(&mut steps, d, axis, c);
    }
    push_moves(&mut steps, d, 0, y[0] - 1);
    steps
}

const DETOUR_LIMIT: i64 = 100_000;

fn connect_higher(x: &LatticePoint) -> Result<Vec<LatticePoint>> {
    let c = x.coords();
    if c[0].abs() == 1 {
        let d = c.len();
        let mut steps = vec![LatticePoint::unit(d, 0, c[0])];
        for (axis, &v) in c.iter().enumerate().skip(1) {
            push_moves(&mut steps, d, axis, v);
        }
        return Ok(steps);
    }
    if tail_is_primitive(c) {
        return Ok(route_primitive_tail(c));
    }
    let d = c.len();
    // Shortest detour x + sign*t*e_axis with primitive tail, whose way back
    // to x only crosses primitive points.
    let mut alive: Vec<(usize, i64)> = (1..d).flat_map(|a| [(a, 1), (a, -1)]).collect();
    for t in 1..=DETOUR_LIMIT {
        let mut next_alive = Vec::with_capacity(alive.len());
        for &(axis, sign) in &alive {
            let mut y: Coords = SmallVec::from_slice(c);
            y[axis] = y[axis].checked_add(sign * t).ok_or(WalkError::Overflow)?;
            if tail_is_primitive(&y) {
                let mut steps = route_primitive_tail(&y);
                push_moves(&mut steps, d, axis, -sign * t);
                return Ok(steps);
            }
            if gcd_slice(&y) == 1 {
                next_alive.push((axis, sign));
            }
        }
        if next_alive.is_empty() {
            break;
        }
        alive = next_alive;
    }
    Err(WalkError::SearchCap(format!("no primitive detour found for {x}")))
}

fn connect_plane(x: &LatticePoint, limit: u64) -> Result<Vec<LatticePoint>> {
    let c = x.coords();
    // Orient so that |u| <= |v|; then n|u| < p and the slide at height p
    // never meets a multiple of p.
    let (u_axis, v_axis) = if c[0].unsigned_abs() <= c[1].unsigned_abs() { (0, 1) } else { (1, 0) };
    let (u, v) = (c[u_axis], c[v_axis]);
    if u == 0 {
        return Ok(vec![LatticePoint::unit(2, v_axis, v.signum())]);
    }
    let (su, sv) = (u.signum(), v.signum());
    let av = v.unsigned_abs();
    let au = u.unsigned_abs();
    for n in 1..=limit {
        let p = av.checked_mul(n).and_then(|m| m.checked_add(1)).ok_or(WalkError::Overflow)?;
        if !is_prime(p) {
            continue;
        }
        let p = i64::try_from(p).map_err(|_| WalkError::Overflow)?;
        let slide = i64::try_from(au * n).map_err(|_| WalkError::Overflow)?;
        let mut steps = vec![LatticePoint::unit(2, u_axis, su)];
        push_moves(&mut steps, 2, v_axis, sv * p);
        push_moves(&mut steps, 2, u_axis, su * (slide - 1));
        steps.push(LatticePoint::unit(2, v_axis, -sv));
        return Ok(steps);
    }
    Err(WalkError::SearchCap(format!(
        "no prime of the form {av}n+1 with n <= {limit}"
    )))
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(p(&[4, 6]).gcd(), 2);
        assert_eq!(p(&[0, 0, 0]).gcd(), 1);
        assert_eq!(p(&[0, -5]).gcd(), 5);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(p(&[4, 6]).normalize(), p(&[2, 3]));
        assert_eq!(p(&[0, 0]).normalize(), p(&[0, 0]));
        assert_eq!(p(&[7, -7, 7]).normalize(), p(&[1, -1, 1]));
    }

    #[test]
    fn normalize_extreme_values() {
        assert_eq!(p(&[i64::MIN, 0]).normalize(), p(&[-1, 0]));
        assert_eq!(p(&[i64::MIN, i64::MIN]).normalize(), p(&[-1, -1]));
    }

    #[test]
    fn hat_plus_examples() {
        assert_eq!(hat_plus(&p(&[1, 1]), &p(&[1, 1])).unwrap(), p(&[1, 1]));
        assert_eq!(hat_plus(&p(&[-1, -1]), &p(&[1, 1])).unwrap(), p(&[0, 0]));
        assert_eq!(hat_plus(&p(&[3, 5]), &p(&[1, 1])).unwrap(), p(&[2, 3]));
    }

    #[test]
    fn hat_plus_errors() {
        assert_eq!(
            hat_plus(&p(&[1, 1, 0]), &p(&[1, 1])),
            Err(WalkError::DimensionMismatch { expected: 2, got: 3 })
        );
        assert!(matches!(hat_plus(&p(&[1, 0]), &p(&[2, 2])), Err(WalkError::NotPrimitive(_))));
        assert_eq!(hat_plus(&p(&[i64::MAX, 0]), &p(&[1, 0])), Err(WalkError::Overflow));
    }

    #[test]
    fn hat_plus_k_examples() {
        assert_eq!(hat_plus_k(&p(&[1, 1]), &p(&[1, 1]), 2).unwrap(), (p(&[1, 1]), 1));
        assert_eq!(hat_plus_k(&p(&[1, 2]), &p(&[1, 1]), 2).unwrap(), (p(&[2, 3]), 0));
        assert_eq!(hat_plus_k(&p(&[3, 3]), &p(&[1, 1]), 2).unwrap(), (p(&[1, 1]), 2));
        assert_eq!(hat_plus_k(&p(&[-1, -1]), &p(&[1, 1]), 2).unwrap(), (p(&[0, 0]), 0));
    }

    #[test]
    fn hat_plus_k_errors() {
        assert!(matches!(hat_plus_k(&p(&[1, 0]), &p(&[2, 4]), 2), Err(WalkError::NotCoprime { .. })));
        assert_eq!(hat_plus_k(&p(&[1, 0]), &p(&[1, 0]), 1), Err(WalkError::InvalidModulus(1)));
        assert!(WalkMode::coprime_to(0).is_err());
        assert!(WalkMode::coprime_to(1).is_err());
    }

    #[test]
    fn step_examples() {
        assert_eq!(step(WalkMode::FullGcd, &p(&[1, 1]), &p(&[1, 1])).unwrap(), p(&[1, 1]));
        assert_eq!(step(WalkMode::CoprimeTo(2), &p(&[1, 3]), &p(&[1, 1])).unwrap(), p(&[1, 2]));
        assert_eq!(step(WalkMode::CoprimeTo(6), &p(&[5, 5]), &p(&[1, 1])).unwrap(), p(&[1, 1]));
    }

    #[test]
    fn primitivity_predicates() {
        assert!(!p(&[2, 4]).is_coprime_to(2));
        assert!(p(&[0, 0]).is_coprime_to(5));
        assert!(p(&[2, 3]).is_primitive());
        assert!(p(&[6, 9]).is_coprime_to(2));
    }

    #[test]
    fn witness_from_known_triple() {
        let w = NonActionWitness::evaluate(&p(&[0, 1]), &p(&[1, 1]), &p(&[1, 1])).unwrap();
        assert_eq!(w.sequential, p(&[1, 2]));
        assert_eq!(w.combined, p(&[2, 3]));
        assert!(w.verify());
    }

    #[test]
    fn witness_search_finds_verified_triple() {
        let w = non_action_witness(2, 1).unwrap().expect("witness");
        assert!(w.verify());
        assert_ne!(w.sequential, w.combined);
        // zero steps never witness anything
        let z = p(&[1, 1]);
        let same = NonActionWitness::evaluate(&p(&[0, 0]), &p(&[0, 0]), &z).unwrap();
        assert!(!same.verify());
    }

    #[test]
    fn connect_examples() {
        let e1 = LatticePoint::unit(2, 0, 1);
        let path = connect_to_zero(&p(&[1, 0]), DEFAULT_PRIME_SEARCH_LIMIT).unwrap();
        assert_eq!(path.steps, vec![e1.clone()]);

        let path = connect_to_zero(&p(&[2, 3]), DEFAULT_PRIME_SEARCH_LIMIT).unwrap();
        let visited = path.replay(WalkMode::FullGcd, &LatticePoint::zero(2)).unwrap();
        let expected_prefix: Vec<_> = std::iter::once(p(&[1, 0]))
            .chain((1..=7).map(|j| p(&[1, j])))
            .chain((2..=4).map(|i| p(&[i, 7])))
            .collect();
        assert_eq!(&visited[..expected_prefix.len()], &expected_prefix[..]);
        assert_eq!(visited.len(), expected_prefix.len() + 1);
        assert_eq!(visited.last().unwrap(), &p(&[2, 3]));

        let path = connect_to_zero(&p(&[1, 4, 6]), DEFAULT_PRIME_SEARCH_LIMIT).unwrap();
        assert_eq!(path.len(), 11);
        let visited = path.replay(WalkMode::FullGcd, &LatticePoint::zero(3)).unwrap();
        assert!(visited.iter().all(|v| v.coords()[0] == 1));
        assert_eq!(visited.last().unwrap(), &p(&[1, 4, 6]));
    }

    #[test]
    fn connect_handles_non_primitive_tail() {
        // gcd(2, 6) = 2 and gcd(3, 6) = 3: the single +e_2 detour is not enough.
        for target in [p(&[1, 2, 6]), p(&[5, 6, 10]), p(&[-3, 4, 8, 12]), p(&[-1, 0, 0])] {
            let path = connect_to_zero(&target, DEFAULT_PRIME_SEARCH_LIMIT).unwrap();
            let visited = path.replay(WalkMode::FullGcd, &LatticePoint::zero(target.dim())).unwrap();
            assert_eq!(visited.last().unwrap(), &target);
            assert!(visited.iter().all(|v| v.is_primitive()));
        }
    }

    #[test]
    fn connect_plane_negative_and_wide() {
        for target in [p(&[-2, 3]), p(&[10, 1]), p(&[-7, -4]), p(&[0, -1]), p(&[5, -12])] {
            let path = connect_to_zero(&target, DEFAULT_PRIME_SEARCH_LIMIT).unwrap();
            let mut pos = LatticePoint::zero(2);
            let n = path.len();
            for (i, s) in path.steps.iter().enumerate() {
                let sum = pos.checked_add(s).unwrap();
                if i + 1 < n {
                    assert!(sum.is_primitive(), "division mid-path at {sum} for {target}");
                }
                pos = hat_plus(s, &pos).unwrap();
            }
            assert_eq!(pos, target);
        }
    }

    #[test]
    fn connect_rejects_bad_input() {
        assert!(matches!(
            connect_to_zero(&p(&[2, 4]), DEFAULT_PRIME_SEARCH_LIMIT),
            Err(WalkError::NotPrimitive(_))
        ));
        assert!(matches!(connect_to_zero(&p(&[2, 3]), 1), Err(WalkError::SearchCap(_))));
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn parse_points() {
        assert_eq!("2,3".parse::<LatticePoint>().unwrap(), p(&[2, 3]));
        assert_eq!("(1, -4, 6)".parse::<LatticePoint>().unwrap(), p(&[1, -4, 6]));
        assert!(matches!("5".parse::<LatticePoint>(), Err(WalkError::InvalidDimension(1))));
        assert!("1,x".parse::<LatticePoint>().is_err());
    }

    #[test]
    fn box_enumeration() {
        let pts = box_points(2, 1);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], p(&[-1, -1]));
        assert_eq!(pts[8], p(&[1, 1]));
    }
}
