use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};
use crate::lattice::{box_points, check_dims, step, LatticePoint, WalkMode};
use crate::measure::StepDistribution;

/// Default cap on the number of states of a truncated chain.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

/// What happens to mass that would leave the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Escaping mass is dropped; rows sum to at most 1.
    Substochastic,
    /// Escaping mass stays put; rows sum to exactly 1.
    Reflecting,
}

impl std::str::FromStr for BoundaryPolicy {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "substochastic" => Ok(BoundaryPolicy::Substochastic),
            "reflecting" => Ok(BoundaryPolicy::Reflecting),
            _ => Err(WalkError::InvalidConfig(format!(
                "unknown boundary policy {s:?} (expected substochastic or reflecting)"
            ))),
        }
    }
}

/// The walk restricted to the mode-valid points of the box `‖x‖_∞ <= R`.
/// Transition probabilities are `weight / denominator` with `denominator`
/// the step distribution's.
#[derive(Debug, Clone)]
pub struct TruncatedChain {
    pub radius: i64,
    pub mode: WalkMode,
    pub boundary: BoundaryPolicy,
    pub denominator: u64,
    states: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
    rows: Vec<Vec<(usize, u64)>>,
    escaped: Vec<u64>,
}

impl TruncatedChain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[LatticePoint] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &LatticePoint {
        &self.states[i]
    }

    pub fn index_of(&self, z: &LatticePoint) -> Option<usize> {
        self.index.get(z).copied()
    }

    /// `(target, weight)` pairs of row `i`, sorted by target.
    pub fn row(&self, i: usize) -> &[(usize, u64)] {
        &self.rows[i]
    }

    pub fn transition(&self, i: usize, j: usize) -> BigRational {
        let w = self.rows[i]
            .binary_search_by_key(&j, |&(t, _)| t)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0);
        self.ratio(w)
    }

    pub fn row_sum(&self, i: usize) -> BigRational {
        self.ratio(self.rows[i].iter().map(|&(_, w)| w).sum())
    }

    /// Mass leaving the box from state `i`; under `Reflecting` it sits on
    /// the self-loop, under `Substochastic` it is the row deficit.
    pub fn escaped(&self, i: usize) -> BigRational {
        self.ratio(self.escaped[i])
    }

    pub fn escaped_weight(&self, i: usize) -> u64 {
        self.escaped[i]
    }

    fn ratio(&self, w: u64) -> BigRational {
        BigRational::new(BigInt::from(w), BigInt::from(self.denominator))
    }

    /// `out = v P` in floating point.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let den = self.denominator as f64;
        for (i, row) in self.rows.iter().enumerate() {
            let m = v[i];
            if m == 0.0 {
                continue;
            }
            for &(j, w) in row {
                out[j] += m * w as f64 / den;
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

pub fn build_truncated_chain(
    mu: &StepDistribution,
    mode: WalkMode,
    radius: i64,
    boundary: BoundaryPolicy,
) -> Result<TruncatedChain> {
    build_truncated_chain_capped(mu, mode, radius, boundary, DEFAULT_STATE_CAP)
}

pub fn build_truncated_chain_capped(
    mu: &StepDistribution,
    mode: WalkMode,
    radius: i64,
    boundary: BoundaryPolicy,
    cap: usize,
) -> Result<TruncatedChain> {
    if radius < 0 {
        return Err(WalkError::InvalidConfig(format!("radius must be >= 0, got {radius}")));
    }
    if let WalkMode::CoprimeTo(k) = mode {
        if k < 2 {
            return Err(WalkError::InvalidModulus(k));
        }
    }
    let d = mu.dim();
    check_dims(d, mu.dim())?;
    let side = (2 * radius + 1) as f64;
    if side.powi(d as i32) > cap as f64 {
        return Err(WalkError::SizeCap(format!(
            "box of radius {radius} in dimension {d} has more than {cap} points"
        )));
    }
    let states: Vec<LatticePoint> = box_points(d, radius).into_iter().filter(|z| mode.admits(z)).collect();
    let index: HashMap<LatticePoint, usize> = states.iter().cloned().enumerate().map(|(i, z)| (z, i)).collect();
    let mut rows = Vec::with_capacity(states.len());
    let mut escaped = Vec::with_capacity(states.len());
    for (i, z) in states.iter().enumerate() {
        let mut row: Vec<(usize, u64)> = Vec::with_capacity(mu.len() + 1);
        let mut out = 0;
        for (a, w) in mu.iter() {
            let x = step(mode, a, z)?;
            match index.get(&x) {
                Some(&j) => row.push((j, w)),
                None => out += w,
            }
        }
        if boundary == BoundaryPolicy::Reflecting && out > 0 {
            row.push((i, out));
        }
        row.sort_unstable_by_key(|&(j, _)| j);
        row.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        rows.push(row);
        escaped.push(out);
    }
    Ok(TruncatedChain {
        radius,
        mode,
        boundary,
        denominator: mu.denominator(),
        states,
        index,
        rows,
        escaped,
    })
}

/// Strongly connected components of the positive-transition graph.
///
/// Box points whose only predecessors lie outside the box form their own
/// transient components, so a truncated chain can be reducible even when
/// the infinite chain is not. The report therefore also describes the part
/// of the chain reachable from the origin.
#[derive(Debug, Clone, Serialize)]
pub struct SccReport {
    pub states: usize,
    /// All states of the box lie in one component.
    pub irreducible: bool,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
    /// Components with no edge leaving them.
    pub closed_components: usize,
    /// States reachable from the origin.
    pub reachable_from_origin: usize,
    /// Size of the component containing the origin.
    pub origin_component_size: usize,
    /// Component id of every state, in chain order; ids index `component_sizes`.
    #[serde(skip)]
    pub component_of: Vec<usize>,
}

impl SccReport {
    pub fn same_component(&self, chain: &TruncatedChain, a: &LatticePoint, b: &LatticePoint) -> bool {
        match (chain.index_of(a), chain.index_of(b)) {
            (Some(i), Some(j)) => self.component_of[i] == self.component_of[j],
            _ => false,
        }
    }

    pub fn verdict(&self) -> &'static str {
        if self.irreducible {
            "irreducible-within-truncation"
        } else {
            "reducible"
        }
    }

    /// The states reachable from the origin form a single component.
    pub fn origin_class_irreducible(&self) -> bool {
        self.origin_component_size > 0 && self.origin_component_size == self.reachable_from_origin
    }
}

pub fn irreducibility_scc(chain: &TruncatedChain) -> SccReport {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(chain.len(), chain.edge_count());
    let nodes: Vec<_> = (0..chain.len()).map(|_| g.add_node(())).collect();
    for i in 0..chain.len() {
        for &(j, w) in chain.row(i) {
            if w > 0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut comps = tarjan_scc(&g);
    comps.sort_by(|a, b| {
        let min = |c: &Vec<petgraph::graph::NodeIndex>| c.iter().map(|n| n.index()).min().unwrap_or(0);
        b.len().cmp(&a.len()).then(min(a).cmp(&min(b)))
    });
    let mut component_of = vec![0; chain.len()];
    for (c, comp) in comps.iter().enumerate() {
        for n in comp {
            component_of[n.index()] = c;
        }
    }
    let mut open = vec![false; comps.len()];
    for i in 0..chain.len() {
        if chain.row(i).iter().any(|&(j, _)| component_of[j] != component_of[i]) {
            open[component_of[i]] = true;
        }
    }
    let origin = chain.index_of(&LatticePoint::zero(chain.states.first().map_or(2, LatticePoint::dim)));
    let reachable = origin.map_or(0, |o| {
        let mut seen = vec![false; chain.len()];
        let mut stack = vec![o];
        seen[o] = true;
        let mut count = 0;
        while let Some(i) = stack.pop() {
            count += 1;
            for &(j, _) in chain.row(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        count
    });
    SccReport {
        states: chain.len(),
        irreducible: comps.len() <= 1,
        component_sizes: comps.iter().map(Vec::len).collect(),
        closed_components: open.iter().filter(|o| !**o).count(),
        reachable_from_origin: reachable,
        origin_component_size: origin.map_or(0, |o| comps[component_of[o]].len()),
        component_of,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::connect_to_zero;
    use crate::measure::nu;
    use num_traits::{One, Zero};

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn unit_box_has_nine_states() {
        let c = build_truncated_chain(&nu(2).unwrap(), WalkMode::FullGcd, 1, BoundaryPolicy::Reflecting).unwrap();
        assert_eq!(c.len(), 9);
        for i in 0..c.len() {
            assert_eq!(c.row_sum(i), BigRational::one());
        }
    }

    #[test]
    fn substochastic_deficit_only_near_boundary() {
        let c = build_truncated_chain(&nu(2).unwrap(), WalkMode::FullGcd, 5, BoundaryPolicy::Substochastic).unwrap();
        for i in 0..c.len() {
            let z = c.state(i);
            assert_eq!(c.row_sum(i) + c.escaped(i), BigRational::one());
            if z.norm(crate::lattice::NormKind::LInf) < 5.0 {
                assert!(c.escaped(i).is_zero(), "{z}");
            }
        }
        let edge = c.index_of(&p(&[5, 1])).unwrap();
        assert!(!c.escaped(edge).is_zero());
    }

    #[test]
    fn nu_chain_is_irreducible() {
        let c = build_truncated_chain(&nu(2).unwrap(), WalkMode::FullGcd, 10, BoundaryPolicy::Reflecting).unwrap();
        let scc = irreducibility_scc(&c);
        // (7, 8) can only be entered from outside the box
        assert!(!scc.irreducible);
        assert_eq!(scc.closed_components, 1);
        assert!(scc.origin_class_irreducible());
        assert!(!scc.same_component(&c, &p(&[7, 8]), &p(&[0, 0])));
        let zero = p(&[0, 0]);
        for x in [p(&[3, 5]), p(&[-7, 2]), p(&[1, -9])] {
            let path = connect_to_zero(&x, 1000).unwrap();
            let visited = path.replay(WalkMode::FullGcd, &zero).unwrap();
            if visited.iter().all(|v| c.index_of(v).is_some()) {
                assert!(visited.iter().all(|v| scc.same_component(&c, v, &zero)));
            }
        }
    }

    #[test]
    fn single_direction_is_reducible() {
        let mu = StepDistribution::dirac(p(&[1, 0]));
        let c = build_truncated_chain(&mu, WalkMode::FullGcd, 3, BoundaryPolicy::Reflecting).unwrap();
        let scc = irreducibility_scc(&c);
        assert!(!scc.irreducible);
        assert!(scc.component_sizes.len() > 1);
    }

    #[test]
    fn coprime_states_and_caps() {
        let c = build_truncated_chain(&nu(2).unwrap(), WalkMode::CoprimeTo(2), 2, BoundaryPolicy::Reflecting).unwrap();
        assert!(c.states().iter().all(|z| z.is_coprime_to(2)));
        assert_eq!(c.len(), 25 - 8);
        let r = build_truncated_chain_capped(&nu(3).unwrap(), WalkMode::FullGcd, 10, BoundaryPolicy::Reflecting, 1000);
        assert!(matches!(r, Err(WalkError::SizeCap(_))));
    }
}
