//! Flag sets of the subcommands. Every field is optional so that flags can
//! be layered over a config file; defaults are applied by the commands.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use primwalk::measure::{named, MeasureSpec};
use primwalk::oracle::BoundaryPolicy;
use primwalk::{LatticePoint, NormKind, StepDistribution, WalkError, WalkMode};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 0;

fn parse_measure(s: &str) -> Result<MeasureSpec, String> {
    Ok(MeasureSpec::Named(s.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Divide by the gcd
    Full,
    /// Divide by the largest power of --k
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorArg {
    Pooled,
    Occupation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryArg {
    Reflecting,
    Substochastic,
}

impl From<BoundaryArg> for BoundaryPolicy {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Reflecting => BoundaryPolicy::Reflecting,
            BoundaryArg::Substochastic => BoundaryPolicy::Substochastic,
        }
    }
}

/// Points separated by `;`, e.g. `"100,1,0;1000,1,0"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointList(pub Vec<LatticePoint>);

impl FromStr for PointList {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, WalkError> {
        s.split(';')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(PointList)
    }
}

/// `all`, or a list of primitive base points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConeArg {
    Name(String),
    Points(PointList),
}

impl FromStr for ConeArg {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self, WalkError> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(ConeArg::Name("all".into()))
        } else {
            s.parse().map(ConeArg::Points)
        }
    }
}

/// Measure, mode and start point shared by the walking commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct WalkSel {
    /// Step distribution: eta1, eta2, eta3 or nu (inline tables via --config)
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureSpec>,
    /// Dimension of nu [default: 2]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Normalization [default: full]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Modulus for --mode k
    #[arg(long)]
    pub k: Option<u64>,
    /// Start point, e.g. "1,0,0" [default: e_1]
    #[arg(long)]
    pub z0: Option<LatticePoint>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Norm: l1, l2 or linf [default: l2]
    #[arg(long)]
    pub norm: Option<NormKind>,
}

impl WalkSel {
    pub fn measure(&self) -> Result<StepDistribution, CliError> {
        let spec = self
            .measure
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing --measure".into()))?;
        Ok(spec.build(self.dim)?)
    }

    pub fn mode(&self) -> Result<WalkMode, CliError> {
        build_mode(self.mode, self.k)
    }

    pub fn z0_or_unit(&self, d: usize) -> LatticePoint {
        self.z0.clone().unwrap_or_else(|| LatticePoint::unit(d, 0, 1))
    }

    pub fn z0_or_origin(&self, d: usize) -> LatticePoint {
        self.z0.clone().unwrap_or_else(|| LatticePoint::zero(d))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn norm(&self) -> NormKind {
        self.norm.unwrap_or_default()
    }
}

pub fn build_mode(mode: Option<ModeArg>, k: Option<u64>) -> Result<WalkMode, CliError> {
    match mode.unwrap_or(ModeArg::Full) {
        ModeArg::Full => {
            if k.is_some() {
                return Err(CliError::Validation("--k is only meaningful with --mode k".into()));
            }
            Ok(WalkMode::FullGcd)
        }
        ModeArg::K => {
            let k = k.ok_or_else(|| CliError::Validation("--mode k needs --k".into()))?;
            Ok(WalkMode::coprime_to(k)?)
        }
    }
}

pub fn named_measure(name: &str) -> Result<StepDistribution, CliError> {
    Ok(named(name, None)?)
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct FigureArgs {
    /// eta1 (Z^4, full), eta2 (Z^6, full) or eta3 (Z^3, k = 2 or 5)
    #[arg(long)]
    pub measure: Option<String>,
    /// Normalization [default: full for eta1/eta2, k for eta3]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Trajectory length [default: 1000000]
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Histogram bin width in norm units [default: 1]
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Window length for the stationarity comparison [default: 100000]
    #[arg(long)]
    pub window: Option<u64>,
    /// Start point [default: e_1]
    #[arg(long)]
    pub z0: Option<LatticePoint>,
    #[arg(long)]
    pub norm: Option<NormKind>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct WalkArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// Trajectory length [default: 1000]
    #[arg(long)]
    pub steps: Option<u64>,
    /// Histogram bin width [default: 1]
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Per-window histograms of this length
    #[arg(long)]
    pub window: Option<u64>,
    /// Cap on distinct points in the occupation map [default: 1000000]
    #[arg(long)]
    pub occupation_cap: Option<usize>,
    /// Also write the occupation map
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub occupation: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct EndpointArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// Walk length n
    #[arg(long)]
    pub steps: Option<u64>,
    /// Independent walks [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CesaroArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// Number n of averaged laws
    #[arg(long)]
    pub steps: Option<u64>,
    /// Independent walks for the pooled estimator [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// pooled or occupation [default: pooled]
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ReturnsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// Excursions [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Censoring cap per excursion [default: 1000000]
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct KacArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// Excursions for the return-time estimate [default: 100000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Length of the occupation path [default: 1000000]
    #[arg(long)]
    pub steps: Option<u64>,
    /// Censoring cap per excursion [default: 1000000]
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct DriftArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// Start points, e.g. "100,1,0;1000,1,0" [default: from --radii]
    #[arg(long)]
    pub starts: Option<PointList>,
    /// Radii r for starts (r,1,0,..) and (1,r,1,..) [default: 100,1000,10000]
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<i64>>,
    /// Step counts [default: 1,2,4,8,16,32]
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    /// Walks per start [default: 2000]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Rows with norm >= this fraction of the largest start norm are fitted [default: 0.05]
    #[arg(long)]
    pub large_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct RecurrenceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sel: WalkSel,
    /// ε in (0, 1) [default: 0.1]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// M' constant; alternatively --drift-report
    #[arg(long)]
    pub m_prime: Option<f64>,
    /// drift JSON output to take M' from
    #[arg(long)]
    pub drift_report: Option<PathBuf>,
    /// Step counts [default: 10,20,50,100,200,500,1000]
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    /// Independent walks [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct TorusEuArgs {
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureSpec>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Torus modulus
    #[arg(long)]
    pub k: Option<u64>,
    /// Walk length [default: covering-word length]
    #[arg(long)]
    pub n: Option<u64>,
    /// Monte Carlo walks [default: 100000]
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Longest covering word searched [default: 64]
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ChernoffArgs {
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureSpec>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Torus modulus
    #[arg(long)]
    pub k: Option<u64>,
    /// Start of the plain walk [default: e_1]
    #[arg(long)]
    pub z0: Option<LatticePoint>,
    /// Step counts [default: 8,16,32,64,128,256]
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    /// ε in (0, 1) [default: 0.5]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Walks per grid point [default: 10000]
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Longest covering word searched [default: 64]
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Walks for the E[U] estimate [default: 10000]
    #[arg(long)]
    pub calibration_trials: Option<u64>,
    /// Also compare with the exact tail at this tiny n
    #[arg(long)]
    pub exact_n: Option<u32>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ChainSel {
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureSpec>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Reference state [default: origin]
    #[arg(long)]
    pub z0: Option<LatticePoint>,
    /// Also write the chain as an adjacency CSV
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub export_chain: Option<bool>,
}

impl ChainSel {
    pub fn walk(&self) -> WalkSel {
        WalkSel {
            measure: self.measure.clone(),
            dim: self.dim,
            mode: self.mode,
            k: self.k,
            z0: self.z0.clone(),
            seed: None,
            norm: None,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OracleStationaryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainSel,
    /// Box radii; several values report the truncation trend [default: 50]
    #[arg(long, value_delimiter = ',')]
    pub radius: Option<Vec<i64>>,
    /// Cesàro stopping tolerance on ‖πP − π‖_TV [default: 0.001]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Refine by lazy power iteration down to this residual
    #[arg(long)]
    pub refine_tol: Option<f64>,
    /// Iteration cap [default: 10000000]
    #[arg(long)]
    pub max_iters: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OracleReturnsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainSel,
    /// Box radius [default: 50]
    #[arg(long)]
    pub radius: Option<i64>,
    /// Iteration cap [default: 10000000]
    #[arg(long)]
    pub max_iters: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct OracleSccArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chain: ChainSel,
    /// Box radius [default: 10]
    #[arg(long)]
    pub radius: Option<i64>,
    /// reflecting or substochastic [default: reflecting]
    #[arg(long, value_enum)]
    pub boundary: Option<BoundaryArg>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ConeCheckArgs {
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureSpec>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Modulus of the coprime walk
    #[arg(long)]
    pub k: Option<u64>,
    /// Start point [default: e_1]
    #[arg(long)]
    pub z0: Option<LatticePoint>,
    /// Walk length n
    #[arg(long)]
    pub steps: Option<u64>,
    /// Cone base: "all" or points such as "1,2;1,0"
    #[arg(long)]
    pub cone: Option<ConeArg>,
    /// Also check this many random bases drawn from a small box
    #[arg(long)]
    pub random_cones: Option<u64>,
    /// Size of each random base [default: 3]
    #[arg(long)]
    pub cone_size: Option<usize>,
    /// L∞ radius the random base points come from [default: 3]
    #[arg(long)]
    pub cone_radius: Option<i64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct CheckMeasureArgs {
    #[arg(long, value_parser = parse_measure)]
    pub measure: Option<MeasureSpec>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Also check that the support reaches every class mod k
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub norm: Option<NormKind>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
pub struct ConnectArgs {
    /// Primitive target, e.g. "2,3"
    #[arg(long)]
    pub target: Option<LatticePoint>,
    /// Cap on multipliers tried in the d = 2 prime search [default: 1000000]
    #[arg(long)]
    pub prime_limit: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_lists_and_cones_parse() {
        let l: PointList = "100,1,0; 1000,1,0".parse().unwrap();
        assert_eq!(l.0.len(), 2);
        assert_eq!("ALL".parse::<ConeArg>().unwrap(), ConeArg::Name("all".into()));
        assert!(matches!("1,2;1,0".parse::<ConeArg>().unwrap(), ConeArg::Points(p) if p.0.len() == 2));
    }

    #[test]
    fn mode_needs_k() {
        assert!(build_mode(Some(ModeArg::K), None).is_err());
        assert!(build_mode(Some(ModeArg::Full), Some(2)).is_err());
        assert_eq!(build_mode(None, None).unwrap(), WalkMode::FullGcd);
        assert_eq!(build_mode(Some(ModeArg::K), Some(5)).unwrap(), WalkMode::CoprimeTo(5));
    }
}
