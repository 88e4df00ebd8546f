use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use primwalk::engine::{
    cesaro_distribution, default_starts, drift_estimate, endpoint_distribution, estimate_return_time, kac_check,
    recurrence_mass, run_walk, CesaroEstimator, DriftConfig, EmpiricalDistribution, Histogram, WalkConfig,
};
use primwalk::lattice::{connect_to_zero, gcd_u64, DEFAULT_PRIME_SEARCH_LIMIT};
use primwalk::measure::MeasureSpec;
use primwalk::oracle::{
    build_truncated_chain, cone_monotonicity_check, exact_kac, irreducibility_scc, refine_stationary,
    stationary_cesaro, BoundaryPolicy, ConeBase, TruncatedChain,
};
use primwalk::stats::binomial_sigma;
use primwalk::stream::RandomStream;
use primwalk::torus::{
    calibrate, chernoff_experiment, chernoff_threshold, estimate_eu, exact_eu, exact_hit_count_law, find_covering_word,
};
use primwalk::{LatticePoint, StepDistribution, WalkMode};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::config::echo;
use crate::output::{cols, coord_columns, Run};
use crate::{CliError, Ctx};

type Out = Result<Vec<std::path::PathBuf>, CliError>;

/// Lane for drawing random cone bases.
const CONE_LANE: u64 = 64;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn run<T: Serialize>(ctx: &Ctx, command: &str, stem: String, seed: Option<u64>, config: &T) -> Run {
    Run::new(ctx.out.clone(), command, stem, seed, echo(config), ctx.threads)
}

fn coords(z: &LatticePoint) -> Vec<String> {
    z.coords().iter().map(i64::to_string).collect()
}

fn f(x: f64) -> String {
    format!("{x:e}")
}

fn histogram_rows(h: &Histogram) -> Vec<Vec<String>> {
    h.rows().map(|(lo, hi, c)| vec![lo.to_string(), hi.to_string(), c.to_string()]).collect()
}

fn walk_config(sel: &WalkSel, mu: &StepDistribution, ctx: &Ctx) -> Result<WalkConfig, CliError> {
    let cfg = WalkConfig::new(sel.mode()?, sel.z0_or_unit(mu.dim()))
        .with_seed(sel.seed())
        .with_norm(sel.norm())
        .with_parallelism(ctx.par);
    Ok(cfg)
}

fn mode_tag(mode: WalkMode) -> String {
    match mode {
        WalkMode::FullGcd => "full".into(),
        WalkMode::CoprimeTo(k) => format!("k{k}"),
    }
}

/// Total-variation distances between consecutive full windows.
#[derive(Serialize)]
struct WindowSummary {
    window: u64,
    totals: Vec<u64>,
    consecutive_tv: Vec<f64>,
    /// TV between the last two full windows.
    last_pair_tv: Option<f64>,
}

fn window_summary(window: u64, windows: &[Histogram]) -> WindowSummary {
    let full: Vec<&Histogram> = windows.iter().filter(|h| h.total == window).collect();
    let consecutive_tv: Vec<f64> = full.windows(2).map(|w| w[0].tv_distance(w[1])).collect();
    WindowSummary {
        window,
        totals: windows.iter().map(|h| h.total).collect(),
        last_pair_tv: consecutive_tv.last().copied(),
        consecutive_tv,
    }
}

pub fn figure(a: FigureArgs, ctx: &Ctx) -> Out {
    let name = a.measure.clone().ok_or_else(|| invalid("missing --measure"))?;
    let mu = named_measure(&name)?;
    let default_mode = match name.as_str() {
        "eta1" | "eta2" => ModeArg::Full,
        "eta3" => ModeArg::K,
        other => return Err(invalid(format!("figure panels use eta1, eta2 or eta3, not {other}"))),
    };
    let mode = build_mode(Some(a.mode.unwrap_or(default_mode)), a.k)?;
    match (name.as_str(), mode) {
        ("eta1" | "eta2", WalkMode::FullGcd) => {}
        ("eta3", WalkMode::CoprimeTo(2 | 5)) => {}
        _ => {
            return Err(invalid(format!(
                "figure panels are eta1/eta2 with --mode full and eta3 with --mode k --k 2 or 5; got {name} with {mode}"
            )))
        }
    }
    let window = a.window.unwrap_or(100_000);
    let mut cfg = WalkConfig::new(mode, a.z0.clone().unwrap_or_else(|| LatticePoint::unit(mu.dim(), 0, 1)))
        .with_steps(a.steps.unwrap_or(1_000_000))
        .with_seed(a.seed.unwrap_or(DEFAULT_SEED))
        .with_norm(a.norm.unwrap_or_default())
        .with_window(window);
    cfg.bin_width = a.bin_width.unwrap_or(1.0);
    cfg.validate(&mu)?;
    let stats = run_walk(&mu, &cfg)?;

    let stem = format!("figure_{name}_{}", mode_tag(mode));
    let mut out = run(ctx, "figure", stem.clone(), Some(cfg.seed), &a);
    out.csv(&format!("{stem}.csv"), &cols(&["norm_bin_lo", "norm_bin_hi", "count"]), histogram_rows(&stats.histogram))?;
    let summary = json!({
        "measure": name,
        "mode": mode.to_string(),
        "steps": stats.steps,
        "start": cfg.z0,
        "norm": cfg.norm,
        "bin_width": cfg.bin_width,
        "max_norm": stats.max_norm,
        "division_events": stats.division_events,
        "final_state": stats.final_state,
        "windows": window_summary(window, &stats.windows),
    });
    out.json(&format!("{stem}_summary.json"), &summary)?;
    out.finish()
}

pub fn walk(a: WalkArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let mut cfg = walk_config(&a.sel, &mu, ctx)?.with_steps(a.steps.unwrap_or(1000));
    cfg.bin_width = a.bin_width.unwrap_or(1.0);
    cfg.window = a.window;
    if let Some(cap) = a.occupation_cap {
        cfg.occupation_cap = cap;
    }
    cfg.validate(&mu)?;
    let stats = run_walk(&mu, &cfg)?;

    let mut out = run(ctx, "walk", "walk".into(), Some(cfg.seed), &a);
    out.csv("walk_histogram.csv", &cols(&["norm_bin_lo", "norm_bin_hi", "count"]), histogram_rows(&stats.histogram))?;
    let summary = json!({
        "steps": stats.steps,
        "division_events": stats.division_events,
        "division_factors": stats.division_factors,
        "max_norm": stats.max_norm,
        "final_state": stats.final_state,
        "distinct_points": stats.occupation.len(),
        "occupation_overflow": stats.occupation_overflow,
        "windows": cfg.window.map(|w| window_summary(w, &stats.windows)),
    });
    out.json("walk_summary.json", &summary)?;
    if a.occupation.unwrap_or(false) {
        let mut columns = coord_columns(mu.dim());
        columns.push("visits".into());
        let rows = stats.occupation.iter().map(|(z, c)| {
            let mut r = coords(z);
            r.push(c.to_string());
            r
        });
        out.csv("walk_occupation.csv", &columns, rows)?;
    }
    out.finish()
}

fn distribution_rows(d: &EmpiricalDistribution) -> Vec<Vec<String>> {
    d.probabilities()
        .map(|(z, p)| {
            let mut r = coords(z);
            r.push(f(p));
            r
        })
        .collect()
}

pub fn endpoint(a: EndpointArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let n = a.steps.ok_or_else(|| invalid("missing --steps"))?;
    let cfg = walk_config(&a.sel, &mu, ctx)?.with_trials(a.trials.unwrap_or(10_000));
    cfg.validate(&mu)?;
    let d = endpoint_distribution(&mu, &cfg, n)?;
    let mut out = run(ctx, "endpoint", "endpoint".into(), Some(cfg.seed), &a);
    let mut columns = coord_columns(mu.dim());
    columns.push("probability".into());
    out.csv("endpoint.csv", &columns, distribution_rows(&d))?;
    out.finish()
}

pub fn cesaro(a: CesaroArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let n = a.steps.ok_or_else(|| invalid("missing --steps"))?;
    if n == 0 {
        return Err(invalid("the Cesàro average needs --steps >= 1"));
    }
    let cfg = walk_config(&a.sel, &mu, ctx)?.with_trials(a.trials.unwrap_or(10_000));
    cfg.validate(&mu)?;
    let estimator = match a.estimator.unwrap_or(EstimatorArg::Pooled) {
        EstimatorArg::Pooled => CesaroEstimator::Pooled,
        EstimatorArg::Occupation => CesaroEstimator::Occupation,
    };
    let d = cesaro_distribution(&mu, &cfg, n, estimator)?;
    let mut out = run(ctx, "cesaro", "cesaro".into(), Some(cfg.seed), &a);
    let mut columns = coord_columns(mu.dim());
    columns.push("probability".into());
    out.csv("cesaro.csv", &columns, distribution_rows(&d))?;
    out.finish()
}

pub fn returns(a: ReturnsArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let cfg = walk_config(&a.sel, &mu, ctx)?.with_trials(a.trials.unwrap_or(10_000));
    cfg.validate(&mu)?;
    let cap = a.cap.unwrap_or(1_000_000);
    let stats = estimate_return_time(&mu, &cfg, cap)?;
    if let Some(w) = &stats.warning {
        eprintln!("warning: {w}");
    }
    let mut out = run(ctx, "returns", "returns".into(), Some(cfg.seed), &a);
    let rows = stats
        .completed_return_times
        .iter()
        .enumerate()
        .map(|(i, t)| vec![i.to_string(), t.to_string()]);
    out.csv("returns.csv", &cols(&["excursion", "length"]), rows)?;
    let summary = json!({
        "start": cfg.z0,
        "excursions": stats.excursions(),
        "completed": stats.completed_return_times.len(),
        "censored": stats.censored,
        "censored_fraction": stats.censored_fraction(),
        "cap": stats.cap,
        "tau_hat": stats.tau_hat,
        "warning": stats.warning,
    });
    out.json("returns.json", &summary)?;
    out.finish()
}

pub fn kac(a: KacArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let cfg = walk_config(&a.sel, &mu, ctx)?
        .with_trials(a.trials.unwrap_or(100_000))
        .with_steps(a.steps.unwrap_or(1_000_000));
    cfg.validate(&mu)?;
    let r = kac_check(&mu, &cfg, a.cap.unwrap_or(1_000_000))?;
    let mut out = run(ctx, "kac", "kac".into(), Some(cfg.seed), &a);
    let summary = json!({
        "start": cfg.z0,
        "occupation": r.occupation,
        "tau": r.tau,
        "ratio": r.ratio,
        "ci_low": r.ci_low,
        "ci_high": r.ci_high,
        "completed_excursions": r.returns.completed_return_times.len(),
        "censored": r.returns.censored,
        "warning": r.returns.warning,
    });
    out.json("kac.json", &summary)?;
    out.finish()
}

pub fn drift(a: DriftArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let mode = a.sel.mode()?;
    let starts = match &a.starts {
        Some(list) => list.0.clone(),
        None => default_starts(mu.dim(), a.radii.as_deref().unwrap_or(&[100, 1000, 10_000])),
    };
    let mut cfg = DriftConfig::new(
        mode,
        starts,
        a.n_grid.clone().unwrap_or_else(|| vec![1, 2, 4, 8, 16, 32]),
        a.trials.unwrap_or(2000),
    );
    cfg.seed = a.sel.seed();
    cfg.norm = a.sel.norm();
    cfg.parallelism = ctx.par;
    if let Some(fr) = a.large_fraction {
        if !(fr > 0.0 && fr <= 1.0) {
            return Err(invalid(format!("--large-fraction must lie in (0, 1], got {fr}")));
        }
        cfg.large_fraction = fr;
    }
    let report = drift_estimate(&mu, &cfg)?;
    let mut out = run(ctx, "drift", "drift".into(), Some(cfg.seed), &a);
    out.json("drift.json", &report)?;
    out.finish()
}

fn m_prime_from(path: &std::path::Path) -> Result<f64, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    v.pointer("/data/m_prime")
        .and_then(serde_json::Value::as_f64)
        .ok_or_else(|| invalid(format!("{} has no finite data.m_prime", path.display())))
}

pub fn recurrence(a: RecurrenceArgs, ctx: &Ctx) -> Out {
    let mu = a.sel.measure()?;
    let m_prime = match (a.m_prime, &a.drift_report) {
        (Some(m), None) => m,
        (None, Some(p)) => m_prime_from(p)?,
        (Some(_), Some(_)) => return Err(invalid("give either --m-prime or --drift-report, not both")),
        (None, None) => return Err(invalid("missing --m-prime (or --drift-report)")),
    };
    let cfg = walk_config(&a.sel, &mu, ctx)?.with_trials(a.trials.unwrap_or(10_000));
    let grid = a.n_grid.clone().unwrap_or_else(|| vec![10, 20, 50, 100, 200, 500, 1000]);
    let report = recurrence_mass(&mu, &cfg, a.epsilon.unwrap_or(0.1), m_prime, &grid)?;
    let mut out = run(ctx, "recurrence", "recurrence".into(), Some(cfg.seed), &a);
    out.json("recurrence.json", &report)?;
    out.finish()
}

fn measure_from(spec: &Option<MeasureSpec>, dim: Option<usize>) -> Result<StepDistribution, CliError> {
    let spec = spec.as_ref().ok_or_else(|| invalid("missing --measure"))?;
    Ok(spec.build(dim)?)
}

/// Exact E[U_n] is computed when the torus and `n` are small.
const EXACT_EU_MAX_N: u64 = 8;
const EXACT_EU_MAX_CLASSES: u64 = 16;

pub fn torus_eu(a: TorusEuArgs, ctx: &Ctx) -> Out {
    let mu = measure_from(&a.measure, a.dim)?;
    let k = a.k.ok_or_else(|| invalid("missing --k"))?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let cal = find_covering_word(&mu, k, a.max_len.unwrap_or(64))?;
    let n = a.n.unwrap_or(cal.n0 as u64);
    let estimate = estimate_eu(&mu, k, n, a.trials.unwrap_or(100_000), seed, ctx.par)?;
    let classes = k.checked_pow(mu.dim() as u32);
    let exact = match classes {
        Some(c) if c <= EXACT_EU_MAX_CLASSES && n <= EXACT_EU_MAX_N => Some(exact_eu(&mu, k, n as u32)?),
        _ => None,
    };
    let mut out = run(ctx, "torus-eu", "torus_eu".into(), Some(seed), &a);
    let summary = json!({
        "k": k,
        "n": n,
        "calibration": cal,
        "estimate": estimate,
        "exact": exact.as_ref().map(|e| format!("{}/{}", e.numer(), e.denom())),
        "exact_value": exact.as_ref().and_then(ToPrimitive::to_f64),
    });
    out.json("torus_eu.json", &summary)?;
    out.finish()
}

pub fn chernoff(a: ChernoffArgs, ctx: &Ctx) -> Out {
    let mu = measure_from(&a.measure, a.dim)?;
    let k = a.k.ok_or_else(|| invalid("missing --k"))?;
    let z = a.z0.clone().unwrap_or_else(|| LatticePoint::unit(mu.dim(), 0, 1));
    let eps = a.epsilon.unwrap_or(0.5);
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("--epsilon must lie in (0, 1), got {eps}")));
    }
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let trials = a.trials.unwrap_or(10_000);
    let grid = a.n_grid.clone().unwrap_or_else(|| vec![8, 16, 32, 64, 128, 256]);
    let cal = calibrate(&mu, k, a.max_len.unwrap_or(64), a.calibration_trials.unwrap_or(10_000), seed, ctx.par)?;
    let rows = chernoff_experiment(&mu, k, &z, &grid, eps, trials, seed, &cal, ctx.par)?;
    let exact = match a.exact_n {
        None => None,
        Some(n) => {
            let alpha = cal.certified_alpha();
            let threshold = chernoff_threshold(alpha, eps, cal.n0, n as u64);
            let law = exact_hit_count_law(&mu, &z, n, k)?;
            let tail: f64 = law
                .iter()
                .filter(|(y, _)| (**y as f64) <= threshold)
                .map(|(_, p)| p.to_f64().unwrap_or(0.0))
                .sum();
            let mc = chernoff_experiment(&mu, k, &z, &[n as u64], eps, trials, seed, &cal, ctx.par)?[0];
            let sigma = binomial_sigma(tail, trials);
            Some(json!({
                "n": n,
                "threshold": threshold,
                "exact_tail": tail,
                "empirical_tail": mc.empirical_tail,
                "sigma": sigma,
                "within_4_sigma": (mc.empirical_tail - tail).abs() <= 4.0 * sigma,
            }))
        }
    };
    let mut out = run(ctx, "chernoff", "chernoff".into(), Some(seed), &a);
    let table = rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            f(r.threshold),
            f(r.empirical_tail),
            f(r.bound),
            r.trials.to_string(),
            r.dominated().to_string(),
        ]
    });
    out.csv(
        "chernoff.csv",
        &cols(&["n", "threshold", "empirical_tail", "bound", "trials", "dominated"]),
        table,
    )?;
    out.json(
        "chernoff.json",
        &json!({
            "k": k,
            "start": z,
            "epsilon": eps,
            "calibration": cal,
            "alpha": cal.certified_alpha(),
            "all_dominated": rows.iter().all(|r| r.dominated()),
            "exact_check": exact,
        }),
    )?;
    out.finish()
}

fn chain_rows(chain: &TruncatedChain) -> Vec<Vec<String>> {
    let mut rows = Vec::with_capacity(chain.edge_count());
    for i in 0..chain.len() {
        for &(j, w) in chain.row(i) {
            let g = gcd_u64(w, chain.denominator).max(1);
            let mut r = vec![i.to_string()];
            r.extend(coords(chain.state(i)));
            r.extend([j.to_string(), (w / g).to_string(), (chain.denominator / g).to_string()]);
            rows.push(r);
        }
    }
    rows
}

fn export_chain(out: &mut Run, chain: &TruncatedChain, d: usize) -> Result<(), CliError> {
    let mut columns = vec!["state_id".to_string()];
    columns.extend(coord_columns(d));
    columns.extend(cols(&["target_id", "prob_num", "prob_den"]));
    let name = format!("{}_chain.csv", out.stem());
    out.csv(&name, &columns, chain_rows(chain))
}

#[derive(Serialize)]
struct StationaryRow {
    radius: i64,
    states: usize,
    pi_z0: f64,
    residual: f64,
    iterations: u64,
}

pub fn oracle_stationary(a: OracleStationaryArgs, ctx: &Ctx) -> Out {
    let sel = a.chain.walk();
    let mu = sel.measure()?;
    let mode = sel.mode()?;
    let z0 = sel.z0_or_origin(mu.dim());
    let mut radii = a.radius.clone().unwrap_or_else(|| vec![50]);
    radii.sort_unstable();
    radii.dedup();
    let tol = a.tol.unwrap_or(1e-3);
    let max_iters = a.max_iters.unwrap_or(10_000_000);
    if !(tol > 0.0) {
        return Err(invalid("--tol must be positive"));
    }
    let mut rows = Vec::new();
    let mut last = None;
    for &r in &radii {
        let chain = build_truncated_chain(&mu, mode, r, BoundaryPolicy::Reflecting)?;
        if chain.index_of(&z0).is_none() {
            return Err(invalid(format!("{z0} is not a state of the box of radius {r}")));
        }
        let mut est = stationary_cesaro(&chain, &z0, max_iters, tol)?;
        if let Some(rt) = a.refine_tol {
            est = refine_stationary(&chain, &est, max_iters, rt)?;
        }
        rows.push(StationaryRow {
            radius: r,
            states: chain.len(),
            pi_z0: est.mass(&chain, &z0),
            residual: est.residual,
            iterations: est.iterations,
        });
        last = Some((chain, est));
    }
    let (chain, est) = last.ok_or_else(|| invalid("no radius given"))?;
    let diffs: Vec<f64> = rows.windows(2).map(|w| (w[1].pi_z0 - w[0].pi_z0).abs()).collect();
    let non_cauchy = diffs.windows(2).any(|w| w[1] > w[0]);

    let mut out = run(ctx, "oracle-stationary", "oracle_stationary".into(), None, &a);
    let mut columns = coord_columns(mu.dim());
    columns.push("probability".into());
    let table = est.support(&chain).map(|(z, p)| {
        let mut r = coords(z);
        r.push(f(p));
        r
    });
    out.csv("oracle_stationary.csv", &columns, table)?;
    out.json(
        "oracle_stationary.json",
        &json!({
            "z0": z0,
            "mode": mode.to_string(),
            "tolerance": tol,
            "radii": rows,
            "successive_differences": diffs,
            "non_cauchy": non_cauchy,
        }),
    )?;
    if a.chain.export_chain.unwrap_or(false) {
        export_chain(&mut out, &chain, mu.dim())?;
    }
    out.finish()
}

pub fn oracle_returns(a: OracleReturnsArgs, ctx: &Ctx) -> Out {
    let sel = a.chain.walk();
    let mu = sel.measure()?;
    let mode = sel.mode()?;
    let z0 = sel.z0_or_origin(mu.dim());
    let chain = build_truncated_chain(&mu, mode, a.radius.unwrap_or(50), BoundaryPolicy::Reflecting)?;
    if chain.index_of(&z0).is_none() {
        return Err(invalid(format!("{z0} is not a state of the truncated chain")));
    }
    let report = exact_kac(&chain, &z0, a.max_iters.unwrap_or(10_000_000))?;
    let mut out = run(ctx, "oracle-returns", "oracle_returns".into(), None, &a);
    out.json(
        "oracle_returns.json",
        &json!({
            "radius": chain.radius,
            "mode": mode.to_string(),
            "report": report,
            "relative_error": (report.product - 1.0).abs(),
        }),
    )?;
    if a.chain.export_chain.unwrap_or(false) {
        export_chain(&mut out, &chain, mu.dim())?;
    }
    out.finish()
}

pub fn oracle_scc(a: OracleSccArgs, ctx: &Ctx) -> Out {
    let sel = a.chain.walk();
    let mu = sel.measure()?;
    let mode = sel.mode()?;
    let boundary: BoundaryPolicy = a.boundary.unwrap_or(BoundaryArg::Reflecting).into();
    let chain = build_truncated_chain(&mu, mode, a.radius.unwrap_or(10), boundary)?;
    let scc = irreducibility_scc(&chain);
    let mut out = run(ctx, "oracle-scc", "oracle_scc".into(), None, &a);
    out.json(
        "oracle_scc.json",
        &json!({
            "radius": chain.radius,
            "mode": mode.to_string(),
            "verdict": scc.verdict(),
            "origin_class_irreducible": scc.origin_class_irreducible(),
            "components": scc.component_sizes.len(),
            "report": scc,
        }),
    )?;
    if a.chain.export_chain.unwrap_or(false) {
        export_chain(&mut out, &chain, mu.dim())?;
    }
    out.finish()
}

fn random_base(d: usize, radius: i64, size: usize, stream: &mut RandomStream) -> Vec<LatticePoint> {
    let side = (2 * radius + 1) as u64;
    let mut set = BTreeSet::new();
    while set.len() < size {
        let c: Vec<i64> = (0..d).map(|_| stream.below(side) as i64 - radius).collect();
        let p = LatticePoint::new(c).expect("d >= 2");
        if !p.is_zero() {
            set.insert(p.normalize());
        }
    }
    set.into_iter().collect()
}

pub fn cone_check(a: ConeCheckArgs, ctx: &Ctx) -> Out {
    let mu = measure_from(&a.measure, a.dim)?;
    let k = a.k.ok_or_else(|| invalid("missing --k"))?;
    let z = a.z0.clone().unwrap_or_else(|| LatticePoint::unit(mu.dim(), 0, 1));
    let n = a.steps.ok_or_else(|| invalid("missing --steps"))?;
    let mut bases: Vec<(String, ConeBase)> = Vec::new();
    match &a.cone {
        Some(ConeArg::Name(s)) if s.eq_ignore_ascii_case("all") => bases.push(("all".into(), ConeBase::All)),
        Some(ConeArg::Name(s)) => return Err(invalid(format!("unknown cone {s:?}"))),
        Some(ConeArg::Points(p)) => {
            bases.push((label(&p.0), ConeBase::finite(p.0.iter().cloned())?));
        }
        None => {}
    }
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let size = a.cone_size.unwrap_or(3);
    let radius = a.cone_radius.unwrap_or(3);
    if size == 0 || radius < 1 {
        return Err(invalid("--cone-size and --cone-radius must be >= 1"));
    }
    for i in 0..a.random_cones.unwrap_or(0) {
        let mut stream = RandomStream::for_lane(seed, CONE_LANE, i);
        let base = random_base(mu.dim(), radius, size, &mut stream);
        bases.push((label(&base), ConeBase::finite(base)?));
    }
    if bases.is_empty() {
        return Err(invalid("give --cone or --random-cones"));
    }
    let mut reports = Vec::new();
    for (name, base) in &bases {
        reports.push((name.clone(), cone_monotonicity_check(&z, &mu, n, base, k)?));
    }
    let mut out = run(ctx, "cone-check", "cone_check".into(), Some(seed), &a);
    let table = reports.iter().map(|(name, r)| {
        vec![
            name.clone(),
            format!("{}/{}", r.full_gcd_mass.numer(), r.full_gcd_mass.denom()),
            format!("{}/{}", r.coprime_mass.numer(), r.coprime_mass.denom()),
            r.violated.to_string(),
        ]
    });
    out.csv("cone_check.csv", &cols(&["cone_base", "full_gcd_mass", "coprime_mass", "violated"]), table)?;
    let json_reports: Vec<_> = reports.iter().map(|(name, r)| json!({ "cone_base": name, "result": r })).collect();
    out.json(
        "cone_check.json",
        &json!({
            "z": z,
            "n": n,
            "k": k,
            "checks": json_reports,
            "violations": reports.iter().filter(|(_, r)| r.violated).count(),
        }),
    )?;
    out.finish()
}

fn label(points: &[LatticePoint]) -> String {
    points.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub fn check_measure(a: CheckMeasureArgs, ctx: &Ctx) -> Out {
    let mu = measure_from(&a.measure, a.dim)?;
    let norm = a.norm.unwrap_or_default();
    let moment = mu.first_moment(norm);
    let generation = mu.generation_check();
    let coverage = match a.k {
        Some(k) => Some(mu.torus_coverage_check(k)?),
        None => None,
    };
    let mut out = run(ctx, "check-measure", "check_measure".into(), None, &a);
    out.json(
        "check_measure.json",
        &json!({
            "valid": true,
            "dim": mu.dim(),
            "support_size": mu.len(),
            "denominator": mu.denominator(),
            "first_moment": {
                "norm": norm,
                "value": moment.value,
                "exact": moment.exact.as_ref().map(|e| format!("{}/{}", e.numer(), e.denom())),
            },
            "generation": generation,
            "torus_coverage": coverage.map(|c| json!({ "k": a.k, "covers": c })),
        }),
    )?;
    println!(
        "ok: first moment {} ({}), generation {:?}",
        moment.value,
        norm.name(),
        generation.kind
    );
    out.finish()
}

pub fn connect(a: ConnectArgs, ctx: &Ctx) -> Out {
    let target = a.target.clone().ok_or_else(|| invalid("missing --target"))?;
    if !target.is_primitive() {
        return Err(CliError::from(primwalk::WalkError::NotPrimitive(target)));
    }
    let path = connect_to_zero(&target, a.prime_limit.unwrap_or(DEFAULT_PRIME_SEARCH_LIMIT))?;
    let zero = LatticePoint::zero(target.dim());
    let visited = path.replay(WalkMode::FullGcd, &zero)?;
    let verified = visited.last().unwrap_or(&zero) == &target;
    if !verified {
        return Err(CliError::Runtime(format!("path for {target} does not replay to the target")));
    }
    let d = target.dim();
    let mut out = run(ctx, "connect", "connect".into(), None, &a);
    let mut columns = vec!["index".to_string()];
    columns.extend((1..=d).map(|i| format!("step_{i}")));
    columns.extend((1..=d).map(|i| format!("position_{i}")));
    let rows = path.steps.iter().zip(&visited).enumerate().map(|(i, (s, p))| {
        let mut r = vec![(i + 1).to_string()];
        r.extend(coords(s));
        r.extend(coords(p));
        r
    });
    out.csv("connect.csv", &columns, rows)?;
    out.json(
        "connect.json",
        &json!({ "target": target, "length": path.len(), "verified": verified, "steps": path.steps }),
    )?;
    out.finish()
}
