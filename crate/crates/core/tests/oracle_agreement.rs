use num_rational::BigRational;
use primwalk::engine::{cesaro_distribution, endpoint_distribution, CesaroEstimator, WalkConfig};
use primwalk::measure::{eta1, nu};
use primwalk::oracle::{exact_cesaro, exact_endpoint};
use primwalk::stats::binomial_sigma;
use primwalk::{LatticePoint, WalkMode};

fn p(c: &[i64]) -> LatticePoint {
    LatticePoint::new(c.to_vec()).unwrap()
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

// Enumeration of the 16 two-step paths of ν from the origin.
#[test]
fn frozen_two_step_law() {
    let d = exact_endpoint(&p(&[0, 0]), &nu(2).unwrap(), WalkMode::FullGcd, 2).unwrap();
    let expected = [
        ([0, 0], ratio(1, 4)),
        ([1, 1], ratio(1, 8)),
        ([1, -1], ratio(1, 8)),
        ([-1, 1], ratio(1, 8)),
        ([-1, -1], ratio(1, 8)),
        ([1, 0], ratio(1, 16)),
        ([-1, 0], ratio(1, 16)),
        ([0, 1], ratio(1, 16)),
        ([0, -1], ratio(1, 16)),
    ];
    assert_eq!(d.len(), expected.len());
    for (z, m) in expected {
        assert_eq!(d.get(&p(&z)), m, "{z:?}");
    }
}

#[test]
fn monte_carlo_endpoints_within_four_sigma() {
    let mu = nu(2).unwrap();
    let trials = 40_000;
    for mode in [WalkMode::FullGcd, WalkMode::CoprimeTo(2)] {
        for n in 1..=4 {
            let cfg = WalkConfig::new(mode, p(&[0, 0])).with_trials(trials).with_seed(11 + n);
            let mc = endpoint_distribution(&mu, &cfg, n).unwrap();
            let exact = exact_endpoint(&cfg.z0, &mu, mode, n).unwrap();
            for z in mc.counts.keys() {
                assert!(exact.mass.contains_key(z), "{mode} n={n}: {z} has exact mass 0");
            }
            for (z, m) in exact.iter() {
                let q: f64 = num_traits::ToPrimitive::to_f64(m).unwrap();
                let dev = (mc.probability(z) - q).abs();
                assert!(dev <= 4.0 * binomial_sigma(q, trials), "{mode} n={n} {z}: {} vs {q}", mc.probability(z));
            }
        }
    }
}

#[test]
fn pooled_cesaro_matches_exact_average() {
    let mu = nu(2).unwrap();
    let n = 4;
    let cfg = WalkConfig::new(WalkMode::FullGcd, p(&[1, 0])).with_trials(20_000).with_seed(5);
    let mc = cesaro_distribution(&mu, &cfg, n, CesaroEstimator::Pooled).unwrap();
    let exact = exact_cesaro(&cfg.z0, &mu, WalkMode::FullGcd, n).unwrap();
    for (z, m) in exact.iter() {
        let q: f64 = num_traits::ToPrimitive::to_f64(m).unwrap();
        // a per-trial average of indicators lies in [0, 1], so its variance is at most q(1 - q)
        let sigma = binomial_sigma(q, cfg.trials);
        assert!((mc.probability(z) - q).abs() <= 4.0 * sigma, "{z}");
    }
}

#[test]
fn eta1_sampling_frequencies() {
    let mu = eta1();
    let draws = 1_000_000u64;
    let mut counts = vec![0u64; mu.len()];
    let mut stream = primwalk::RandomStream::from_seed(2024);
    for _ in 0..draws {
        counts[mu.sample_index(&mut stream)] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let q = mu.probability_f64(i);
        let f = c as f64 / draws as f64;
        assert!((f - q).abs() <= 4.0 * binomial_sigma(q, draws), "support {i}: {f} vs {q}");
    }
}
