use primwalk::lattice::{connect_to_zero, hat_plus, hat_plus_k, step, DEFAULT_PRIME_SEARCH_LIMIT};
use primwalk::{LatticePoint, WalkMode};
use proptest::prelude::*;

fn point(d: usize, range: i64) -> impl Strategy<Value = LatticePoint> {
    prop::collection::vec(-range..=range, d).prop_map(|c| LatticePoint::new(c).unwrap())
}

fn primitive(d: usize, range: i64) -> impl Strategy<Value = LatticePoint> {
    point(d, range).prop_map(|z| z.normalize())
}

fn coprime(d: usize, range: i64, k: u64) -> impl Strategy<Value = LatticePoint> {
    point(d, range).prop_filter("coprime to k", move |z| z.is_coprime_to(k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn full_gcd_step_is_primitive_and_reconstructs(
        (a, z) in (2usize..=6).prop_flat_map(|d| (point(d, 1000), primitive(d, 1_000_000)))
    ) {
        let r = hat_plus(&a, &z).unwrap();
        prop_assert!(r.is_primitive());
        let sum = a.checked_add(&z).unwrap();
        let g = sum.gcd() as i64;
        prop_assert_eq!(r.checked_scale(if sum.is_zero() { 1 } else { g }).unwrap(), sum);
        prop_assert_eq!(r.normalize(), r.clone());
    }

    #[test]
    fn k_step_is_coprime_and_reconstructs(
        (k, a, z) in (2u64..=7, 2usize..=5).prop_flat_map(|(k, d)| (Just(k), point(d, 50), coprime(d, 100_000, k)))
    ) {
        let (r, p) = hat_plus_k(&a, &z, k).unwrap();
        prop_assert!(r.is_coprime_to(k));
        let sum = a.checked_add(&z).unwrap();
        prop_assert_eq!(r.checked_scale((k as i64).pow(p)).unwrap(), sum);
        prop_assert_eq!(step(WalkMode::CoprimeTo(k), &a, &z).unwrap(), r);
    }

    #[test]
    fn normalize_is_idempotent(z in (2usize..=6).prop_flat_map(|d| point(d, 1_000_000))) {
        let n = z.normalize();
        prop_assert!(n.is_primitive());
        prop_assert_eq!(n.normalize(), n);
    }

    #[test]
    fn connect_paths_replay(x in (2usize..=4).prop_flat_map(|d| primitive(d, 40))) {
        let path = connect_to_zero(&x, DEFAULT_PRIME_SEARCH_LIMIT).unwrap();
        let zero = LatticePoint::zero(x.dim());
        let visited = path.replay(WalkMode::FullGcd, &zero).unwrap();
        prop_assert_eq!(visited.last().unwrap_or(&zero), &x);
        prop_assert!(path.steps.iter().all(|s| s.norm(primwalk::NormKind::L1) == 1.0));
    }
}

#[test]
fn non_primitive_states_are_rejected() {
    let a = LatticePoint::new(vec![1, 0]).unwrap();
    let z = LatticePoint::new(vec![2, 4]).unwrap();
    assert!(hat_plus(&a, &z).is_err());
    assert!(hat_plus_k(&a, &LatticePoint::new(vec![3, 6]).unwrap(), 3).is_err());
}
