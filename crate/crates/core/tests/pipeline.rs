use proptest::prelude::*;
use sonc_core::bench::{gen_bench, gen_planted, BenchClass, BenchSpec};
use sonc_core::certify::verify_exact;
use sonc_core::cover::{sim_sel, simplex_cover};
use sonc_core::exponent::Exponent;
use sonc_core::local::local_upper_bound;
use sonc_core::pipeline::{sonc_lower_bound, BoundConfig, BoundStatus};
use sonc_core::poly::{circuit_nonneg, is_circuit};
use sonc_core::{parse_poly, SparsePoly};

const MOTZKIN: &str = "x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2";
const QUARTIC: &str = "1 + x1^4 + x2^4 - x1*x2^2 - x1^2*x2 + 5*x1*x2";

fn bound(f: &SparsePoly) -> sonc_core::pipeline::BoundOutput {
    sonc_lower_bound(f, &BoundConfig::default()).unwrap()
}

/// Largest `xi` with `f - xi` a nonnegative circuit, by bisection.
fn circuit_bisection(f: &SparsePoly) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mut g = f.clone();
        g.add_term(Exponent::zero(f.nvars()), -mid);
        if is_circuit(&g).is_some_and(|c| circuit_nonneg(&c)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn motzkin_matches_circuit_oracle() {
    let f = parse_poly(MOTZKIN, 2).unwrap();
    let oracle = circuit_bisection(&f);
    assert!(oracle.abs() < 1e-8, "{oracle}");
    let out = bound(&f);
    assert!((out.xi - oracle).abs() < 1e-6, "{}", out.xi);
    assert_eq!(out.status, BoundStatus::Optimal);
    assert!(out.report.exact_residual.unwrap() < 1e-9);
}

#[test]
fn quartic_with_positive_odd_term() {
    let f = parse_poly(QUARTIC, 2).unwrap();
    let out = bound(&f);
    assert!((out.xi + 6.916501).abs() < 1e-4, "{}", out.xi);
    let cert = out.certificate.unwrap();
    assert!(cert.sign_map.is_empty());
    assert!(verify_exact(&cert, &f).unwrap().residual < 1e-9);
    let flipped = Exponent::from_ints(&[1, 1]);
    assert!(cert.squares.iter().any(|s| s.cross_exponent() == flipped && s.p * s.q < 0.0));
    let ub = local_upper_bound(&f, 32, 0).unwrap();
    assert!((ub + 2.203372).abs() < 1e-3, "{ub}");
}

#[test]
fn local_bounds() {
    let motzkin = parse_poly(MOTZKIN, 2).unwrap();
    assert!(local_upper_bound(&motzkin, 32, 1).unwrap().abs() < 1e-6);
    let sq = parse_poly("x1^2 - 2*x1 + 1", 1).unwrap();
    assert!(local_upper_bound(&sq, 32, 1).unwrap().abs() < 1e-12);
}

#[test]
fn constant_polynomial() {
    let f = parse_poly("2.5", 2).unwrap();
    let out = bound(&f);
    assert!((out.xi - 2.5).abs() < 1e-9);
    assert!(out.certificate.unwrap().squares.is_empty());
}

#[test]
fn cover_example_is_sonc() {
    let f = parse_poly("50*x1^4*x2^4 + x1^4 + 3*x2^4 + 800 - 100*x1*x2^2 - 100*x1^2*x2", 2).unwrap();
    let out = bound(&f);
    assert_eq!(out.report.cover_entries, 2);
    assert!(out.xi >= -1e-6);
    assert!(out.status.is_certified());
}

#[test]
fn certificates_serialize() {
    let f = parse_poly(QUARTIC, 2).unwrap();
    let cert = bound(&f).certificate.unwrap();
    let back = sonc_core::certificate::Certificate::from_json(&cert.to_json().unwrap()).unwrap();
    assert_eq!(back, cert);
    assert!(verify_exact(&back, &f).unwrap().pass);
}

#[test]
fn deterministic_certificates() {
    let f = parse_poly(QUARTIC, 2).unwrap();
    let a = bound(&f).certificate.unwrap().to_json().unwrap();
    let b = bound(&f).certificate.unwrap().to_json().unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bound_is_below_local_minimum(
        class in prop_oneof![Just(BenchClass::StandardSimplex), Just(BenchClass::GeneralSimplex), Just(BenchClass::ArbitraryPolytope)],
        n in 2usize..=4,
        half_d in 2u32..=4,
        extra in 1usize..=6,
        seed in any::<u64>(),
    ) {
        let spec = BenchSpec::new(class, n, 2 * half_d, n + 2 + extra, seed);
        let Ok(f) = gen_bench(&spec) else { return Ok(()) };
        let out = bound(&f);
        prop_assume!(out.status == BoundStatus::Optimal);
        prop_assert!(out.report.exact_residual.unwrap() <= 1e-5);
        let ub = local_upper_bound(&f, 32, seed).unwrap();
        prop_assert!(out.xi <= ub + 1e-6, "xi {} above local minimum {}", out.xi, ub);
    }

    #[test]
    fn planted_minimum_is_recovered(n in 1usize..=3, half_d in 2u32..=4, k in 1usize..=3, seed in any::<u64>()) {
        let Ok((f, cover, m)) = gen_planted(n, 2 * half_d, k, seed) else { return Ok(()) };
        let config = BoundConfig { cover_override: Some(cover), ..Default::default() };
        let out = sonc_lower_bound(&f, &config).unwrap();
        prop_assert!(out.status.is_certified(), "{}", out.status);
        prop_assert!(out.xi >= m - 1e-4, "xi {} below planted {}", out.xi, m);
        prop_assert!(out.xi <= m + 1e-6, "xi {} above planted {}", out.xi, m);
    }

    #[test]
    fn extra_cover_entries_never_hurt(n in 2usize..=3, extra in 2usize..=5, seed in any::<u64>()) {
        let spec = BenchSpec::new(BenchClass::ArbitraryPolytope, n, 6, n + 3 + extra, seed);
        let Ok(f) = gen_bench(&spec) else { return Ok(()) };
        let (pn, _) = f.to_pn();
        let mut part = pn.partition_support().unwrap();
        let zero = Exponent::zero(n);
        part.gamma.remove(&zero);
        part.lambda.insert(zero, pn.constant());
        let base = simplex_cover(&part);
        prop_assume!(base.is_complete());
        let lambda = part.lambda_points();
        let mut bigger = base.clone();
        'outer: for e in &base.entries {
            for a0 in &lambda {
                if let Some(alt) = sim_sel(&e.beta, &lambda, a0) {
                    let mut t1 = alt.trellis.clone();
                    let mut t2 = e.trellis.clone();
                    t1.sort();
                    t2.sort();
                    if t1 != t2 {
                        for a in &alt.trellis {
                            bigger.uncovered_lambda.remove(a);
                        }
                        bigger.entries.push(alt);
                        break 'outer;
                    }
                }
            }
        }
        prop_assume!(bigger.entries.len() > base.entries.len());
        let run = |c| sonc_lower_bound(&f, &BoundConfig { cover_override: Some(c), ..Default::default() }).unwrap();
        let small = run(base);
        let large = run(bigger);
        prop_assume!(small.status.is_certified() && large.status.is_certified());
        prop_assert!(large.xi >= small.xi - 1e-6 * (1.0 + small.xi.abs()), "{} < {}", large.xi, small.xi);
    }
}
