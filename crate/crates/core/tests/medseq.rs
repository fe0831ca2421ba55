mod common;

use num_integer::Integer;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sonc_core::exponent::{rat, Exponent, Rational};
use sonc_core::medseq::*;

fn random_simplex(n: usize, m: usize, coords: &[i64]) -> Vec<Exponent> {
    (0..m).map(|i| Exponent::from_ints(&coords[i * n..(i + 1) * n])).collect()
}

fn weights_from(raw: &[u32]) -> Vec<Rational> {
    let total: i64 = raw.iter().map(|&x| x as i64).sum();
    raw.iter().map(|&x| rat(x as i64, total)).collect()
}

fn combine(tr: &[Exponent], w: &[Rational]) -> Exponent {
    let mut acc = Exponent::zero(tr[0].dim());
    for (a, x) in tr.iter().zip(w) {
        acc = &acc + &a.scale(x);
    }
    acc
}

#[test]
fn minimal_sizes_for_unit_numerator() {
    for p in 1..=64u64 {
        assert_eq!(minimal_med_seq_size(p, 1).unwrap(), ceil_log2(p) + 2, "p={p}");
    }
}

#[test]
fn example_sequence_is_minimal() {
    assert!(is_mediated_sequence(&[0, 2, 4, 5, 8, 11], 11));
    for q in [2, 4, 5, 8] {
        assert!(minimal_med_seq_size(11, q).unwrap() <= 6);
    }
}

#[test]
fn constructed_sequences_are_never_smaller_than_minimal() {
    for p in 2..=40u64 {
        for q in (1..p).filter(|q| q.gcd(&p) == 1) {
            let built = sequence_of(p, &med_seq(p, q).unwrap()).len();
            assert!(built >= minimal_med_seq_size(p, q).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn large_sequences_respect_bound(p in 2u64..=1_000_000, q0 in 1u64..1_000_000) {
        let q = 1 + q0 % (p - 1);
        prop_assume!(q.gcd(&p) == 1);
        let t = med_seq(p, q).unwrap();
        let s = sequence_of(p, &t);
        prop_assert!(s.contains(&q));
        prop_assert!(is_mediated_sequence(&s, p));
        prop_assert!((s.len() as f64) < med_seq_size_bound(p));
    }

    #[test]
    fn segment_lift_is_mediated(
        a in prop::collection::vec(-20i64..=20, 3),
        b in prop::collection::vec(-20i64..=20, 3),
        p in 2i64..50,
        q0 in 1i64..50,
    ) {
        let q = 1 + q0 % (p - 1);
        let a1 = Exponent::from_ints(&a);
        let a2 = Exponent::from_ints(&b);
        prop_assume!(a1 != a2);
        let beta = a1.lerp(&a2, &rat(q, p));
        let ms = MediatedSet { trellis: vec![a1.clone(), a2.clone()], beta: beta.clone(), triples: l_med_set(&a1, &a2, &beta).unwrap() };
        prop_assert!(is_rational_mediated_set(&ms));
        prop_assert!(inside_trellis(&ms));
    }

    #[test]
    fn simplex_sets_are_mediated(
        n in 1usize..=5,
        extra in 0usize..=5,
        coords in prop::collection::vec(0i64..=20, 36),
        raw in prop::collection::vec(1u32..=12, 6),
    ) {
        let m = (extra % (n + 1)) + 2;
        let m = m.min(n + 1).max(2);
        let tr = random_simplex(n, m, &coords);
        prop_assume!(sonc_core::qlin::affinely_independent(&tr));
        let w = weights_from(&raw[..m]);
        let beta = combine(&tr, &w);
        let ms = med_set(&tr, &beta, &w).unwrap();
        prop_assert!(is_rational_mediated_set(&ms));
        prop_assert!(inside_trellis(&ms));
    }

    #[test]
    fn odd_sets_have_parity(n in 1usize..=4, extra in 0usize..=4, seed in any::<u64>()) {
        let m = (extra % n.min(4) + 2).min(n + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tr, beta, w) = common::odd_instance(&mut rng, n, m);
        let ms = med_set_odd(&tr, &beta, &w).unwrap();
        prop_assert!(is_rational_mediated_set(&ms));
        prop_assert!(has_odd_parity(&ms));
        prop_assert!(inside_trellis(&ms));
    }
}
