mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonc_core::certificate::{BinomialSquare, Certificate, MonomialSquare};
use sonc_core::certify::{verify, verify_circuit_decomposition, verify_exact, verify_exact_with, verify_numeric};
use sonc_core::exponent::{rat, rational_to_f64, Exponent, Rational};
use sonc_core::medseq::{med_set, med_set_odd};
use sonc_core::poly::{circuit_number, CircuitData};
use sonc_core::{parse_poly, SoncError};

fn e(v: &[i64]) -> Exponent {
    Exponent::from_ints(v)
}

fn thirds() -> Vec<Rational> {
    vec![rat(1, 3); 3]
}

fn motzkin_circuit() -> CircuitData {
    CircuitData::new(vec![e(&[4, 2]), e(&[2, 4]), e(&[0, 0])], vec![1.0; 3], e(&[2, 2]), 3.0).unwrap()
}

#[test]
fn hand_written_motzkin_certificate() {
    // (1 - x y^2)^2 + 2 (x^(1/2) y - x^(3/2) y)^2 + (x y - x^2 y)^2
    let mut cert = Certificate::constant(0.0);
    cert.squares.push(BinomialSquare::new(1.0, 1.0, e(&[0, 0]), e(&[1, 2])));
    cert.squares.push(BinomialSquare {
        weight: 2.0,
        p: 1.0,
        q: 1.0,
        half_v: Exponent(vec![rat(1, 2), rat(1, 1)]),
        half_w: Exponent(vec![rat(3, 2), rat(1, 1)]),
    });
    cert.squares.push(BinomialSquare::new(1.0, 1.0, e(&[1, 1]), e(&[2, 1])));
    let f = parse_poly("x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2", 2).unwrap();
    let chk = verify_exact(&cert, &f).unwrap();
    assert_eq!((chk.residual, chk.r_used, chk.pass), (0.0, 1, true));
    let report = verify(&cert, &f, 1000, 9).unwrap();
    assert!(report.pass && report.numeric_residual <= 1e-9);
}

#[test]
fn decomposition_reproduces_both_motzkin_identities() {
    let c = motzkin_circuit();
    let f = c.to_poly();
    let even = med_set(&c.trellis, &e(&[2, 2]), &thirds()).unwrap();
    let dec = verify_circuit_decomposition(&c, &even).unwrap();
    let mut got = dec.coefficients.clone();
    got.sort();
    assert_eq!(got, vec![rat(1, 1), rat(1, 1), rat(2, 1)]);
    assert_eq!(verify_exact(&dec.to_certificate(), &f).unwrap().residual, 0.0);

    let odd = med_set_odd(&c.trellis, &e(&[2, 2]), &thirds()).unwrap();
    let dec = verify_circuit_decomposition(&c, &odd).unwrap();
    let mut got = dec.coefficients.clone();
    got.sort();
    assert_eq!(got, vec![rat(1, 2), rat(1, 2), rat(1, 1), rat(1, 1), rat(3, 2)]);
    let chk = verify_exact(&dec.to_certificate(), &f).unwrap();
    assert_eq!((chk.residual, chk.r_used), (0.0, 3));
}

#[test]
fn mismatched_mediated_set_is_rejected() {
    let c = motzkin_circuit();
    let other = med_set(&[e(&[4, 0]), e(&[0, 4]), e(&[0, 0])], &e(&[1, 1]), &[rat(1, 4), rat(1, 4), rat(1, 2)]).unwrap();
    assert!(matches!(verify_circuit_decomposition(&c, &other), Err(SoncError::Structural(_))));
}

#[test]
fn perturbation_is_detected() {
    let c = motzkin_circuit();
    let ms = med_set(&c.trellis, &e(&[2, 2]), &thirds()).unwrap();
    let mut cert = verify_circuit_decomposition(&c, &ms).unwrap().to_certificate();
    cert.monomials.push(MonomialSquare { coeff: 1e-3, exponent: e(&[0, 0]) });
    let chk = verify_exact(&cert, &c.to_poly()).unwrap();
    assert!((chk.residual - 1e-3).abs() < 1e-12);
    assert!(!chk.pass);
    assert!(verify_exact_with(&cert, &c.to_poly(), 1e-2, 100).unwrap().pass);
}

#[test]
fn zero_certificate_against_nonzero_polynomial() {
    let f = parse_poly("x1^2 + 3", 1).unwrap();
    assert!(verify_numeric(&Certificate::constant(0.0), &f, 50, 0) > 1.0);
    assert!(!verify_exact(&Certificate::constant(0.0), &f).unwrap().pass);
}

/// A nonnegative circuit with random coefficients and `d = s * Theta`.
fn random_circuit(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CircuitData {
    let (trellis, beta, weights) = common::odd_instance(rng, n, m);
    let coeffs: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..4.0)).collect();
    let probe = CircuitData::new(trellis.clone(), coeffs.clone(), beta.clone(), 1.0).unwrap();
    assert_eq!(probe.barycentric, weights);
    let theta = circuit_number(&probe).unwrap();
    let s: f64 = rng.gen_range(0.0..=1.0);
    let sign = if !beta.is_even() && rng.gen_bool(0.5) { -1.0 } else { 1.0 };
    CircuitData::new(trellis, coeffs, beta, sign * s * theta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn circuit_decompositions_verify(n in 1usize..=3, extra in 0usize..=3, seed in any::<u64>(), odd in any::<bool>()) {
        let m = (extra % (n + 1) + 2).min(n + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(&mut rng, n, m);
        let beta = c.beta.clone().unwrap();
        let ms = if odd { med_set_odd(&c.trellis, &beta, &c.barycentric) } else { med_set(&c.trellis, &beta, &c.barycentric) }.unwrap();
        let dec = match verify_circuit_decomposition(&c, &ms) {
            Err(SoncError::Structural(_)) if c.d < 0.0 && !odd && ms.triples.iter().any(|t| t.v == beta || t.w == beta) => return Ok(()),
            other => other.unwrap(),
        };
        let f = c.to_poly();
        let scale = 1.0 + f.max_abs_coeff();
        let chk = verify_exact(&dec.to_certificate(), &f).unwrap();
        prop_assert!(chk.residual <= 1e-9 * scale, "residual {}", chk.residual);
        if !dec.squares.is_empty() {
            let total: f64 = dec.coefficients.iter().map(rational_to_f64).sum();
            prop_assert!(total > 0.0);
        }
    }
}

