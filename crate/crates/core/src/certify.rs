//! Independent certificate checks.
//!
//! [`verify_exact`] trusts nothing but the polynomial identity: it clears
//! the exponent denominators by `x -> x^r`, expands every square over exact
//! rationals (each float coefficient is taken at its exact binary value) and
//! reports the largest leftover coefficient.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{BinomialSquare, Certificate, MonomialSquare};
use crate::exponent::{rational_from_f64, rational_to_f64, Exponent, Rational};
use crate::medseq::{is_rational_mediated_set, MediatedSet};
use crate::poly::{circuit_nonneg, circuit_number, CircuitData, SparsePoly};
use crate::{qlin, SoncError};

pub const DEFAULT_VERIFY_TOL: f64 = 1e-6;
/// Largest denominator-clearing power accepted by [`verify_exact`].
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1 << 48;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub pass: bool,
    pub residual: f64,
    pub r_used: u64,
}

/// Structured verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub exact_residual: f64,
    pub numeric_residual: f64,
    pub r_used: u64,
    pub pass: bool,
}

pub fn verify_exact(cert: &Certificate, f: &SparsePoly) -> Result<ExactCheck, SoncError> {
    verify_exact_with(cert, f, DEFAULT_VERIFY_TOL, DEFAULT_MAX_DENOMINATOR)
}

fn exact(x: f64) -> Result<Rational, SoncError> {
    rational_from_f64(x).ok_or_else(|| SoncError::Invalid(format!("non-finite coefficient {x}")))
}

pub fn verify_exact_with(cert: &Certificate, f: &SparsePoly, tol: f64, max_r: u64) -> Result<ExactCheck, SoncError> {
    let n = f.nvars();
    let mut terms: Vec<(Rational, Exponent)> = Vec::new();
    for s in &cert.squares {
        if s.half_v.dim() != n || s.half_w.dim() != n {
            return Err(SoncError::Dimension { expected: n, found: s.half_v.dim().max(s.half_w.dim()) });
        }
        let (w, p, q) = (exact(s.weight)?, exact(s.p)?, exact(s.q)?);
        terms.push((&w * &p * &p, s.half_v.double()));
        terms.push((-Rational::from_integer(2.into()) * &w * &p * &q, s.cross_exponent()));
        terms.push((&w * &q * &q, s.half_w.double()));
    }
    for m in &cert.monomials {
        if m.exponent.dim() != n {
            return Err(SoncError::Dimension { expected: n, found: m.exponent.dim() });
        }
        terms.push((exact(m.coeff)?, m.exponent.clone()));
    }
    for (e, c) in cert.target(f).terms() {
        terms.push((-exact(*c)?, e.clone()));
    }
    let r = terms.iter().fold(BigInt::one(), |acc, (_, e)| acc.lcm(&e.denominator_lcm()));
    let r_used = r
        .to_u64()
        .filter(|v| *v <= max_r)
        .ok_or_else(|| SoncError::DenominatorOverflow(format!("lcm {r} exceeds {max_r}")))?;
    let rr = Rational::from_integer(r);
    let mut sum: BTreeMap<Vec<BigInt>, Rational> = BTreeMap::new();
    for (c, e) in terms {
        let key: Vec<BigInt> = e.0.iter().map(|x| (x * &rr).to_integer()).collect();
        *sum.entry(key).or_insert_with(Rational::zero) += c;
    }
    let residual = sum.values().map(|c| rational_to_f64(&c.abs())).fold(0.0, f64::max);
    Ok(ExactCheck { pass: residual <= tol, residual, r_used })
}

/// Largest `|cert(x) - (f(x) - xi)|` over `samples` points drawn uniformly
/// from `(0, 2]^n`.
pub fn verify_numeric(cert: &Certificate, f: &SparsePoly, samples: usize, seed: u64) -> f64 {
    let target = cert.target(f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples.max(1) {
        let x: Vec<f64> = (0..f.nvars()).map(|_| 2.0 - rng.gen::<f64>() * 2.0).collect();
        let Ok(t) = target.eval(&x) else { return f64::INFINITY };
        let d = (cert.eval(&x) - t).abs();
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    }
    worst
}

pub fn verify(cert: &Certificate, f: &SparsePoly, samples: usize, seed: u64) -> Result<VerificationReport, SoncError> {
    let ex = verify_exact(cert, f)?;
    Ok(VerificationReport {
        exact_residual: ex.residual,
        numeric_residual: verify_numeric(cert, f, samples, seed),
        r_used: ex.r_used,
        pass: ex.pass,
    })
}

/// Binomial-square decomposition of a single nonnegative circuit along a
/// mediated set.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitDecomposition {
    /// One square per triple of the mediated set, in the same order.
    pub squares: Vec<BinomialSquare>,
    pub monomials: Vec<MonomialSquare>,
    /// Exact square weights `mu_t |d|`.
    pub coefficients: Vec<Rational>,
}

impl CircuitDecomposition {
    pub fn to_certificate(&self) -> Certificate {
        let mut c = Certificate::constant(0.0);
        c.squares = self.squares.clone();
        c.monomials = self.monomials.clone();
        c
    }
}

pub fn verify_circuit_decomposition(c: &CircuitData, ms: &MediatedSet) -> Result<CircuitDecomposition, SoncError> {
    let Some(beta) = &c.beta else {
        return Err(SoncError::NotCircuit("monomial square has no inner term".into()));
    };
    let all_monomials = |extra: Option<(f64, &Exponent)>| {
        let mut monomials: Vec<MonomialSquare> = c
            .trellis
            .iter()
            .zip(&c.coefficients)
            .map(|(e, &coeff)| MonomialSquare { coeff, exponent: e.clone() })
            .collect();
        if let Some((coeff, e)) = extra {
            monomials.push(MonomialSquare { coeff, exponent: e.clone() });
        }
        CircuitDecomposition { squares: Vec::new(), monomials, coefficients: Vec::new() }
    };
    if c.d == 0.0 {
        return Ok(all_monomials(None));
    }
    if !circuit_nonneg(c) {
        return Err(SoncError::NotNonnegative);
    }
    if c.d < 0.0 && beta.is_even() {
        return Ok(all_monomials(Some((-c.d, beta))));
    }
    let mut tr_a = c.trellis.clone();
    let mut tr_b = ms.trellis.clone();
    tr_a.sort();
    tr_b.sort();
    if ms.beta != *beta || tr_a != tr_b || !is_rational_mediated_set(ms) {
        return Err(SoncError::Structural("mediated set does not match the circuit".into()));
    }
    let flip = c.d < 0.0;
    if flip && ms.triples.iter().any(|t| t.v == *beta || t.w == *beta) {
        return Err(SoncError::Structural("odd inner point is a square endpoint; an odd-parity mediated set is needed".into()));
    }
    let mu = triple_weights(ms)?;
    for (a, lam) in c.trellis.iter().zip(&c.barycentric) {
        let got: Rational = ms
            .triples
            .iter()
            .zip(&mu)
            .map(|(t, m)| m * Rational::from_integer(BigInt::from(u8::from(t.v == *a) + u8::from(t.w == *a))))
            .sum();
        if got != *lam {
            return Err(SoncError::Structural(format!("triple weights give {got} at vertex {a}, expected {lam}")));
        }
    }
    let theta = circuit_number(c)?;
    let d = c.d.abs();
    let y = log_minimizer(c, theta);
    let dot = |e: &Exponent| e.to_f64().iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
    let d_exact = exact(d)?;
    let mut squares = Vec::with_capacity(ms.triples.len());
    let mut coefficients = Vec::with_capacity(ms.triples.len());
    for (t, m) in ms.triples.iter().zip(&mu) {
        let coeff = m * &d_exact;
        let p = if y.is_empty() { 1.0 } else { dot(&(beta - &t.v).half()).exp() };
        let mut q = if y.is_empty() { 1.0 } else { dot(&(beta - &t.w).half()).exp() };
        if flip && t.u == *beta {
            q = -q;
        }
        squares.push(BinomialSquare { weight: rational_to_f64(&coeff), p, q, half_v: t.v.half(), half_w: t.w.half() });
        coefficients.push(coeff);
    }
    let scale = 1.0 - d / theta;
    let monomials = c
        .trellis
        .iter()
        .zip(&c.coefficients)
        .filter(|_| scale > 0.0)
        .map(|(e, &ca)| MonomialSquare { coeff: scale * ca, exponent: e.clone() })
        .collect();
    Ok(CircuitDecomposition { squares, monomials, coefficients })
}

/// Exact weights `mu_t` with `sum_t mu_t (x^v - 2x^u + x^w) = sum lambda_a x^a - x^beta`.
fn triple_weights(ms: &MediatedSet) -> Result<Vec<Rational>, SoncError> {
    let k = ms.triples.len();
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut b = vec![Rational::zero(); k];
    for (i, ti) in ms.triples.iter().enumerate() {
        a[i][i] += Rational::from_integer(2.into());
        for (j, tj) in ms.triples.iter().enumerate() {
            if tj.v == ti.u {
                a[i][j] -= Rational::one();
            }
            if tj.w == ti.u {
                a[i][j] -= Rational::one();
            }
        }
        if ti.u == ms.beta {
            b[i] = Rational::one();
        }
    }
    let mu = qlin::solve_unique(&a, &b)
        .ok_or_else(|| SoncError::Structural("triple weight system is singular".into()))?;
    if mu.iter().any(Signed::is_negative) {
        return Err(SoncError::Structural("triple weights are not nonnegative".into()));
    }
    Ok(mu)
}

/// `ln x*` where every `c_a x*^a` equals `lambda_a Theta x*^beta`; empty
/// when `x* = 1`.
fn log_minimizer(c: &CircuitData, theta: f64) -> Vec<f64> {
    let lam: Vec<f64> = c.barycentric.iter().map(rational_to_f64).collect();
    let ratios: Vec<f64> = c.coefficients.iter().zip(&lam).map(|(ca, l)| ca / l).collect();
    if ratios.iter().all(|r| *r == ratios[0]) {
        return Vec::new();
    }
    let m = c.trellis.len();
    let n = c.trellis[0].dim();
    let rhs: Vec<f64> = lam.iter().zip(&c.coefficients).map(|(l, ca)| (l * theta / ca).ln()).collect();
    let pts: Vec<Vec<f64>> = c.trellis.iter().map(Exponent::to_f64).collect();
    let dmat = DMatrix::from_fn(m - 1, n, |i, j| pts[i + 1][j] - pts[0][j]);
    let bvec = DVector::from_fn(m - 1, |i, _| rhs[i + 1] - rhs[0]);
    let y = dmat.svd(true, true).solve(&bvec, 1e-14).expect("svd computed with both factors");
    y.iter().copied().collect()
}
