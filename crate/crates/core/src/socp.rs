//! The second-order cone relaxation and its certificates.
//!
//! Every mediated triple `(u, v, w)` gets a rotated cone block `(a, b, c)`
//! contributing `2a x^v + b x^w - 2c x^u` to `f - xi`; points of `Lambda`
//! outside every simplex get a nonnegative slack. One equality row per
//! exponent matches the coefficients, and `xi` is maximized.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sonc_conic::{ConicProblem, SolveResult, SolveStatus};

use crate::certificate::{BinomialSquare, Certificate, MonomialSquare};
use crate::cover::Cover;
use crate::exponent::Exponent;
use crate::medseq::MediatedSet;
use crate::poly::{SignMap, SparsePoly};
use crate::SoncError;

/// Cone block of one mediated triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleVars {
    pub entry: usize,
    pub triple: usize,
    /// Index of `a`; `b` and `c` follow.
    pub start: usize,
    pub u: Exponent,
    pub v: Exponent,
    pub w: Exponent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableIndexMap {
    pub xi: usize,
    pub triples: Vec<TripleVars>,
    /// Nonnegative monomial slacks.
    pub slacks: Vec<(Exponent, usize)>,
    /// Equality row of every exponent.
    pub rows: BTreeMap<Exponent, usize>,
}

/// Degenerate-block threshold of [`extract_certificate`].
pub const EXTRACT_EPS: f64 = 1e-10;
/// Cone violation above which a solution is rejected.
pub const CONE_TOL: f64 = 1e-6;

pub fn build_socp(
    pn: &SparsePoly,
    cover: &Cover,
    mediated: &[MediatedSet],
) -> Result<(ConicProblem, VariableIndexMap), SoncError> {
    if mediated.len() != cover.entries.len() {
        return Err(SoncError::Structural(format!(
            "{} mediated sets for {} cover entries",
            mediated.len(),
            cover.entries.len()
        )));
    }
    for (k, (e, ms)) in cover.entries.iter().zip(mediated).enumerate() {
        if e.beta != ms.beta || !ms.triples.iter().any(|t| t.u == e.beta) {
            return Err(SoncError::Structural(format!("mediated set {k} does not contain its cover point {}", e.beta)));
        }
    }
    let n = pn.nvars();
    let zero = Exponent::zero(n);
    let mut prob = ConicProblem::new();
    let mut entries: BTreeMap<Exponent, Vec<(usize, f64)>> = BTreeMap::new();
    entries.entry(zero.clone()).or_default();
    for e in pn.terms().keys() {
        entries.entry(e.clone()).or_default();
    }
    let xi = prob.add_free(1);
    entries.get_mut(&zero).expect("zero row").push((xi, 1.0));
    prob.set_objective(xi, 1.0);

    let mut triples = Vec::new();
    let mut endpoints = BTreeSet::new();
    for (k, ms) in mediated.iter().enumerate() {
        for (i, t) in ms.triples.iter().enumerate() {
            let s = prob.add_rotated_soc3();
            entries.entry(t.v.clone()).or_default().push((s, 2.0));
            entries.entry(t.w.clone()).or_default().push((s + 1, 1.0));
            entries.entry(t.u.clone()).or_default().push((s + 2, -2.0));
            endpoints.insert(t.v.clone());
            endpoints.insert(t.w.clone());
            triples.push(TripleVars { entry: k, triple: i, start: s, u: t.u.clone(), v: t.v.clone(), w: t.w.clone() });
        }
    }
    let mut slack_points: BTreeSet<Exponent> = cover.uncovered_lambda.clone();
    if !endpoints.contains(&zero) {
        slack_points.insert(zero.clone());
    }
    let mut slacks = Vec::new();
    for e in slack_points {
        let s = prob.add_nonneg(1);
        entries.entry(e.clone()).or_default().push((s, 1.0));
        slacks.push((e, s));
    }
    let mut rows = BTreeMap::new();
    for (e, row) in entries {
        let rhs = pn.coeff(&e);
        if row.is_empty() {
            if rhs != 0.0 {
                return Err(SoncError::Structural(format!("no certificate term can produce the monomial at {e}")));
            }
            continue;
        }
        rows.insert(e, prob.add_row(row, rhs));
    }
    Ok((prob, VariableIndexMap { xi, triples, slacks, rows }))
}

/// Turns a solver result into binomial and monomial squares that sum to
/// `pn - xi`.
pub fn extract_certificate(result: &SolveResult, map: &VariableIndexMap, _pn: &SparsePoly) -> Result<Certificate, SoncError> {
    if !matches!(result.status, SolveStatus::Optimal | SolveStatus::NearOptimal) {
        return Err(SoncError::CorruptSolution(format!("solver status {}", result.status)));
    }
    let x = &result.primal;
    let need = map.triples.iter().map(|t| t.start + 3).chain(map.slacks.iter().map(|s| s.1 + 1)).max().unwrap_or(0);
    if x.len() < need.max(map.xi + 1) || x.iter().any(|v| !v.is_finite()) {
        return Err(SoncError::CorruptSolution("primal vector has the wrong size or non-finite entries".into()));
    }
    let mut cert = Certificate::constant(x[map.xi]);
    let mut mono: BTreeMap<Exponent, f64> = BTreeMap::new();
    for t in &map.triples {
        let (a, b, c) = (x[t.start], x[t.start + 1], x[t.start + 2]);
        let scale = 1.0 + a.abs() + b.abs() + c.abs();
        if a < -CONE_TOL * scale || b < -CONE_TOL * scale || c * c - 2.0 * a * b > CONE_TOL * scale * scale {
            return Err(SoncError::CorruptSolution(format!("cone block ({a}, {b}, {c}) violates 2ab >= c^2")));
        }
        let (a, b) = (a.max(0.0), b.max(0.0));
        let half_v = t.v.half();
        let half_w = t.w.half();
        if b > EXTRACT_EPS {
            let q = b.sqrt();
            let p = c / q;
            *mono.entry(t.v.clone()).or_default() += 2.0 * a - p * p;
            cert.squares.push(BinomialSquare::new(p, q, half_v, half_w));
        } else if a > EXTRACT_EPS {
            let p = (2.0 * a).sqrt();
            let q = c / p;
            *mono.entry(t.w.clone()).or_default() += b - q * q;
            cert.squares.push(BinomialSquare::new(p, q, half_v, half_w));
        }
    }
    for (e, s) in &map.slacks {
        *mono.entry(e.clone()).or_default() += x[*s];
    }
    cert.monomials = mono
        .into_iter()
        .filter(|(_, c)| *c > 0.0)
        .map(|(exponent, coeff)| MonomialSquare { coeff, exponent })
        .collect();
    Ok(cert)
}

/// Moves a PN certificate back to the original polynomial by negating `q`
/// on every square whose cross term sits at a flipped exponent.
pub fn restore_signs(cert: &Certificate, sign_map: &SignMap) -> Result<Certificate, SoncError> {
    let mut out = cert.clone();
    if sign_map.is_empty() {
        return Ok(out);
    }
    for s in &cert.squares {
        for end in [s.half_v.double(), s.half_w.double()] {
            if sign_map.flipped.contains(&end) {
                return Err(SoncError::Structural(format!("flipped exponent {end} is a square term")));
            }
        }
    }
    if let Some(m) = cert.monomials.iter().find(|m| sign_map.flipped.contains(&m.exponent)) {
        return Err(SoncError::Structural(format!("flipped exponent {} is a monomial square", m.exponent)));
    }
    for s in &mut out.squares {
        if sign_map.flipped.contains(&s.cross_exponent()) {
            s.q = -s.q;
        }
    }
    let remaining: BTreeSet<Exponent> = cert.sign_map.flipped.symmetric_difference(&sign_map.flipped).cloned().collect();
    out.sign_map = SignMap { flipped: remaining };
    Ok(out)
}
