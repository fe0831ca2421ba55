//! End-to-end lower bound: partition, PN-polynomial, cover, mediated sets,
//! cone program, certificate, sign restoration and exact verification.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use serde::{Deserialize, Serialize};
use sonc_conic::{solve, ConicProblem, SolveStatus, SolverSettings};

use crate::certificate::{Certificate, MonomialSquare, SolverStats};
use crate::certify::{verify_exact_with, verify_numeric, DEFAULT_MAX_DENOMINATOR, DEFAULT_VERIFY_TOL};
use crate::cover::{simplex_cover_with, Cover, CoverStrategy};
use crate::exponent::Exponent;
use crate::medseq::{med_set, MediatedSet};
use crate::poly::{SignMap, SparsePoly};
use crate::socp::{build_socp, extract_certificate, restore_signs, VariableIndexMap};
use crate::SoncError;

#[derive(Clone, Debug)]
pub struct BoundConfig {
    pub solver: SolverSettings,
    pub cover_strategy: CoverStrategy,
    /// Absolute tolerance on the coefficients of the exact identity.
    pub verify_tol: f64,
    pub max_denominator: u64,
    /// Use this cover instead of computing one.
    pub cover_override: Option<Cover>,
    pub numeric_samples: usize,
    pub seed: u64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            solver: SolverSettings::default(),
            cover_strategy: CoverStrategy::default(),
            verify_tol: DEFAULT_VERIFY_TOL,
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            cover_override: None,
            numeric_samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Optimal,
    NearOptimal,
    /// The solver finished but the certificate failed exact verification.
    Unverified,
    /// Some inner term lies outside the convex hull of `Lambda`.
    NoCertificate,
    Infeasible,
    Failed,
}

impl BoundStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundStatus::Optimal => "optimal",
            BoundStatus::NearOptimal => "near_optimal",
            BoundStatus::Unverified => "unverified",
            BoundStatus::NoCertificate => "no_certificate",
            BoundStatus::Infeasible => "infeasible",
            BoundStatus::Failed => "failed",
        }
    }

    /// A finite bound backed by a verified certificate.
    pub fn is_certified(&self) -> bool {
        matches!(self, BoundStatus::Optimal | BoundStatus::NearOptimal)
    }
}

impl std::fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub solver: Option<SolverStats>,
    pub exact_residual: Option<f64>,
    pub numeric_residual: Option<f64>,
    pub r_used: Option<u64>,
    pub verified: bool,
    /// False when the certificate stays on the PN-polynomial.
    pub signs_restored: bool,
    pub cover_entries: usize,
    pub triples: usize,
    pub time_solver_s: f64,
    pub time_total_s: f64,
}

#[derive(Clone, Debug)]
pub struct BoundOutput {
    pub xi: f64,
    pub status: BoundStatus,
    pub certificate: Option<Certificate>,
    pub report: BoundReport,
}

impl BoundOutput {
    fn without_certificate(status: BoundStatus, report: BoundReport) -> Self {
        BoundOutput { xi: f64::NEG_INFINITY, status, certificate: None, report }
    }
}

/// The cone program for `f` with the data needed to read a certificate back.
#[derive(Clone, Debug)]
pub struct BoundProblem {
    pub pn: SparsePoly,
    pub sign_map: SignMap,
    pub cover: Cover,
    pub mediated: Vec<MediatedSet>,
    pub problem: ConicProblem,
    pub map: VariableIndexMap,
}

enum Prepared {
    Uncovered(usize),
    Ready(Box<BoundProblem>),
}

fn prepare(f: &SparsePoly, config: &BoundConfig) -> Result<Prepared, SoncError> {
    let zero = Exponent::zero(f.nvars());
    let (pn, sign_map) = f.to_pn();
    let mut partition = pn.partition_support()?;
    let c0 = pn.constant();
    partition.gamma.remove(&zero);
    partition.lambda.insert(zero, c0);
    let cover = match &config.cover_override {
        Some(c) => c.clone(),
        None => simplex_cover_with(&partition, config.cover_strategy),
    };
    if !cover.is_complete() {
        return Ok(Prepared::Uncovered(cover.entries.len()));
    }
    let mediated: Vec<MediatedSet> =
        cover.entries.iter().map(|e| med_set(&e.trellis, &e.beta, &e.weights)).collect::<Result<_, _>>()?;
    let (problem, map) = build_socp(&pn, &cover, &mediated)?;
    Ok(Prepared::Ready(Box::new(BoundProblem { pn, sign_map, cover, mediated, problem, map })))
}

/// Builds the cone program without solving it. `None` when some inner term
/// cannot be covered.
pub fn bound_problem(f: &SparsePoly, config: &BoundConfig) -> Result<Option<BoundProblem>, SoncError> {
    if f.is_empty() {
        return Err(SoncError::Invalid("zero polynomial".into()));
    }
    Ok(match prepare(f, config)? {
        Prepared::Uncovered(_) => None,
        Prepared::Ready(p) => Some(*p),
    })
}

/// Largest `xi` found such that `f - xi` is certified by a sum of binomial
/// squares, with the certificate.
pub fn sonc_lower_bound(f: &SparsePoly, config: &BoundConfig) -> Result<BoundOutput, SoncError> {
    let start = Instant::now();
    if f.is_empty() {
        return Err(SoncError::Invalid("zero polynomial".into()));
    }
    let prepared = match prepare(f, config)? {
        Prepared::Uncovered(cover_entries) => {
            let report = BoundReport { cover_entries, time_total_s: start.elapsed().as_secs_f64(), ..Default::default() };
            return Ok(BoundOutput::without_certificate(BoundStatus::NoCertificate, report));
        }
        Prepared::Ready(p) => p,
    };
    let BoundProblem { pn, sign_map, cover, mediated, problem, map } = *prepared;
    let mut report = BoundReport {
        cover_entries: cover.entries.len(),
        triples: mediated.iter().map(MediatedSet::len).sum(),
        ..Default::default()
    };

    let t_solve = Instant::now();
    let result = solve(&problem, &config.solver)?;
    report.time_solver_s = t_solve.elapsed().as_secs_f64();
    report.solver = Some(SolverStats {
        status: result.status.as_str().to_string(),
        iterations: result.iterations,
        objective: result.objective,
        dual_objective: result.dual_objective,
        gap: result.gap,
        primal_residual: result.primal_residual,
        dual_residual: result.dual_residual,
    });
    let status = match result.status {
        SolveStatus::Optimal => BoundStatus::Optimal,
        SolveStatus::NearOptimal => BoundStatus::NearOptimal,
        SolveStatus::Infeasible => BoundStatus::Infeasible,
        SolveStatus::Unbounded | SolveStatus::IterLimit => BoundStatus::Failed,
    };
    if !status.is_certified() {
        report.time_total_s = start.elapsed().as_secs_f64();
        return Ok(BoundOutput::without_certificate(status, report));
    }

    let mut cert = extract_certificate(&result, &map, &pn)?;
    cert.sign_map = sign_map.clone();
    if !sign_map.is_empty() {
        if let Ok(restored) = restore_signs(&cert, &sign_map) {
            cert = restored;
        }
    }
    if let Some(p) = polish_certificate(&cert, f) {
        cert = p;
    }
    cert.meta.cover = Some(cover);
    cert.meta.mediated_sets = mediated;
    cert.meta.solver = report.solver.clone();
    report.signs_restored = cert.sign_map.is_empty();

    let check = verify_exact_with(&cert, f, config.verify_tol, config.max_denominator)?;
    report.exact_residual = Some(check.residual);
    report.r_used = Some(check.r_used);
    report.verified = check.pass;
    report.numeric_residual = Some(verify_numeric(&cert, f, config.numeric_samples, config.seed));
    report.time_total_s = start.elapsed().as_secs_f64();
    Ok(BoundOutput {
        xi: cert.xi,
        status: if check.pass { status } else { BoundStatus::Unverified },
        certificate: Some(cert),
        report,
    })
}

/// Gauss-Newton correction of the square parameters, monomial coefficients
/// and `xi` so that the identity holds to rounding error. Monomial
/// coefficients are kept nonnegative by fixing the ones that hit zero.
/// Returns `None` when the residual does not shrink.
pub fn polish_certificate(cert: &Certificate, f: &SparsePoly) -> Option<Certificate> {
    let n = f.nvars();
    let target = cert.sign_map.apply(f);
    let mut rows: BTreeMap<Exponent, usize> = BTreeMap::new();
    let index = |e: Exponent, rows: &mut BTreeMap<Exponent, usize>| {
        let k = rows.len();
        *rows.entry(e).or_insert(k)
    };
    for e in target.terms().keys() {
        index(e.clone(), &mut rows);
    }
    index(Exponent::zero(n), &mut rows);
    let sq: Vec<[usize; 3]> = cert
        .squares
        .iter()
        .map(|s| {
            [
                index(s.half_v.double(), &mut rows),
                index(s.cross_exponent(), &mut rows),
                index(s.half_w.double(), &mut rows),
            ]
        })
        .collect();
    for m in &cert.monomials {
        index(m.exponent.clone(), &mut rows);
    }
    // monomial squares may sit at even lattice points and square endpoints
    let mut mono: BTreeMap<Exponent, f64> = rows.keys().filter(|e| e.is_even()).map(|e| (e.clone(), 0.0)).collect();
    for s in &cert.squares {
        mono.entry(s.half_v.double()).or_default();
        mono.entry(s.half_w.double()).or_default();
    }
    for m in &cert.monomials {
        *mono.entry(m.exponent.clone()).or_default() += m.coeff;
    }
    let mono_rows: Vec<(Exponent, usize)> = mono.keys().map(|e| (e.clone(), rows[e])).collect();
    let zero_row = rows[&Exponent::zero(n)];
    let mut t = vec![0.0; rows.len()];
    for (e, c) in target.terms() {
        t[rows[e]] += c;
    }
    let ns = cert.squares.len();
    let nm = mono_rows.len();
    // variables: p_s, q_s, monomials, xi
    let mut x: Vec<f64> = cert.squares.iter().flat_map(|s| [s.p, s.q]).collect();
    x.extend(mono.values());
    x.push(cert.xi);
    let weights: Vec<f64> = cert.squares.iter().map(|s| s.weight).collect();
    let residual = |x: &[f64]| {
        let mut r: Vec<f64> = t.iter().map(|v| -v).collect();
        for (s, idx) in sq.iter().enumerate() {
            let (w, p, q) = (weights[s], x[2 * s], x[2 * s + 1]);
            r[idx[0]] += w * p * p;
            r[idx[1]] -= 2.0 * w * p * q;
            r[idx[2]] += w * q * q;
        }
        for (k, (_, row)) in mono_rows.iter().enumerate() {
            r[*row] += x[2 * ns + k];
        }
        r[zero_row] += x[2 * ns + nm];
        r
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let start = norm(&residual(&x));
    let mut fixed = vec![false; nm];
    for (k, v) in mono.values().enumerate() {
        fixed[k] = *v <= 0.0;
    }
    for _ in 0..20 {
        let r = residual(&x);
        if norm(&r) <= 1e-15 * (1.0 + norm(&t)) {
            break;
        }
        let cols: Vec<usize> = (0..x.len()).filter(|&j| j < 2 * ns || j == 2 * ns + nm || !fixed[j - 2 * ns]).collect();
        let mut jac = DMatrix::<f64>::zeros(rows.len(), cols.len());
        for (c, &j) in cols.iter().enumerate() {
            if j < 2 * ns {
                let s = j / 2;
                let (w, p, q) = (weights[s], x[2 * s], x[2 * s + 1]);
                let idx = sq[s];
                if j % 2 == 0 {
                    jac[(idx[0], c)] += 2.0 * w * p;
                    jac[(idx[1], c)] -= 2.0 * w * q;
                } else {
                    jac[(idx[1], c)] -= 2.0 * w * p;
                    jac[(idx[2], c)] += 2.0 * w * q;
                }
            } else if j == 2 * ns + nm {
                jac[(zero_row, c)] = 1.0;
            } else {
                jac[(mono_rows[j - 2 * ns].1, c)] = 1.0;
            }
        }
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        let step = jac.svd(true, true).solve(&rhs, 1e-13).ok()?;
        let mut next = x.clone();
        for (c, &j) in cols.iter().enumerate() {
            next[j] += step[c];
        }
        let mut clipped = false;
        for k in 0..nm {
            let j = 2 * ns + k;
            if !fixed[k] && next[j] < 0.0 {
                next[j] = 0.0;
                fixed[k] = true;
                clipped = true;
            }
        }
        let improved = norm(&residual(&next)) < norm(&r);
        if !improved && !clipped {
            break;
        }
        x = next;
    }
    let end = norm(&residual(&x));
    if !(end < start) || x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut out = cert.clone();
    for (s, sqr) in out.squares.iter_mut().enumerate() {
        sqr.p = x[2 * s];
        sqr.q = x[2 * s + 1];
    }
    out.monomials = mono_rows
        .iter()
        .enumerate()
        .filter(|(k, _)| x[2 * ns + k] > 0.0)
        .map(|(k, (e, _))| MonomialSquare { coeff: x[2 * ns + k], exponent: e.clone() })
        .collect();
    out.xi = x[2 * ns + nm];
    Some(out)
}
