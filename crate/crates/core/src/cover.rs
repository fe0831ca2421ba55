//! Simplex covers of the inner support by trellises drawn from `Lambda`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use sonc_conic::{solve_lp_basic, ConicProblem, SolveStatus};

use crate::exponent::{rational_to_f64, rational_str, Exponent, Rational};
use crate::poly::SupportPartition;
use crate::qlin;

/// One simplex of the cover and the inner point it covers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverEntry {
    pub trellis: Vec<Exponent>,
    pub beta: Exponent,
    #[serde(with = "rational_str")]
    pub weights: Vec<Rational>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub entries: Vec<CoverEntry>,
    /// Points of `Lambda` used by no entry; they enter certificates as
    /// monomial squares.
    pub uncovered_lambda: BTreeSet<Exponent>,
    /// Inner points outside `conv(Lambda)`.
    pub no_certificate: Vec<Exponent>,
    /// The refill loop hit its iteration bound.
    pub overflow: bool,
}

impl Cover {
    pub fn is_complete(&self) -> bool {
        self.no_certificate.is_empty()
    }
}

/// How [`simplex_cover_with`] picks the simplex for each inner point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverStrategy {
    /// For every inner point, try every `alpha0` and keep the simplex with
    /// the largest circuit number under the current coefficients; then add
    /// simplices until every point of `Lambda` is used.
    #[default]
    MaxCircuitNumber,
    /// The textbook double loop: deplete `U = Lambda` and `V = Gamma`,
    /// lexicographically smallest first, refilling whichever empties first.
    Alternating,
}

const LP_SUPPORT_TOL: f64 = 1e-9;

/// `argmax lambda_{alpha0}` over the barycentric representations of `beta`
/// by `lambda_set`. Returns the support of a basic optimum with its exact
/// weights, or `None` when `beta` is outside `conv(lambda_set)`.
pub fn sim_sel(beta: &Exponent, lambda_set: &[Exponent], alpha0: &Exponent) -> Option<CoverEntry> {
    let j0 = lambda_set.iter().position(|a| a == alpha0)?;
    let mut lp = ConicProblem::new();
    let first = lp.add_nonneg(lambda_set.len());
    for j in 0..beta.dim() {
        let row: Vec<(usize, f64)> = lambda_set
            .iter()
            .enumerate()
            .map(|(i, a)| (first + i, rational_to_f64(&a.0[j])))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        let b = rational_to_f64(&beta.0[j]);
        if row.is_empty() {
            if b != 0.0 {
                return None;
            }
            continue;
        }
        lp.add_row(row, b);
    }
    lp.add_row((0..lambda_set.len()).map(|i| (first + i, 1.0)), 1.0);
    lp.set_objective(first + j0, 1.0);
    let res = solve_lp_basic(&lp).ok()?;
    if res.status != SolveStatus::Optimal {
        return None;
    }
    let support: Vec<Exponent> = (0..lambda_set.len())
        .filter(|&i| res.primal[first + i] > LP_SUPPORT_TOL)
        .map(|i| lambda_set[i].clone())
        .collect();
    exact_entry(support, beta)
}

/// Re-derives the weights of `beta` over `support` exactly; `None` unless
/// they exist and are all positive.
fn exact_entry(support: Vec<Exponent>, beta: &Exponent) -> Option<CoverEntry> {
    if support.len() < 2 || !qlin::affinely_independent(&support) {
        return None;
    }
    let weights = qlin::barycentric(&support, beta)?;
    weights
        .iter()
        .all(Signed::is_positive)
        .then(|| CoverEntry { trellis: support, beta: beta.clone(), weights })
}

fn log_circuit_number(entry: &CoverEntry, coeffs: &BTreeMap<Exponent, f64>) -> f64 {
    entry
        .trellis
        .iter()
        .zip(&entry.weights)
        .map(|(a, l)| {
            let l = rational_to_f64(l);
            let c = coeffs.get(a).copied().unwrap_or(0.0).max(1e-12);
            l * (c / l).ln()
        })
        .sum()
}

pub fn simplex_cover(partition: &SupportPartition) -> Cover {
    simplex_cover_with(partition, CoverStrategy::default())
}

pub fn simplex_cover_with(partition: &SupportPartition, strategy: CoverStrategy) -> Cover {
    let lambda = partition.lambda_points();
    let gamma = partition.gamma_points();
    let mut builder = Builder { lambda: &lambda, entries: Vec::new(), no_certificate: Vec::new() };
    let overflow = match strategy {
        CoverStrategy::Alternating => builder.alternating(&gamma),
        CoverStrategy::MaxCircuitNumber => builder.max_circuit(&gamma, &partition.lambda),
    };
    let used: BTreeSet<&Exponent> = builder.entries.iter().flat_map(|e| e.trellis.iter()).collect();
    let uncovered_lambda = lambda.iter().filter(|a| !used.contains(a)).cloned().collect();
    Cover { entries: builder.entries, uncovered_lambda, no_certificate: builder.no_certificate, overflow }
}

struct Builder<'a> {
    lambda: &'a [Exponent],
    entries: Vec<CoverEntry>,
    no_certificate: Vec<Exponent>,
}

impl Builder<'_> {
    fn push(&mut self, e: CoverEntry, u: &mut BTreeSet<Exponent>) {
        for a in &e.trellis {
            u.remove(a);
        }
        if !self.entries.contains(&e) {
            self.entries.push(e);
        }
    }

    /// Inner points that some simplex covers; the rest go to `no_certificate`.
    fn coverable(&mut self, gamma: &[Exponent]) -> Vec<Exponent> {
        let mut ok = Vec::new();
        for b in gamma {
            if self.lambda.iter().any(|a0| sim_sel(b, self.lambda, a0).is_some()) {
                ok.push(b.clone());
            } else {
                self.no_certificate.push(b.clone());
            }
        }
        ok
    }

    /// Returns true when the iteration bound was hit.
    fn alternating(&mut self, gamma: &[Exponent]) -> bool {
        let gamma = self.coverable(gamma);
        if gamma.is_empty() {
            return false;
        }
        let mut u: BTreeSet<Exponent> = self.lambda.iter().cloned().collect();
        let mut v: BTreeSet<Exponent> = gamma.iter().cloned().collect();
        let bound = self.lambda.len() + gamma.len();
        let mut steps = 0;
        let step = |me: &mut Self, u: &mut BTreeSet<Exponent>, v: &mut BTreeSet<Exponent>| {
            let a0 = u.iter().next().cloned().expect("U nonempty");
            let b = v.iter().next().cloned().expect("V nonempty");
            u.remove(&a0);
            v.remove(&b);
            if let Some(e) = sim_sel(&b, me.lambda, &a0) {
                me.push(e, u);
            }
        };
        while !u.is_empty() && !v.is_empty() {
            step(self, &mut u, &mut v);
        }
        if !v.is_empty() {
            while !v.is_empty() {
                if steps >= bound {
                    return true;
                }
                steps += 1;
                if u.is_empty() {
                    u = self.lambda.iter().cloned().collect();
                }
                step(self, &mut u, &mut v);
            }
        } else {
            while !u.is_empty() {
                if steps >= bound {
                    return true;
                }
                steps += 1;
                if v.is_empty() {
                    v = gamma.iter().cloned().collect();
                }
                step(self, &mut u, &mut v);
            }
        }
        false
    }

    fn max_circuit(&mut self, gamma: &[Exponent], coeffs: &BTreeMap<Exponent, f64>) -> bool {
        let gamma = self.coverable(gamma);
        if gamma.is_empty() {
            return false;
        }
        let mut u: BTreeSet<Exponent> = self.lambda.iter().cloned().collect();
        for b in &gamma {
            let mut best: Option<(f64, CoverEntry)> = None;
            for a0 in self.lambda {
                let Some(e) = sim_sel(b, self.lambda, a0) else { continue };
                let score = log_circuit_number(&e, coeffs);
                if best.as_ref().map_or(true, |(s, _)| score > *s) {
                    best = Some((score, e));
                }
            }
            if let Some((_, e)) = best {
                self.push(e, &mut u);
            }
        }
        let bound = self.lambda.len() + gamma.len();
        let mut steps = 0;
        let mut cycle = gamma.iter().cycle();
        while let Some(a0) = u.iter().next().cloned() {
            if steps >= bound {
                return true;
            }
            steps += 1;
            u.remove(&a0);
            // first inner point whose simplex can use a0
            for _ in 0..gamma.len() {
                let b = cycle.next().expect("gamma nonempty");
                if let Some(e) = sim_sel(b, self.lambda, &a0) {
                    if e.trellis.contains(&a0) {
                        self.push(e, &mut u);
                        break;
                    }
                }
            }
        }
        false
    }
}

/// Exact re-check of every cover invariant.
pub fn validate_cover(cover: &Cover, partition: &SupportPartition) -> bool {
    let n = partition.n;
    let entries_ok = cover.entries.iter().all(|e| {
        let distinct: BTreeSet<&Exponent> = e.trellis.iter().collect();
        let mut comb = Exponent::zero(n);
        for (a, w) in e.trellis.iter().zip(&e.weights) {
            comb = &comb + &a.scale(w);
        }
        distinct.len() == e.trellis.len()
            && e.trellis.len() == e.weights.len()
            && e.trellis.len() >= 2
            && e.trellis.len() <= n + 1
            && e.trellis.iter().all(|a| partition.lambda.contains_key(a))
            && qlin::affinely_independent(&e.trellis)
            && e.weights.iter().all(Signed::is_positive)
            && e.weights.iter().sum::<Rational>() == Rational::one()
            && comb == e.beta
            && partition.gamma.contains_key(&e.beta)
    });
    let covered: BTreeSet<&Exponent> =
        cover.entries.iter().map(|e| &e.beta).chain(cover.no_certificate.iter()).collect();
    let all_gamma = partition.gamma.keys().all(|b| covered.contains(b));
    let used: BTreeSet<&Exponent> = cover.entries.iter().flat_map(|e| e.trellis.iter()).collect();
    let expect_uncovered: BTreeSet<Exponent> =
        partition.lambda.keys().filter(|a| !used.contains(a)).cloned().collect();
    entries_ok && all_gamma && expect_uncovered == cover.uncovered_lambda
}
