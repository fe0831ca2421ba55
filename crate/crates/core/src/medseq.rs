//! Rational mediated sets.
//!
//! A one-dimensional `(0,p)`-mediated sequence is built by [`med_seq`]; it is
//! lifted onto a segment by [`l_med_set`] and chained over the vertices of a
//! simplex by [`med_set`]. [`med_set_odd`] builds a set whose points have odd
//! denominators and (except `beta`) even numerators, which is what a
//! binomial-square decomposition of a non-PN circuit needs.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exponent::{int, Exponent, Rational};
use crate::SoncError;

/// `u = (v + w) / 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MediatedTriple {
    pub u: Exponent,
    pub v: Exponent,
    pub w: Exponent,
}

impl MediatedTriple {
    pub fn is_valid(&self) -> bool {
        self.v != self.w && self.v.midpoint(&self.w) == self.u
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediatedSet {
    pub trellis: Vec<Exponent>,
    pub beta: Exponent,
    pub triples: Vec<MediatedTriple>,
}

impl MediatedSet {
    /// Trellis together with every midpoint.
    pub fn points(&self) -> BTreeSet<Exponent> {
        self.trellis.iter().cloned().chain(self.triples.iter().map(|t| t.u.clone())).collect()
    }

    pub fn len(&self) -> usize {
        self.points().len()
    }

    pub fn is_empty(&self) -> bool {
        self.trellis.is_empty() && self.triples.is_empty()
    }
}

/// 1-D triple `(u, v, w)` with `2u = v + w`.
pub type SeqTriple = (u64, u64, u64);

/// Triples of a `(0,p)`-mediated sequence containing `q`.
pub fn med_seq(p: u64, q: u64) -> Result<Vec<SeqTriple>, SoncError> {
    if q == 0 || q >= p {
        return Err(SoncError::Invalid(format!("med_seq needs 0 < q < p, got p={p}, q={q}")));
    }
    let mut out = Vec::new();
    ms(p, q, &mut out);
    let mut seen = HashSet::new();
    out.retain(|t| seen.insert(t.0));
    Ok(out)
}

fn shifted(p: u64, q: u64, by: u64, out: &mut Vec<SeqTriple>) {
    let mut sub = Vec::new();
    ms(p, q, &mut sub);
    out.extend(sub.into_iter().map(|(a, b, c)| (a + by, b + by, c + by)));
}

fn ms(u: u64, v: u64, out: &mut Vec<SeqTriple>) {
    let g = u.gcd(&v);
    if g > 1 {
        let mut sub = Vec::new();
        ms(u / g, v / g, &mut sub);
        out.extend(sub.into_iter().map(|(a, b, c)| (a * g, b * g, c * g)));
        return;
    }
    if u % 2 == 0 {
        let h = u / 2;
        if v == h {
            out.push((h, 0, u));
        } else if v < h {
            ms(h, v, out);
            out.push((h, 0, u));
        } else {
            out.push((h, 0, u));
            shifted(h, v - h, h, out);
        }
    } else if v % 2 == 0 {
        let k = v.trailing_zeros();
        let r = v >> k;
        for i in 1..=k {
            out.push((v - (v >> i), v - (v >> (i - 1)), v));
        }
        if v == u - r {
            out.push((v, v - r, u));
        } else {
            let m = (v - r + u) / 2;
            out.push((m, v - r, u));
            if v < u - r {
                shifted((u + r - v) / 2, r, v - r, out);
            } else {
                shifted((u + r - v) / 2, (v + r - u) / 2, m, out);
            }
        }
    } else {
        let mut sub = Vec::new();
        ms(u, u - v, &mut sub);
        out.extend(sub.into_iter().map(|(a, b, c)| (u - a, u - b, u - c)));
    }
}

/// Sorted sequence `{0, p} ∪ {u_i}` of a triple list.
pub fn sequence_of(p: u64, triples: &[SeqTriple]) -> Vec<u64> {
    let set: BTreeSet<u64> = [0, p].into_iter().chain(triples.iter().map(|t| t.0)).collect();
    set.into_iter().collect()
}

/// True iff `points` runs from 0 to `p` and every interior element is the
/// average of two distinct members.
pub fn is_mediated_sequence(points: &[u64], p: u64) -> bool {
    if points.first() != Some(&0) || points.last() != Some(&p) {
        return false;
    }
    let set: HashSet<u64> = points.iter().copied().collect();
    points[1..points.len() - 1].iter().all(|&x| {
        points.iter().take_while(|&&y| y < x).any(|&y| 2 * x - y <= p && set.contains(&(2 * x - y)))
    })
}

/// `½(log₂ p + 3/2)²`, the size bound every [`med_seq`] output stays below.
pub fn med_seq_size_bound(p: u64) -> f64 {
    let l = (p as f64).log2() + 1.5;
    0.5 * l * l
}

pub const DEFAULT_SEARCH_LIMIT: u64 = 64;
const HARD_SEARCH_LIMIT: u64 = 127;

/// `N(q/p)`: size of a smallest `(0,p)`-mediated sequence containing `q`.
pub fn minimal_med_seq_size(p: u64, q: u64) -> Result<usize, SoncError> {
    minimal_med_seq_size_with_limit(p, q, DEFAULT_SEARCH_LIMIT)
}

/// Like [`minimal_med_seq_size`] with an explicit limit on `p` (at most 127).
pub fn minimal_med_seq_size_with_limit(p: u64, q: u64, limit: u64) -> Result<usize, SoncError> {
    let limit = limit.min(HARD_SEARCH_LIMIT);
    if p > limit {
        return Err(SoncError::SearchLimit { p, limit });
    }
    if p == 0 || q > p {
        return Err(SoncError::Invalid(format!("need 0 <= q <= p and p > 0, got p={p}, q={q}")));
    }
    if q == 0 || q == p {
        return Ok(2);
    }
    let start: u128 = 1 | (1 << q) | (1 << p);
    let mut size = 3;
    loop {
        let mut failed = HashSet::new();
        if search(p, start, size - 3, &mut failed) {
            return Ok(size);
        }
        size += 1;
    }
}

fn search(p: u64, mask: u128, budget: usize, failed: &mut HashSet<u128>) -> bool {
    if failed.contains(&mask) {
        return false;
    }
    let has = |m: u128, i: u64| m >> i & 1 == 1;
    // most constrained unsatisfied element
    let mut best: Option<Vec<(u64, u64, usize)>> = None;
    for x in 1..p {
        if !has(mask, x) {
            continue;
        }
        let lo = (2 * x).saturating_sub(p);
        let mut opts = Vec::new();
        let mut ok = false;
        for y in lo..x {
            let z = 2 * x - y;
            let cost = usize::from(!has(mask, y)) + usize::from(!has(mask, z));
            if cost == 0 {
                ok = true;
                break;
            }
            if cost <= budget {
                opts.push((y, z, cost));
            }
        }
        if ok {
            continue;
        }
        if best.as_ref().map_or(true, |b| opts.len() < b.len()) {
            best = Some(opts);
        }
    }
    let Some(mut opts) = best else { return true };
    opts.sort_by_key(|o| o.2);
    for (y, z, cost) in opts {
        if search(p, mask | 1 << y | 1 << z, budget - cost, failed) {
            return true;
        }
    }
    failed.insert(mask);
    false
}

/// Outcome of checking `N(q/p) = ⌈log₂ p⌉ + 2` over all coprime pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub max_p: u64,
    pub pairs_checked: usize,
    /// `(p, q, N(q/p))` where the formula fails.
    pub mismatches: Vec<(u64, u64, usize)>,
}

pub fn ceil_log2(p: u64) -> usize {
    (64 - (p - 1).leading_zeros()) as usize
}

pub fn conjecture_report(max_p: u64) -> Result<ConjectureReport, SoncError> {
    let pairs: Vec<(u64, u64)> =
        (2..=max_p).flat_map(|p| (1..p).filter(move |&q| q.gcd(&p) == 1).map(move |q| (p, q))).collect();
    // N(q/p) = N((p-q)/p) by reflection
    let sizes: Vec<(u64, u64, usize)> = pairs
        .par_iter()
        .filter(|(p, q)| 2 * q <= *p)
        .map(|&(p, q)| minimal_med_seq_size_with_limit(p, q, max_p).map(|n| (p, q, n)))
        .collect::<Result<_, _>>()?;
    let mut mismatches: Vec<(u64, u64, usize)> = sizes
        .iter()
        .flat_map(|&(p, q, n)| [(p, q, n), (p, p - q, n)])
        .filter(|&(p, q, n)| (q != p - q || q == 1) && n != ceil_log2(p) + 2)
        .collect();
    mismatches.sort_unstable();
    mismatches.dedup();
    Ok(ConjectureReport { max_p, pairs_checked: pairs.len(), mismatches })
}

fn lift(a1: &Exponent, a2: &Exponent, p: u64, triples: &[SeqTriple]) -> Vec<MediatedTriple> {
    let at = |s: u64| a1.lerp(a2, &Rational::new(BigInt::from(s), BigInt::from(p)));
    triples.iter().map(|&(u, v, w)| MediatedTriple { u: at(u), v: at(v), w: at(w) }).collect()
}

/// Parameter `t` with `beta = (1-t) a1 + t a2`, if `beta` is on the line.
fn segment_param(a1: &Exponent, a2: &Exponent, beta: &Exponent) -> Option<Rational> {
    if a1.dim() != a2.dim() || a1.dim() != beta.dim() {
        return None;
    }
    let d = a2 - a1;
    let j = d.0.iter().position(|c| !c.is_zero())?;
    let t = (&beta.0[j] - &a1.0[j]) / &d.0[j];
    (a1.lerp(a2, &t) == *beta).then_some(t)
}

fn open_segment_param(a1: &Exponent, a2: &Exponent, beta: &Exponent) -> Result<(u64, u64), SoncError> {
    let t = segment_param(a1, a2, beta).ok_or(SoncError::NotOnSegment)?;
    if !(t.is_positive() && t < Rational::one()) {
        return Err(SoncError::NotOnSegment);
    }
    let p = t.denom().to_u64().ok_or_else(|| SoncError::DenominatorOverflow(format!("segment parameter {t}")))?;
    let q = t.numer().to_u64().ok_or_else(|| SoncError::DenominatorOverflow(format!("segment parameter {t}")))?;
    Ok((p, q))
}

/// `{a1, a2}`-rational mediated set containing `beta`, as triples.
pub fn l_med_set(a1: &Exponent, a2: &Exponent, beta: &Exponent) -> Result<Vec<MediatedTriple>, SoncError> {
    let (p, q) = open_segment_param(a1, a2, beta)?;
    Ok(lift(a1, a2, p, &med_seq(p, q)?))
}

fn check_weights(trellis: &[Exponent], beta: &Exponent, weights: &[Rational]) -> Result<(), SoncError> {
    if trellis.len() < 2 || weights.len() != trellis.len() {
        return Err(SoncError::Invalid("need at least two vertices and one weight per vertex".into()));
    }
    if trellis.iter().any(|a| a.dim() != beta.dim()) {
        return Err(SoncError::Dimension { expected: beta.dim(), found: trellis[0].dim() });
    }
    if !weights.iter().all(Signed::is_positive) {
        return Err(SoncError::Invalid("weights must be strictly positive".into()));
    }
    if weights.iter().sum::<Rational>() != Rational::one() {
        return Err(SoncError::Invalid("weights must sum to 1".into()));
    }
    let mut comb = Exponent::zero(beta.dim());
    for (a, w) in trellis.iter().zip(weights) {
        comb = &comb + &a.scale(w);
    }
    if comb != *beta {
        return Err(SoncError::Invalid("beta is not the weighted combination of the trellis".into()));
    }
    Ok(())
}

fn push_unique(out: &mut Vec<MediatedTriple>, seen: &mut HashSet<Exponent>, ts: Vec<MediatedTriple>) {
    for t in ts {
        if seen.insert(t.u.clone()) {
            out.push(t);
        }
    }
}

/// `A`-rational mediated set containing `beta = Σ weights_i trellis_i`,
/// peeling off the vertices in input order.
pub fn med_set(trellis: &[Exponent], beta: &Exponent, weights: &[Rational]) -> Result<MediatedSet, SoncError> {
    check_weights(trellis, beta, weights)?;
    let m = trellis.len();
    let mut triples = Vec::new();
    let mut seen = HashSet::new();
    let mut cur = beta.clone();
    for k in 0..m - 1 {
        let next = if k == m - 2 {
            trellis[m - 1].clone()
        } else {
            let rest: Rational = weights[k + 1..].iter().sum();
            let mut acc = Exponent::zero(beta.dim());
            for (a, w) in trellis[k + 1..].iter().zip(&weights[k + 1..]) {
                acc = &acc + &a.scale(&(w / &rest));
            }
            acc
        };
        push_unique(&mut triples, &mut seen, l_med_set(&trellis[k], &next, &cur)?);
        cur = next;
    }
    Ok(MediatedSet { trellis: trellis.to_vec(), beta: beta.clone(), triples })
}

/// Mediated set with odd denominators everywhere and even numerators
/// everywhere except at `beta`. The trellis must consist of even lattice
/// points and `beta` must be a lattice point.
pub fn med_set_odd(trellis: &[Exponent], beta: &Exponent, weights: &[Rational]) -> Result<MediatedSet, SoncError> {
    check_weights(trellis, beta, weights)?;
    if !trellis.iter().all(Exponent::is_even) {
        return Err(SoncError::Invalid("trellis points must be even lattice points".into()));
    }
    if !beta.is_integer() {
        return Err(SoncError::Invalid("beta must be a lattice point".into()));
    }
    let mut triples = Vec::new();
    let mut seen = HashSet::new();
    odd_rec(trellis, weights, beta, &mut triples, &mut seen)?;
    Ok(MediatedSet { trellis: trellis.to_vec(), beta: beta.clone(), triples })
}

fn combo(pts: &[Exponent], w: &[Rational]) -> Exponent {
    let mut acc = Exponent::zero(pts[0].dim());
    for (a, x) in pts.iter().zip(w) {
        acc = &acc + &a.scale(x);
    }
    acc
}

fn odd_rec(
    pts: &[Exponent],
    w: &[Rational],
    point: &Exponent,
    out: &mut Vec<MediatedTriple>,
    seen: &mut HashSet<Exponent>,
) -> Result<(), SoncError> {
    if pts.len() == 2 {
        return push_parity_link(&pts[0], &pts[1], point, out, seen);
    }
    let p = w.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let q: Vec<BigInt> = w.iter().map(|x| (x * Rational::from_integer(p.clone())).to_integer()).collect();
    let pick = if p.is_even() { q.iter().position(Integer::is_odd) } else { q.iter().position(Integer::is_even) };
    match pick {
        Some(i) => {
            let rest_w = Rational::one() - &w[i];
            let (rp, rw): (Vec<Exponent>, Vec<Rational>) = (0..pts.len())
                .filter(|&j| j != i)
                .map(|j| (pts[j].clone(), &w[j] / &rest_w))
                .unzip();
            let sub = combo(&rp, &rw);
            push_parity_link(&pts[i], &sub, point, out, seen)?;
            odd_rec(&rp, &rw, &sub, out, seen)
        }
        None => {
            // p odd and every q_i odd: split through the first two vertices
            let merged = &w[0] + &w[1];
            let tail_p = &pts[2..];
            let tail_w = &w[2..];
            let p1: Vec<Exponent> = std::iter::once(pts[0].clone()).chain(tail_p.iter().cloned()).collect();
            let p2: Vec<Exponent> = std::iter::once(pts[1].clone()).chain(tail_p.iter().cloned()).collect();
            let ww: Vec<Rational> = std::iter::once(merged).chain(tail_w.iter().cloned()).collect();
            let b1 = combo(&p1, &ww);
            let b2 = combo(&p2, &ww);
            push_parity_link(&b1, &b2, point, out, seen)?;
            odd_rec(&p1, &ww, &b1, out, seen)?;
            odd_rec(&p2, &ww, &b2, out, seen)
        }
    }
}

fn push_parity_link(
    a1: &Exponent,
    a2: &Exponent,
    point: &Exponent,
    out: &mut Vec<MediatedTriple>,
    seen: &mut HashSet<Exponent>,
) -> Result<(), SoncError> {
    let ts = parity_link(a1, a2, point)?;
    push_unique(out, seen, ts);
    Ok(())
}

fn lcm_denoms<'a>(pts: impl IntoIterator<Item = &'a Exponent>) -> BigInt {
    pts.into_iter().fold(BigInt::one(), |acc, e| acc.lcm(&e.denominator_lcm()))
}

/// Segment construction on the lattice `(2/r) Z^n`, keeping every new point
/// of even type. Endpoints must have odd denominators and even numerators.
pub fn parity_link(a1: &Exponent, a2: &Exponent, point: &Exponent) -> Result<Vec<MediatedTriple>, SoncError> {
    let t = segment_param(a1, a2, point).ok_or(SoncError::NotOnSegment)?;
    if !(t.is_positive() && t < Rational::one()) {
        return Err(SoncError::NotOnSegment);
    }
    let r = Rational::from_integer(lcm_denoms([a1, a2, point]));
    if r.numer().is_even() {
        return Err(SoncError::Invalid("parity link needs odd denominators".into()));
    }
    let even_type = point.scale(&r).is_even();
    if even_type {
        return even_lift(a1, a2, &t, &r);
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let (near, far, t_far) = if t <= half { (a1, a2, t.clone()) } else { (a2, a1, Rational::one() - &t) };
    let reflected = &point.double() - near;
    let mut out = vec![MediatedTriple { u: point.clone(), v: near.clone(), w: reflected.clone() }];
    if reflected != *far {
        let t2 = int(2) * t_far;
        out.extend(even_lift(near, far, &t2, &r)?);
    }
    Ok(out)
}

/// Lift of a 1-D sequence along the lattice points `a1 + s (a2 - a1)/g`
/// where `g` counts the `(2/r)`-lattice steps across the segment.
fn even_lift(a1: &Exponent, a2: &Exponent, t: &Rational, r: &Rational) -> Result<Vec<MediatedTriple>, SoncError> {
    let half_r = r / int(2);
    let diff = (a2 - a1).scale(&half_r);
    if !diff.is_integer() {
        return Err(SoncError::Invalid("endpoints are not on the scaled even lattice".into()));
    }
    let g = diff.0.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
    let j0 = t * Rational::from_integer(g.clone());
    if !j0.is_integer() {
        return Err(SoncError::Invalid("point is not on the scaled even lattice".into()));
    }
    let overflow = || SoncError::DenominatorOverflow(format!("lattice step count {g}"));
    let gu = g.to_u64().ok_or_else(overflow)?;
    let ju = j0.to_integer().to_u64().ok_or_else(overflow)?;
    Ok(lift(a1, a2, gu, &med_seq(gu, ju)?))
}

/// Checks the closure property and that `beta` is among the midpoints.
pub fn is_rational_mediated_set(ms: &MediatedSet) -> bool {
    let us: HashSet<&Exponent> = ms.triples.iter().map(|t| &t.u).collect();
    let known = |e: &Exponent| us.contains(e) || ms.trellis.contains(e);
    us.contains(&ms.beta) && ms.triples.iter().all(|t| t.is_valid() && known(&t.v) && known(&t.w))
}

/// Odd denominators on every point, even numerators on every point but `beta`.
pub fn has_odd_parity(ms: &MediatedSet) -> bool {
    ms.points().iter().all(|e| e.has_odd_denominators() && (*e == ms.beta || e.has_even_numerators()))
}

/// True iff every point of `ms` has nonnegative barycentric coordinates
/// with respect to its trellis.
pub fn inside_trellis(ms: &MediatedSet) -> bool {
    ms.points().iter().all(|e| {
        crate::qlin::barycentric(&ms.trellis, e).is_some_and(|l| l.iter().all(|x| !x.is_negative()))
    })
}
