//! Sparse polynomials with rational exponents, support partitioning, PN
//! conversion and circuit polynomials.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exponent::{int, parse_rational, rational_to_f64, rational_str, Exponent, Rational};
use crate::qlin;
use crate::SoncError;

/// Sparse multivariate polynomial `sum c_a x^a`. No stored coefficient is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly {
    n: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl SparsePoly {
    pub fn new(n: usize) -> Self {
        SparsePoly { n, terms: BTreeMap::new() }
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Exponent, f64)>) -> Self {
        let mut p = SparsePoly::new(n);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Adds `c x^e`, merging with an existing term.
    pub fn add_term(&mut self, e: Exponent, c: f64) {
        assert_eq!(e.dim(), self.n, "exponent dimension mismatch");
        let v = self.terms.entry(e.clone()).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn set_coeff(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, f64> {
        &self.terms
    }

    pub fn coeff(&self, e: &Exponent) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant(&self) -> f64 {
        self.coeff(&Exponent::zero(self.n))
    }

    pub fn has_integer_exponents(&self) -> bool {
        self.terms.keys().all(Exponent::is_integer)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Total degree (largest coordinate sum over the support).
    pub fn degree(&self) -> Rational {
        self.terms.keys().map(|e| e.0.iter().sum::<Rational>()).max().unwrap_or_else(Rational::zero)
    }

    /// Evaluates with real powers. Negative bases are only allowed under
    /// integer exponents.
    pub fn eval(&self, x: &[f64]) -> Result<f64, SoncError> {
        if x.len() != self.n {
            return Err(SoncError::Dimension { expected: self.n, found: x.len() });
        }
        let mut total = 0.0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (xi, a) in x.iter().zip(&e.0) {
                if a.is_zero() {
                    continue;
                }
                if a.is_integer() {
                    t *= xi.powi(a.to_i32().ok_or(SoncError::ExponentTooLarge)?);
                } else if *xi < 0.0 {
                    return Err(SoncError::NegativeBase);
                } else {
                    t *= xi.powf(rational_to_f64(a));
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// `f(x_1^r, ..., x_n^r)`.
    pub fn substitute_power(&self, r: u64) -> SparsePoly {
        assert!(r >= 1, "power must be positive");
        let s = int(r as i64);
        SparsePoly { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.scale(&s), *c)).collect() }
    }

    /// Splits the support into `Lambda` (even points with positive
    /// coefficients) and `Gamma` (the rest).
    pub fn partition_support(&self) -> Result<SupportPartition, SoncError> {
        if !self.has_integer_exponents() {
            return Err(SoncError::NonIntegerExponent);
        }
        let mut lambda = BTreeMap::new();
        let mut gamma = BTreeMap::new();
        for (e, &c) in &self.terms {
            if e.is_even() && c > 0.0 {
                lambda.insert(e.clone(), c);
            } else {
                gamma.insert(e.clone(), -c);
            }
        }
        Ok(SupportPartition { n: self.n, lambda, gamma })
    }

    /// Associated PN-polynomial: every odd inner term with positive
    /// coefficient gets its sign flipped.
    pub fn to_pn(&self) -> (SparsePoly, SignMap) {
        let mut out = self.clone();
        let mut flipped = BTreeSet::new();
        for (e, &c) in &self.terms {
            if !e.is_even() && c > 0.0 {
                out.terms.insert(e.clone(), -c);
                flipped.insert(e.clone());
            }
        }
        (out, SignMap { flipped })
    }

    pub fn to_doc(&self) -> PolyDoc {
        PolyDoc {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| TermDoc { exponent: e.clone(), coeff: *c }).collect(),
        }
    }

    pub fn from_doc(doc: &PolyDoc) -> Result<SparsePoly, SoncError> {
        let mut p = SparsePoly::new(doc.n);
        for t in &doc.terms {
            if t.exponent.dim() != doc.n {
                return Err(SoncError::Dimension { expected: doc.n, found: t.exponent.dim() });
            }
            if !t.coeff.is_finite() {
                return Err(SoncError::Parse { pos: 0, msg: "non-finite coefficient".into() });
            }
            p.add_term(t.exponent.clone(), t.coeff);
        }
        Ok(p)
    }
}

/// Structured form: `{"n": 2, "terms": [{"exponent": ["1/2", "3"], "coeff": -1.0}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolyDoc {
    pub n: usize,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponent: Exponent,
    pub coeff: f64,
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, &c)) in self.terms.iter().enumerate() {
            let mag = if k == 0 {
                c
            } else {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
                c.abs()
            };
            let factors: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(i, a)| {
                    if a.is_one() {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, crate::exponent::fmt_rational(a))
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{}", factors.join("*"))?;
            } else if mag == -1.0 {
                write!(f, "-{}", factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Lexer<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> SoncError {
        SoncError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn digits(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("")
    }

    /// Unsigned real literal, optionally followed by `/den`.
    fn coefficient(&mut self) -> Result<f64, SoncError> {
        self.skip_ws();
        let start = self.pos;
        self.digits();
        if self.s.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            self.digits();
        }
        if matches!(self.s.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.s.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits().is_empty() {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
        let mut v: f64 = text.parse().map_err(|_| SoncError::Parse { pos: start, msg: "bad number".into() })?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let at = self.pos;
            let d: f64 = self.digits().parse().map_err(|_| SoncError::Parse { pos: at, msg: "bad denominator".into() })?;
            if d == 0.0 {
                return Err(SoncError::Parse { pos: at, msg: "zero denominator".into() });
            }
            v /= d;
        }
        Ok(v)
    }

    fn exponent(&mut self) -> Result<Rational, SoncError> {
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        self.skip_ws();
        let start = self.pos;
        self.digits();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            self.digits();
        }
        let text: String =
            std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("").chars().filter(|c| !c.is_whitespace()).collect();
        let r = parse_rational(&text).ok_or_else(|| SoncError::Parse { pos: start, msg: "bad exponent".into() })?;
        if paren {
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
        }
        Ok(r)
    }
}

/// Parses the text grammar: terms separated by `+`/`-`, each an optional
/// coefficient (`2.5`, `3/4`, `1e-3`) times variables `x1..xn` with optional
/// powers `^k`, `^p/q` or `^(p/q)`; `*` is optional.
pub fn parse_poly(text: &str, n: usize) -> Result<SparsePoly, SoncError> {
    let mut lx = Lexer { s: text.as_bytes(), pos: 0 };
    let mut p = SparsePoly::new(n);
    let mut first = true;
    loop {
        let mut sign = 1.0;
        match lx.peek() {
            None if first => return Err(lx.err("empty polynomial")),
            None => break,
            Some(b'+') => {
                lx.pos += 1;
            }
            Some(b'-') => {
                lx.pos += 1;
                sign = -1.0;
            }
            Some(_) if first => {}
            Some(_) => return Err(lx.err("expected '+' or '-'")),
        }
        first = false;
        let mut coeff = 1.0;
        let mut saw_factor = false;
        if matches!(lx.peek(), Some(b'0'..=b'9' | b'.')) {
            coeff = lx.coefficient()?;
            saw_factor = true;
        }
        let mut e = vec![Rational::zero(); n];
        loop {
            let mut star = false;
            if lx.peek() == Some(b'*') {
                if !saw_factor {
                    return Err(lx.err("unexpected '*'"));
                }
                lx.pos += 1;
                star = true;
            }
            match lx.peek() {
                Some(b'x') => {
                    lx.pos += 1;
                    let at = lx.pos;
                    let idx: usize = lx.digits().parse().map_err(|_| SoncError::Parse { pos: at, msg: "expected variable index".into() })?;
                    if idx == 0 || idx > n {
                        return Err(SoncError::Parse { pos: at, msg: format!("variable x{idx} outside x1..x{n}") });
                    }
                    let pow = if lx.peek() == Some(b'^') {
                        lx.pos += 1;
                        lx.exponent()?
                    } else {
                        Rational::one()
                    };
                    e[idx - 1] += pow;
                    saw_factor = true;
                }
                _ if star => return Err(lx.err("expected variable after '*'")),
                _ => break,
            }
        }
        if !saw_factor {
            return Err(lx.err("expected coefficient or variable"));
        }
        if !coeff.is_finite() {
            return Err(lx.err("coefficient out of range"));
        }
        p.add_term(Exponent(e), sign * coeff);
    }
    Ok(p)
}

/// Largest variable index mentioned in `text` (at least 1).
pub fn infer_nvars(text: &str) -> usize {
    let b = text.as_bytes();
    let mut best = 1;
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' {
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(v) = text[start..j].parse::<usize>() {
                best = best.max(v);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// `Lambda(f)` and `Gamma(f)` with their coefficients: `f = sum_Lambda c_a x^a - sum_Gamma d_b x^b`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportPartition {
    pub n: usize,
    pub lambda: BTreeMap<Exponent, f64>,
    /// `d_b`, i.e. the negated stored coefficient.
    pub gamma: BTreeMap<Exponent, f64>,
}

impl SupportPartition {
    pub fn reassemble(&self) -> SparsePoly {
        let mut p = SparsePoly::new(self.n);
        for (e, c) in &self.lambda {
            p.add_term(e.clone(), *c);
        }
        for (e, d) in &self.gamma {
            p.add_term(e.clone(), -*d);
        }
        p
    }

    pub fn lambda_points(&self) -> Vec<Exponent> {
        self.lambda.keys().cloned().collect()
    }

    pub fn gamma_points(&self) -> Vec<Exponent> {
        self.gamma.keys().cloned().collect()
    }
}

/// Exponents whose sign was flipped by [`SparsePoly::to_pn`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMap {
    pub flipped: BTreeSet<Exponent>,
}

impl SignMap {
    pub fn is_empty(&self) -> bool {
        self.flipped.is_empty()
    }

    /// Negates the coefficients at the flipped exponents.
    pub fn apply(&self, f: &SparsePoly) -> SparsePoly {
        let mut out = f.clone();
        for e in &self.flipped {
            let c = f.coeff(e);
            out.set_coeff(e.clone(), -c);
        }
        out
    }
}

/// A circuit polynomial `sum c_a x^a - d x^beta` (or a monomial square when
/// `beta` is `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitData {
    pub trellis: Vec<Exponent>,
    pub coefficients: Vec<f64>,
    pub beta: Option<Exponent>,
    pub d: f64,
    #[serde(with = "rational_str")]
    pub barycentric: Vec<Rational>,
}

impl CircuitData {
    /// Builds circuit data from its parts, computing the barycentric
    /// coordinates exactly. Fails unless the trellis is an affinely
    /// independent set of even points with positive coefficients and `beta`
    /// lies in its relative interior.
    pub fn new(trellis: Vec<Exponent>, coefficients: Vec<f64>, beta: Exponent, d: f64) -> Result<Self, SoncError> {
        if trellis.len() != coefficients.len() || trellis.len() < 2 {
            return Err(SoncError::NotCircuit("trellis and coefficients must match, at least two vertices".into()));
        }
        if !trellis.iter().all(Exponent::is_even) || !coefficients.iter().all(|c| *c > 0.0) {
            return Err(SoncError::NotCircuit("vertices must be even with positive coefficients".into()));
        }
        if !qlin::affinely_independent(&trellis) {
            return Err(SoncError::NotCircuit("vertices are affinely dependent".into()));
        }
        let lam = qlin::barycentric(&trellis, &beta)
            .filter(|l| l.iter().all(Signed::is_positive))
            .ok_or_else(|| SoncError::NotCircuit("beta is not in the relative interior".into()))?;
        Ok(CircuitData { trellis, coefficients, beta: Some(beta), d, barycentric: lam })
    }

    pub fn to_poly(&self) -> SparsePoly {
        let n = self.trellis.first().map_or(0, Exponent::dim);
        let mut p = SparsePoly::from_terms(n, self.trellis.iter().cloned().zip(self.coefficients.iter().copied()));
        if let Some(b) = &self.beta {
            p.add_term(b.clone(), -self.d);
        }
        p
    }

    pub fn is_monomial_square(&self) -> bool {
        self.beta.is_none()
    }
}

/// Recognizes circuit polynomials (and monomial squares).
pub fn is_circuit(f: &SparsePoly) -> Option<CircuitData> {
    if !f.has_integer_exponents() || f.is_empty() {
        return None;
    }
    let terms: Vec<(&Exponent, f64)> = f.terms().iter().map(|(e, c)| (e, *c)).collect();
    if terms.len() == 1 {
        let (e, c) = terms[0];
        return (e.is_even() && c > 0.0).then(|| CircuitData {
            trellis: vec![e.clone()],
            coefficients: vec![c],
            beta: None,
            d: 0.0,
            barycentric: vec![Rational::one()],
        });
    }
    let outer: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].0.is_even() && terms[i].1 > 0.0).collect();
    let candidates: Vec<usize> = match terms.len() - outer.len() {
        0 => outer.clone(),
        1 => (0..terms.len()).filter(|i| !outer.contains(i)).collect(),
        _ => return None,
    };
    for b in candidates {
        let (tr, co): (Vec<Exponent>, Vec<f64>) =
            (0..terms.len()).filter(|&i| i != b).map(|i| (terms[i].0.clone(), terms[i].1)).unzip();
        if let Ok(c) = CircuitData::new(tr, co, terms[b].0.clone(), -terms[b].1) {
            return Some(c);
        }
    }
    None
}

/// `Theta = prod (c_a / lambda_a)^lambda_a`.
pub fn circuit_number(c: &CircuitData) -> Result<f64, SoncError> {
    if c.is_monomial_square() {
        return Err(SoncError::NotCircuit("monomial square has no circuit number".into()));
    }
    let ratios: Vec<f64> =
        c.coefficients.iter().zip(&c.barycentric).map(|(ca, l)| ca / rational_to_f64(l)).collect();
    // equal ratios give Theta exactly
    if ratios.iter().all(|r| *r == ratios[0]) {
        return Ok(ratios[0]);
    }
    let log: f64 = ratios.iter().zip(&c.barycentric).map(|(r, l)| rational_to_f64(l) * r.ln()).sum();
    Ok(log.exp())
}

/// Default relative tolerance of [`circuit_nonneg`].
pub const CIRCUIT_TOL: f64 = 1e-9;

/// Nonnegativity criterion: `|d| <= Theta` for odd `beta`, `d <= Theta` for even `beta`.
pub fn circuit_nonneg(c: &CircuitData) -> bool {
    circuit_nonneg_tol(c, CIRCUIT_TOL)
}

pub fn circuit_nonneg_tol(c: &CircuitData, rel_tol: f64) -> bool {
    let Some(beta) = &c.beta else { return c.coefficients.iter().all(|v| *v >= 0.0) };
    let Ok(theta) = circuit_number(c) else { return false };
    let bound = theta * (1.0 + rel_tol);
    if beta.is_even() {
        c.d <= bound
    } else {
        c.d.abs() <= bound
    }
}

/// Coefficient-wise `a - b`, max-abs entry.
pub fn max_abs_difference(a: &SparsePoly, b: &SparsePoly) -> f64 {
    let keys: BTreeSet<&Exponent> = a.terms().keys().chain(b.terms().keys()).collect();
    keys.into_iter().map(|e| (a.coeff(e) - b.coeff(e)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn motzkin() -> SparsePoly {
        parse_poly("x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2", 2).unwrap()
    }

    #[test]
    fn parses_motzkin() {
        let f = motzkin();
        assert_eq!(f.len(), 4);
        assert_eq!(f.coeff(&Exponent::from_ints(&[2, 2])), -3.0);
        assert_eq!(f.constant(), 1.0);
    }

    #[test]
    fn zero_and_merge() {
        assert!(parse_poly("0", 3).unwrap().is_empty());
        let p = parse_poly("2*x1 + 3*x1", 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&Exponent::from_ints(&[1])), 5.0);
    }

    #[test]
    fn grammar_variants() {
        let a = parse_poly("3/4 x1^(1/2) x2 - x2^2/3", 2).unwrap();
        assert_eq!(a.coeff(&Exponent(vec![crate::exponent::rat(1, 2), int(1)])), 0.75);
        assert_eq!(a.coeff(&Exponent(vec![int(0), crate::exponent::rat(2, 3)])), -1.0);
        let b = parse_poly("-x1 + 1e-3*x1^2", 1).unwrap();
        assert_eq!(b.coeff(&Exponent::from_ints(&[2])), 1e-3);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_poly("x1 + * x2", 2) {
            Err(SoncError::Parse { pos, .. }) => assert!(pos >= 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_poly("x3", 2), Err(SoncError::Parse { .. })));
        assert!(parse_poly("", 2).is_err());
        assert!(parse_poly("x1 x2 +", 2).is_err());
    }

    #[test]
    fn display_round_trips() {
        for text in ["x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2", "-x1^1/3 + 0.1*x2", "0", "-2.5"] {
            let p = parse_poly(text, 2).unwrap();
            let q = parse_poly(&p.to_string(), 2).unwrap();
            assert_eq!(p, q, "{text}");
        }
    }

    #[test]
    fn partitions_examples() {
        let part = motzkin().partition_support().unwrap();
        assert_eq!(part.lambda.len(), 3);
        assert_eq!(part.gamma_points(), vec![Exponent::from_ints(&[2, 2])]);
        assert_eq!(part.gamma[&Exponent::from_ints(&[2, 2])], 3.0);

        let neg = parse_poly("-x1^2", 1).unwrap().partition_support().unwrap();
        assert!(neg.lambda.is_empty());
        assert_eq!(neg.gamma_points(), vec![Exponent::from_ints(&[2])]);

        let f = parse_poly("50*x1^4*x2^4 + x1^4 + 3*x2^4 + 800 - 100*x1*x2^2 - 100*x1^2*x2", 2).unwrap();
        let part = f.partition_support().unwrap();
        assert_eq!(part.lambda.len(), 4);
        assert_eq!(part.gamma_points(), vec![Exponent::from_ints(&[1, 2]), Exponent::from_ints(&[2, 1])]);
        assert_eq!(part.reassemble(), f);
    }

    #[test]
    fn partition_rejects_fractional_exponents() {
        let p = parse_poly("x1^1/2", 1).unwrap();
        assert!(matches!(p.partition_support(), Err(SoncError::NonIntegerExponent)));
    }

    #[test]
    fn pn_conversion() {
        let f = parse_poly("1 + x1^4 + x2^4 - x1*x2^2 - x1^2*x2 + 5*x1*x2", 2).unwrap();
        let (pn, sm) = f.to_pn();
        assert_eq!(pn, parse_poly("1 + x1^4 + x2^4 - x1*x2^2 - x1^2*x2 - 5*x1*x2", 2).unwrap());
        assert_eq!(sm.flipped.iter().cloned().collect::<Vec<_>>(), vec![Exponent::from_ints(&[1, 1])]);
        assert_eq!(sm.apply(&pn), f);

        let (same, sm) = pn.to_pn();
        assert_eq!(same, pn);
        assert!(sm.is_empty());

        let g = parse_poly("x1^2 - 2*x1*x2 + x2^2", 2).unwrap();
        let (h, sm) = g.to_pn();
        assert_eq!(h, g);
        assert!(sm.is_empty());
    }

    #[test]
    fn power_substitution() {
        let m3 = motzkin().substitute_power(3);
        assert_eq!(m3, parse_poly("x1^12*x2^6 + x1^6*x2^12 + 1 - 3*x1^6*x2^6", 2).unwrap());
        let f = SparsePoly::from_terms(2, [(Exponent(vec![crate::exponent::rat(2, 3), crate::exponent::rat(4, 3)]), 1.0)]);
        assert!(f.substitute_power(3).terms().contains_key(&Exponent::from_ints(&[2, 4])));
        assert_eq!(motzkin().substitute_power(1), motzkin());
    }

    #[test]
    fn evaluation() {
        assert_eq!(motzkin().eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(motzkin().eval(&[0.0, 0.0]).unwrap(), 1.0);
        let sq = parse_poly("x1^1/2", 1).unwrap();
        assert_eq!(sq.eval(&[4.0]).unwrap(), 2.0);
        assert!(matches!(sq.eval(&[-4.0]), Err(SoncError::NegativeBase)));
        assert_eq!(parse_poly("x1^3", 1).unwrap().eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn circuit_recognition() {
        let c = is_circuit(&motzkin()).unwrap();
        assert_eq!(c.barycentric, vec![crate::exponent::rat(1, 3); 3]);
        assert_eq!(c.beta, Some(Exponent::from_ints(&[2, 2])));
        assert_eq!(c.d, 3.0);

        let sq = is_circuit(&parse_poly("x1^2*x2^2", 2).unwrap()).unwrap();
        assert!(sq.is_monomial_square());

        assert!(is_circuit(&parse_poly("x1^4 + x2^4 - x1^2*x2^2 - 1", 2).unwrap()).is_none());
    }

    #[test]
    fn circuit_numbers() {
        let c = is_circuit(&motzkin()).unwrap();
        assert_eq!(circuit_number(&c).unwrap(), 3.0);
        assert!(circuit_nonneg(&c));
        let mut worse = c.clone();
        worse.d = 3.001;
        assert!(!circuit_nonneg(&worse));

        let g1 = is_circuit(&parse_poly("20*x1^4*x2^4 + x1^4 + 400 - 100*x1^2*x2", 2).unwrap()).unwrap();
        let theta = circuit_number(&g1).unwrap();
        let oracle = 80f64.powf(0.25) * 4f64.powf(0.25) * 800f64.sqrt();
        assert!((theta - oracle).abs() < 1e-9 * oracle);
        assert!((theta - 119.6279).abs() < 1e-4);

        let unit = CircuitData::new(
            vec![Exponent::from_ints(&[0]), Exponent::from_ints(&[2])],
            vec![0.5, 0.5],
            Exponent::from_ints(&[1]),
            1.0,
        )
        .unwrap();
        assert_eq!(circuit_number(&unit).unwrap(), 1.0);

        let mut odd = unit.clone();
        odd.d = -1.0;
        assert!(circuit_nonneg(&odd));
        assert!(circuit_number(&sq_circuit()).is_err());
    }

    fn sq_circuit() -> CircuitData {
        is_circuit(&parse_poly("x1^2", 1).unwrap()).unwrap()
    }

    #[test]
    fn structured_document_round_trip() {
        let f = parse_poly("x1^1/2*x2 - 3", 2).unwrap();
        let json = serde_json::to_string(&f.to_doc()).unwrap();
        assert!(json.contains("\"1/2\""));
        let back = SparsePoly::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn infers_dimension() {
        assert_eq!(infer_nvars("x1^2 + x12"), 12);
        assert_eq!(infer_nvars("3"), 1);
    }
}
