//! Sum-of-binomial-squares certificates.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cover::Cover;
use crate::exponent::Exponent;
use crate::medseq::MediatedSet;
use crate::poly::{SignMap, SparsePoly};
use crate::SoncError;

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

/// `weight * (p x^half_v - q x^half_w)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialSquare {
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub weight: f64,
    pub p: f64,
    pub q: f64,
    pub half_v: Exponent,
    pub half_w: Exponent,
}

impl BinomialSquare {
    pub fn new(p: f64, q: f64, half_v: Exponent, half_w: Exponent) -> Self {
        BinomialSquare { weight: 1.0, p, q, half_v, half_w }
    }

    pub fn cross_exponent(&self) -> Exponent {
        &self.half_v + &self.half_w
    }

    /// The three monomials `(coeff, exponent)` of the expansion.
    pub fn expand(&self) -> [(f64, Exponent); 3] {
        [
            (self.weight * self.p * self.p, self.half_v.double()),
            (-2.0 * self.weight * self.p * self.q, self.cross_exponent()),
            (self.weight * self.q * self.q, self.half_w.double()),
        ]
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let t = self.p * pow(x, &self.half_v) - self.q * pow(x, &self.half_w);
        self.weight * t * t
    }
}

/// `coeff * x^exponent` with `coeff >= 0`; `exponent` is twice the rational
/// point `exponent / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialSquare {
    pub coeff: f64,
    pub exponent: Exponent,
}

/// Interior-point statistics kept alongside a certificate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: String,
    pub iterations: usize,
    pub objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<Cover>,
    #[serde(default)]
    pub mediated_sets: Vec<MediatedSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverStats>,
}

/// `sign_map.apply(f) - xi = sum squares + sum monomials`.
///
/// An empty `sign_map` means the certificate is for `f` itself. A nonempty
/// one means it certifies the PN-polynomial of `f`, which bounds `f` from
/// below all the same.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub xi: f64,
    pub squares: Vec<BinomialSquare>,
    pub monomials: Vec<MonomialSquare>,
    #[serde(default)]
    pub sign_map: SignMap,
    #[serde(default)]
    pub meta: CertificateMeta,
}

impl Certificate {
    pub fn constant(xi: f64) -> Self {
        Certificate { xi, squares: Vec::new(), monomials: Vec::new(), sign_map: SignMap::default(), meta: Default::default() }
    }

    /// Floating-point expansion of the sum of squares and monomials.
    pub fn expand(&self, n: usize) -> SparsePoly {
        let mut p = SparsePoly::new(n);
        for s in &self.squares {
            for (c, e) in s.expand() {
                p.add_term(e, c);
            }
        }
        for m in &self.monomials {
            p.add_term(m.exponent.clone(), m.coeff);
        }
        p
    }

    /// The polynomial the certificate claims equals the expansion.
    pub fn target(&self, f: &SparsePoly) -> SparsePoly {
        let mut t = self.sign_map.apply(f);
        t.add_term(Exponent::zero(f.nvars()), -self.xi);
        t
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.squares.iter().map(|s| s.eval(x)).sum::<f64>()
            + self.monomials.iter().map(|m| m.coeff * pow(x, &m.exponent)).sum::<f64>()
    }

    pub fn to_json(&self) -> Result<String, SoncError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Certificate, SoncError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), SoncError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Certificate, SoncError> {
        Certificate::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `x^e` on the positive orthant.
pub(crate) fn pow(x: &[f64], e: &Exponent) -> f64 {
    x.iter()
        .zip(e.to_f64())
        .map(|(xi, ei)| if ei == 0.0 { 1.0 } else { xi.powf(ei) })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::rat;
    use crate::poly::parse_poly;

    #[test]
    fn expansion_of_one_square() {
        let s = BinomialSquare::new(1.0, 1.0, Exponent::zero(2), Exponent::from_ints(&[1, 2]));
        let mut c = Certificate::constant(0.0);
        c.squares.push(s);
        assert_eq!(c.expand(2), parse_poly("1 - 2*x1*x2^2 + x1^2*x2^4", 2).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut c = Certificate::constant(-1.5);
        c.squares.push(BinomialSquare {
            weight: 2.0,
            p: 1.0,
            q: -0.5,
            half_v: Exponent(vec![rat(1, 3), rat(2, 3)]),
            half_w: Exponent::from_ints(&[0, 1]),
        });
        c.monomials.push(MonomialSquare { coeff: 0.25, exponent: Exponent::from_ints(&[2, 0]) });
        let text = c.to_json().unwrap();
        assert!(text.contains("\"1/3\""));
        assert_eq!(Certificate::from_json(&text).unwrap(), c);
    }

    #[test]
    fn weight_defaults_to_one() {
        let text = r#"{"xi":0,"squares":[{"p":1,"q":2,"half_v":["0"],"half_w":["1"]}],"monomials":[]}"#;
        let c = Certificate::from_json(text).unwrap();
        assert_eq!(c.squares[0].weight, 1.0);
        assert!((c.eval(&[2.0]) - 9.0).abs() < 1e-12);
    }
}
