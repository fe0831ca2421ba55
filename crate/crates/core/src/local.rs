//! Multi-start local minimization, giving an upper bound on the global
//! minimum.

use nalgebra::{DMatrix, DVector};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::poly::SparsePoly;
use crate::SoncError;

pub const DEFAULT_STARTS: usize = 32;

const GRAD_TOL: f64 = 1e-10;
const DESCENT_ITERS: usize = 100;
const NEWTON_ITERS: usize = 200;
const DIVERGED: f64 = 1e6;

struct Dense {
    n: usize,
    terms: Vec<(f64, Vec<i32>)>,
}

impl Dense {
    fn new(f: &SparsePoly) -> Result<Self, SoncError> {
        if !f.has_integer_exponents() {
            return Err(SoncError::NonIntegerExponent);
        }
        let mut terms = Vec::with_capacity(f.len());
        for (e, &c) in f.terms() {
            let mut v = Vec::with_capacity(e.dim());
            for x in e.coords() {
                if x.is_negative() {
                    return Err(SoncError::Invalid("negative exponent".into()));
                }
                v.push(x.to_integer().try_into().map_err(|_| SoncError::ExponentTooLarge)?);
            }
            terms.push((c, v));
        }
        Ok(Dense { n: f.nvars(), terms })
    }

    fn pow(x: f64, k: i32) -> f64 {
        if k <= 0 {
            1.0
        } else {
            x.powi(k)
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, e)| c * x.iter().zip(e).map(|(xi, &k)| Self::pow(*xi, k)).product::<f64>()).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (c, e) in &self.terms {
            for i in 0..self.n {
                if e[i] == 0 {
                    continue;
                }
                let mut m = c * e[i] as f64;
                for (j, (&xj, &k)) in x.iter().zip(e).enumerate() {
                    m *= Self::pow(xj, if j == i { k - 1 } else { k });
                }
                g[i] += m;
            }
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for (c, e) in &self.terms {
            for i in 0..self.n {
                for j in i..self.n {
                    let mut d = e.clone();
                    let mut m = *c;
                    m *= d[i] as f64;
                    d[i] -= 1;
                    m *= d[j] as f64;
                    d[j] -= 1;
                    if m == 0.0 {
                        continue;
                    }
                    m *= x.iter().zip(&d).map(|(xk, &k)| Self::pow(*xk, k)).product::<f64>();
                    h[(i, j)] += m;
                    if i != j {
                        h[(j, i)] += m;
                    }
                }
            }
        }
        h
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn finite(x: &[f64], fx: f64) -> bool {
    fx.is_finite() && x.iter().all(|v| v.is_finite() && v.abs() <= DIVERGED)
}

/// Gradient descent with Armijo backtracking, then damped Newton steps
/// (gradient steps where the Hessian is not positive definite). `None`
/// when the run diverges.
fn descend(p: &Dense, mut x: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let mut fx = p.value(&x);
    for _ in 0..DESCENT_ITERS {
        let g = p.gradient(&x);
        let gg = norm2(&g);
        if gg.sqrt() < GRAD_TOL {
            break;
        }
        let mut t = 1.0 / (1.0 + gg.sqrt());
        let mut moved = false;
        while t > 1e-18 {
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let fy = p.value(&y);
            if fy <= fx - 1e-4 * t * gg {
                x = y;
                fx = fy;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved || !finite(&x, fx) {
            break;
        }
    }
    if !finite(&x, fx) {
        return None;
    }
    for _ in 0..NEWTON_ITERS {
        let g = p.gradient(&x);
        let gv = DVector::from_vec(g.clone());
        let newton = p.hessian(&x).cholesky().map(|c| c.solve(&gv)).filter(|d| d.iter().all(|v| v.is_finite()));
        let d: Vec<f64> = match &newton {
            Some(d) => d.iter().copied().collect(),
            None => g.clone(),
        };
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if slope <= 0.0 {
            break;
        }
        let mut t = if newton.is_some() { 1.0 } else { 1.0 / (1.0 + norm2(&g).sqrt()) };
        let mut moved = false;
        while t > 1e-18 {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - t * b).collect();
            let fy = p.value(&y);
            if fy <= fx - 1e-4 * t * slope {
                moved = finite(&y, fy);
                if moved {
                    x = y;
                    fx = fy;
                }
                break;
            }
            t *= 0.5;
        }
        if !moved || t * norm2(&d).sqrt() < 1e-10 {
            break;
        }
    }
    Some((x, fx))
}

/// Best local minimum value from the all-ones point and `starts` points
/// drawn uniformly from `[-2, 2]^n`.
pub fn local_upper_bound(f: &SparsePoly, starts: usize, seed: u64) -> Result<f64, SoncError> {
    local_minimizer(f, starts, seed).map(|(_, v)| v)
}

/// Like [`local_upper_bound`], also returning the point attaining it.
pub fn local_minimizer(f: &SparsePoly, starts: usize, seed: u64) -> Result<(Vec<f64>, f64), SoncError> {
    let p = Dense::new(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![vec![1.0; p.n]];
    for _ in 0..starts {
        points.push((0..p.n).map(|_| rng.gen_range(-2.0..=2.0)).collect());
    }
    let mut best = (points[0].clone(), p.value(&points[0]));
    for x0 in points {
        if let Some((x, v)) = descend(&p, x0) {
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    Ok(best)
}
