//! Dense two-phase tableau simplex with Bland's rule. Meant for the small
//! barycentric LPs of the cover step, where a vertex solution is required.

use crate::{ConeKind, ConicError, ConicProblem, SolveResult, SolveStatus};

const EPS: f64 = 1e-9;

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.width + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width + 1;
        let pv = self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] /= pv;
        }
        let prow: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.m {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for c in 0..w {
                    self.t[r * w + c] -= f * prow[c];
                }
            }
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Maximizes `cost^T x` over the columns flagged in `allowed`.
    /// Returns `false` when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.width {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let z: f64 = (0..self.m).map(|r| cost[self.basis[r]] * self.at(r, j)).sum();
                if cost[j] - z > EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, j);
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, j);
        }
    }
}

/// Solves an LP given as a [`ConicProblem`] with only free and nonnegative
/// variables, returning a basic optimal solution.
pub fn solve_lp_basic(p: &ConicProblem) -> Result<SolveResult, ConicError> {
    p.validate()?;
    if p.has_rotated_cones() {
        return Err(ConicError::Malformed("basic LP path does not accept rotated cones".into()));
    }
    let n = p.num_vars();
    let m = p.num_rows();
    let kinds = p.var_kinds();
    // structural columns: x+ for every variable, x- for free ones
    let mut colmap: Vec<(usize, f64)> = Vec::new();
    for (j, kind) in kinds.iter().enumerate() {
        colmap.push((j, 1.0));
        if *kind == ConeKind::Free {
            colmap.push((j, -1.0));
        }
    }
    let ns = colmap.len();
    let width = ns + m;
    let mut t = vec![0.0; m * (width + 1)];
    let mut sign = vec![1.0; m];
    for (r, row) in p.rows().iter().enumerate() {
        if p.rhs()[r] < 0.0 {
            sign[r] = -1.0;
        }
        let base = r * (width + 1);
        for (k, &(j, s)) in colmap.iter().enumerate() {
            if let Some(&(_, v)) = row.iter().find(|e| e.0 == j) {
                t[base + k] = sign[r] * s * v;
            }
        }
        t[base + ns + r] = 1.0;
        t[base + width] = sign[r] * p.rhs()[r];
    }
    let mut tab = Tableau { m, width, t, basis: (ns..ns + m).collect(), pivots: 0 };

    // phase one
    let mut cost1 = vec![0.0; width];
    for c in cost1.iter_mut().skip(ns) {
        *c = -1.0;
    }
    let all = vec![true; width];
    tab.optimize(&cost1, &all);
    let infeas: f64 = (0..m).filter(|&r| tab.basis[r] >= ns).map(|r| tab.rhs(r)).sum();
    let bnorm = 1.0 + p.rhs().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if infeas > EPS * bnorm {
        return Ok(SolveResult {
            status: SolveStatus::Infeasible,
            primal: vec![0.0; n],
            dual: vec![0.0; m],
            objective: f64::NAN,
            dual_objective: f64::NAN,
            gap: f64::NAN,
            iterations: tab.pivots,
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
        });
    }
    // drive artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= ns {
            if let Some(j) = (0..ns).find(|&j| !tab.basis.contains(&j) && tab.at(r, j).abs() > EPS) {
                tab.pivot(r, j);
            }
        }
    }

    // phase two
    let mut cost2 = vec![0.0; width];
    for (k, &(j, s)) in colmap.iter().enumerate() {
        cost2[k] = s * p.objective()[j];
    }
    let mut allowed = vec![false; width];
    for a in allowed.iter_mut().take(ns) {
        *a = true;
    }
    let bounded = tab.optimize(&cost2, &allowed);

    let mut xs = vec![0.0; width];
    for r in 0..m {
        xs[tab.basis[r]] = tab.rhs(r);
    }
    let mut x = vec![0.0; n];
    for (k, &(j, s)) in colmap.iter().enumerate() {
        x[j] += s * xs[k];
    }
    // y^T = c_B B^{-1}; B^{-1} sits under the artificial columns
    let dual: Vec<f64> = (0..m)
        .map(|i| {
            let v: f64 = (0..m).map(|r| cost2[tab.basis[r]] * tab.at(r, ns + i)).sum();
            v * sign[i]
        })
        .collect();
    let objective = p.objective_value(&x);
    let dual_objective: f64 = dual.iter().zip(p.rhs()).map(|(a, b)| a * b).sum();
    Ok(SolveResult {
        status: if bounded { SolveStatus::Optimal } else { SolveStatus::Unbounded },
        primal_residual: p.primal_residual(&x) / bnorm,
        primal: x,
        dual,
        objective,
        dual_objective,
        gap: if bounded { (objective - dual_objective).abs() / (1.0 + objective.abs()) } else { f64::NAN },
        iterations: tab.pivots,
        dual_residual: 0.0,
    })
}
