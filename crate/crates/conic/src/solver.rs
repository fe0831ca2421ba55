use std::collections::HashMap;

use crate::cone::Block;
use crate::ipm::{self, Kernel};
use crate::{ConeKind, ConicError, ConicProblem, SolveResult, SolveStatus};

/// Interior-point solver parameters.
#[derive(Clone, Debug)]
pub struct SolverSettings {
    /// Feasibility and relative-gap tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-8, max_iter: 200, verbose: false }
    }
}

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Orthogonal symmetric map between the rotated cone and the Lorentz cone:
/// `2ab >= c^2` iff `T (a,b,c)` satisfies `t0 >= ||(t1, t2)||`.
fn rot(v: [f64; 3]) -> [f64; 3] {
    [
        INV_SQRT2 * (v[0] + v[1]),
        INV_SQRT2 * (v[0] - v[1]),
        v[2],
    ]
}

struct Elimination {
    var: usize,
    pivot_row: usize,
    row: Vec<(usize, f64)>,
    rhs: f64,
    pivot: f64,
    /// Entries of the eliminated column in the other live rows.
    column: Vec<(usize, f64)>,
    cost: f64,
}

fn combine(target: &[(usize, f64)], factor: f64, source: &[(usize, f64)]) -> Vec<(usize, f64)> {
    // target - factor * source, both sorted by column
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        let next = match (target.get(i), source.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                i += 1;
                j += 1;
                (a.0, a.1 - factor * b.1)
            }
            (Some(a), Some(b)) if a.0 < b.0 => {
                i += 1;
                *a
            }
            (Some(a), None) => {
                i += 1;
                *a
            }
            (_, Some(b)) => {
                j += 1;
                (b.0, -factor * b.1)
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    let scale = out.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
    out.retain(|e| e.1.abs() > 1e-15 * scale);
    out
}

/// Solves `p` with the embedded homogeneous self-dual interior-point method.
pub fn solve(p: &ConicProblem, settings: &SolverSettings) -> Result<SolveResult, ConicError> {
    p.validate()?;
    if !(settings.tol > 0.0) {
        return Err(ConicError::Malformed("tolerance must be positive".into()));
    }
    let n = p.num_vars();
    let m0 = p.num_rows();
    let kinds = p.var_kinds();
    let mut rows: Vec<Vec<(usize, f64)>> = p.rows().to_vec();
    let mut rhs: Vec<f64> = p.rhs().to_vec();
    let mut live = vec![true; m0];
    // minimization costs
    let mut cost: Vec<f64> = p.objective().iter().map(|c| -c).collect();
    let bnorm = 1.0 + p.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // eliminate free variables by pivoting on one of their rows
    let mut elims: Vec<Elimination> = Vec::new();
    let mut free_unbounded = false;
    for f in (0..n).filter(|&j| kinds[j] == ConeKind::Free) {
        let mut best: Option<(usize, f64, f64)> = None;
        for (r, row) in rows.iter().enumerate() {
            if !live[r] {
                continue;
            }
            if let Some(&(_, a)) = row.iter().find(|e| e.0 == f) {
                let rmax = row.iter().fold(0.0f64, |m, e| m.max(e.1.abs()));
                let rel = a.abs() / rmax;
                if best.map_or(true, |b| rel > b.2) {
                    best = Some((r, a, rel));
                }
            }
        }
        let Some((pr, a, _)) = best else {
            if cost[f] != 0.0 {
                free_unbounded = true;
            }
            continue;
        };
        let prow = rows[pr].clone();
        let pb = rhs[pr];
        let mut column = Vec::new();
        for r in 0..m0 {
            if r == pr || !live[r] {
                continue;
            }
            if let Some(&(_, arf)) = rows[r].iter().find(|e| e.0 == f) {
                column.push((r, arf));
                let factor = arf / a;
                rows[r] = combine(&rows[r], factor, &prow);
                rows[r].retain(|e| e.0 != f);
                rhs[r] -= factor * pb;
            }
        }
        let cf = cost[f];
        if cf != 0.0 {
            for &(j, v) in &prow {
                cost[j] -= cf / a * v;
            }
            cost[f] = 0.0;
        }
        live[pr] = false;
        elims.push(Elimination { var: f, pivot_row: pr, row: prow, rhs: pb, pivot: a, column, cost: cf });
    }

    // empty rows: consistent ones are dropped, inconsistent ones prove infeasibility
    for r in 0..m0 {
        if live[r] && rows[r].is_empty() {
            if rhs[r].abs() > settings.tol * bnorm {
                return Ok(infeasible_result(p));
            }
            live[r] = false;
        }
    }

    let kept_rows: Vec<usize> = (0..m0).filter(|&r| live[r]).collect();
    let row_scale: Vec<f64> = kept_rows
        .iter()
        .map(|&r| rows[r].iter().fold(0.0f64, |m, e| m.max(e.1.abs())))
        .collect();

    // column view of the reduced, scaled matrix
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (k, &r) in kept_rows.iter().enumerate() {
        for &(j, v) in &rows[r] {
            cols[j].push((k, v / row_scale[k]));
        }
    }
    let kb: Vec<f64> = kept_rows.iter().enumerate().map(|(k, &r)| rhs[r] / row_scale[k]).collect();

    // kernel layout; identical nonnegative columns collapse onto one
    let mut kcols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut kc: Vec<f64> = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    let mut var_pos = vec![usize::MAX; n];
    let mut seen: HashMap<(Vec<(usize, u64)>, u64), usize> = HashMap::new();
    for cone in p.cones() {
        match cone.kind {
            ConeKind::Free => {}
            ConeKind::NonNeg => {
                for j in cone.start..cone.start + cone.len {
                    let sig = (
                        cols[j].iter().map(|&(i, v)| (i, v.to_bits())).collect::<Vec<_>>(),
                        cost[j].to_bits(),
                    );
                    if seen.contains_key(&sig) {
                        continue;
                    }
                    let k = kcols.len();
                    seen.insert(sig, k);
                    var_pos[j] = k;
                    blocks.push(Block::NonNeg(k));
                    kcols.push(cols[j].clone());
                    kc.push(cost[j]);
                }
            }
            ConeKind::RotatedSoc3 => {
                let j = cone.start;
                let k = kcols.len();
                blocks.push(Block::Soc(k));
                let mut dense: HashMap<usize, [f64; 3]> = HashMap::new();
                for l in 0..3 {
                    for &(i, v) in &cols[j + l] {
                        dense.entry(i).or_insert([0.0; 3])[l] = v;
                    }
                }
                let mut newcols: [Vec<(usize, f64)>; 3] = Default::default();
                let mut keys: Vec<usize> = dense.keys().copied().collect();
                keys.sort_unstable();
                for i in keys {
                    let t = rot(dense[&i]);
                    for l in 0..3 {
                        if t[l] != 0.0 {
                            newcols[l].push((i, t[l]));
                        }
                    }
                }
                let tc = rot([cost[j], cost[j + 1], cost[j + 2]]);
                for l in 0..3 {
                    var_pos[j + l] = k + l;
                    kcols.push(std::mem::take(&mut newcols[l]));
                    kc.push(tc[l]);
                }
            }
        }
    }

    let kernel = Kernel {
        m: kept_rows.len(),
        n: kcols.len(),
        cols: kcols,
        b: kb,
        c: kc,
        blocks,
    };
    let kr = ipm::run(&kernel, settings.tol, settings.max_iter, settings.verbose);

    // primal postsolve
    let mut x = vec![0.0; n];
    for cone in p.cones() {
        match cone.kind {
            ConeKind::Free => {}
            ConeKind::NonNeg => {
                for j in cone.start..cone.start + cone.len {
                    if var_pos[j] != usize::MAX {
                        x[j] = kr.x[var_pos[j]];
                    }
                }
            }
            ConeKind::RotatedSoc3 => {
                let k = var_pos[cone.start];
                let v = rot([kr.x[k], kr.x[k + 1], kr.x[k + 2]]);
                x[cone.start..cone.start + 3].copy_from_slice(&v);
            }
        }
    }
    for e in elims.iter().rev() {
        let rest: f64 = e.row.iter().filter(|t| t.0 != e.var).map(|&(j, v)| v * x[j]).sum();
        x[e.var] = (e.rhs - rest) / e.pivot;
    }

    // dual postsolve (minimization sign, then flipped for the maximization view)
    let mut ymin = vec![0.0; m0];
    for (k, &r) in kept_rows.iter().enumerate() {
        if k < kr.y.len() {
            ymin[r] = kr.y[k] / row_scale[k];
        }
    }
    for e in elims.iter().rev() {
        let rest: f64 = e.column.iter().map(|&(r, a)| a * ymin[r]).sum();
        ymin[e.pivot_row] = (e.cost - rest) / e.pivot;
    }
    let dual: Vec<f64> = ymin.iter().map(|v| -v).collect();

    let objective = p.objective_value(&x);
    let dual_objective: f64 = dual.iter().zip(p.rhs()).map(|(a, b)| a * b).sum();
    let primal_residual = p.primal_residual(&x) / bnorm;
    let mut status = kr.status;
    if status == SolveStatus::Optimal {
        if free_unbounded {
            status = SolveStatus::Unbounded;
        } else if primal_residual > 10.0 * settings.tol {
            status = SolveStatus::NearOptimal;
        }
    }
    let gap = if status == SolveStatus::Optimal || status == SolveStatus::NearOptimal {
        (objective - dual_objective).abs() / (1.0 + objective.abs())
    } else {
        kr.gap
    };
    Ok(SolveResult {
        status,
        primal: x,
        dual,
        objective,
        dual_objective,
        gap,
        iterations: kr.iterations,
        primal_residual,
        dual_residual: kr.dres,
    })
}

fn infeasible_result(p: &ConicProblem) -> SolveResult {
    SolveResult {
        status: SolveStatus::Infeasible,
        primal: vec![0.0; p.num_vars()],
        dual: vec![0.0; p.num_rows()],
        objective: f64::NAN,
        dual_objective: f64::NAN,
        gap: f64::NAN,
        iterations: 0,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
    }
}
