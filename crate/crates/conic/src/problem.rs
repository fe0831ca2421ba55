use crate::ConicError;

/// Kind of a variable block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConeKind {
    Free,
    NonNeg,
    /// `(a, b, c)` with `2ab >= c^2`, `a >= 0`, `b >= 0`.
    RotatedSoc3,
}

/// A contiguous block of variables living in one cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub start: usize,
    pub len: usize,
}

/// `maximize c^T x  s.t.  A x = b,  x in K`.
///
/// Rows are stored sparsely; duplicate column entries inside a row are summed.
#[derive(Clone, Debug, Default)]
pub struct ConicProblem {
    cones: Vec<ConeSpec>,
    num_vars: usize,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    objective: Vec<f64>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    fn push_block(&mut self, kind: ConeKind, len: usize) -> usize {
        let start = self.num_vars;
        if len == 0 {
            return start;
        }
        // merge adjacent scalar blocks of the same kind
        if kind != ConeKind::RotatedSoc3 {
            if let Some(last) = self.cones.last_mut() {
                if last.kind == kind {
                    last.len += len;
                    self.num_vars += len;
                    self.objective.resize(self.num_vars, 0.0);
                    return start;
                }
            }
        }
        self.cones.push(ConeSpec { kind, start, len });
        self.num_vars += len;
        self.objective.resize(self.num_vars, 0.0);
        start
    }

    /// Appends `count` free variables and returns the index of the first.
    pub fn add_free(&mut self, count: usize) -> usize {
        self.push_block(ConeKind::Free, count)
    }

    /// Appends `count` nonnegative variables and returns the index of the first.
    pub fn add_nonneg(&mut self, count: usize) -> usize {
        self.push_block(ConeKind::NonNeg, count)
    }

    /// Appends one rotated cone `(a, b, c)`; returns the index of `a`.
    pub fn add_rotated_soc3(&mut self) -> usize {
        self.push_block(ConeKind::RotatedSoc3, 3)
    }

    /// Appends the equality `sum coeff * x[var] = rhs`; returns the row index.
    pub fn add_row<I>(&mut self, entries: I, rhs: f64) -> usize
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut row: Vec<(usize, f64)> = entries.into_iter().collect();
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (j, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        self.rows.push(merged);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        if var >= self.objective.len() {
            self.objective.resize(var + 1, 0.0);
        }
        self.objective[var] = coeff;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cones(&self) -> &[ConeSpec] {
        &self.cones
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn has_rotated_cones(&self) -> bool {
        self.cones.iter().any(|c| c.kind == ConeKind::RotatedSoc3)
    }

    /// Kind of each scalar variable.
    pub fn var_kinds(&self) -> Vec<ConeKind> {
        let mut kinds = vec![ConeKind::Free; self.num_vars];
        for cone in &self.cones {
            for k in &mut kinds[cone.start..cone.start + cone.len] {
                *k = cone.kind;
            }
        }
        kinds
    }

    /// Multiplies every row and right-hand side by `factor`.
    pub fn scale_rows(&mut self, factor: f64) {
        for (row, rhs) in self.rows.iter_mut().zip(self.rhs.iter_mut()) {
            for e in row.iter_mut() {
                e.1 *= factor;
            }
            *rhs *= factor;
        }
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        if self.objective.len() != self.num_vars {
            return Err(ConicError::Malformed(format!(
                "objective references variable {} but only {} exist",
                self.objective.len() - 1,
                self.num_vars
            )));
        }
        let mut covered = 0;
        for cone in &self.cones {
            if cone.start != covered {
                return Err(ConicError::Malformed("cone blocks are not contiguous".into()));
            }
            if cone.kind == ConeKind::RotatedSoc3 && cone.len != 3 {
                return Err(ConicError::Malformed("rotated cone block must have width 3".into()));
            }
            covered += cone.len;
        }
        if covered != self.num_vars {
            return Err(ConicError::Malformed("cone blocks do not cover all variables".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                return Err(ConicError::Malformed(format!("constraint row {i} is empty")));
            }
            if let Some(&(j, _)) = row.iter().find(|e| e.0 >= self.num_vars) {
                return Err(ConicError::Malformed(format!(
                    "row {i} references variable {j} out of range"
                )));
            }
            if row.iter().any(|e| !e.1.is_finite()) || !self.rhs[i].is_finite() {
                return Err(ConicError::Malformed(format!("row {i} has non-finite data")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(ConicError::Malformed("objective has non-finite entries".into()));
        }
        Ok(())
    }

    /// Largest violation of `A x = b` in the infinity norm.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().map(|&(j, v)| v * x[j]).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest cone-membership violation of `x`.
    pub fn cone_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for cone in &self.cones {
            let xs = &x[cone.start..cone.start + cone.len];
            match cone.kind {
                ConeKind::Free => {}
                ConeKind::NonNeg => {
                    for &v in xs {
                        worst = worst.max(-v);
                    }
                }
                ConeKind::RotatedSoc3 => {
                    let (a, b, c) = (xs[0], xs[1], xs[2]);
                    worst = worst.max(-a).max(-b);
                    let gap = 2.0 * a.max(0.0) * b.max(0.0) - c * c;
                    if gap < 0.0 {
                        // distance-like measure: how far c must shrink
                        worst = worst.max(c.abs() - (2.0 * a.max(0.0) * b.max(0.0)).sqrt());
                    }
                }
            }
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Termination status of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NearOptimal,
    IterLimit,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::IterLimit => "iter_limit",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of [`crate::solve`] or [`crate::solve_lp_basic`].
///
/// `dual` satisfies `A^T y - c in K*` at optimality, so `b^T y` bounds the
/// maximization objective from above.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub iterations: usize,
    /// `||Ax - b||_inf / (1 + ||b||_inf)`.
    pub primal_residual: f64,
    /// Relative dual residual measured in the solver's internal scaling.
    pub dual_residual: f64,
}
