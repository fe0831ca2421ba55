//! Cone arithmetic used by the interior-point kernel: the nonnegative orthant
//! and the three-dimensional Lorentz cone `x0 >= ||(x1, x2)||`.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Block {
    NonNeg(usize),
    Soc(usize),
}

impl Block {
    pub(crate) fn start(&self) -> usize {
        match *self {
            Block::NonNeg(s) | Block::Soc(s) => s,
        }
    }
}

/// Nesterov-Todd scaling of one block.
#[derive(Clone, Copy, Debug)]
pub(crate) enum BlockScaling {
    NonNeg { w: f64 },
    /// `W = beta (2 v v^T - J)`, `J = diag(1, -1, -1)`.
    Soc { beta: f64, v: [f64; 3] },
}

#[derive(Clone, Debug)]
pub(crate) struct Scaling {
    pub blocks: Vec<BlockScaling>,
    /// `lambda = W s = W^{-1} x`.
    pub lambda: Vec<f64>,
}

fn soc_det(x: &[f64]) -> f64 {
    let r = x[1].hypot(x[2]);
    (x[0] - r) * (x[0] + r)
}

pub(crate) fn soc_nt(x: &[f64], s: &[f64]) -> Option<(f64, [f64; 3])> {
    let dx = soc_det(x);
    let ds = soc_det(s);
    if !(dx > 0.0 && ds > 0.0 && x[0] > 0.0 && s[0] > 0.0) {
        return None;
    }
    let a = dx.sqrt();
    let b = ds.sqrt();
    let xb = [x[0] / a, x[1] / a, x[2] / a];
    let sb = [s[0] / b, s[1] / b, s[2] / b];
    let dot = xb[0] * sb[0] + xb[1] * sb[1] + xb[2] * sb[2];
    let gamma = ((1.0 + dot) / 2.0).sqrt();
    let wb = [
        (xb[0] + sb[0]) / (2.0 * gamma),
        (xb[1] - sb[1]) / (2.0 * gamma),
        (xb[2] - sb[2]) / (2.0 * gamma),
    ];
    let denom = (2.0 * (wb[0] + 1.0)).sqrt();
    let v = [(wb[0] + 1.0) / denom, wb[1] / denom, wb[2] / denom];
    Some(((a / b).sqrt(), v))
}

fn soc_apply(beta: f64, v: &[f64; 3], z: &[f64], out: &mut [f64]) {
    // beta (2 v v^T - J) z
    let vz = v[0] * z[0] + v[1] * z[1] + v[2] * z[2];
    out[0] = beta * (2.0 * v[0] * vz - z[0]);
    out[1] = beta * (2.0 * v[1] * vz + z[1]);
    out[2] = beta * (2.0 * v[2] * vz + z[2]);
}

fn soc_apply_inv(beta: f64, v: &[f64; 3], z: &[f64], out: &mut [f64]) {
    // (1/beta) (2 J v v^T J - J) z
    let jv = [v[0], -v[1], -v[2]];
    let jvz = jv[0] * z[0] + jv[1] * z[1] + jv[2] * z[2];
    out[0] = (2.0 * jv[0] * jvz - z[0]) / beta;
    out[1] = (2.0 * jv[1] * jvz + z[1]) / beta;
    out[2] = (2.0 * jv[2] * jvz + z[2]) / beta;
}

impl Scaling {
    pub(crate) fn compute(blocks: &[Block], x: &[f64], s: &[f64]) -> Option<Scaling> {
        let mut out = Vec::with_capacity(blocks.len());
        let mut lambda = vec![0.0; x.len()];
        for blk in blocks {
            match *blk {
                Block::NonNeg(i) => {
                    if !(x[i] > 0.0 && s[i] > 0.0) {
                        return None;
                    }
                    out.push(BlockScaling::NonNeg { w: (x[i] / s[i]).sqrt() });
                    lambda[i] = (x[i] * s[i]).sqrt();
                }
                Block::Soc(i) => {
                    let (beta, v) = soc_nt(&x[i..i + 3], &s[i..i + 3])?;
                    soc_apply(beta, &v, &s[i..i + 3], &mut lambda[i..i + 3]);
                    out.push(BlockScaling::Soc { beta, v });
                }
            }
        }
        Some(Scaling { blocks: out, lambda })
    }

    /// `W z`.
    pub(crate) fn apply(&self, layout: &[Block], z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for (blk, sc) in layout.iter().zip(&self.blocks) {
            match (*blk, sc) {
                (Block::NonNeg(i), BlockScaling::NonNeg { w }) => out[i] = w * z[i],
                (Block::Soc(i), BlockScaling::Soc { beta, v }) => {
                    soc_apply(*beta, v, &z[i..i + 3], &mut out[i..i + 3])
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// `W^{-1} z`.
    pub(crate) fn apply_inv(&self, layout: &[Block], z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len()];
        for (blk, sc) in layout.iter().zip(&self.blocks) {
            match (*blk, sc) {
                (Block::NonNeg(i), BlockScaling::NonNeg { w }) => out[i] = z[i] / w,
                (Block::Soc(i), BlockScaling::Soc { beta, v }) => {
                    soc_apply_inv(*beta, v, &z[i..i + 3], &mut out[i..i + 3])
                }
                _ => unreachable!(),
            }
        }
        out
    }

    /// `W^2 z`.
    pub(crate) fn apply_sq(&self, layout: &[Block], z: &[f64]) -> Vec<f64> {
        let once = self.apply(layout, z);
        self.apply(layout, &once)
    }

    /// Explicit 3x3 `W^2` of a Lorentz block.
    pub(crate) fn soc_w2(beta: f64, v: &[f64; 3]) -> [[f64; 3]; 3] {
        let mut w = [[0.0; 3]; 3];
        let j = [1.0, -1.0, -1.0];
        for r in 0..3 {
            for c in 0..3 {
                w[r][c] = beta * (2.0 * v[r] * v[c] - if r == c { j[r] } else { 0.0 });
            }
        }
        let mut w2 = [[0.0; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                w2[r][c] = (0..3).map(|k| w[r][k] * w[k][c]).sum();
            }
        }
        w2
    }
}

/// Jordan product `u o v`.
pub(crate) fn jprod(layout: &[Block], u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    for blk in layout {
        match *blk {
            Block::NonNeg(i) => out[i] = u[i] * v[i],
            Block::Soc(i) => {
                out[i] = u[i] * v[i] + u[i + 1] * v[i + 1] + u[i + 2] * v[i + 2];
                out[i + 1] = u[i] * v[i + 1] + v[i] * u[i + 1];
                out[i + 2] = u[i] * v[i + 2] + v[i] * u[i + 2];
            }
        }
    }
    out
}

/// Solves `lambda o u = r` for `u`.
pub(crate) fn jdiv(layout: &[Block], lambda: &[f64], r: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; r.len()];
    for blk in layout {
        match *blk {
            Block::NonNeg(i) => out[i] = r[i] / lambda[i],
            Block::Soc(i) => {
                let l = &lambda[i..i + 3];
                let det = soc_det(l);
                let u0 = (l[0] * r[i] - l[1] * r[i + 1] - l[2] * r[i + 2]) / det;
                out[i] = u0;
                out[i + 1] = (r[i + 1] - u0 * l[1]) / l[0];
                out[i + 2] = (r[i + 2] - u0 * l[2]) / l[0];
            }
        }
    }
    out
}

/// Identity element `e`.
pub(crate) fn identity(layout: &[Block], n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    for blk in layout {
        e[blk.start()] = 1.0;
    }
    e
}

/// Largest `alpha >= 0` keeping `x + alpha dx` in the cone; `f64::INFINITY` if unbounded.
pub(crate) fn max_step(layout: &[Block], x: &[f64], dx: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for blk in layout {
        match *blk {
            Block::NonNeg(i) => {
                if dx[i] < 0.0 {
                    alpha = alpha.min(-x[i] / dx[i]);
                }
            }
            Block::Soc(i) => {
                alpha = alpha.min(soc_step(&x[i..i + 3], &dx[i..i + 3]));
            }
        }
    }
    alpha.max(0.0)
}

fn soc_step(x: &[f64], d: &[f64]) -> f64 {
    // smallest positive root of det(x + a d) = qa a^2 + qb a + qc
    let qa = soc_det(d);
    let qb = 2.0 * (x[0] * d[0] - x[1] * d[1] - x[2] * d[2]);
    let qc = soc_det(x);
    let mut best = f64::INFINITY;
    if d[0] < 0.0 {
        best = -x[0] / d[0];
    }
    let scale = qa.abs().max(qb.abs()).max(qc.abs());
    if qa.abs() <= 1e-14 * scale {
        if qb < 0.0 {
            best = best.min(-qc / qb);
        }
        return best;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return best;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
    for root in [q / qa, if q != 0.0 { qc / q } else { f64::INFINITY }] {
        if root > 0.0 {
            best = best.min(root);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nt_scaling_maps_s_and_x_to_same_point() {
        let layout = [Block::Soc(0), Block::NonNeg(3)];
        let x = [2.0, 0.5, -0.3, 4.0];
        let s = [1.5, -0.7, 0.2, 0.25];
        let sc = Scaling::compute(&layout, &x, &s).unwrap();
        let ws = sc.apply(&layout, &s);
        let wix = sc.apply_inv(&layout, &x);
        for k in 0..4 {
            assert!((ws[k] - wix[k]).abs() < 1e-12, "{ws:?} vs {wix:?}");
            assert!((ws[k] - sc.lambda[k]).abs() < 1e-12);
        }
        let back = sc.apply_inv(&layout, &sc.apply(&layout, &[0.3, 1.0, -2.0, 5.0]));
        assert!((back[2] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn jordan_division_inverts_product() {
        let layout = [Block::Soc(0)];
        let l = [3.0, 1.0, -1.5];
        let u = [0.4, -2.0, 0.7];
        let r = jprod(&layout, &l, &u);
        let back = jdiv(&layout, &l, &r);
        for k in 0..3 {
            assert!((back[k] - u[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn step_to_boundary() {
        let layout = [Block::Soc(0)];
        let x = [1.0, 0.0, 0.0];
        let d = [0.0, 1.0, 0.0];
        assert!((max_step(&layout, &x, &d) - 1.0).abs() < 1e-12);
        let inward = [1.0, 0.0, 0.0];
        assert!(max_step(&layout, &x, &inward).is_infinite());
    }
}
