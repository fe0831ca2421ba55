//! Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
//! predictor-corrector. Works on `min c^T x, A x = b, x in K` where `K` is a
//! product of nonnegative rays and 3-dimensional Lorentz cones.

use crate::cone::{identity, jdiv, jprod, max_step, Block, BlockScaling, Scaling};
use crate::linalg::{Cholesky, DenseSym};
use crate::SolveStatus;

pub(crate) struct Kernel {
    pub m: usize,
    pub n: usize,
    /// Column-major sparse `A`.
    pub cols: Vec<Vec<(usize, f64)>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub blocks: Vec<Block>,
}

pub(crate) struct KernelResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub dres: f64,
    pub gap: f64,
}

const STEP_FRACTION: f64 = 0.99;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Kernel {
    fn ax(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (j, col) in self.cols.iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for &(i, v) in col {
                    out[i] += v * xj;
                }
            }
        }
        out
    }

    fn aty(&self, y: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v * y[i]).sum())
            .collect()
    }

    fn degree(&self) -> f64 {
        self.blocks.len() as f64
    }

    fn normal_matrix(&self, sc: &Scaling) -> DenseSym {
        let mut m = DenseSym::zeros(self.m);
        for (blk, bs) in self.blocks.iter().zip(&sc.blocks) {
            match (*blk, bs) {
                (Block::NonNeg(j), BlockScaling::NonNeg { w }) => {
                    let w2 = w * w;
                    let col = &self.cols[j];
                    for &(r, a) in col {
                        for &(c, b) in col {
                            m.add(r, c, w2 * a * b);
                        }
                    }
                }
                (Block::Soc(j), BlockScaling::Soc { beta, v }) => {
                    let w2 = Scaling::soc_w2(*beta, v);
                    for k in 0..3 {
                        for l in 0..3 {
                            let f = w2[k][l];
                            for &(r, a) in &self.cols[j + k] {
                                for &(c, b) in &self.cols[j + l] {
                                    m.add(r, c, f * a * b);
                                }
                            }
                        }
                    }
                }
                _ => unreachable!(),
            }
        }
        m
    }
}

struct Newton<'a> {
    k: &'a Kernel,
    sc: &'a Scaling,
    chol: Cholesky,
}

impl Newton<'_> {
    /// Solves `W^{-2} dx - A^T dy = g`, `A dx = h`; also returns `W^{-1} dx`.
    fn solve(&self, g: &[f64], h: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let k = self.k;
        let w2g = self.sc.apply_sq(&k.blocks, g);
        let aw2g = k.ax(&w2g);
        let rhs: Vec<f64> = h.iter().zip(&aw2g).map(|(a, b)| a - b).collect();
        let mut dy = self.chol.solve(&rhs);
        let mut t = k.aty(&dy);
        axpy(1.0, g, &mut t);
        let mut scaled = self.sc.apply(&k.blocks, &t);
        let mut dx = self.sc.apply(&k.blocks, &scaled);
        // refine against the primal equation as evaluated on dx itself
        let target = 1e-15 * (1.0 + norm_inf(h));
        let mut last = f64::INFINITY;
        for _ in 0..8 {
            let adx = k.ax(&dx);
            let res: Vec<f64> = h.iter().zip(&adx).map(|(a, b)| a - b).collect();
            let r = norm_inf(&res);
            if r <= target || r >= 0.5 * last {
                break;
            }
            last = r;
            let corr = self.chol.solve(&res);
            axpy(1.0, &corr, &mut dy);
            let dscaled = self.sc.apply(&k.blocks, &k.aty(&corr));
            let ddx = self.sc.apply(&k.blocks, &dscaled);
            axpy(1.0, &dscaled, &mut scaled);
            axpy(1.0, &ddx, &mut dx);
        }
        (dx, dy, scaled)
    }
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

type Solution = (Vec<f64>, Vec<f64>, Vec<f64>);

#[allow(clippy::too_many_arguments)]
fn direction(
    nw: &Newton,
    sol1: &Solution,
    rd: &[f64],
    rp: &[f64],
    rg: f64,
    eta: f64,
    rc: &[f64],
    rtk: f64,
    tau: f64,
    kappa: f64,
) -> Direction {
    let k = nw.k;
    let blocks = &k.blocks;
    let rho = jdiv(blocks, &nw.sc.lambda, rc);
    let winv_rho = nw.sc.apply_inv(blocks, &rho);
    let g: Vec<f64> = winv_rho.iter().zip(rd).map(|(a, r)| a + eta * r).collect();
    let h: Vec<f64> = rp.iter().map(|r| -eta * r).collect();
    let (dx0, dy0, t0) = nw.solve(&g, &h);
    let (dx1, dy1, t1) = sol1;
    // the tau equation is assembled in scaled space; the unscaled inner
    // products c^T dx and b^T dy cancel badly near convergence
    let w_rd = nw.sc.apply(blocks, rd);
    let wg: Vec<f64> = rho.iter().zip(&w_rd).map(|(a, b)| a + eta * b).collect();
    let num = -eta * rg - eta * dot(dy1, rp) - 2.0 * dot(t1, &t0) + dot(t1, &wg) + rtk / tau;
    let den = dot(t1, t1) + kappa / tau;
    let dtau = num / den;
    let mut dx = dx0;
    axpy(dtau, dx1, &mut dx);
    let mut dy = dy0;
    axpy(dtau, dy1, &mut dy);
    let diff: Vec<f64> = (0..rho.len()).map(|j| rho[j] - t0[j] - dtau * t1[j]).collect();
    let ds = nw.sc.apply_inv(blocks, &diff);
    let dkappa = (rtk - kappa * dtau) / tau;
    Direction { dx, dy, ds, dtau, dkappa }
}

fn step_length(k: &Kernel, x: &[f64], s: &[f64], tau: f64, kappa: f64, d: &Direction) -> f64 {
    let mut a = max_step(&k.blocks, x, &d.dx).min(max_step(&k.blocks, s, &d.ds));
    if d.dtau < 0.0 {
        a = a.min(-tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        a = a.min(-kappa / d.dkappa);
    }
    a
}

#[derive(Clone, Copy)]
struct Metrics {
    pres: f64,
    dres: f64,
    gap: f64,
    pinf: Option<f64>,
    dinf: Option<f64>,
}

pub(crate) fn run(k: &Kernel, tol: f64, max_iter: usize, verbose: bool) -> KernelResult {
    let n = k.n;
    let nu = k.degree();
    let e = identity(&k.blocks, n);
    let mut x = e.clone();
    let mut s = e.clone();
    let mut y = vec![0.0; k.m];
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let bnorm = 1.0 + norm_inf(&k.b);
    let cnorm = 1.0 + norm_inf(&k.c);

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>, f64, Metrics)> = None;
    let mut iterations = 0;
    let mut status = SolveStatus::IterLimit;
    let mut stalls = 0;
    let mut since_best = 0;

    loop {
        // residuals of the homogeneous model
        let ax = k.ax(&x);
        let rp: Vec<f64> = ax.iter().zip(&k.b).map(|(a, b)| a - b * tau).collect();
        let aty = k.aty(&y);
        let rd: Vec<f64> = (0..n).map(|j| aty[j] + s[j] - k.c[j] * tau).collect();
        let ctx = dot(&k.c, &x);
        let bty = dot(&k.b, &y);
        let rg = bty - ctx - kappa;
        let xs = dot(&x, &s);
        let mu = (xs + tau * kappa) / (nu + 1.0);

        let pcost = ctx / tau;
        let dcost = bty / tau;
        let met = Metrics {
            pres: norm_inf(&rp) / tau / bnorm,
            dres: norm_inf(&rd) / tau / cnorm,
            gap: (pcost - dcost).abs() / (1.0 + pcost.abs().min(dcost.abs())),
            pinf: if bty > 0.0 {
                let r: Vec<f64> = (0..n).map(|j| aty[j] + s[j]).collect();
                Some(norm_inf(&r) / bty)
            } else {
                None
            },
            dinf: if ctx < 0.0 { Some(norm_inf(&ax) / -ctx) } else { None },
        };
        if verbose {
            eprintln!(
                "{:3} pcost {:+.8e} dcost {:+.8e} pres {:.2e} dres {:.2e} gap {:.2e} tau {:.2e} kappa {:.2e}",
                iterations, pcost, dcost, met.pres, met.dres, met.gap, tau, kappa
            );
        }
        let merit = met.pres.max(met.dres).max(met.gap);
        if merit.is_finite() && best.as_ref().map_or(true, |b| merit < b.0) {
            best = Some((merit, x.clone(), y.clone(), s.clone(), tau, met));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if met.pres <= tol && met.dres <= tol && met.gap <= tol {
            status = SolveStatus::Optimal;
            break;
        }
        if tau < kappa {
            if met.pinf.is_some_and(|v| v <= tol) {
                status = SolveStatus::Infeasible;
                break;
            }
            if met.dinf.is_some_and(|v| v <= tol) {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iterations >= max_iter || since_best >= if tau < kappa { 30 } else { 5 } {
            break;
        }

        let Some(sc) = Scaling::compute(&k.blocks, &x, &s) else {
            break;
        };
        let mmat = k.normal_matrix(&sc);
        let reg = 1e-14 * (0..k.m).map(|i| mmat.data[i * k.m + i]).fold(1.0, f64::max);
        let chol = Cholesky::factor(&mmat, reg);
        let nw = Newton { k, sc: &sc, chol };
        let neg_c: Vec<f64> = k.c.iter().map(|v| -v).collect();
        let sol1 = nw.solve(&neg_c, &k.b);

        // predictor
        let lam = &sc.lambda;
        let lam_sq = jprod(&k.blocks, lam, lam);
        let rc_aff: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let aff = direction(&nw, &sol1, &rd, &rp, rg, 1.0, &rc_aff, -tau * kappa, tau, kappa);
        let a_aff = step_length(k, &x, &s, tau, kappa, &aff).min(1.0);
        let mut xa = x.clone();
        axpy(a_aff, &aff.dx, &mut xa);
        let mut sa = s.clone();
        axpy(a_aff, &aff.ds, &mut sa);
        let mu_aff = (dot(&xa, &sa)
            + (tau + a_aff * aff.dtau) * (kappa + a_aff * aff.dkappa))
            / (nu + 1.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let wdx = nw.sc.apply_inv(&k.blocks, &aff.dx);
        let wds = nw.sc.apply(&k.blocks, &aff.ds);
        let cross = jprod(&k.blocks, &wdx, &wds);
        let rc: Vec<f64> = (0..n)
            .map(|j| -lam_sq[j] - cross[j] + sigma * mu * e[j])
            .collect();
        let rtk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        let dir = direction(&nw, &sol1, &rd, &rp, rg, 1.0 - sigma, &rc, rtk, tau, kappa);
        let alpha = (STEP_FRACTION * step_length(k, &x, &s, tau, kappa, &dir)).min(1.0);
        if !alpha.is_finite()
            || dir.dx.iter().chain(&dir.dy).chain(&dir.ds).any(|v| !v.is_finite())
        {
            break;
        }
        axpy(alpha, &dir.dx, &mut x);
        axpy(alpha, &dir.dy, &mut y);
        axpy(alpha, &dir.ds, &mut s);
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        iterations += 1;
        if alpha < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        // keep the embedding away from overflow
        let scale = tau.max(kappa).max(norm_inf(&x)).max(norm_inf(&s));
        if scale > 1e12 {
            let f = 1.0 / scale;
            for v in x.iter_mut().chain(y.iter_mut()).chain(s.iter_mut()) {
                *v *= f;
            }
            tau *= f;
            kappa *= f;
        }
    }

    match status {
        SolveStatus::Optimal | SolveStatus::Infeasible | SolveStatus::Unbounded => {
            let (_pres, dres, gap) = if status == SolveStatus::Optimal {
                let b = best.as_ref().unwrap();
                (b.5.pres, b.5.dres, b.5.gap)
            } else {
                (f64::NAN, f64::NAN, f64::NAN)
            };
            let t = if status == SolveStatus::Optimal { tau } else { 1.0 };
            KernelResult {
                status,
                x: x.iter().map(|v| v / t).collect(),
                y: y.iter().map(|v| v / t).collect(),
                iterations,
                dres,
                gap,
            }
        }
        _ => {
            let (merit, bx, by, _bs, bt, bm) = best.expect("at least one iterate is recorded");
            let status = if merit <= tol.sqrt().min(1e-5).max(tol) {
                SolveStatus::NearOptimal
            } else {
                SolveStatus::IterLimit
            };
            KernelResult {
                status,
                x: bx.iter().map(|v| v / bt).collect(),
                y: by.iter().map(|v| v / bt).collect(),
                iterations,
                dres: bm.dres,
                gap: bm.gap,
            }
        }
    }
}
