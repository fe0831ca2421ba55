//! Random benchmark instances, planted-optimum instances and the batch
//! runner.
//!
//! Generator semantics, all deterministic per seed:
//!
//! * `StandardSimplex`: `Lambda = {0, d e_1, ..., d e_n}`.
//! * `GeneralSimplex`: `Lambda` is the origin plus `n` random even points
//!   with coordinate sum at most `d`, affinely independent.
//! * `ArbitraryPolytope`: `Lambda` has at least `n + 2` random even points
//!   (always including the origin) and at least `max(l, 1)` inner terms.
//!
//! Inner points are lattice points `sum k_i a_i / K` with `K <= 8` over a
//! random subset of `Lambda`, so they always lie in `conv(Lambda)`. Outer
//! coefficients are uniform on `[1, 10]`; inner magnitudes are uniform on
//! `[0.5, 5]`, negative at even points and of random sign at odd ones. All
//! coefficients are rounded to two decimals.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{Cover, CoverEntry};
use crate::exponent::{rat, Exponent};
use crate::local::{local_upper_bound, DEFAULT_STARTS};
use crate::pipeline::{sonc_lower_bound, BoundConfig};
use crate::poly::{circuit_number, infer_nvars, parse_poly, CircuitData, SparsePoly};
use crate::{qlin, SoncError};

const MAX_TRIES: usize = 10_000;
const MAX_K: i64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchClass {
    StandardSimplex,
    GeneralSimplex,
    ArbitraryPolytope,
    /// A fixed polynomial given in `BenchSpec::poly`.
    Custom,
}

impl BenchClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchClass::StandardSimplex => "StandardSimplex",
            BenchClass::GeneralSimplex => "GeneralSimplex",
            BenchClass::ArbitraryPolytope => "ArbitraryPolytope",
            BenchClass::Custom => "Custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub class: BenchClass,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub d: u32,
    #[serde(default)]
    pub t: usize,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
}

impl BenchSpec {
    pub fn new(class: BenchClass, n: usize, d: u32, t: usize, seed: u64) -> Self {
        BenchSpec { class, n, d, t, l: 0, seed, poly: None }
    }

    pub fn custom(poly: &str) -> Self {
        BenchSpec { class: BenchClass::Custom, n: 0, d: 0, t: 0, l: 0, seed: 0, poly: Some(poly.to_string()) }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub class: String,
    pub n: usize,
    pub d: u32,
    pub t: usize,
    pub l: usize,
    pub seed: u64,
    pub xi_socp: f64,
    pub xi_min: f64,
    pub gap: f64,
    pub time_total_s: f64,
    pub time_solver_s: f64,
    pub iters: usize,
    pub status: String,
}

/// `|xi_min - xi_socp| / |xi_min|`, or the absolute difference when
/// `|xi_min| < 1e-6`.
pub fn optimality_gap(xi_socp: f64, xi_min: f64) -> f64 {
    let diff = (xi_min - xi_socp).abs();
    if xi_min.abs() >= 1e-6 {
        diff / xi_min.abs()
    } else {
        diff
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// `n` nonnegative even integers with sum at most `d`.
fn even_point<R: Rng>(rng: &mut R, n: usize, d: u32) -> Vec<i64> {
    let half = i64::from(d / 2);
    let mut cuts: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=half)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(n);
    for c in cuts {
        out.push(2 * (c - prev));
        prev = c;
    }
    out.shuffle(rng);
    out
}

/// A lattice point `sum k_i a_i / K` over a random subset of `verts`, with
/// its barycentric weights on that subset.
fn inner_point<R: Rng>(rng: &mut R, verts: &[Vec<i64>], max_support: usize) -> Option<(Vec<usize>, Vec<i64>, i64, Vec<i64>)> {
    let size = rng.gen_range(2..=max_support.min(verts.len()).max(2));
    let mut idx: Vec<usize> = (0..verts.len()).collect();
    idx.shuffle(rng);
    idx.truncate(size);
    let big_k = rng.gen_range(size as i64..=MAX_K.max(size as i64));
    let mut k = vec![1i64; size];
    for _ in 0..(big_k - size as i64) {
        k[rng.gen_range(0..size)] += 1;
    }
    let n = verts[0].len();
    let mut p = vec![0i64; n];
    for (&i, &ki) in idx.iter().zip(&k) {
        for j in 0..n {
            p[j] += ki * verts[i][j];
        }
    }
    if p.iter().any(|c| c % big_k != 0) {
        return None;
    }
    Some((idx, k, big_k, p.iter().map(|c| c / big_k).collect()))
}

fn inner_coeff<R: Rng>(rng: &mut R, e: &Exponent) -> f64 {
    let mag = round2(rng.gen_range(0.5..=5.0));
    if e.is_even() || rng.gen_bool(0.5) {
        -mag
    } else {
        mag
    }
}

fn ints(v: &[i64]) -> Exponent {
    Exponent::from_ints(v)
}

fn random_simplex<R: Rng>(rng: &mut R, n: usize, d: u32) -> Result<Vec<Vec<i64>>, SoncError> {
    for _ in 0..MAX_TRIES {
        let mut verts = vec![vec![0i64; n]];
        verts.extend((0..n).map(|_| even_point(rng, n, d)));
        let pts: Vec<Exponent> = verts.iter().map(|v| ints(v)).collect();
        if qlin::affinely_independent(&pts) {
            return Ok(verts);
        }
    }
    Err(SoncError::Invalid(format!("no affinely independent even simplex with n = {n}, d = {d}")))
}

fn check_spec(spec: &BenchSpec) -> Result<(), SoncError> {
    if spec.n == 0 || spec.d == 0 || spec.d % 2 != 0 {
        return Err(SoncError::Invalid(format!("need n >= 1 and positive even d, got n = {}, d = {}", spec.n, spec.d)));
    }
    if spec.t < spec.n + 2 {
        return Err(SoncError::Invalid(format!("t = {} leaves no inner terms for n = {}", spec.t, spec.n)));
    }
    Ok(())
}

/// Random polynomial of the given class.
pub fn gen_bench(spec: &BenchSpec) -> Result<SparsePoly, SoncError> {
    if spec.class == BenchClass::Custom {
        let text = spec.poly.as_deref().ok_or_else(|| SoncError::Invalid("custom spec without a polynomial".into()))?;
        let n = if spec.n == 0 { infer_nvars(text) } else { spec.n };
        return parse_poly(text, n);
    }
    check_spec(spec)?;
    let (n, d) = (spec.n, spec.d);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lambda: Vec<Vec<i64>> = match spec.class {
        BenchClass::StandardSimplex => {
            let mut v = vec![vec![0i64; n]];
            for i in 0..n {
                let mut e = vec![0i64; n];
                e[i] = i64::from(d);
                v.push(e);
            }
            v
        }
        BenchClass::GeneralSimplex => random_simplex(&mut rng, n, d)?,
        BenchClass::ArbitraryPolytope => {
            let inner = spec.l.max(1).max(spec.t / 2);
            let size = spec.t.saturating_sub(inner).max(n + 2);
            let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
            set.insert(vec![0; n]);
            let mut tries = 0;
            while set.len() < size {
                set.insert(even_point(&mut rng, n, d));
                tries += 1;
                if tries > MAX_TRIES {
                    return Err(SoncError::Invalid(format!("not enough even points for n = {n}, d = {d}")));
                }
            }
            set.into_iter().collect()
        }
        BenchClass::Custom => unreachable!(),
    };
    let inner = spec.t.saturating_sub(lambda.len());
    if inner < spec.l.max(1) {
        return Err(SoncError::Invalid(format!("t = {} leaves {inner} inner terms, need {}", spec.t, spec.l.max(1))));
    }
    let mut f = SparsePoly::new(n);
    for v in &lambda {
        f.add_term(ints(v), round2(rng.gen_range(1.0..=10.0)));
    }
    let taken: BTreeSet<Vec<i64>> = lambda.iter().cloned().collect();
    let mut gamma: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut tries = 0;
    while gamma.len() < inner {
        tries += 1;
        if tries > MAX_TRIES {
            return Err(SoncError::Invalid(format!("not enough inner lattice points for {} inner terms", inner)));
        }
        let Some((_, _, _, p)) = inner_point(&mut rng, &lambda, n + 1) else { continue };
        if !taken.contains(&p) && gamma.insert(p.clone()) {
            let e = ints(&p);
            let c = inner_coeff(&mut rng, &e);
            f.add_term(e, c);
        }
    }
    Ok(f)
}

/// A sum of circuits, each with minimum 0 at the all-ones point, plus the
/// constant `m`, so the global minimum is `m`. Returns the polynomial, the
/// cover made of the planted circuits, and `m`.
pub fn gen_planted(n: usize, d: u32, circuits: usize, seed: u64) -> Result<(SparsePoly, Cover, f64), SoncError> {
    if n == 0 || d == 0 || d % 2 != 0 || circuits == 0 {
        return Err(SoncError::Invalid("need n, circuits >= 1 and positive even d".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = round2(rng.gen_range(-5.0..=5.0));
    let mut f = SparsePoly::new(n);
    f.add_term(Exponent::zero(n), m);
    let mut cover = Cover::default();
    let mut vertices: BTreeSet<Exponent> = BTreeSet::new();
    let mut tries = 0;
    while cover.entries.len() < circuits {
        tries += 1;
        if tries > MAX_TRIES {
            return Err(SoncError::Invalid(format!("could not plant {circuits} circuits with n = {n}, d = {d}")));
        }
        let verts = random_simplex(&mut rng, n, d)?;
        let Some((idx, k, big_k, p)) = inner_point(&mut rng, &verts, n + 1) else { continue };
        let beta = ints(&p);
        let trellis: Vec<Exponent> = idx.iter().map(|&i| ints(&verts[i])).collect();
        if trellis.contains(&beta)
            || vertices.contains(&beta)
            || trellis.iter().any(|a| cover.entries.iter().any(|e| e.beta == *a))
            || cover.entries.iter().any(|e| e.beta == beta)
        {
            continue;
        }
        let weights: Vec<_> = k.iter().map(|&ki| rat(ki, big_k)).collect();
        let s = round2(rng.gen_range(1.0..=5.0));
        let coeffs: Vec<f64> = k.iter().map(|&ki| s * ki as f64 / big_k as f64).collect();
        let circuit = CircuitData::new(trellis.clone(), coeffs.clone(), beta.clone(), s)?;
        if (circuit_number(&circuit)? - s).abs() > 1e-9 * s {
            continue;
        }
        for (a, c) in trellis.iter().zip(&coeffs) {
            f.add_term(a.clone(), *c);
            vertices.insert(a.clone());
        }
        f.add_term(beta.clone(), -s);
        cover.entries.push(CoverEntry { trellis, beta, weights });
    }
    let used: BTreeSet<Exponent> = cover.entries.iter().flat_map(|e| e.trellis.iter().cloned()).collect();
    cover.uncovered_lambda =
        f.terms().iter().filter(|(e, c)| e.is_even() && **c > 0.0 && !used.contains(*e)).map(|(e, _)| e.clone()).collect();
    cover.uncovered_lambda.remove(&Exponent::zero(n));
    Ok((f, cover, m))
}

fn row_for(spec: &BenchSpec, config: &BoundConfig, timings: bool) -> BenchRow {
    let mut row = BenchRow {
        class: spec.class.as_str().to_string(),
        n: spec.n,
        d: spec.d,
        t: spec.t,
        l: spec.l,
        seed: spec.seed,
        xi_socp: f64::NAN,
        xi_min: f64::NAN,
        gap: f64::NAN,
        time_total_s: 0.0,
        time_solver_s: 0.0,
        iters: 0,
        status: String::new(),
    };
    let f = match gen_bench(spec) {
        Ok(f) => f,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    if spec.class == BenchClass::Custom {
        row.n = f.nvars();
        row.t = f.len();
    }
    match sonc_lower_bound(&f, config) {
        Ok(out) => {
            row.xi_socp = out.xi;
            row.status = out.status.as_str().to_string();
            row.iters = out.report.solver.as_ref().map_or(0, |s| s.iterations);
            if timings {
                row.time_total_s = out.report.time_total_s;
                row.time_solver_s = out.report.time_solver_s;
            }
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    if let Ok(v) = local_upper_bound(&f, DEFAULT_STARTS, spec.seed) {
        row.xi_min = v;
        row.gap = optimality_gap(row.xi_socp, v);
    }
    row
}

/// Runs every spec on a pool of `threads` workers (all cores when `None`).
/// Rows come back in input order; failures are recorded in `status`.
/// With `timings == false` both time columns are zero, making the output
/// reproducible byte for byte.
pub fn run_bench(specs: &[BenchSpec], config: &BoundConfig, threads: Option<usize>, timings: bool) -> Result<Vec<BenchRow>, SoncError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| SoncError::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| specs.par_iter().map(|s| row_for(s, config, timings)).collect()))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), SoncError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[BenchRow], path: &Path) -> Result<(), SoncError> {
    write_csv(rows, std::fs::File::create(path)?)
}

pub fn load_specs(path: &Path) -> Result<Vec<BenchSpec>, SoncError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
