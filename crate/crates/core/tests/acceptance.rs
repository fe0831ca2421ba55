//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonc_conic::{export_cbf, solve, ConicProblem, SolveStatus, SolverSettings};
use sonc_core::bench::{gen_bench, BenchClass, BenchSpec};
use sonc_core::certify::{verify_circuit_decomposition, verify_exact};
use sonc_core::exponent::{fmt_rational, rat, Exponent, Rational};
use sonc_core::local::local_upper_bound;
use sonc_core::medseq::{
    ceil_log2, conjecture_report, is_mediated_sequence, med_seq, med_seq_size_bound, med_set, med_set_odd,
    minimal_med_seq_size, sequence_of,
};
use sonc_core::pipeline::{bound_problem, sonc_lower_bound, BoundConfig, BoundStatus};
use sonc_core::poly::{circuit_nonneg, circuit_number, is_circuit, CircuitData};
use sonc_core::{parse_poly, SparsePoly};

const QUARTIC: &str = "1 + x1^4 + x2^4 - x1*x2^2 - x1^2*x2 + 5*x1*x2";
const MOTZKIN: &str = "x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2";
const COVER_EXAMPLE: &str = "50*x1^4*x2^4 + x1^4 + 3*x2^4 + 800 - 100*x1*x2^2 - 100*x1^2*x2";

type Outcome = (bool, String);

fn e(v: &[i64]) -> Exponent {
    Exponent::from_ints(v)
}

fn motzkin_circuit() -> CircuitData {
    CircuitData::new(vec![e(&[4, 2]), e(&[2, 4]), e(&[0, 0])], vec![1.0; 3], e(&[2, 2]), 3.0).unwrap()
}

fn show(v: &[Rational]) -> String {
    format!("({})", v.iter().map(fmt_rational).collect::<Vec<_>>().join(","))
}

fn sorted(mut v: Vec<Rational>) -> Vec<Rational> {
    v.sort();
    v
}

fn quartic() -> Outcome {
    let f = parse_poly(QUARTIC, 2).unwrap();
    let start = Instant::now();
    let out = sonc_lower_bound(&f, &BoundConfig::default()).unwrap();
    let ub = local_upper_bound(&f, 32, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (out.xi + 6.916501).abs() <= 1e-4 && (ub + 2.203372).abs() <= 1e-3 && secs < 5.0 && out.status.is_certified();
    (ok, format!("xi_socp = {:.7}, xi_min = {ub:.7}, status {}, {secs:.3} s", out.xi, out.status))
}

fn motzkin() -> Outcome {
    let f = parse_poly(MOTZKIN, 2).unwrap();
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mut g = f.clone();
        g.add_term(Exponent::zero(2), -mid);
        if is_circuit(&g).is_some_and(|c| circuit_nonneg(&c)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let out = sonc_lower_bound(&f, &BoundConfig::default()).unwrap();
    let c = motzkin_circuit();
    let ms = med_set(&c.trellis, &e(&[2, 2]), &[rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap();
    let dec = verify_circuit_decomposition(&c, &ms).unwrap();
    let coeffs = sorted(dec.coefficients.clone());
    let chk = verify_exact(&dec.to_certificate(), &f).unwrap();
    let ok = out.xi.abs() <= 1e-6 && lo.abs() <= 1e-6 && coeffs == vec![rat(1, 1), rat(1, 1), rat(2, 1)] && chk.residual == 0.0;
    (ok, format!("xi_socp = {:.2e}, oracle = {lo:.2e}, coefficients {}, exact residual {}", out.xi, show(&coeffs), chk.residual))
}

fn odd_route() -> Outcome {
    let c = motzkin_circuit();
    let ms = med_set_odd(&c.trellis, &e(&[2, 2]), &[rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap();
    let dec = verify_circuit_decomposition(&c, &ms).unwrap();
    let got = sorted(dec.coefficients.clone());
    let want = sorted(vec![rat(3, 2), rat(1, 1), rat(1, 2), rat(1, 1), rat(1, 2)]);
    let chk = verify_exact(&dec.to_certificate(), &c.to_poly()).unwrap();
    (got == want && chk.residual == 0.0, format!("coefficients {}, exact residual {}", show(&dec.coefficients), chk.residual))
}

fn mediated_sequences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = 0;
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 1000 {
        let p: u64 = rng.gen_range(2..=1_000_000);
        let q: u64 = rng.gen_range(1..p);
        if q.gcd(&p) != 1 {
            continue;
        }
        pairs += 1;
        let seq = sequence_of(p, &med_seq(p, q).unwrap());
        let ratio = seq.len() as f64 / med_seq_size_bound(p);
        worst = worst.max(ratio);
        if !is_mediated_sequence(&seq, p) || !seq.contains(&q) || ratio >= 1.0 {
            bad += 1;
        }
    }
    let unit_bad: Vec<u64> = (1..=64u64).filter(|&p| minimal_med_seq_size(p, 1).ok() != Some(ceil_log2(p) + 2)).collect();
    let conj = conjecture_report(64).unwrap();
    (
        bad == 0 && unit_bad.is_empty(),
        format!(
            "{pairs} pairs, {bad} bad, max size/bound {worst:.3}; N(1/p) mismatches for p <= 64: {unit_bad:?}; \
             conjecture (reported only): {} pairs, {} mismatches",
            conj.pairs_checked,
            conj.mismatches.len()
        ),
    )
}

fn parity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    let mut points = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(2..=(n + 1).min(5));
        let (trellis, beta, weights) = common::odd_instance(&mut rng, n, m);
        let ms = med_set_odd(&trellis, &beta, &weights).unwrap();
        for p in ms.points() {
            points += 1;
            let odd_den = p.coords().iter().all(|c| c.denom().is_odd());
            let even_num = p.coords().iter().all(|c| c.numer().is_even());
            if !odd_den || (p != beta && !even_num) {
                bad += 1;
            }
        }
    }
    (bad == 0, format!("200 trellises, {points} points, {bad} violations"))
}

fn cover_example() -> Outcome {
    let f = parse_poly(COVER_EXAMPLE, 2).unwrap();
    let out = sonc_lower_bound(&f, &BoundConfig::default()).unwrap();
    let g1 = CircuitData::new(vec![e(&[4, 4]), e(&[4, 0]), e(&[0, 0])], vec![20.0, 1.0, 400.0], e(&[2, 1]), 100.0).unwrap();
    let theta = circuit_number(&g1).unwrap();
    let ok = out.report.cover_entries == 2 && out.xi >= -1e-6 && out.status.is_certified() && theta >= 100.0;
    (ok, format!("{} cover entries, xi_socp = {:.6}, status {}, Theta(g1) = {theta:.4}", out.report.cover_entries, out.xi, out.status))
}

fn random_spec(class: BenchClass, seed: u64) -> BenchSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=6);
    let d = 2 * rng.gen_range(2..=6u32);
    let t = rng.gen_range(n + 3..=20);
    BenchSpec::new(class, n, d, t, seed)
}

fn soundness_sweep() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for class in [BenchClass::StandardSimplex, BenchClass::GeneralSimplex, BenchClass::ArbitraryPolytope] {
        let mut statuses: BTreeMap<&str, usize> = BTreeMap::new();
        let (mut made, mut seed, mut violations) = (0, 0u64, 0);
        let mut worst_residual = 0.0f64;
        while made < 100 {
            seed += 1;
            let Ok(f) = gen_bench(&random_spec(class, seed)) else { continue };
            made += 1;
            let out = sonc_lower_bound(&f, &BoundConfig::default()).unwrap();
            *statuses.entry(out.status.as_str()).or_default() += 1;
            if out.status != BoundStatus::Optimal {
                continue;
            }
            let residual = out.report.exact_residual.unwrap_or(f64::INFINITY);
            worst_residual = worst_residual.max(residual);
            let ub = local_upper_bound(&f, 32, seed).unwrap();
            if residual > 1e-5 || out.xi > ub + 1e-6 {
                violations += 1;
            }
        }
        ok &= violations == 0;
        parts.push(format!("{}: {statuses:?}, {violations} violations, max residual {worst_residual:.1e}", class.as_str()));
    }
    (ok, parts.join("; "))
}

fn sqrt2() -> Outcome {
    let mut p = ConicProblem::new();
    let a = p.add_rotated_soc3();
    p.add_row([(a, 1.0)], 1.0);
    p.add_row([(a + 1, 1.0)], 1.0);
    p.set_objective(a + 2, 1.0);
    let r = solve(&p, &SolverSettings::default()).unwrap();
    let ok = r.status == SolveStatus::Optimal && (r.objective - 2f64.sqrt()).abs() <= 1e-8;
    (ok, format!("max c = {:.12}, cross-check: {}", r.objective, cbf_crosscheck()))
}

/// Re-solves the exported Motzkin program with the Python reference script.
/// Informational only.
fn cbf_crosscheck() -> String {
    let f: SparsePoly = parse_poly(MOTZKIN, 2).unwrap();
    let bp = bound_problem(&f, &BoundConfig::default()).unwrap().unwrap();
    let ours = solve(&bp.problem, &SolverSettings::default()).unwrap().objective;
    let path = std::env::temp_dir().join(format!("sonc-motzkin-{}.cbf", std::process::id()));
    std::fs::write(&path, export_cbf(&bp.problem)).unwrap();
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scripts/cbf_crosscheck.py");
    let run = Command::new("python3").arg(script).arg(&path).arg("--expect").arg(ours.to_string()).output();
    let _ = std::fs::remove_file(&path);
    match run {
        Ok(o) if o.status.success() => {
            let text = String::from_utf8_lossy(&o.stdout);
            let value = text.lines().find_map(|l| l.strip_prefix("value = ")).unwrap_or("?").to_string();
            format!("agrees within 1e-6 (reference {value}, ours {ours:.3e})")
        }
        Ok(o) if o.status.code() == Some(1) => format!("MISMATCH: {}", String::from_utf8_lossy(&o.stdout).trim()),
        _ => "skipped (python3 with cvxpy unavailable)".to_string(),
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("quartic bound, local bound and runtime", quartic),
        ("Motzkin bound and exact (1,2,1) decomposition", motzkin),
        ("odd-route Motzkin coefficients", odd_route),
        ("mediated sequences", mediated_sequences),
        ("odd-parity mediated sets", parity),
        ("two-entry cover example", cover_example),
        ("certificate soundness sweep", soundness_sweep),
        ("rotated cone solver unit", sqrt2),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (ok, detail) = check();
        println!("criterion {} {}: {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
