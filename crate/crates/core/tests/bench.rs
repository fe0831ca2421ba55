use sonc_core::bench::{gen_bench, load_specs, run_bench, write_csv, BenchClass, BenchSpec};
use sonc_core::exponent::Exponent;
use sonc_core::pipeline::BoundConfig;
use sonc_core::qlin;

#[test]
fn standard_simplex_small() {
    let f = gen_bench(&BenchSpec::new(BenchClass::StandardSimplex, 2, 4, 4, 7)).unwrap();
    let part = f.partition_support().unwrap();
    let lambda: Vec<Exponent> = part.lambda_points();
    let want: Vec<Exponent> = [[0, 0], [0, 4], [4, 0]].iter().map(|v| Exponent::from_ints(v)).collect();
    let mut got = lambda.clone();
    got.sort();
    let mut want = want;
    want.sort();
    assert_eq!(got, want);
    assert_eq!(f.len(), 4);
    assert_eq!(part.gamma.len(), 1);
}

#[test]
fn generation_is_deterministic() {
    for class in [BenchClass::StandardSimplex, BenchClass::GeneralSimplex, BenchClass::ArbitraryPolytope] {
        let spec = BenchSpec::new(class, 3, 8, 10, 42);
        assert_eq!(gen_bench(&spec).unwrap(), gen_bench(&spec).unwrap());
    }
}

#[test]
fn general_simplex_large() {
    let f = gen_bench(&BenchSpec::new(BenchClass::GeneralSimplex, 10, 40, 20, 1)).unwrap();
    assert_eq!(f.len(), 20);
    let part = f.partition_support().unwrap();
    let lambda = part.lambda_points();
    assert_eq!(lambda.len(), 11);
    assert!(qlin::affinely_independent(&lambda));
}

fn csv_of(specs: &[BenchSpec]) -> String {
    let rows = run_bench(specs, &BoundConfig::default(), Some(1), false).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn three_specs_three_rows() {
    let specs = vec![
        BenchSpec::new(BenchClass::StandardSimplex, 2, 4, 5, 1),
        BenchSpec::new(BenchClass::GeneralSimplex, 3, 6, 7, 2),
        BenchSpec::new(BenchClass::ArbitraryPolytope, 2, 6, 8, 3),
    ];
    let text = csv_of(&specs);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "class,n,d,t,l,seed,xi_socp,xi_min,gap,time_total_s,time_solver_s,iters,status");
    assert_eq!(text, csv_of(&specs));
}

#[test]
fn uncoverable_and_motzkin_rows() {
    let specs = vec![BenchSpec::custom("1 + x1^2 - x1^3"), BenchSpec::custom("x1^4*x2^2 + x1^2*x2^4 + 1 - 3*x1^2*x2^2")];
    let rows = run_bench(&specs, &BoundConfig::default(), Some(1), true).unwrap();
    assert_eq!(rows[0].status, "no_certificate");
    assert_eq!(rows[0].xi_socp, f64::NEG_INFINITY);
    assert_eq!(rows[1].status, "optimal");
    assert!(rows[1].gap <= 1e-4, "{}", rows[1].gap);
    assert!(rows[1].time_total_s >= rows[1].time_solver_s);
}

#[test]
fn bad_specs_do_not_abort_the_batch() {
    let specs = vec![BenchSpec::new(BenchClass::StandardSimplex, 2, 3, 5, 0), BenchSpec::new(BenchClass::StandardSimplex, 2, 4, 5, 0)];
    let rows = run_bench(&specs, &BoundConfig::default(), Some(1), false).unwrap();
    assert!(rows[0].status.starts_with("error"));
    assert!(!rows[1].status.starts_with("error"));
}

#[test]
fn spec_files() {
    let dir = std::env::temp_dir().join(format!("sonc-bench-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("specs.json");
    std::fs::write(&path, r#"[{"class":"StandardSimplex","n":2,"d":4,"t":4,"seed":7},{"class":"Custom","poly":"x1^2 + 1"}]"#).unwrap();
    let specs = load_specs(&path).unwrap();
    assert_eq!(specs[0], BenchSpec::new(BenchClass::StandardSimplex, 2, 4, 4, 7));
    assert_eq!(specs[1], BenchSpec::custom("x1^2 + 1"));
    std::fs::remove_dir_all(&dir).unwrap();
}
