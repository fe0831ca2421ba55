//! Conic Benchmark Format (version 3) writer and a reader for the subset it
//! emits: domains `F`, `L+`, `QR` for variables and `L=` for constraints.

use std::fmt::Write as _;

use crate::{ConeKind, ConicError, ConicProblem};

fn num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

fn domain(kind: ConeKind) -> &'static str {
    match kind {
        ConeKind::Free => "F",
        ConeKind::NonNeg => "L+",
        ConeKind::RotatedSoc3 => "QR",
    }
}

/// Serializes `p` as CBF v3. The constraint `A x = b` is written as
/// `A x - b` in the `L=` domain.
pub fn export_cbf(p: &ConicProblem) -> String {
    let mut out = String::new();
    out.push_str("VER\n3\n\nOBJSENSE\nMAX\n\n");
    let _ = writeln!(out, "VAR\n{} {}", p.num_vars(), p.cones().len());
    for cone in p.cones() {
        let _ = writeln!(out, "{} {}", domain(cone.kind), cone.len);
    }
    if p.num_rows() > 0 {
        let _ = write!(out, "\nCON\n{} 1\nL= {}\n", p.num_rows(), p.num_rows());
    }
    let obj: Vec<(usize, f64)> =
        p.objective().iter().enumerate().filter(|e| *e.1 != 0.0).map(|(j, v)| (j, *v)).collect();
    if !obj.is_empty() {
        let _ = writeln!(out, "\nOBJACOORD\n{}", obj.len());
        for (j, v) in obj {
            let _ = writeln!(out, "{j} {}", num(v));
        }
    }
    let nnz: usize = p.rows().iter().map(|r| r.len()).sum();
    if nnz > 0 {
        let _ = writeln!(out, "\nACOORD\n{nnz}");
        for (i, row) in p.rows().iter().enumerate() {
            for &(j, v) in row {
                let _ = writeln!(out, "{i} {j} {}", num(v));
            }
        }
    }
    let b: Vec<(usize, f64)> =
        p.rhs().iter().enumerate().filter(|e| *e.1 != 0.0).map(|(i, v)| (i, -*v)).collect();
    if !b.is_empty() {
        let _ = writeln!(out, "\nBCOORD\n{}", b.len());
        for (i, v) in b {
            let _ = writeln!(out, "{i} {}", num(v));
        }
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> ConicError {
    ConicError::Cbf { line, msg: msg.into() }
}

/// Parses CBF text produced by [`export_cbf`] (or any file restricted to the
/// same domains). A `MIN` objective is negated so the container stays a
/// maximization.
pub fn parse_cbf(text: &str) -> Result<ConicProblem, ConicError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut pos = 0;
    let mut next = |what: &str| -> Result<(usize, &str), ConicError> {
        let item = lines.get(pos).copied().ok_or_else(|| bad(0, format!("unexpected end, expected {what}")))?;
        pos += 1;
        Ok(item)
    };
    fn ints(line: usize, s: &str, k: usize) -> Result<Vec<usize>, ConicError> {
        let v: Result<Vec<usize>, _> = s.split_whitespace().map(str::parse).collect();
        let v = v.map_err(|_| bad(line, format!("expected {k} integers")))?;
        if v.len() != k {
            return Err(bad(line, format!("expected {k} integers")));
        }
        Ok(v)
    }
    fn real(line: usize, s: &str) -> Result<f64, ConicError> {
        s.parse().map_err(|_| bad(line, format!("bad number '{s}'")))
    }

    let mut minimize = false;
    let mut p = ConicProblem::new();
    let mut nrows = 0;
    let mut obj: Vec<(usize, f64)> = Vec::new();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut bvals: Vec<(usize, f64)> = Vec::new();
    let mut saw_ver = false;
    loop {
        let Ok((ln, head)) = next("section") else { break };
        match head {
            "VER" => {
                let (l, v) = next("version")?;
                if v != "3" {
                    return Err(bad(l, "only version 3 is supported"));
                }
                saw_ver = true;
            }
            "OBJSENSE" => {
                let (l, v) = next("sense")?;
                minimize = match v {
                    "MIN" => true,
                    "MAX" => false,
                    _ => return Err(bad(l, "objective sense must be MIN or MAX")),
                };
            }
            "VAR" => {
                let (l, v) = next("VAR header")?;
                let h = ints(l, v, 2)?;
                let mut total = 0;
                for _ in 0..h[1] {
                    let (l, d) = next("domain")?;
                    let mut it = d.split_whitespace();
                    let name = it.next().unwrap_or("");
                    let len: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(l, "bad domain"))?;
                    match name {
                        "F" => {
                            p.add_free(len);
                        }
                        "L+" => {
                            p.add_nonneg(len);
                        }
                        "QR" => {
                            if len != 3 {
                                return Err(bad(l, "only 3-dimensional QR cones are supported"));
                            }
                            p.add_rotated_soc3();
                        }
                        _ => return Err(bad(l, format!("unsupported variable domain {name}"))),
                    }
                    total += len;
                }
                if total != h[0] {
                    return Err(bad(l, "domain sizes do not add up"));
                }
            }
            "CON" => {
                let (l, v) = next("CON header")?;
                let h = ints(l, v, 2)?;
                nrows = h[0];
                let mut total = 0;
                for _ in 0..h[1] {
                    let (l, d) = next("domain")?;
                    let mut it = d.split_whitespace();
                    if it.next() != Some("L=") {
                        return Err(bad(l, "only L= constraint domains are supported"));
                    }
                    total += it.next().and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| bad(l, "bad domain"))?;
                }
                if total != nrows {
                    return Err(bad(l, "domain sizes do not add up"));
                }
            }
            "OBJACOORD" => {
                let (l, v) = next("count")?;
                let k = ints(l, v, 1)?[0];
                for _ in 0..k {
                    let (l, e) = next("entry")?;
                    let mut it = e.split_whitespace();
                    let j: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(l, "bad index"))?;
                    obj.push((j, real(l, it.next().unwrap_or(""))?));
                }
            }
            "OBJBCOORD" => {
                next("constant")?;
            }
            "ACOORD" => {
                let (l, v) = next("count")?;
                let k = ints(l, v, 1)?[0];
                for _ in 0..k {
                    let (l, e) = next("entry")?;
                    let parts: Vec<&str> = e.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(bad(l, "ACOORD entries need 3 fields"));
                    }
                    let i = parts[0].parse().map_err(|_| bad(l, "bad row"))?;
                    let j = parts[1].parse().map_err(|_| bad(l, "bad column"))?;
                    entries.push((i, j, real(l, parts[2])?));
                }
            }
            "BCOORD" => {
                let (l, v) = next("count")?;
                let k = ints(l, v, 1)?[0];
                for _ in 0..k {
                    let (l, e) = next("entry")?;
                    let mut it = e.split_whitespace();
                    let i: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(l, "bad index"))?;
                    bvals.push((i, real(l, it.next().unwrap_or(""))?));
                }
            }
            other => return Err(bad(ln, format!("unsupported section {other}"))),
        }
    }
    if !saw_ver {
        return Err(bad(1, "missing VER section"));
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
    for (i, j, v) in entries {
        rows.get_mut(i).ok_or_else(|| bad(0, format!("row {i} out of range")))?.push((j, v));
    }
    let mut rhs = vec![0.0; nrows];
    for (i, v) in bvals {
        *rhs.get_mut(i).ok_or_else(|| bad(0, format!("row {i} out of range")))? = -v;
    }
    for (row, b) in rows.into_iter().zip(rhs) {
        p.add_row(row, b);
    }
    for (j, v) in obj {
        if j >= p.num_vars() {
            return Err(bad(0, format!("objective index {j} out of range")));
        }
        p.set_objective(j, if minimize { -v } else { v });
    }
    p.validate()?;
    Ok(p)
}
