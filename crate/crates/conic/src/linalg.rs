/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug)]
pub(crate) struct DenseSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        DenseSym { n, data: vec![0.0; n * n] }
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] += v;
    }

    #[cfg(test)]
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|r| {
                let row = &self.data[r * n..(r + 1) * n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Cholesky factor `L L^T` of a (regularized) positive semidefinite matrix.
///
/// Pivots that collapse below a relative threshold are replaced by a huge
/// value, which zeroes the matching component of every solution. This makes
/// linearly dependent constraint rows harmless.
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &DenseSym, reg: f64) -> Cholesky {
        let n = m.n;
        let mut l = m.data.clone();
        let max_diag = (0..n).map(|i| m.data[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
        let tiny = 1e-30 * max_diag;
        for j in 0..n {
            let mut d = l[j * n + j] + reg;
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            let piv = if d <= tiny { 1e64 } else { d.sqrt() };
            l[j * n + j] = piv;
            let (head, tail) = l.split_at_mut((j + 1) * n);
            let row_j = &head[j * n..j * n + j];
            for i in (j + 1)..n {
                let row_i = &mut tail[(i - j - 1) * n..(i - j) * n];
                let mut s = row_i[j];
                for k in 0..j {
                    s -= row_i[k] * row_j[k];
                }
                row_i[j] = s / piv;
            }
        }
        Cholesky { n, l }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let mut m = DenseSym::zeros(3);
        let vals = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for r in 0..3 {
            for c in 0..3 {
                m.add(r, c, vals[r][c]);
            }
        }
        let ch = Cholesky::factor(&m, 0.0);
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let back = m.mul_vec(&x);
        for (a, b) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_rows_do_not_blow_up() {
        let mut m = DenseSym::zeros(2);
        for r in 0..2 {
            for c in 0..2 {
                m.add(r, c, 1.0);
            }
        }
        let ch = Cholesky::factor(&m, 0.0);
        let x = ch.solve(&[2.0, 2.0]);
        assert!(x.iter().all(|v| v.is_finite()));
        assert!((x[0] + x[1] - 2.0).abs() < 1e-9);
    }
}
