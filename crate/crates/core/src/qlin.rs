//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::exponent::{Exponent, Rational};

/// Row-reduces `[a | b]` in place. Returns the pivot column of each pivot row.
fn reduce(m: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let Some(first) = rows.first() else { return 0 };
    let cols = first.len();
    let mut m = rows.to_vec();
    reduce(&mut m, cols).len()
}

/// Unique solution of `a x = b`, or `None` when inconsistent or underdetermined.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(row, v)| row.iter().cloned().chain([v.clone()]).collect()).collect();
    let pivots = reduce(&mut m, cols);
    if pivots.len() < cols {
        return None;
    }
    if m.iter().skip(pivots.len()).any(|row| !row[cols].is_zero()) {
        return None;
    }
    Some((0..cols).map(|i| m[i][cols].clone()).collect())
}

pub fn affinely_independent(points: &[Exponent]) -> bool {
    let Some(p0) = points.first() else { return true };
    let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| (p - p0).0).collect();
    rank(&diffs) == diffs.len()
}

/// Barycentric coordinates of `beta` with respect to affinely independent
/// `points`; `None` if `beta` is not in their affine hull.
pub fn barycentric(points: &[Exponent], beta: &Exponent) -> Option<Vec<Rational>> {
    let n = beta.dim();
    let m = points.len();
    let mut a: Vec<Vec<Rational>> = (0..n).map(|j| points.iter().map(|p| p.0[j].clone()).collect()).collect();
    a.push(vec![Rational::one(); m]);
    let mut b = beta.0.clone();
    b.push(Rational::one());
    solve_unique(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::rat;

    #[test]
    fn barycentric_of_motzkin() {
        let pts = [Exponent::from_ints(&[4, 2]), Exponent::from_ints(&[2, 4]), Exponent::from_ints(&[0, 0])];
        let l = barycentric(&pts, &Exponent::from_ints(&[2, 2])).unwrap();
        assert_eq!(l, vec![rat(1, 3); 3]);
    }

    #[test]
    fn detects_dependence() {
        let pts = [Exponent::from_ints(&[0, 0]), Exponent::from_ints(&[2, 2]), Exponent::from_ints(&[4, 4])];
        assert!(!affinely_independent(&pts));
        assert!(affinely_independent(&pts[..2]));
        assert!(barycentric(&pts, &Exponent::from_ints(&[1, 1])).is_none());
    }

    #[test]
    fn off_hull_point_has_no_coordinates() {
        let pts = [Exponent::from_ints(&[0, 0]), Exponent::from_ints(&[2, 0])];
        assert!(barycentric(&pts, &Exponent::from_ints(&[1, 1])).is_none());
    }
}
