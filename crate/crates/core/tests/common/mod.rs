#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use sonc_core::exponent::{rat, Exponent, Rational};

/// Random even trellis with `m` affinely independent vertices in `n`
/// variables and an interior lattice point `beta`, which is odd in roughly
/// half of the coordinates when the weight denominator allows it.
pub fn odd_instance<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Vec<Exponent>, Exponent, Vec<Rational>) {
    loop {
        let raw: Vec<i64> = (0..m).map(|i| if i == m - 1 { 1 } else { rng.gen_range(1..=6) }).collect();
        let t: i64 = raw.iter().sum();
        let mut e: Vec<Vec<i64>> = (0..m - 1).map(|_| (0..n).map(|_| rng.gen_range(0..=8)).collect()).collect();
        let mut last = Vec::with_capacity(n);
        for j in 0..n {
            let partial: i64 = (0..m - 1).map(|i| raw[i] * e[i][j]).sum();
            let target = if t % 2 == 0 && rng.gen_bool(0.5) { t / 2 } else { 0 };
            let base = (target - partial).rem_euclid(t);
            last.push(base + t * rng.gen_range(0..=1));
        }
        e.push(last);
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let trellis: Vec<Exponent> =
            order.iter().map(|&i| Exponent::from_ints(&e[i].iter().map(|c| 2 * c).collect::<Vec<_>>())).collect();
        if !sonc_core::qlin::affinely_independent(&trellis) {
            continue;
        }
        let weights: Vec<Rational> = order.iter().map(|&i| rat(raw[i], t)).collect();
        let mut beta = Exponent::zero(n);
        for (a, w) in trellis.iter().zip(&weights) {
            beta = &beta + &a.scale(w);
        }
        assert!(beta.is_integer());
        return (trellis, beta, weights);
    }
}
