#![allow(dead_code)]

use pcat::linalg::{mat_inverse, ComplexMatrix};
use pcat::C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod json;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(r: &mut impl Rng, scale: f64) -> C64 {
    C64::new(r.gen_range(-scale..=scale), r.gen_range(-scale..=scale))
}

pub fn random_entries(n: usize, r: &mut impl Rng, scale: f64) -> ComplexMatrix {
    ComplexMatrix::from_flat(n, (0..n * n).map(|_| random_c64(r, scale)).collect())
}

/// `I + spread·G`: an invertible, mildly non-orthogonal eigenvector matrix.
pub fn random_basis(n: usize, r: &mut impl Rng, spread: f64) -> ComplexMatrix {
    &ComplexMatrix::identity(n) + &random_entries(n, r, spread)
}

/// `P·diag(λ)·P⁻¹`.
pub fn with_spectrum(p: &ComplexMatrix, lambdas: &[C64]) -> ComplexMatrix {
    let pinv = mat_inverse(p).expect("basis is invertible");
    &(p * &ComplexMatrix::from_diag(lambdas)) * &pinv
}

/// Random unitary from Gram–Schmidt on a random complex matrix.
pub fn random_unitary(n: usize, r: &mut impl Rng) -> ComplexMatrix {
    let g = random_entries(n, r, 1.0);
    let mut u = ComplexMatrix::zeros(n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        u.set_column(j, &v);
        cols.push(v);
    }
    u
}

/// `n` distinct integers from `[lo, hi]`, sorted.
pub fn distinct_ints(n: usize, lo: i64, hi: i64, r: &mut impl Rng) -> Vec<i64> {
    let mut pool: Vec<i64> = (lo..=hi).collect();
    pool.shuffle(r);
    let mut v = pool[..n].to_vec();
    v.sort_unstable();
    v
}

/// Real parts `p_i/q` with a shared denominator `q ≤ 12` and distinct
/// integer numerators.
pub fn commensurate_levels(n: usize, r: &mut impl Rng) -> (Vec<f64>, i64) {
    let q = r.gen_range(1..=12);
    let nums = distinct_ints(n, -12, 12, r);
    (nums.iter().map(|&p| p as f64 / q as f64).collect(), q)
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}
