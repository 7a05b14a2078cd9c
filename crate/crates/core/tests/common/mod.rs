#![allow(dead_code)]

use krrh2_core::linalg::SymMatrix;
use oracles::Dense;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vector(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

pub fn dense_random(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Dense {
    (0..rows).map(|_| vector(r, cols)).collect()
}

pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let a = dense_random(r, n, n);
    SymMatrix::from_fn(n, |i, j| a[i][j] + a[j][i]).unwrap()
}

/// `B B^T` with `B` of size n x k, so rank at most k.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize, k: usize) -> SymMatrix {
    let b = dense_random(r, n, k);
    SymMatrix::from_fn(n, |i, j| oracles::dot(&b[i], &b[j])).unwrap()
}

pub fn dense(a: &SymMatrix) -> Dense {
    a.to_rows()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn assert_vec_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol * scale, "{x} vs {y} (tol {tol})");
    }
}
