//! Reference computations for tests.
//!
//! Everything here is deliberately naive: dense `Vec<Vec<f64>>` matrices,
//! permutation-expansion determinants, explicit inverses. Nothing in this crate
//! depends on the library it checks.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(rows: usize, cols: usize) -> Dense {
    vec![vec![0.0; cols]; rows]
}

pub fn identity(n: usize) -> Dense {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn transpose(a: &Dense) -> Dense {
    if a.is_empty() {
        return Vec::new();
    }
    let mut t = zeros(a[0].len(), a.len());
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            t[j][i] = *v;
        }
    }
    t
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = zeros(a.len(), cols);
    for i in 0..a.len() {
        assert_eq!(a[i].len(), inner, "matmul: inner dimension mismatch");
        for j in 0..cols {
            let mut s = 0.0;
            for k in 0..inner {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect()).collect()
}

pub fn scale(a: &Dense, s: f64) -> Dense {
    a.iter().map(|r| r.iter().map(|v| v * s).collect()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x^T A y` by explicit double loop.
pub fn quad_form(x: &[f64], a: &Dense, y: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..y.len() {
            s += x[i] * a[i][j] * y[j];
        }
    }
    s
}

pub fn trace(a: &Dense) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn mean(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s / v.len() as f64
}

/// Sample variance with divisor `n - 1`, two-pass.
pub fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    let mut s = 0.0;
    for x in v {
        s += (x - m) * (x - m);
    }
    s / (v.len() as f64 - 1.0)
}

/// The centering projector `I - J/n` as an explicit matrix.
pub fn centering_matrix(n: usize) -> Dense {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64;
        }
    }
    m
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    // Heap's algorithm, tracking parity.
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    out.push((perm.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Determinant by the Leibniz permutation expansion. Only sensible for n <= 8.
pub fn det_leibniz(a: &Dense) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    assert!(n <= 8, "det_leibniz is factorial-time");
    permutations(n).into_iter().map(|(p, sign)| sign * (0..n).map(|i| a[i][p[i]]).product::<f64>()).sum()
}

/// Solve `A x = b` by Cramer's rule with Leibniz determinants.
pub fn cramer_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let d = det_leibniz(a);
    (0..n)
        .map(|col| {
            let mut ai = a.clone();
            for r in 0..n {
                ai[r][col] = b[r];
            }
            det_leibniz(&ai) / d
        })
        .collect()
}

/// Inverse via the adjugate (cofactor) formula. n <= 7.
pub fn inverse_adjugate(a: &Dense) -> Dense {
    let n = a.len();
    let d = det_leibniz(a);
    let mut inv = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor: Dense =
                (0..n).filter(|&r| r != i).map(|r| (0..n).filter(|&c| c != j).map(|c| a[r][c]).collect()).collect();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            // adj = cofactor^T
            inv[j][i] = sign * det_leibniz(&minor) / d;
        }
    }
    inv
}

/// Gauss-Jordan inverse with partial pivoting, for sizes where Leibniz is too slow.
pub fn inverse_gauss_jordan(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap()).unwrap();
        m.swap(col, piv);
        let p = m[col][col];
        assert!(p.abs() > 0.0, "singular matrix");
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Solve by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    matvec(&inverse_gauss_jordan(a), b)
}

/// Characteristic polynomial coefficients of `det(xI - A)` via Faddeev-LeVerrier,
/// highest degree first: `[1, c_{n-1}, ..., c_0]`.
pub fn char_poly(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![1.0];
    let mut m = zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c;
        }
        m = next;
        let am = matmul(a, &m);
        c = -trace(&am) / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// All roots of a real polynomial (highest degree first) by Durand-Kerner,
/// polished with Newton on the real line. Returns real parts sorted descending.
pub fn real_poly_roots(coeffs: &[f64]) -> Vec<f64> {
    let lead = coeffs[0];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let deg = monic.len() - 1;
    let eval = |z: Complex64| monic.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let bound = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    let d: Vec<f64> = (0..deg).map(|k| monic[k] * (deg - k) as f64).collect();
    let mut out: Vec<f64> = roots
        .into_iter()
        .map(|z| {
            let mut x = z.re;
            for _ in 0..50 {
                let f = monic.iter().fold(0.0, |acc, c| acc * x + c);
                let fp = d.iter().fold(0.0, |acc, c| acc * x + c);
                if fp == 0.0 {
                    break;
                }
                let step = f / fp;
                x -= step;
                if step.abs() < 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            x
        })
        .collect();
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

/// Residual of least-squares regression of `y` on the given columns using the
/// normal equations `X^T X b = X^T y`, solved by Gauss-Jordan.
pub fn normal_equations_residual(y: &[f64], columns: &[Vec<f64>]) -> Vec<f64> {
    let q = columns.len();
    let mut gram = zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            gram[i][j] = dot(&columns[i], &columns[j]);
        }
    }
    let rhs: Vec<f64> = columns.iter().map(|c| dot(c, y)).collect();
    let coef = gauss_solve(&gram, &rhs);
    (0..y.len()).map(|r| y[r] - (0..q).map(|k| coef[k] * columns[k][r]).sum::<f64>()).collect()
}

/// Upper critical value of the chi-square distribution with two degrees of
/// freedom: the survival function is `exp(-x/2)`.
pub fn chi_square_2df_critical(alpha: f64) -> f64 {
    -2.0 * alpha.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_matches_known_determinants() {
        assert_eq!(det_leibniz(&vec![vec![2.0, 1.0], vec![1.0, 2.0]]), 3.0);
        let a = vec![vec![6.0, 1.0, 1.0], vec![4.0, -2.0, 5.0], vec![2.0, 8.0, 7.0]];
        assert!((det_leibniz(&a) + 306.0).abs() < 1e-12);
        assert!((det_leibniz(&identity(5)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn char_poly_of_diagonal() {
        let a = vec![vec![3.0, 0.0], vec![0.0, 1.0]];
        // (x-3)(x-1) = x^2 - 4x + 3
        assert_eq!(char_poly(&a), vec![1.0, -4.0, 3.0]);
        let r = real_poly_roots(&char_poly(&a));
        assert!((r[0] - 3.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cramer_and_gauss_agree() {
        let a = vec![vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]];
        let b = [1.0, -2.0, 0.5];
        let x = cramer_solve(&a, &b);
        let y = gauss_solve(&a, &b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
        let inv = inverse_adjugate(&a);
        let prod = matmul(&a, &inv);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[i][j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chi_square_critical_value() {
        assert!((chi_square_2df_critical(0.001) - 13.815510557964274).abs() < 1e-12);
    }
}
