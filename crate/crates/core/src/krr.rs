//! Kernel ridge regression and the heritability estimate built on it.

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::kernels::{KernelKind, KernelMatrix};
use crate::linalg::{dot, solve_spd_shifted, EigenDecomposition, SymMatrix};

/// Ridge values (as `n * lambda`) swept by default.
pub const DEFAULT_NLAMBDA_GRID: [f64; 11] = [0.1, 0.5, 0.8, 1.0, 1.3, 1.5, 2.0, 2.3, 2.5, 3.0, 5.0];

/// Grids at least this long pay for one eigendecomposition instead of one
/// Cholesky factorization per value.
pub const SPECTRAL_GRID_MIN: usize = 4;

/// Denominators below this leave the heritability estimate undefined.
pub const UNDEFINED_H2_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct KrrFit {
    pub n: usize,
    pub nlambda: f64,
    pub alpha_hat: Vec<f64>,
    pub g_hat: Vec<f64>,
    pub sigma_g2_hat: f64,
    pub sigma_eps2_hat: f64,
    /// `None` when both variance components vanish.
    pub h2_hat: Option<f64>,
}

fn check_inputs(n: usize, y: &[f64], nlambda: f64) -> Result<()> {
    if !(nlambda > 0.0 && nlambda.is_finite()) {
        return Err(Error::param("nlambda", format!("must be positive and finite, got {nlambda}")));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("kernel has order {n}, phenotype vector length {}", y.len())));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    Ok(())
}

fn finish(k: &SymMatrix, y: &[f64], nlambda: f64, alpha_hat: Vec<f64>) -> Result<KrrFit> {
    let n = y.len();
    let g_hat = k.matvec(&alpha_hat)?;
    let centered_ss = if n > 1 {
        let m = crate::linalg::mean(&g_hat);
        let sq: Vec<f64> = g_hat.iter().map(|v| (v - m) * (v - m)).collect();
        crate::linalg::pairwise_sum(&sq)
    } else {
        0.0
    };
    let sigma_g2_hat = if n > 1 { centered_ss / (n - 1) as f64 } else { 0.0 };
    let resid: Vec<f64> = y.iter().zip(&g_hat).map(|(a, b)| (a - b) * (a - b)).collect();
    let sigma_eps2_hat = crate::linalg::pairwise_sum(&resid) / n as f64;
    let denom = sigma_g2_hat + sigma_eps2_hat;
    let h2_hat = (denom >= UNDEFINED_H2_FLOOR).then(|| (sigma_g2_hat / denom).clamp(0.0, 1.0));
    Ok(KrrFit { n, nlambda, alpha_hat, g_hat, sigma_g2_hat, sigma_eps2_hat, h2_hat })
}

/// Fit through the cached spectrum when present, otherwise by Cholesky.
pub fn fit(k: &KernelMatrix, y: &[f64], nlambda: f64) -> Result<KrrFit> {
    if k.has_cached_eigen() {
        fit_spectral(k.matrix(), k.eigen()?, y, nlambda)
    } else {
        fit_cholesky(k.matrix(), y, nlambda)
    }
}

/// `alpha = (K + nlambda I)^{-1} Y` by a Cholesky solve.
pub fn fit_cholesky(k: &SymMatrix, y: &[f64], nlambda: f64) -> Result<KrrFit> {
    check_inputs(k.order(), y, nlambda)?;
    let alpha = solve_spd_shifted(k, nlambda, y)?;
    finish(k, y, nlambda, alpha)
}

/// `alpha = V diag(1 / (l_i + nlambda)) V^T Y`.
pub fn fit_spectral(k: &SymMatrix, eig: &EigenDecomposition, y: &[f64], nlambda: f64) -> Result<KrrFit> {
    check_inputs(k.order(), y, nlambda)?;
    if eig.order() != k.order() {
        return Err(Error::DimensionMismatch("eigendecomposition does not match kernel".into()));
    }
    let alpha = eig.apply(y, |l| 1.0 / (l + nlambda))?;
    finish(k, y, nlambda, alpha)
}

/// One fit per grid value. Long grids materialize the eigendecomposition first,
/// after which [`fit`] takes the same route, so results match one-off calls.
pub fn lambda_grid_fit(k: &KernelMatrix, y: &[f64], grid: &[f64]) -> Result<Vec<KrrFit>> {
    if grid.is_empty() {
        return Err(Error::param("grid", "needs at least one value"));
    }
    if let Some(v) = grid.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::param("grid", format!("value {v} is not positive")));
    }
    if grid.len() >= SPECTRAL_GRID_MIN {
        k.eigen()?;
    }
    grid.iter().map(|&s| fit(k, y, s)).collect()
}

/// Column names of [`estimate_record`].
pub const ESTIMATE_HEADER: [&str; 6] = ["kind", "nlambda", "n", "sigma_g2", "sigma_eps2", "h2"];

pub fn estimate_record(kind: KernelKind, fit: &KrrFit) -> [String; 6] {
    [
        kind.to_string(),
        fmt_f64(fit.nlambda),
        fit.n.to_string(),
        fmt_f64(fit.sigma_g2_hat),
        fmt_f64(fit.sigma_eps2_hat),
        fit.h2_hat.map_or_else(|| "NA".to_string(), fmt_f64),
    ]
}

/// Covariates with an intercept column in front, checked for full column rank.
#[derive(Debug, Clone)]
pub struct CovariateMatrix {
    n: usize,
    // orthonormal basis of the column span, one vector per column
    basis: Vec<Vec<f64>>,
}

impl CovariateMatrix {
    /// `rows[i]` holds the `q` covariates of individual `i`. Column numbers in
    /// [`Error::RankDeficient`] are 1-based over the supplied covariates; the
    /// intercept is column 0.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let q = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != q) {
            return Err(Error::DimensionMismatch("ragged covariate rows".into()));
        }
        if n <= q + 1 {
            return Err(Error::param(
                "covariates",
                format!("need more individuals than covariates plus intercept, got n={n}, q={q}"),
            ));
        }
        let mut columns = vec![vec![1.0; n]];
        columns.extend((0..q).map(|j| rows.iter().map(|r| r[j]).collect::<Vec<f64>>()));
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(q + 1);
        for (c, mut col) in columns.into_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: c });
            }
            let scale = dot(&col, &col).sqrt();
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let h = dot(b, &col);
                    col.iter_mut().zip(b).for_each(|(x, bi)| *x -= h * bi);
                }
            }
            let norm = dot(&col, &col).sqrt();
            if scale == 0.0 || norm <= 1e-10 * scale {
                return Err(Error::RankDeficient { column: c });
            }
            col.iter_mut().for_each(|x| *x /= norm);
            basis.push(col);
        }
        Ok(Self { n, basis })
    }

    /// Intercept only.
    pub fn intercept(n: usize) -> Result<Self> {
        Self::from_rows(&vec![Vec::new(); n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns including the intercept.
    pub fn columns(&self) -> usize {
        self.basis.len()
    }
}

/// Residuals of the least-squares regression of `y` on the covariates.
pub fn residualize(y: &[f64], x: &CovariateMatrix) -> Result<Vec<f64>> {
    if y.len() != x.n {
        return Err(Error::DimensionMismatch(format!("{} phenotypes, {} covariate rows", y.len(), x.n)));
    }
    let mut r = y.to_vec();
    for _ in 0..2 {
        for b in &x.basis {
            let h = dot(b, &r);
            r.iter_mut().zip(b).for_each(|(v, bi)| *v -= h * bi);
        }
    }
    Ok(r)
}
