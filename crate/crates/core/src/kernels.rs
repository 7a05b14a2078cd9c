//! Kernel matrices over individuals.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use faer::Mat;

use crate::error::{Error, Result};
use crate::genotypes::Design;
use crate::io::write_real_matrix;
use crate::linalg::{eigh, EigenDecomposition, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelKind {
    /// `Z Z^T / p`
    Linear,
    /// `(1 + Z Z^T / p)` squared entrywise.
    Polynomial2,
    /// `exp(-|z_i - z_j|^2 / (2 h^2))`, bandwidth `h` defaulting to 1.
    Gaussian,
    /// Supplied by the caller.
    Precomputed,
}

impl KernelKind {
    /// The three constructible kinds, in reporting order.
    pub const BUILTIN: [KernelKind; 3] = [KernelKind::Linear, KernelKind::Polynomial2, KernelKind::Gaussian];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial2 => "poly2",
            KernelKind::Gaussian => "gaussian",
            KernelKind::Precomputed => "precomputed",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(KernelKind::Linear),
            "poly2" | "polynomial" => Ok(KernelKind::Polynomial2),
            "gaussian" => Ok(KernelKind::Gaussian),
            _ => Err(Error::param("kernel", format!("unknown kernel `{s}` (linear|poly2|gaussian)"))),
        }
    }
}

pub const DEFAULT_BANDWIDTH: f64 = 1.0;

/// A symmetric kernel matrix with a lazily computed, cached eigendecomposition.
#[derive(Debug)]
pub struct KernelMatrix {
    kind: KernelKind,
    matrix: SymMatrix,
    eig: OnceLock<Result<EigenDecomposition>>,
}

impl Clone for KernelMatrix {
    fn clone(&self) -> Self {
        let eig = OnceLock::new();
        if let Some(e) = self.eig.get() {
            let _ = eig.set(e.clone());
        }
        Self { kind: self.kind, matrix: self.matrix.clone(), eig }
    }
}

impl KernelMatrix {
    pub fn precomputed(matrix: SymMatrix) -> Self {
        Self::wrap(KernelKind::Precomputed, matrix)
    }

    fn wrap(kind: KernelKind, matrix: SymMatrix) -> Self {
        Self { kind, matrix, eig: OnceLock::new() }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    /// Eigendecomposition, computed on first call and shared afterwards. Also
    /// enforces numerical positive semidefiniteness.
    pub fn eigen(&self) -> Result<&EigenDecomposition> {
        self.eig
            .get_or_init(|| {
                let e = eigh(&self.matrix)?;
                e.check_psd()?;
                Ok(e)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn has_cached_eigen(&self) -> bool {
        matches!(self.eig.get(), Some(Ok(_)))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_real_matrix(path, &self.matrix.to_rows())
    }
}

/// Unscaled Gram matrix `Z Z^T`.
pub fn gram(z: &Design) -> Result<SymMatrix> {
    let (n, p) = (z.n(), z.p());
    let m = Mat::from_fn(n, p, |i, j| z.row(i)[j]);
    let g = &m * m.transpose();
    SymMatrix::from_fn(n, |i, j| g[(i, j)])
}

fn check_nonempty(z: &Design) -> Result<()> {
    if z.n() == 0 || z.p() == 0 {
        return Err(Error::param("genotypes", "kernel needs at least one individual and one SNP"));
    }
    Ok(())
}

fn linear_from_gram(g: &SymMatrix, p: usize) -> Result<SymMatrix> {
    let s = 1.0 / p as f64;
    SymMatrix::from_fn(g.order(), |i, j| g.get(i, j) * s)
}

fn polynomial_from_gram(g: &SymMatrix, p: usize) -> Result<SymMatrix> {
    let s = 1.0 / p as f64;
    SymMatrix::from_fn(g.order(), |i, j| {
        let v = 1.0 + g.get(i, j) * s;
        v * v
    })
}

fn gaussian_from_gram(g: &SymMatrix, bandwidth: f64) -> Result<SymMatrix> {
    let scale = -0.5 / (bandwidth * bandwidth);
    SymMatrix::from_fn(g.order(), |i, j| {
        if i == j {
            1.0
        } else {
            let d2 = (g.get(i, i) + g.get(j, j) - 2.0 * g.get(i, j)).max(0.0);
            (scale * d2).exp()
        }
    })
}

fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::param("bandwidth", format!("must be positive, got {bandwidth}")));
    }
    Ok(())
}

pub fn linear_kernel(z: &Design) -> Result<KernelMatrix> {
    build_kernel(KernelKind::Linear, z, DEFAULT_BANDWIDTH)
}

pub fn polynomial_kernel(z: &Design) -> Result<KernelMatrix> {
    build_kernel(KernelKind::Polynomial2, z, DEFAULT_BANDWIDTH)
}

pub fn gaussian_kernel(z: &Design) -> Result<KernelMatrix> {
    build_kernel(KernelKind::Gaussian, z, DEFAULT_BANDWIDTH)
}

pub fn gaussian_kernel_with_bandwidth(z: &Design, bandwidth: f64) -> Result<KernelMatrix> {
    build_kernel(KernelKind::Gaussian, z, bandwidth)
}

pub fn build_kernel(kind: KernelKind, z: &Design, bandwidth: f64) -> Result<KernelMatrix> {
    Ok(build_kernels(&[kind], z, bandwidth)?.pop().expect("one kind requested"))
}

/// Build several kernels from one shared Gram matrix, in the order requested.
pub fn build_kernels(kinds: &[KernelKind], z: &Design, bandwidth: f64) -> Result<Vec<KernelMatrix>> {
    check_nonempty(z)?;
    check_bandwidth(bandwidth)?;
    let g = gram(z)?;
    kinds
        .iter()
        .map(|&kind| {
            let m = match kind {
                KernelKind::Linear => linear_from_gram(&g, z.p())?,
                KernelKind::Polynomial2 => polynomial_from_gram(&g, z.p())?,
                KernelKind::Gaussian => gaussian_from_gram(&g, bandwidth)?,
                KernelKind::Precomputed => {
                    return Err(Error::param("kernel", "a precomputed kernel cannot be built from genotypes"))
                }
            };
            Ok(KernelMatrix::wrap(kind, m))
        })
        .collect()
}
