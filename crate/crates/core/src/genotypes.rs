//! SNP genotype matrices: simulation under Hardy-Weinberg equilibrium,
//! subsampling, CSV ingestion, and conversion to a real design matrix.

use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::io::{create_writer, csv_err, csv_reader};
use crate::rng::{self, Rng};

/// Allele-count matrix, row-major, one row per individual.
#[derive(Debug, Clone, PartialEq)]
pub struct GenotypeMatrix {
    n: usize,
    p: usize,
    data: Vec<u8>,
    maf: Option<Vec<f64>>,
}

impl GenotypeMatrix {
    pub fn new(n: usize, p: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(format!("{} genotype entries cannot fill {n}x{p}", data.len())));
        }
        if let Some(k) = data.iter().position(|&v| v > 2) {
            return Err(Error::param(
                "genotypes",
                format!("entry ({}, {}) is {}, expected 0, 1 or 2", k / p, k % p, data[k]),
            ));
        }
        Ok(Self { n, p, data, maf: None })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged genotype rows".into()));
        }
        Self::new(n, p, rows.concat())
    }

    /// Attach per-SNP minor allele frequencies; each must lie in (0, 0.5].
    pub fn with_maf(mut self, maf: Vec<f64>) -> Result<Self> {
        if maf.len() != self.p {
            return Err(Error::DimensionMismatch(format!("{} allele frequencies for {} SNPs", maf.len(), self.p)));
        }
        if let Some(m) = maf.iter().find(|m| !(**m > 0.0 && **m <= 0.5)) {
            return Err(Error::param("maf", format!("{m} is outside (0, 0.5]")));
        }
        self.maf = Some(maf);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn maf(&self) -> Option<&[f64]> {
        self.maf.as_deref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.p + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    /// Restrict to the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n) {
            return Err(Error::param("rows", format!("index {r} out of range for {} rows", self.n)));
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.p) {
            return Err(Error::param("cols", format!("index {c} out of range for {} SNPs", self.p)));
        }
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            let row = self.row(r);
            data.extend(cols.iter().map(|&c| row[c]));
        }
        Ok(Self {
            n: rows.len(),
            p: cols.len(),
            data,
            maf: self.maf.as_ref().map(|m| cols.iter().map(|&c| m[c]).collect()),
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let cols: Vec<usize> = (0..self.p).collect();
        self.select(rows, &cols)
    }

    /// Real-valued design matrix under the requested coding.
    pub fn design(&self, coding: GenotypeCoding) -> Design {
        let (n, p) = (self.n, self.p);
        let mut data: Vec<f64> = self.data.iter().map(|&v| f64::from(v)).collect();
        if coding == GenotypeCoding::Standardized && n > 0 {
            for j in 0..p {
                let col: Vec<f64> = (0..n).map(|i| data[i * p + j]).collect();
                let mean = crate::linalg::mean(&col);
                let sd = crate::linalg::sample_variance(&col).sqrt();
                for i in 0..n {
                    let x = &mut data[i * p + j];
                    *x = if sd > 0.0 { (*x - mean) / sd } else { 0.0 };
                }
            }
        }
        Design { n, p, data }
    }
}

/// How allele counts become real features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GenotypeCoding {
    /// Counts 0, 1, 2 as they are.
    Raw,
    /// Each SNP centered and scaled to unit sample variance over the rows of
    /// the matrix it is computed from. Monomorphic SNPs become all-zero.
    #[default]
    Standardized,
}

impl GenotypeCoding {
    pub fn name(self) -> &'static str {
        match self {
            GenotypeCoding::Raw => "raw",
            GenotypeCoding::Standardized => "standardized",
        }
    }
}

impl std::str::FromStr for GenotypeCoding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Self::Raw),
            "standardized" => Ok(Self::Standardized),
            _ => Err(Error::param("coding", format!("unknown coding `{s}` (raw|standardized)"))),
        }
    }
}

impl std::fmt::Display for GenotypeCoding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Dense real feature matrix, row-major, one row per individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl Design {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * p {
            return Err(Error::DimensionMismatch(format!("{} entries cannot fill {n}x{p}", data.len())));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / p.max(1), col: k % p.max(1) });
        }
        Ok(Self { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::DimensionMismatch("ragged design rows".into()));
        }
        Self::new(rows.len(), p, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n) {
            return Err(Error::param("rows", format!("index {r} out of range for {} rows", self.n)));
        }
        let mut data = Vec::with_capacity(rows.len() * self.p);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Ok(Self { n: rows.len(), p: self.p, data })
    }
}

/// Bounds of the uniform law minor allele frequencies are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MafLaw {
    lower: f64,
    upper: f64,
}

impl MafLaw {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(0.0 < lower && lower < upper && upper <= 0.5) {
            return Err(Error::param("maf_law", format!("need 0 < lower < upper <= 0.5, got [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl Default for MafLaw {
    fn default() -> Self {
        Self { lower: 0.01, upper: 0.5 }
    }
}

/// Genotype probabilities `(P[0], P[1], P[2])` for minor allele frequency `maf`.
pub fn hwe_probabilities(maf: f64) -> Result<(f64, f64, f64)> {
    if !(maf > 0.0 && maf <= 0.5) {
        return Err(Error::param("maf", format!("{maf} is outside (0, 0.5]")));
    }
    let q = 1.0 - maf;
    Ok((q * q, 2.0 * maf * q, maf * maf))
}

/// Simulate `n` individuals at `p` independent SNPs in Hardy-Weinberg
/// equilibrium. Each SNP draws its frequency once from `law`, then all of its
/// genotypes; SNPs are generated one after another from a single stream.
pub fn simulate_hwe(n: usize, p: usize, law: MafLaw, seed: u64) -> Result<GenotypeMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::param("n, p", format!("need at least one individual and SNP, got {n}x{p}")));
    }
    let mut rng = rng::seeded(seed);
    let mut data = vec![0u8; n * p];
    let mut maf = Vec::with_capacity(p);
    for j in 0..p {
        let m = rng.random_range(law.lower..=law.upper);
        let (p0, p1, _) = hwe_probabilities(m)?;
        let cut1 = p0 + p1;
        for i in 0..n {
            let u: f64 = rng.random();
            data[i * p + j] = if u < p0 {
                0
            } else if u < cut1 {
                1
            } else {
                2
            };
        }
        maf.push(m);
    }
    GenotypeMatrix::new(n, p, data)?.with_maf(maf)
}

/// Which individuals to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowSelection {
    All,
    Indices(Vec<usize>),
    /// A uniform sample without replacement of this many rows.
    Count(usize),
}

/// Sorted uniform sample of `amount` distinct indices from `0..len`.
pub fn sample_indices(rng: &mut Rng, len: usize, amount: usize, what: &'static str) -> Result<Vec<usize>> {
    if amount > len {
        return Err(Error::Oversample { what, requested: amount, available: len });
    }
    let mut idx = index::sample(rng, len, amount).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Row and column indices a call to [`subsample`] with the same arguments keeps.
pub fn subsample_indices(
    n: usize,
    p: usize,
    rows: &RowSelection,
    cols: Option<usize>,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = rng::seeded(seed);
    let row_idx = match rows {
        RowSelection::All => (0..n).collect(),
        RowSelection::Indices(ix) => {
            if let Some(&r) = ix.iter().find(|&&r| r >= n) {
                return Err(Error::Oversample { what: "row index", requested: r + 1, available: n });
            }
            ix.clone()
        }
        RowSelection::Count(k) => sample_indices(&mut rng, n, *k, "individuals")?,
    };
    let col_idx = match cols {
        None => (0..p).collect(),
        Some(k) => sample_indices(&mut rng, p, k, "SNPs")?,
    };
    Ok((row_idx, col_idx))
}

pub fn subsample(pop: &GenotypeMatrix, rows: &RowSelection, cols: Option<usize>, seed: u64) -> Result<GenotypeMatrix> {
    let (r, c) = subsample_indices(pop.n, pop.p, rows, cols, seed)?;
    pop.select(&r, &c)
}

/// Read a genotype CSV (optionally gzip-compressed). Errors name the first
/// offending cell with 1-based row and column numbers.
pub fn read_genotype_csv(path: &Path, has_header: bool) -> Result<GenotypeMatrix> {
    let mut rdr = csv_reader(path, has_header)?;
    let mut p = None;
    let mut n = 0;
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row_no = n + 1 + usize::from(has_header);
        let width = *p.get_or_insert(rec.len());
        if rec.len() != width {
            return Err(Error::RaggedRow { path: path.to_path_buf(), row: row_no, expected: width, found: rec.len() });
        }
        for (c, field) in rec.iter().enumerate() {
            let v = match field {
                "0" => 0,
                "1" => 1,
                "2" => 2,
                _ => {
                    return Err(Error::InvalidCell {
                        path: path.to_path_buf(),
                        row: row_no,
                        col: c + 1,
                        reason: format!("`{field}` is not a genotype (0, 1 or 2)"),
                    })
                }
            };
            data.push(v);
        }
        n += 1;
    }
    let p = p.ok_or_else(|| Error::Format { path: path.to_path_buf(), reason: "no genotype rows".into() })?;
    GenotypeMatrix::new(n, p, data)
}

/// Write a genotype CSV; with `header` a first line `snp1,...,snpP` is emitted.
pub fn write_genotype_csv(g: &GenotypeMatrix, path: &Path, header: bool) -> Result<()> {
    let mut w = create_writer(path)?;
    let mut line = String::with_capacity(2 * g.p);
    if header {
        let names: Vec<String> = (1..=g.p).map(|j| format!("snp{j}")).collect();
        writeln!(w, "{}", names.join(",")).map_err(|e| Error::io(path, e))?;
    }
    for i in 0..g.n {
        line.clear();
        for (j, v) in g.row(i).iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push(char::from(b'0' + v));
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
