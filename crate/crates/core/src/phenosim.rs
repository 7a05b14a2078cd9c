//! Phenotype simulation: `Y_i = g(Z_i) + e_i` under three signal families.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::genotypes::{Design, GenotypeCoding, GenotypeMatrix};
use crate::io::{fmt_f64, write_key_values, write_real_column};
use crate::linalg::{dot, sample_variance};
use crate::rng::{self, derive_seed, stream};

/// Shape of the genetic signal as a function of `u = z . beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `2u + 5`
    Linear,
    /// `u^2`
    Quadratic,
    /// `sin(u) + 2u`
    Trigonometric,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Linear, Family::Quadratic, Family::Trigonometric];

    pub fn name(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Quadratic => "quadratic",
            Family::Trigonometric => "trigonometric",
        }
    }

    #[inline]
    pub fn apply(self, u: f64) -> f64 {
        match self {
            Family::Linear => 2.0 * u + 5.0,
            Family::Quadratic => u * u,
            Family::Trigonometric => u.sin() + 2.0 * u,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Family::Linear),
            "quadratic" => Ok(Family::Quadratic),
            "trigonometric" | "trig" => Ok(Family::Trigonometric),
            _ => Err(Error::param("family", format!("unknown family `{s}` (linear|quadratic|trigonometric)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub population_size: usize,
    pub snp_count: usize,
    pub sigma_g: f64,
    pub sigma_eps: f64,
    pub family: Family,
    pub seed: u64,
    pub coding: GenotypeCoding,
}

impl SimulationSpec {
    pub const DEFAULT_SIGMA_EPS: f64 = 0.5;

    pub fn new(population_size: usize, snp_count: usize, sigma_g: f64, family: Family, seed: u64) -> Self {
        Self {
            population_size,
            snp_count,
            sigma_g,
            sigma_eps: Self::DEFAULT_SIGMA_EPS,
            family,
            seed,
            coding: GenotypeCoding::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size == 0 {
            return Err(Error::param("population_size", "must be at least 1"));
        }
        if self.snp_count == 0 {
            return Err(Error::param("snp_count", "must be at least 1"));
        }
        if !(self.sigma_g > 0.0 && self.sigma_g.is_finite()) {
            return Err(Error::param("sigma_g", format!("must be positive, got {}", self.sigma_g)));
        }
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            return Err(Error::param("sigma_eps", format!("must be non-negative, got {}", self.sigma_eps)));
        }
        Ok(())
    }

    pub fn key_values(&self) -> Vec<(String, String)> {
        vec![
            ("population_size".into(), self.population_size.to_string()),
            ("snp_count".into(), self.snp_count.to_string()),
            ("sigma_g".into(), fmt_f64(self.sigma_g)),
            ("sigma_eps".into(), fmt_f64(self.sigma_eps)),
            ("family".into(), self.family.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("coding".into(), self.coding.to_string()),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    pub spec: SimulationSpec,
    pub genotypes: GenotypeMatrix,
    pub design: Design,
    pub beta: Vec<f64>,
    pub g_values: Vec<f64>,
    pub noise: Vec<f64>,
    pub phenotypes: Vec<f64>,
    pub true_h2: f64,
    pub bound_m: f64,
}

/// `p` independent `N(0, sigma_g^2)` effects.
pub fn draw_beta(p: usize, sigma_g: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma_g > 0.0 && sigma_g.is_finite()) {
        return Err(Error::param("sigma_g", format!("must be positive, got {sigma_g}")));
    }
    let mut r = rng::seeded(seed);
    Ok((0..p).map(|_| sigma_g * r.sample::<f64, _>(StandardNormal)).collect())
}

pub fn eval_g(family: Family, z_row: &[f64], beta: &[f64]) -> Result<f64> {
    if z_row.len() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "genotype row has {} SNPs, effect vector {}",
            z_row.len(),
            beta.len()
        )));
    }
    Ok(family.apply(dot(z_row, beta)))
}

/// Realized heritability `s_g^2 / (s_g^2 + sigma_eps^2)`; zero when both vanish.
pub fn realized_h2(g_values: &[f64], sigma_eps: f64) -> f64 {
    let s2 = sample_variance(g_values);
    let denom = s2 + sigma_eps * sigma_eps;
    if denom > 0.0 {
        s2 / denom
    } else {
        0.0
    }
}

/// Draw effects and noise from seeds derived from `spec.seed`, then assemble
/// the population.
pub fn build_population(spec: &SimulationSpec, genotypes: GenotypeMatrix) -> Result<Population> {
    spec.validate()?;
    let beta = draw_beta(spec.snp_count, spec.sigma_g, derive_seed(spec.seed, stream::EFFECTS, 0))?;
    build_population_with_beta(spec, genotypes, beta)
}

/// As [`build_population`] with caller-supplied effects.
pub fn build_population_with_beta(
    spec: &SimulationSpec,
    genotypes: GenotypeMatrix,
    beta: Vec<f64>,
) -> Result<Population> {
    if genotypes.n() != spec.population_size || genotypes.p() != spec.snp_count {
        return Err(Error::DimensionMismatch(format!(
            "genotypes are {}x{}, population recipe asks for {}x{}",
            genotypes.n(),
            genotypes.p(),
            spec.population_size,
            spec.snp_count
        )));
    }
    if beta.len() != spec.snp_count {
        return Err(Error::DimensionMismatch(format!("{} effects for {} SNPs", beta.len(), spec.snp_count)));
    }
    let design = genotypes.design(spec.coding);
    let g_values = (0..design.n()).map(|i| eval_g(spec.family, design.row(i), &beta)).collect::<Result<Vec<_>>>()?;
    let mut r = rng::seeded(derive_seed(spec.seed, stream::NOISE, 0));
    let noise: Vec<f64> = (0..design.n()).map(|_| spec.sigma_eps * r.sample::<f64, _>(StandardNormal)).collect();
    let phenotypes = g_values.iter().zip(&noise).map(|(g, e)| g + e).collect();
    let true_h2 = realized_h2(&g_values, spec.sigma_eps);
    let bound_m = g_values.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Ok(Population { spec: spec.clone(), genotypes, design, beta, g_values, noise, phenotypes, true_h2, bound_m })
}

impl Population {
    pub fn write_phenotypes(&self, path: &Path) -> Result<()> {
        write_real_column(path, None, &self.phenotypes)
    }

    pub fn write_beta(&self, path: &Path) -> Result<()> {
        write_real_column(path, None, &self.beta)
    }

    pub fn write_signal(&self, path: &Path) -> Result<()> {
        write_real_column(path, None, &self.g_values)
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut kv = self.spec.key_values();
        kv.push(("true_h2".into(), fmt_f64(self.true_h2)));
        kv.push(("signal_variance".into(), fmt_f64(sample_variance(&self.g_values))));
        kv.push(("bound_m".into(), fmt_f64(self.bound_m)));
        kv
    }

    pub fn write_metadata(&self, path: &Path) -> Result<()> {
        write_key_values(path, &self.metadata())
    }
}
