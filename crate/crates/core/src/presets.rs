//! Named simulation settings.
//!
//! `hwe-*` presets simulate genotypes; `kgp-*` presets describe runs on an
//! ingested 1092-individual sequencing panel and need genotypes supplied.
//! Each preset records the three ridge values tabulated for it and the true
//! heritability reported for the corresponding published population.

use crate::error::{Error, Result};
use crate::phenosim::Family;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Hwe,
    ExternalGenotypes,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Hwe => "hwe",
            Scenario::ExternalGenotypes => "external",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hwe" => Ok(Scenario::Hwe),
            "external" | "kgp" => Ok(Scenario::ExternalGenotypes),
            _ => Err(Error::param("scenario", format!("unknown scenario `{s}` (hwe|external)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimensionality {
    /// More individuals than SNPs.
    Low,
    /// More SNPs than individuals.
    High,
}

impl Dimensionality {
    pub fn name(self) -> &'static str {
        match self {
            Dimensionality::Low => "low",
            Dimensionality::High => "high",
        }
    }

    pub fn sample_sizes(self) -> Vec<usize> {
        match self {
            Dimensionality::Low => vec![600, 700, 800, 900, 1000],
            Dimensionality::High => vec![100, 200, 300, 400, 500],
        }
    }
}

impl std::str::FromStr for Dimensionality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Dimensionality::Low),
            "high" => Ok(Dimensionality::High),
            _ => Err(Error::param("dimensionality", format!("unknown value `{s}` (low|high)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub scenario: Scenario,
    pub dimensionality: Dimensionality,
    pub family: Family,
    pub population_size: usize,
    pub snp_count: usize,
    pub sigma_g: f64,
    pub nlambda: [f64; 3],
    pub reported_true_h2: f64,
}

macro_rules! preset {
    ($name:literal, $sc:ident, $dim:ident, $fam:ident, $n:literal, $p:literal, $sg:literal, $nl:expr, $h2:literal) => {
        Preset {
            name: $name,
            scenario: Scenario::$sc,
            dimensionality: Dimensionality::$dim,
            family: Family::$fam,
            population_size: $n,
            snp_count: $p,
            sigma_g: $sg,
            nlambda: $nl,
            reported_true_h2: $h2,
        }
    };
}

pub const PRESETS: [Preset; 12] = [
    preset!("hwe-linear-low", Hwe, Low, Linear, 1000, 500, 0.02, [2.3, 2.5, 3.0], 0.769),
    preset!("hwe-linear-high", Hwe, High, Linear, 500, 1000, 0.01, [2.0, 2.3, 2.5], 0.594),
    preset!("hwe-quadratic-low", Hwe, Low, Quadratic, 1000, 500, 0.03, [2.3, 2.5, 3.0], 0.573),
    preset!("hwe-quadratic-high", Hwe, High, Quadratic, 500, 1000, 0.02, [2.0, 2.3, 2.5], 0.602),
    preset!("hwe-trigonometric-low", Hwe, Low, Trigonometric, 1000, 500, 0.02, [1.0, 1.3, 1.5], 0.706),
    preset!("hwe-trigonometric-high", Hwe, High, Trigonometric, 500, 1000, 0.05, [1.3, 1.5, 2.0], 0.724),
    preset!("kgp-linear-low", ExternalGenotypes, Low, Linear, 1092, 500, 0.02, [1.5, 2.0, 2.3], 0.774),
    preset!("kgp-linear-high", ExternalGenotypes, High, Linear, 1092, 1500, 0.01, [1.3, 1.5, 2.0], 0.719),
    preset!("kgp-quadratic-low", ExternalGenotypes, Low, Quadratic, 1092, 500, 0.03, [0.5, 0.8, 1.0], 0.811),
    preset!("kgp-quadratic-high", ExternalGenotypes, High, Quadratic, 1092, 1500, 0.015, [1.5, 2.0, 2.3], 0.553),
    preset!("kgp-trigonometric-low", ExternalGenotypes, Low, Trigonometric, 1092, 500, 0.05, [1.3, 1.5, 2.0], 0.686),
    preset!("kgp-trigonometric-high", ExternalGenotypes, High, Trigonometric, 1092, 1500, 0.05, [1.3, 1.5, 2.0], 0.767),
];

/// Look a preset up by name; `trig` is accepted for `trigonometric`.
pub fn preset(name: &str) -> Result<&'static Preset> {
    let canonical = name.replace("-trig-", "-trigonometric-");
    PRESETS.iter().find(|p| p.name == canonical).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        Error::param("preset", format!("unknown preset `{name}`; known: {}", names.join(", ")))
    })
}

/// How much of the full study a preset run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 50 repetitions over the preset's three tabulated ridge values.
    Desk,
    /// 500 repetitions over the whole default grid.
    Full,
}

impl Scale {
    pub fn repetitions(self) -> usize {
        match self {
            Scale::Desk => 50,
            Scale::Full => 500,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::param("scale", format!("unknown scale `{s}` (desk|full)"))),
        }
    }
}
