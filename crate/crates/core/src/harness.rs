//! Monte Carlo engine: one population, many random subsamples, every kernel
//! and ridge value fitted on each, results aggregated per cell.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::genotypes::{sample_indices, simulate_hwe, GenotypeCoding, GenotypeMatrix, MafLaw};
use crate::io::{csv_err, csv_reader, csv_writer, fmt_f64, write_key_values};
use crate::kernels::{build_kernels, KernelKind, DEFAULT_BANDWIDTH};
use crate::krr::lambda_grid_fit;
use crate::linalg::pairwise_sum;
use crate::phenosim::{build_population, Family, Population, SimulationSpec};
use crate::presets::{Dimensionality, Preset, Scale, Scenario};
use crate::rng::{self, derive_seed, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub scenario: Scenario,
    pub dimensionality: Dimensionality,
    pub family: Family,
    pub kernels: Vec<KernelKind>,
    pub lambda_grid: Vec<f64>,
    pub sample_sizes: Vec<usize>,
    pub repetitions: usize,
    pub population_seed: u64,
    pub sampling_seed: u64,
    pub population_size: usize,
    pub snp_count: usize,
    pub sigma_g: f64,
    pub sigma_eps: f64,
    pub maf_law: MafLaw,
    pub coding: GenotypeCoding,
    pub bandwidth: f64,
    /// Worker threads; 0 or 1 runs on the calling thread.
    pub threads: usize,
    pub output_path: Option<PathBuf>,
}

impl McConfig {
    pub fn from_preset(p: &Preset, scale: Scale) -> Self {
        Self {
            scenario: p.scenario,
            dimensionality: p.dimensionality,
            family: p.family,
            kernels: KernelKind::BUILTIN.to_vec(),
            lambda_grid: match scale {
                Scale::Desk => p.nlambda.to_vec(),
                Scale::Full => crate::krr::DEFAULT_NLAMBDA_GRID.to_vec(),
            },
            sample_sizes: p.dimensionality.sample_sizes(),
            repetitions: scale.repetitions(),
            population_seed: 1,
            sampling_seed: 2,
            population_size: p.population_size,
            snp_count: p.snp_count,
            sigma_g: p.sigma_g,
            sigma_eps: SimulationSpec::DEFAULT_SIGMA_EPS,
            maf_law: MafLaw::default(),
            coding: GenotypeCoding::default(),
            bandwidth: DEFAULT_BANDWIDTH,
            threads: 1,
            output_path: None,
        }
    }

    pub fn simulation_spec(&self) -> SimulationSpec {
        SimulationSpec {
            population_size: self.population_size,
            snp_count: self.snp_count,
            sigma_g: self.sigma_g,
            sigma_eps: self.sigma_eps,
            family: self.family,
            seed: self.population_seed,
            coding: self.coding,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.simulation_spec().validate()?;
        if self.repetitions == 0 {
            return Err(Error::param("repetitions", "must be at least 1"));
        }
        if self.kernels.is_empty() {
            return Err(Error::param("kernels", "at least one kernel is required"));
        }
        if self.kernels.contains(&KernelKind::Precomputed) {
            return Err(Error::param("kernels", "only linear, poly2 and gaussian can be built"));
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::param("lambda_grid", "needs one or more positive values"));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::param("sample_sizes", "needs one or more sizes"));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 2 || n > self.population_size) {
            return Err(Error::param("sample_sizes", format!("size {n} is outside [2, {}]", self.population_size)));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::param("bandwidth", "must be positive"));
        }
        Ok(())
    }

    /// Every field as `key=value`, in a fixed order. [`McConfig::set`] accepts
    /// the same keys.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        vec![
            ("scenario".into(), self.scenario.name().into()),
            ("dimensionality".into(), self.dimensionality.name().into()),
            ("family".into(), self.family.to_string()),
            ("kernels".into(), join(self.kernels.iter().map(|k| k.to_string()).collect())),
            ("lambda_grid".into(), join(self.lambda_grid.iter().map(|v| fmt_f64(*v)).collect())),
            ("sample_sizes".into(), join(self.sample_sizes.iter().map(|v| v.to_string()).collect())),
            ("repetitions".into(), self.repetitions.to_string()),
            ("population_seed".into(), self.population_seed.to_string()),
            ("sampling_seed".into(), self.sampling_seed.to_string()),
            ("population_size".into(), self.population_size.to_string()),
            ("snp_count".into(), self.snp_count.to_string()),
            ("sigma_g".into(), fmt_f64(self.sigma_g)),
            ("sigma_eps".into(), fmt_f64(self.sigma_eps)),
            ("maf_lower".into(), fmt_f64(self.maf_law.lower())),
            ("maf_upper".into(), fmt_f64(self.maf_law.upper())),
            ("coding".into(), self.coding.to_string()),
            ("bandwidth".into(), fmt_f64(self.bandwidth)),
            ("threads".into(), self.threads.to_string()),
            ("output_path".into(), self.output_path.as_ref().map_or_else(String::new, |p| p.display().to_string())),
        ]
    }

    /// Names accepted by [`McConfig::set`].
    pub const KEYS: [&'static str; 19] = [
        "scenario",
        "dimensionality",
        "family",
        "kernels",
        "lambda_grid",
        "sample_sizes",
        "repetitions",
        "population_seed",
        "sampling_seed",
        "population_size",
        "snp_count",
        "sigma_g",
        "sigma_eps",
        "maf_lower",
        "maf_upper",
        "coding",
        "bandwidth",
        "threads",
        "output_path",
    ];

    /// Assign one field from its text form. Returns `Ok(false)` for an unknown key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn num<T: std::str::FromStr>(name: &'static str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::param(name, format!("cannot parse `{v}`")))
        }
        fn list<T: std::str::FromStr>(name: &'static str, v: &str) -> Result<Vec<T>> {
            v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| num(name, s)).collect()
        }
        match key {
            "scenario" => self.scenario = value.parse()?,
            "dimensionality" => self.dimensionality = value.parse()?,
            "family" => self.family = value.parse()?,
            "kernels" => {
                self.kernels = if value == "all" {
                    KernelKind::BUILTIN.to_vec()
                } else {
                    value.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?
                }
            }
            "lambda_grid" => self.lambda_grid = list("lambda_grid", value)?,
            "sample_sizes" => self.sample_sizes = list("sample_sizes", value)?,
            "repetitions" => self.repetitions = num("repetitions", value)?,
            "population_seed" => self.population_seed = num("population_seed", value)?,
            "sampling_seed" => self.sampling_seed = num("sampling_seed", value)?,
            "population_size" => self.population_size = num("population_size", value)?,
            "snp_count" => self.snp_count = num("snp_count", value)?,
            "sigma_g" => self.sigma_g = num("sigma_g", value)?,
            "sigma_eps" => self.sigma_eps = num("sigma_eps", value)?,
            "maf_lower" => self.maf_law = MafLaw::new(num("maf_lower", value)?, self.maf_law.upper())?,
            "maf_upper" => self.maf_law = MafLaw::new(self.maf_law.lower(), num("maf_upper", value)?)?,
            "coding" => self.coding = value.parse()?,
            "bandwidth" => self.bandwidth = num("bandwidth", value)?,
            "threads" => self.threads = num("threads", value)?,
            "output_path" => self.output_path = (!value.is_empty()).then(|| PathBuf::from(value)),
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// Where the population's genotypes come from.
#[derive(Debug, Clone)]
pub enum GenotypeSource {
    /// Simulate under Hardy-Weinberg equilibrium from the population seed.
    Simulate,
    /// Use these individuals; when the matrix has more SNPs than the
    /// configuration asks for, a seeded subset of columns is taken.
    Provided(GenotypeMatrix),
}

/// Build the single population a run draws its subsamples from.
pub fn build_mc_population(cfg: &McConfig, source: &GenotypeSource) -> Result<Population> {
    let spec = cfg.simulation_spec();
    spec.validate()?;
    let genotypes = match source {
        GenotypeSource::Simulate => simulate_hwe(
            cfg.population_size,
            cfg.snp_count,
            cfg.maf_law,
            derive_seed(cfg.population_seed, stream::GENOTYPES, 0),
        )?,
        GenotypeSource::Provided(g) => {
            if g.n() != cfg.population_size {
                return Err(Error::DimensionMismatch(format!(
                    "genotype file has {} individuals, configuration expects {}",
                    g.n(),
                    cfg.population_size
                )));
            }
            let mut r = rng::seeded(derive_seed(cfg.population_seed, stream::SNP_SELECTION, 0));
            let cols = sample_indices(&mut r, g.p(), cfg.snp_count, "SNPs")?;
            let rows: Vec<usize> = (0..g.n()).collect();
            g.select(&rows, &cols)?
        }
    };
    build_population(&spec, genotypes)
}

/// Seed of the subsample for repetition `rep` at sample-size slot `slot`.
pub fn repetition_seed(sampling_seed: u64, rep: usize, slot: usize) -> u64 {
    derive_seed(sampling_seed, stream::SUBSAMPLE, ((rep as u64) << 32) | slot as u64)
}

/// Heritability estimates of one subsample, indexed `[kernel][lambda]`.
pub fn run_repetition(cfg: &McConfig, pop: &Population, rep: usize, slot: usize) -> Result<Vec<Vec<Option<f64>>>> {
    let n = cfg.sample_sizes[slot];
    let mut r = rng::seeded(repetition_seed(cfg.sampling_seed, rep, slot));
    let rows = sample_indices(&mut r, pop.design.n(), n, "individuals")?;
    let z = pop.design.select_rows(&rows)?;
    let y: Vec<f64> = rows.iter().map(|&i| pop.phenotypes[i]).collect();
    build_kernels(&cfg.kernels, &z, cfg.bandwidth)?
        .iter()
        .map(|k| Ok(lambda_grid_fit(k, &y, &cfg.lambda_grid)?.iter().map(|f| f.h2_hat).collect()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRow {
    pub kernel: KernelKind,
    pub nlambda: f64,
    pub n: usize,
    /// `None` when every repetition was excluded.
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    /// Repetitions that entered the moments.
    pub reps: usize,
    pub true_h2: f64,
    /// Repetitions whose estimate was undefined.
    pub excluded: usize,
    /// Set when fewer than two repetitions remain, so `sd` is 0 by convention.
    pub sd_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct McResultTable {
    pub rows: Vec<McRow>,
}

impl McResultTable {
    pub fn get(&self, kernel: KernelKind, nlambda: f64, n: usize) -> Option<&McRow> {
        self.rows.iter().find(|r| r.kernel == kernel && r.nlambda == nlambda && r.n == n)
    }
}

fn moments(values: &[f64]) -> (Option<f64>, Option<f64>, bool) {
    match values.len() {
        0 => (None, None, true),
        1 => (Some(values[0]), Some(0.0), true),
        k => {
            // shifted by the first value, so identical inputs give exactly sd 0
            let d: Vec<f64> = values.iter().map(|v| v - values[0]).collect();
            let dm = pairwise_sum(&d) / k as f64;
            let sq: Vec<f64> = d.iter().map(|v| (v - dm) * (v - dm)).collect();
            (Some(values[0] + dm), Some((pairwise_sum(&sq) / (k - 1) as f64).sqrt()), false)
        }
    }
}

/// Run the whole study. Repetitions are independent tasks with derived seeds
/// and are aggregated in a fixed order, so the thread count never changes the
/// output.
pub fn run_mc(cfg: &McConfig, source: &GenotypeSource) -> Result<McResultTable> {
    cfg.validate()?;
    let pop = build_mc_population(cfg, source)?;
    run_mc_on(cfg, &pop)
}

/// [`run_mc`] on an already built population.
pub fn run_mc_on(cfg: &McConfig, pop: &Population) -> Result<McResultTable> {
    cfg.validate()?;
    let slots = cfg.sample_sizes.len();
    let tasks: Vec<(usize, usize)> =
        (0..cfg.repetitions).flat_map(|rep| (0..slots).map(move |slot| (rep, slot))).collect();
    let work = |&(rep, slot): &(usize, usize)| run_repetition(cfg, pop, rep, slot);
    let results: Vec<Vec<Vec<Option<f64>>>> = if cfg.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::param("threads", e.to_string()))?;
        pool.install(|| tasks.par_iter().map(work).collect::<Result<_>>())?
    } else {
        tasks.iter().map(work).collect::<Result<_>>()?
    };

    let mut rows = Vec::with_capacity(cfg.kernels.len() * cfg.lambda_grid.len() * slots);
    for (ki, &kernel) in cfg.kernels.iter().enumerate() {
        for (li, &nlambda) in cfg.lambda_grid.iter().enumerate() {
            for (slot, &n) in cfg.sample_sizes.iter().enumerate() {
                let all: Vec<Option<f64>> =
                    (0..cfg.repetitions).map(|rep| results[rep * slots + slot][ki][li]).collect();
                let kept: Vec<f64> = all.iter().flatten().copied().collect();
                let (mean, sd, sd_flag) = moments(&kept);
                rows.push(McRow {
                    kernel,
                    nlambda,
                    n,
                    mean,
                    sd,
                    reps: kept.len(),
                    true_h2: pop.true_h2,
                    excluded: all.len() - kept.len(),
                    sd_flag,
                });
            }
        }
    }
    Ok(McResultTable { rows })
}

pub const TABLE_HEADER: [&str; 9] = ["kernel", "nlambda", "n", "mean", "sd", "reps", "true_h2", "excluded", "sd_flag"];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), fmt_f64)
}

pub fn write_table_csv(t: &McResultTable, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TABLE_HEADER).map_err(|e| csv_err(path, e))?;
    for r in &t.rows {
        w.write_record([
            r.kernel.to_string(),
            fmt_f64(r.nlambda),
            r.n.to_string(),
            opt(r.mean),
            opt(r.sd),
            r.reps.to_string(),
            fmt_f64(r.true_h2),
            r.excluded.to_string(),
            r.sd_flag.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_table_csv(path: &Path) -> Result<McResultTable> {
    let mut rdr = csv_reader(path, true)?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(TABLE_HEADER.iter().copied()) {
        return Err(Error::Format { path: path.to_path_buf(), reason: format!("unexpected header {header:?}") });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let cell = |c: usize| -> Result<&str> {
            rec.get(c).ok_or_else(|| Error::RaggedRow {
                path: path.to_path_buf(),
                row: i + 2,
                expected: TABLE_HEADER.len(),
                found: rec.len(),
            })
        };
        let bad = |c: usize| Error::InvalidCell {
            path: path.to_path_buf(),
            row: i + 2,
            col: c + 1,
            reason: format!("cannot parse `{}`", rec.get(c).unwrap_or("")),
        };
        let f = |c: usize| -> Result<f64> { cell(c)?.parse().map_err(|_| bad(c)) };
        let u = |c: usize| -> Result<usize> { cell(c)?.parse().map_err(|_| bad(c)) };
        let o = |c: usize| -> Result<Option<f64>> {
            let s = cell(c)?;
            if s == "NA" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(c))
            }
        };
        rows.push(McRow {
            kernel: cell(0)?.parse()?,
            nlambda: f(1)?,
            n: u(2)?,
            mean: o(3)?,
            sd: o(4)?,
            reps: u(5)?,
            true_h2: f(6)?,
            excluded: u(7)?,
            sd_flag: cell(8)?.parse().map_err(|_| bad(8))?,
        });
    }
    Ok(McResultTable { rows })
}

/// Configuration echo plus population facts and the library version.
pub fn manifest(cfg: &McConfig, pop: &Population) -> Vec<(String, String)> {
    let mut kv = cfg.key_values();
    kv.retain(|(k, _)| k != "output_path" && k != "threads");
    kv.push(("true_h2".into(), fmt_f64(pop.true_h2)));
    kv.push(("bound_m".into(), fmt_f64(pop.bound_m)));
    kv.push(("library_version".into(), env!("CARGO_PKG_VERSION").into()));
    kv
}

pub fn write_manifest(cfg: &McConfig, pop: &Population, path: &Path) -> Result<()> {
    write_key_values(path, &manifest(cfg, pop))
}
