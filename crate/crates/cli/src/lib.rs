//! The `krrh2` command-line tool.
//!
//! Exit status: 0 on success, 1 for usage and configuration errors, 2 when
//! input data fail validation, 3 when a numerical routine fails.

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use krrh2_core::genotypes::{read_genotype_csv, write_genotype_csv, GenotypeCoding};
use krrh2_core::harness::{build_mc_population, run_mc_on, write_manifest, write_table_csv, GenotypeSource, McConfig};
use krrh2_core::io::{read_real_column, read_real_matrix, write_key_values};
use krrh2_core::kernels::{build_kernels, KernelKind, DEFAULT_BANDWIDTH};
use krrh2_core::krr::{estimate_record, fit, lambda_grid_fit, residualize, CovariateMatrix, ESTIMATE_HEADER};
use krrh2_core::presets::{preset, Dimensionality, Scale, Scenario};
use krrh2_core::spectra::{bound_report, check_conditions, report_csv, report_key_values, SignalSource};
use krrh2_core::{Error, ErrorKind, Family, MafLaw};

use crate::config::RunConfigFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "krrh2", version, about = "Broad-sense heritability via kernel ridge regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a population and write genotypes, phenotypes, effects and metadata.
    Simulate(SimulateArgs),
    /// Estimate heritability for each kernel and ridge value.
    Estimate(EstimateArgs),
    /// Report alignment, spectral gap, term decomposition and bounds for one fit.
    Diagnose(DiagnoseArgs),
    /// Run a Monte Carlo study from a configuration file or preset.
    Mc(McArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Named parameter set, e.g. hwe-linear-low.
    #[arg(long)]
    preset: Option<String>,
    /// Population size.
    #[arg(long = "n")]
    population_size: Option<usize>,
    /// Number of SNPs.
    #[arg(long = "p")]
    snp_count: Option<usize>,
    #[arg(long)]
    sigma_g: Option<f64>,
    #[arg(long)]
    sigma_eps: Option<f64>,
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    coding: Option<GenotypeCoding>,
    #[arg(long)]
    maf_lower: Option<f64>,
    #[arg(long)]
    maf_upper: Option<f64>,
    /// Genotype panel to draw SNPs from instead of simulating them.
    #[arg(long)]
    genotypes: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    genotypes: PathBuf,
    #[arg(long)]
    phenotypes: PathBuf,
    /// Input CSV files start with a header line.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value = "standardized")]
    coding: GenotypeCoding,
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    bandwidth: f64,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Covariate CSV; phenotypes are replaced by their residuals on it.
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// linear, poly2, gaussian or all; repeatable.
    #[arg(long, default_value = "all")]
    kernel: Vec<String>,
    /// Ridge value n*lambda; repeatable. Defaults to the standard grid.
    #[arg(long)]
    nlambda: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// True signal values; without it the fitted values stand in.
    #[arg(long)]
    signal: Option<PathBuf>,
    #[arg(long, default_value = "poly2")]
    kernel: String,
    #[arg(long)]
    nlambda: f64,
    /// Noise variance used by the bounds; defaults to the fitted residual variance.
    #[arg(long)]
    sigma_eps2: Option<f64>,
    /// Fail instead of reporting when the conditions do not admit nlambda.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value = "kv", value_parser = ["kv", "csv"])]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long, default_value = "desk", conflicts_with = "config")]
    scale: Scale,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    genotypes: Option<PathBuf>,
    /// Result table path; the manifest goes next to it with `.manifest` appended.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numerical => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_USAGE, message: message.into() }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: EXIT_DATA, message: format!("{}: {e}", path.display()) }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parse `args` (program name first) and run, writing to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Estimate(a) => estimate(a, out),
        Command::Diagnose(a) => diagnose(a, out, err),
        Command::Mc(a) => mc(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = match &a.preset {
        Some(name) => McConfig::from_preset(preset(name)?, Scale::Desk),
        None => {
            let missing = |what: &str| usage(format!("--{what} is required without --preset"));
            let n = a.population_size.ok_or_else(|| missing("n"))?;
            let p = a.snp_count.ok_or_else(|| missing("p"))?;
            let sigma_g = a.sigma_g.ok_or_else(|| missing("sigma-g"))?;
            let family = a.family.ok_or_else(|| missing("family"))?;
            let mut c = McConfig::from_preset(preset("hwe-linear-low")?, Scale::Desk);
            c.dimensionality = if n > p { Dimensionality::Low } else { Dimensionality::High };
            c.population_size = n;
            c.snp_count = p;
            c.sigma_g = sigma_g;
            c.family = family;
            c.scenario = if a.genotypes.is_some() { Scenario::ExternalGenotypes } else { Scenario::Hwe };
            c
        }
    };
    if let Some(n) = a.population_size {
        cfg.population_size = n;
    }
    if let Some(p) = a.snp_count {
        cfg.snp_count = p;
    }
    if let Some(s) = a.sigma_g {
        cfg.sigma_g = s;
    }
    if let Some(s) = a.sigma_eps {
        cfg.sigma_eps = s;
    }
    if let Some(f) = a.family {
        cfg.family = f;
    }
    if let Some(c) = a.coding {
        cfg.coding = c;
    }
    cfg.maf_law = MafLaw::new(a.maf_lower.unwrap_or(cfg.maf_law.lower()), a.maf_upper.unwrap_or(cfg.maf_law.upper()))?;
    cfg.population_seed = a.seed;

    let source = match &a.genotypes {
        Some(path) => GenotypeSource::Provided(read_genotype_csv(path, false)?),
        None if cfg.scenario == Scenario::ExternalGenotypes => {
            return Err(usage("this preset draws SNPs from a genotype panel; pass --genotypes"))
        }
        None => GenotypeSource::Simulate,
    };
    let pop = build_mc_population(&cfg, &source)?;
    std::fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    write_genotype_csv(&pop.genotypes, &a.out.join("genotypes.csv"), false)?;
    pop.write_phenotypes(&a.out.join("phenotypes.csv"))?;
    pop.write_beta(&a.out.join("beta.csv"))?;
    pop.write_signal(&a.out.join("signal.csv"))?;
    let mut meta = pop.metadata();
    if let Some(name) = &a.preset {
        meta.insert(0, ("preset".into(), name.clone()));
    }
    write_key_values(&a.out.join("metadata.txt"), &meta)?;
    writeln!(
        out,
        "simulated N={} p={} family={} true_h2={:.6} -> {}",
        cfg.population_size,
        cfg.snp_count,
        cfg.family,
        pop.true_h2,
        a.out.display()
    )
    .map_err(|e| io_err(Path::new("<stdout>"), e))
}

fn parse_kernels(names: &[String]) -> CliResult<Vec<KernelKind>> {
    let mut kinds = Vec::new();
    for name in names {
        for part in name.split(',') {
            if part == "all" {
                kinds.extend(KernelKind::BUILTIN);
            } else {
                kinds.push(part.parse()?);
            }
        }
    }
    kinds.dedup();
    Ok(kinds)
}

struct Inputs {
    design: krrh2_core::Design,
    y: Vec<f64>,
}

fn load_inputs(a: &InputArgs) -> CliResult<Inputs> {
    let g = read_genotype_csv(&a.genotypes, a.header)?;
    let y = read_real_column(&a.phenotypes, a.header)?;
    if y.len() != g.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} has {} individuals but {} has {} phenotypes",
            a.genotypes.display(),
            g.n(),
            a.phenotypes.display(),
            y.len()
        ))
        .into());
    }
    Ok(Inputs { design: g.design(a.coding), y })
}

fn open_output<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(out),
    })
}

/// An intercept is always fitted, so constant columns (an explicit intercept
/// in the file) are dropped rather than reported as rank deficient.
fn drop_constant_columns(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = rows.first() else { return Vec::new() };
    let keep: Vec<usize> = (0..first.len()).filter(|&j| rows.iter().any(|r| r.get(j) != first.get(j))).collect();
    rows.iter().map(|r| keep.iter().filter_map(|&j| r.get(j).copied()).collect()).collect()
}

fn estimate(a: EstimateArgs, out: &mut dyn Write) -> CliResult {
    let kinds = parse_kernels(&a.kernel)?;
    let grid = if a.nlambda.is_empty() { krrh2_core::krr::DEFAULT_NLAMBDA_GRID.to_vec() } else { a.nlambda.clone() };
    let Inputs { design, mut y } = load_inputs(&a.input)?;
    if let Some(path) = &a.covariates {
        let rows = read_real_matrix(path, a.input.header)?;
        if rows.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} has {} rows, expected {}",
                path.display(),
                rows.len(),
                y.len()
            ))
            .into());
        }
        y = residualize(&y, &CovariateMatrix::from_rows(&drop_constant_columns(&rows))?)?;
    }
    let kernels = build_kernels(&kinds, &design, a.input.bandwidth)?;
    let mut w = open_output(&a.out, out)?;
    let mut csv = csv::Writer::from_writer(&mut w);
    let csv_fail = |e: csv::Error| CliError { code: EXIT_DATA, message: e.to_string() };
    csv.write_record(ESTIMATE_HEADER).map_err(csv_fail)?;
    for k in &kernels {
        for f in lambda_grid_fit(k, &y, &grid)? {
            csv.write_record(estimate_record(k.kind(), &f)).map_err(csv_fail)?;
        }
    }
    csv.flush().map_err(|e| io_err(Path::new("<output>"), e))?;
    Ok(())
}

fn diagnose(a: DiagnoseArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let kind: KernelKind = a.kernel.parse()?;
    let Inputs { design, y } = load_inputs(&a.input)?;
    let k = build_kernels(&[kind], &design, a.input.bandwidth)?.pop().expect("one kernel");
    let f = fit(&k, &y, a.nlambda)?;
    let (g, source) = match &a.signal {
        Some(p) => (read_real_column(p, a.input.header)?, SignalSource::True),
        None => (f.g_hat.clone(), SignalSource::Proxy),
    };
    let cond = check_conditions(&k, &g, source)?;
    if let Err(reason) = cond.refuse_unless_admitted(a.nlambda) {
        if a.strict {
            return Err(reason.into());
        }
        let _ = writeln!(err, "note: {reason}; condition-dependent bounds are NA");
    }
    let sigma_eps2 = a.sigma_eps2.unwrap_or(f.sigma_eps2_hat);
    let bounds = bound_report(&k, &y, &g, a.nlambda, sigma_eps2, &cond)?;
    let mut w = open_output(&a.out, out)?;
    let write_fail = |e: std::io::Error| io_err(Path::new("<output>"), e);
    if a.format == "csv" {
        let (h, r) = report_csv(&cond, Some(&bounds));
        writeln!(w, "kernel,{}", h.join(",")).map_err(write_fail)?;
        writeln!(w, "{},{}", kind, r.join(",")).map_err(write_fail)?;
    } else {
        writeln!(w, "kernel={kind}").map_err(write_fail)?;
        for (key, v) in report_key_values(&cond, Some(&bounds)) {
            writeln!(w, "{key}={v}").map_err(write_fail)?;
        }
    }
    w.flush().map_err(write_fail)
}

fn mc(a: McArgs, out: &mut dyn Write) -> CliResult {
    let mut file = match (&a.config, &a.preset) {
        (Some(path), _) => RunConfigFile::read(path).map_err(usage)?,
        (None, Some(name)) => RunConfigFile { mc: McConfig::from_preset(preset(name)?, a.scale), genotypes: None },
        (None, None) => return Err(usage("pass --config FILE or --preset NAME")),
    };
    if let Some(r) = a.reps {
        file.mc.repetitions = r;
    }
    if let Some(t) = a.threads {
        file.mc.threads = t;
    }
    if let Some(g) = a.genotypes {
        file.genotypes = Some(g);
    }
    if let Some(o) = a.out {
        file.mc.output_path = Some(o);
    }
    let cfg = file.mc;
    cfg.validate()?;
    let table_path = cfg.output_path.clone().unwrap_or_else(|| PathBuf::from("mc_table.csv"));
    let source = match (&file.genotypes, cfg.scenario) {
        (Some(p), _) => GenotypeSource::Provided(read_genotype_csv(p, false)?),
        (None, Scenario::ExternalGenotypes) => {
            return Err(usage("scenario `external` needs a genotype file (genotypes = PATH)"))
        }
        (None, Scenario::Hwe) => GenotypeSource::Simulate,
    };
    let pop = build_mc_population(&cfg, &source)?;
    let table = run_mc_on(&cfg, &pop)?;
    if let Some(dir) = table_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    write_table_csv(&table, &table_path)?;
    let mut manifest_path = table_path.clone().into_os_string();
    manifest_path.push(".manifest");
    write_manifest(&cfg, &pop, Path::new(&manifest_path))?;
    let excluded: usize = table.rows.iter().map(|r| r.excluded).sum();
    let flagged = table.rows.iter().filter(|r| r.sd_flag).count();
    writeln!(
        out,
        "{} rows, {} repetitions, true_h2={:.6}, excluded={excluded}, sd_flagged={flagged} -> {}",
        table.rows.len(),
        cfg.repetitions,
        pop.true_h2,
        table_path.display()
    )
    .map_err(|e| io_err(Path::new("<stdout>"), e))
}
