//! Acceptance criteria 1-10, run in order by a plain `main` so every
//! criterion prints one `criterion N: PASS|FAIL` line and runtime limits are
//! measured without other checks competing. Exits nonzero if any fails.

use std::path::Path;
use std::time::{Duration, Instant};

use krrh2_core::genotypes::{hwe_probabilities, sample_indices, simulate_hwe, MafLaw};
use krrh2_core::harness::{build_mc_population, run_mc_on, GenotypeSource, McConfig};
use krrh2_core::kernels::{build_kernels, KernelKind, KernelMatrix, DEFAULT_BANDWIDTH};
use krrh2_core::krr::{fit, fit_cholesky, fit_spectral, lambda_grid_fit, DEFAULT_NLAMBDA_GRID};
use krrh2_core::linalg::{eigh, SymMatrix};
use krrh2_core::phenosim::{build_population, Family, Population, SimulationSpec};
use krrh2_core::presets::{preset, Scale};
use krrh2_core::rng::seeded;
use krrh2_core::spectra::{bound_report, check_conditions, decompose_terms, noise_trace_expectations, SignalSource};
use oracles::Dense;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn dense(k: &KernelMatrix) -> Dense {
    k.matrix().to_rows()
}

fn random_psd(r: &mut impl Rng, n: usize, rank: usize) -> SymMatrix {
    let b: Dense = (0..n).map(|_| (0..rank).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    SymMatrix::from_fn(n, |i, j| oracles::dot(&b[i], &b[j])).unwrap()
}

/// Small simulated population used as one random instance.
fn small_population(r: &mut impl Rng, seed: u64) -> Population {
    let n = r.random_range(5..=60);
    let p = r.random_range(3..=80);
    let family = Family::ALL[r.random_range(0..3)];
    let sigma_g = r.random_range(0.05..0.6);
    let spec = SimulationSpec::new(n, p, sigma_g, family, seed);
    build_population(&spec, simulate_hwe(n, p, MafLaw::default(), seed).unwrap()).unwrap()
}

struct Instance {
    kernels: Vec<KernelMatrix>,
    y: Vec<f64>,
    g: Vec<f64>,
}

fn criterion_one_instances() -> Vec<Instance> {
    let mut r = seeded(101);
    (0..200)
        .map(|i| {
            let pop = small_population(&mut r, 1000 + i);
            Instance {
                kernels: build_kernels(&KernelKind::BUILTIN, &pop.design, DEFAULT_BANDWIDTH).unwrap(),
                y: pop.phenotypes,
                g: pop.g_values,
            }
        })
        .collect()
}

/// Worst relative error of the term sums against the fitted variance components.
fn additivity_error(k: &KernelMatrix, y: &[f64], g: &[f64], s: f64) -> f64 {
    let t = decompose_terms(k, y, g, s).unwrap();
    let f = fit(k, y, s).unwrap();
    rel_err(t.sigma_g2(), f.sigma_g2_hat).max(rel_err(t.sigma_eps2(), f.sigma_eps2_hat))
}

fn criterion_01_algebraic_identities() -> Verdict {
    let start = Instant::now();
    let mut worst_eps = 0.0f64;
    let mut worst_g = 0.0f64;
    let mut fits = 0;
    for inst in criterion_one_instances() {
        let n = inst.y.len();
        for k in &inst.kernels {
            let kd = dense(k);
            for f in lambda_grid_fit(k, &inst.y, &DEFAULT_NLAMBDA_GRID).unwrap() {
                let s = f.nlambda;
                let shifted = oracles::add(&kd, &oracles::scale(&oracles::identity(n), s));
                let v = oracles::matvec(&oracles::inverse_gauss_jordan(&shifted), &inst.y);
                let spectral = s * s * oracles::dot(&v, &v) / n as f64;
                worst_eps = worst_eps.max(rel_err(f.sigma_eps2_hat, spectral));
                let g_hat = oracles::matvec(&kd, &f.alpha_hat);
                worst_g = worst_g.max(rel_err(f.sigma_g2_hat, oracles::sample_variance(&g_hat)));
                fits += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst_eps <= 1e-10 && worst_g <= 1e-10 && elapsed < Duration::from_secs(30),
        format!("{fits} fits on 200 instances; max rel err eps {worst_eps:.2e}, g {worst_g:.2e}; {elapsed:.1?}"),
    )
}

fn criterion_02_oracle_equivalence() -> Verdict {
    let mut r = seeded(102);
    let mut worst_alpha = 0.0f64;
    for case in 0..100 {
        let n = 1 + case % 6;
        let rank = 1 + r.random_range(0..n);
        let a = random_psd(&mut r, n, rank);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let s = DEFAULT_NLAMBDA_GRID[case % DEFAULT_NLAMBDA_GRID.len()];
        let shifted = oracles::add(&a.to_rows(), &oracles::scale(&oracles::identity(n), s));
        let expected = oracles::cramer_solve(&shifted, &y);
        let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let eig = eigh(&a).unwrap();
        let by_default = fit(&KernelMatrix::precomputed(a.clone()), &y, s).unwrap().alpha_hat;
        let by_cholesky = fit_cholesky(&a, &y, s).unwrap().alpha_hat;
        let by_spectrum = fit_spectral(&a, &eig, &y, s).unwrap().alpha_hat;
        for got in [by_default, by_cholesky, by_spectrum] {
            for (x, e) in got.iter().zip(&expected) {
                worst_alpha = worst_alpha.max((x - e).abs() / scale);
            }
        }
    }
    let mut worst_eig = 0.0f64;
    let mut matrices = 0;
    for n in [3, 4] {
        for _ in 0..50 {
            let b: Dense = (0..n).map(|_| (0..n).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
            let a = SymMatrix::from_fn(n, |i, j| b[i][j] + b[j][i]).unwrap();
            let roots = oracles::real_poly_roots(&oracles::char_poly(&a.to_rows()));
            let got = eigh(&a).unwrap();
            let scale = roots.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (x, e) in got.values().iter().zip(&roots) {
                worst_eig = worst_eig.max((x - e).abs() / scale);
            }
            matrices += 1;
        }
    }
    verdict(
        worst_alpha <= 1e-9 && worst_eig <= 1e-8,
        format!("100 solves: max err {worst_alpha:.2e}; {matrices} eigenproblems: max err {worst_eig:.2e}"),
    )
}

/// An admitted instance: kernel, signal, phenotypes, ridge value.
struct Admitted {
    k: KernelMatrix,
    g: Vec<f64>,
    y: Vec<f64>,
    s: f64,
}

/// Alternate between spiked random kernels and polynomial kernels on
/// simulated genotypes; keep instances whose conditions admit the drawn ridge value.
fn criterion_three_instances(count: usize) -> (Vec<Admitted>, usize) {
    let mut r = seeded(103);
    let pop = build_mc_population(
        &McConfig::from_preset(preset("hwe-linear-low").unwrap(), Scale::Desk),
        &GenotypeSource::Simulate,
    )
    .unwrap();
    let mut out = Vec::with_capacity(count);
    let mut tried = 0;
    while out.len() < count && tried < 50 * count {
        tried += 1;
        let (k, g) = if tried % 2 == 0 {
            let n = r.random_range(5..40);
            let tilt = 0.3 * r.random_range(0.0..1.0);
            let u: Vec<f64> = (0..n).map(|_| 1.0 + tilt * r.random_range(-1.0..1.0)).collect();
            let rank = 1 + r.random_range(0..6);
            let noise = random_psd(&mut r, n, rank);
            let lead = r.random_range(2.0..60.0);
            let a = SymMatrix::from_fn(n, |i, j| lead * u[i] * u[j] / n as f64 + 0.2 * noise.get(i, j)).unwrap();
            let shift = r.random_range(0.5..4.0);
            let g: Vec<f64> = (0..n).map(|_| shift + r.random_range(-1.0..1.0)).collect();
            (KernelMatrix::precomputed(a), g)
        } else {
            let n = r.random_range(10..80);
            let mut sr = seeded(r.random());
            let rows = sample_indices(&mut sr, pop.design.n(), n, "individuals").unwrap();
            let z = pop.design.select_rows(&rows).unwrap();
            let g: Vec<f64> = rows.iter().map(|&i| pop.g_values[i]).collect();
            (build_kernels(&[KernelKind::Polynomial2], &z, DEFAULT_BANDWIDTH).unwrap().remove(0), g)
        };
        let cond = check_conditions(&k, &g, SignalSource::True).unwrap();
        let Some(t) = cond.lambda_threshold.filter(|_| cond.conditions_met()) else { continue };
        let s = t.max(1e-3) * r.random_range(1.0..3.0);
        let y: Vec<f64> = g.iter().map(|v| v + 0.5 * r.random_range(-1.0..1.0)).collect();
        out.push(Admitted { k, g, y, s });
    }
    (out, tried)
}

fn criterion_03_deterministic_statements() -> Verdict {
    let start = Instant::now();
    let (instances, tried) = criterion_three_instances(500);
    let mut violations = [0usize; 4];
    for inst in &instances {
        let cond = check_conditions(&inst.k, &inst.g, SignalSource::True).unwrap();
        let b = bound_report(&inst.k, &inst.y, &inst.g, inst.s, 0.25, &cond).unwrap();
        let checks = [
            b.projection.is_some_and(|p| p.holds),
            b.projection_ratio.is_some_and(|p| p.holds),
            b.i1g_holds == Some(true),
            b.i1e_holds,
        ];
        for (v, ok) in violations.iter_mut().zip(checks) {
            *v += usize::from(!ok);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        instances.len() == 500 && violations == [0; 4] && elapsed < Duration::from_secs(120),
        format!(
            "{} admitted of {tried} generated; violations projection/ratio/I1g/I1e = {violations:?}; {elapsed:.1?}",
            instances.len()
        ),
    )
}

fn criterion_04_decomposition_additivity() -> Verdict {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for inst in criterion_one_instances() {
        for k in &inst.kernels {
            for &s in &DEFAULT_NLAMBDA_GRID {
                worst = worst.max(additivity_error(k, &inst.y, &inst.g, s));
                checked += 1;
            }
        }
    }
    let mut r = seeded(104);
    for case in 0..100 {
        let n = 1 + case % 6;
        let rank = 1 + r.random_range(0..n);
        let k = KernelMatrix::precomputed(random_psd(&mut r, n, rank));
        let g: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let y: Vec<f64> = g.iter().map(|v| v + r.random_range(-1.0..1.0)).collect();
        worst = worst.max(additivity_error(&k, &y, &g, DEFAULT_NLAMBDA_GRID[case % 11]));
        checked += 1;
    }
    for inst in criterion_three_instances(500).0 {
        worst = worst.max(additivity_error(&inst.k, &inst.y, &inst.g, inst.s));
        checked += 1;
    }
    verdict(worst <= 1e-8, format!("{checked} fits; max rel err {worst:.2e}"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

fn criterion_05_asymptotic_trends() -> Verdict {
    // an independent population of size n per repetition, hwe-linear-low otherwise
    let p = preset("hwe-linear-low").unwrap();
    let sigma_eps2 = SimulationSpec::DEFAULT_SIGMA_EPS.powi(2);
    let s = 1.0;
    let sizes = [100, 200, 400, 800];
    let mut med_g = Vec::new();
    let mut med_e = Vec::new();
    let (mut ratio_g, mut ratio_e) = (0.0, 0.0);
    for &n in &sizes {
        let mut i3g = Vec::new();
        let mut i3e = Vec::new();
        for rep in 0..20u64 {
            let seed = 105_000 + 100 * n as u64 + rep;
            let spec = SimulationSpec::new(n, p.snp_count, p.sigma_g, p.family, seed);
            let pop = build_population(&spec, simulate_hwe(n, p.snp_count, MafLaw::default(), seed).unwrap()).unwrap();
            let k = build_kernels(&[KernelKind::Polynomial2], &pop.design, DEFAULT_BANDWIDTH).unwrap().remove(0);
            let t = decompose_terms(&k, &pop.phenotypes, &pop.g_values, s).unwrap();
            i3g.push(t.i3g.abs());
            i3e.push(t.i3e.abs());
            if n == 800 {
                let (eg, ee) = noise_trace_expectations(k.eigen().unwrap(), s, sigma_eps2);
                ratio_g += t.i2g / eg / 20.0;
                ratio_e += t.i2e / ee / 20.0;
            }
        }
        med_g.push(median(i3g));
        med_e.push(median(i3e));
    }
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let within = |x: f64| (x - 1.0).abs() <= 0.15;
    let sci = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    verdict(
        decreasing(&med_g) && decreasing(&med_e) && within(ratio_g) && within(ratio_e),
        format!(
            "n={sizes:?}: median |I3g| [{}], median |I3e| [{}]; at n=800 mean I2g/E = {ratio_g:.3}, I2e/E = {ratio_e:.3}",
            sci(&med_g),
            sci(&med_e)
        ),
    )
}

struct SeedResult {
    true_h2: f64,
    linear: f64,
    poly: f64,
    gaussian: f64,
    poly_sd: f64,
}

fn desk_table_runs() -> &'static [SeedResult] {
    static RUNS: std::sync::OnceLock<Vec<SeedResult>> = std::sync::OnceLock::new();
    RUNS.get_or_init(|| {
        (1..=5)
            .map(|seed| {
                let mut cfg = McConfig::from_preset(preset("hwe-linear-low").unwrap(), Scale::Desk);
                cfg.kernels = KernelKind::BUILTIN.to_vec();
                cfg.lambda_grid = vec![2.3];
                cfg.sample_sizes = vec![1000];
                cfg.repetitions = 50;
                cfg.population_seed = seed;
                cfg.sampling_seed = 1000 + seed;
                let pop = build_mc_population(&cfg, &GenotypeSource::Simulate).unwrap();
                let t = run_mc_on(&cfg, &pop).unwrap();
                let mean = |k| t.get(k, 2.3, 1000).unwrap().mean.unwrap();
                SeedResult {
                    true_h2: pop.true_h2,
                    linear: mean(KernelKind::Linear),
                    poly: mean(KernelKind::Polynomial2),
                    gaussian: mean(KernelKind::Gaussian),
                    poly_sd: t.get(KernelKind::Polynomial2, 2.3, 1000).unwrap().sd.unwrap(),
                }
            })
            .collect()
    })
}

fn criterion_06_desk_table_reproduction() -> Verdict {
    let start = Instant::now();
    let runs = desk_table_runs();
    let elapsed = start.elapsed();
    let poly_mean = runs.iter().map(|s| s.poly).sum::<f64>() / runs.len() as f64;
    let sd_zero = runs.iter().all(|s| s.poly_sd == 0.0);
    let true_ok = runs.iter().all(|s| (s.true_h2 - 0.769).abs() <= 0.06);
    let truths: Vec<String> = runs.iter().map(|s| format!("{:.4}", s.true_h2)).collect();
    let polys: Vec<String> = runs.iter().map(|s| format!("{:.4}", s.poly)).collect();
    verdict(
        sd_zero && (poly_mean - 0.736).abs() <= 0.05 && true_ok,
        format!(
            "poly per-seed means [{}] (sd zero: {sd_zero}), across-seed mean {poly_mean:.4} vs 0.736; true_h2 [{}] vs 0.769; {elapsed:.1?}",
            polys.join(", "),
            truths.join(", ")
        ),
    )
}

fn criterion_07_kernel_ordering() -> Verdict {
    let runs = desk_table_runs();
    let mut closest = 0;
    let mut gauss_over_linear = 0;
    let mut rows = Vec::new();
    for s in runs {
        let d = |x: f64| (x - s.true_h2).abs();
        closest += usize::from(d(s.poly) < d(s.linear) && d(s.poly) < d(s.gaussian));
        gauss_over_linear += usize::from(s.gaussian > s.linear);
        rows.push(format!("[true {:.4} lin {:.4} poly {:.4} gauss {:.4}]", s.true_h2, s.linear, s.poly, s.gaussian));
    }
    verdict(
        closest == 5 && gauss_over_linear == 5,
        format!("poly closest {closest}/5, gaussian > linear {gauss_over_linear}/5; {}", rows.join(" ")),
    )
}

fn criterion_08_residual_variance_monotone() -> Verdict {
    let mut grid = DEFAULT_NLAMBDA_GRID.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut violations = 0;
    let mut sequences = 0;
    for inst in criterion_one_instances() {
        for k in &inst.kernels {
            let eps: Vec<f64> = lambda_grid_fit(k, &inst.y, &grid).unwrap().iter().map(|f| f.sigma_eps2_hat).collect();
            violations += eps.windows(2).filter(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0)).count();
            sequences += 1;
        }
    }
    verdict(violations == 0, format!("{sequences} grid sweeps, {violations} decreases"))
}

fn criterion_09_hwe_generator() -> Verdict {
    let start = Instant::now();
    let (n, p) = (10_000, 1000);
    let g = simulate_hwe(n, p, MafLaw::default(), 109).unwrap();
    let critical = oracles::chi_square_2df_critical(0.001);
    let maf = g.maf().unwrap();
    let mut pass = 0;
    for (j, &m) in maf.iter().enumerate() {
        let (p0, p1, p2) = hwe_probabilities(m).unwrap();
        let mut counts = [0.0f64; 3];
        for i in 0..n {
            counts[g.get(i, j) as usize] += 1.0;
        }
        let stat: f64 = counts.iter().zip([p0, p1, p2]).map(|(o, q)| (o - q * n as f64).powi(2) / (q * n as f64)).sum();
        pass += usize::from(stat <= critical);
    }
    let elapsed = start.elapsed();
    verdict(
        pass >= 990 && elapsed < Duration::from_secs(30),
        format!("{pass}/{p} columns pass chi-square at 0.001 (critical {critical:.3}); {elapsed:.1?}"),
    )
}

fn criterion_10_mc_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/desk.conf");
    let mut outputs = Vec::new();
    for threads in ["1", "2", "1"] {
        let table = dir.path().join(format!("table-{}-{threads}.csv", outputs.len()));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = [
            "krrh2",
            "mc",
            "--config",
            config.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            table.to_str().unwrap(),
        ];
        let code = krrh2_cli::run(argv, &mut out, &mut err);
        assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
        let mut manifest = table.clone().into_os_string();
        manifest.push(".manifest");
        outputs.push((std::fs::read(&table).unwrap(), std::fs::read(manifest).unwrap()));
    }
    let rows = String::from_utf8_lossy(&outputs[0].0).lines().count() - 1;
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        identical && rows == 45,
        format!("serial, 2-thread and repeated serial runs byte-identical: {identical}; {rows} table rows"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Verdict); 10] = [
        (1, criterion_01_algebraic_identities),
        (2, criterion_02_oracle_equivalence),
        (3, criterion_03_deterministic_statements),
        (4, criterion_04_decomposition_additivity),
        (5, criterion_05_asymptotic_trends),
        (6, criterion_06_desk_table_reproduction),
        (7, criterion_07_kernel_ordering),
        (8, criterion_08_residual_variance_monotone),
        (9, criterion_09_hwe_generator),
        (10, criterion_10_mc_determinism),
    ];
    let mut failed = Vec::new();
    for (id, check) in criteria {
        let v = std::panic::catch_unwind(check)
            .unwrap_or_else(|e| verdict(false, format!("panicked: {}", panic_message(&*e))));
        println!("criterion {id}: {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(id);
        }
    }
    println!("acceptance: {} of 10 passed; failed {failed:?}", 10 - failed.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

fn panic_message(e: &(dyn std::any::Any + Send)) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown".into())
}
