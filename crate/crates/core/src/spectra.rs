//! Spectral diagnostics for a kernel fit.
//!
//! Everything here works in the eigenbasis of `K`: with `s = n lambda`,
//! `w_i = l_i / (l_i + s)` are the smoother weights and `s / (l_i + s)` the
//! residual weights. The alignment constant `c`, the gap constant `alpha` and
//! the admissible ridge threshold come from the signal vector `g`, which is
//! either the simulated truth or a fitted proxy.

use std::fmt;

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::kernels::KernelMatrix;
use crate::linalg::{dot, mean, norm, sample_variance, EigenDecomposition};

/// Ratios below this are reported as exactly zero alignment.
pub const ALIGNMENT_FLOOR: f64 = 1e-12;
/// `l_2 <= RANK_ONE_TOL * l_1` is treated as a rank-one kernel.
pub const RANK_ONE_TOL: f64 = 1e-10;
/// Relative margin kept when picking the gap constant.
pub const ALPHA_MARGIN: f64 = 0.01;
/// Slack for the deterministic inequality checks, relative to `max(1, |value|)`.
pub const BOUND_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalSource {
    /// The generating signal of a simulation.
    True,
    /// The fitted values `K alpha`, standing in for an unobserved signal.
    Proxy,
}

impl fmt::Display for SignalSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalSource::True => "true",
            SignalSource::Proxy => "proxy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    /// Membership with [`BOUND_SLACK`].
    pub fn contains(&self, x: f64) -> bool {
        let slack = BOUND_SLACK * x.abs().max(1.0);
        x >= self.lower - slack && x <= self.upper + slack
    }

    pub fn is_ordered(&self) -> bool {
        self.lower <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub source: SignalSource,
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    /// `|v_1 . 1| / sqrt(n)`
    pub ones_alignment: f64,
    /// `|v_1 . g| / |g|`
    pub signal_alignment: f64,
    /// `|1 . g| / (sqrt(n) |g|)`
    pub mean_alignment: f64,
    pub c_star: f64,
    pub rank_one: bool,
    /// `l_1 / l_2`, infinite for a rank-one kernel.
    pub gap_ratio: f64,
    /// Open-closed range `(max(2c^2 - 1, 0), 1]` the gap constant may take.
    pub alpha_range: Interval,
    pub alpha: Option<f64>,
    pub lambda_threshold: Option<f64>,
    pub alignment_met: bool,
    pub gap_met: bool,
}

impl ConditionReport {
    pub fn conditions_met(&self) -> bool {
        self.alignment_met && self.gap_met && self.lambda_threshold.is_some()
    }

    /// True when the conditions hold and `nlambda` clears the threshold.
    pub fn admits(&self, nlambda: f64) -> bool {
        self.conditions_met() && self.lambda_threshold.is_some_and(|t| nlambda >= t)
    }

    /// `(c*, alpha)` when `nlambda` is admitted, otherwise the reason it is not.
    pub fn refuse_unless_admitted(&self, nlambda: f64) -> Result<(f64, f64)> {
        if !self.alignment_met {
            return Err(Error::PreconditionUnmet(
                "alignment condition fails (c* = 0): the signal, the constant vector and the leading eigenvector are not jointly aligned".into(),
            ));
        }
        let (Some(alpha), Some(threshold)) = (self.alpha, self.lambda_threshold) else {
            return Err(Error::PreconditionUnmet(format!(
                "spectral gap condition fails: l1/l2 = {} is too small for c* = {}",
                self.gap_ratio, self.c_star
            )));
        };
        if nlambda < threshold {
            return Err(Error::PreconditionUnmet(format!(
                "nlambda = {nlambda} is below the admissible threshold {threshold}"
            )));
        }
        Ok((self.c_star, alpha))
    }
}

fn check_signal(n: usize, g: &[f64]) -> Result<f64> {
    if g.len() != n {
        return Err(Error::DimensionMismatch(format!("kernel has order {n}, signal vector length {}", g.len())));
    }
    let gn = norm(g);
    if gn == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(gn)
}

/// Alignment and spectral gap conditions for kernel `k` and signal `g`.
pub fn check_conditions(k: &KernelMatrix, g: &[f64], source: SignalSource) -> Result<ConditionReport> {
    let eig = k.eigen()?;
    conditions_from_eigen(eig, g, source)
}

pub fn conditions_from_eigen(eig: &EigenDecomposition, g: &[f64], source: SignalSource) -> Result<ConditionReport> {
    let n = eig.order();
    let gn = check_signal(n, g)?;
    let sqrt_n = (n as f64).sqrt();
    let v1 = eig.vector(0);
    let floor = |r: f64| if r < ALIGNMENT_FLOOR { 0.0 } else { r.min(1.0) };
    let ones_alignment = floor(v1.iter().sum::<f64>().abs() / sqrt_n);
    let signal_alignment = floor(dot(v1, g).abs() / gn);
    let mean_alignment = floor(g.iter().sum::<f64>().abs() / (sqrt_n * gn));
    let c_star = ones_alignment.min(signal_alignment).min(mean_alignment);
    let c2 = c_star * c_star;

    let l1 = eig.values()[0];
    let l2 = eig.values().get(1).copied().unwrap_or(0.0);
    let rank_one = l1 > 0.0 && l2 <= RANK_ONE_TOL * l1;
    let gap_ratio = if rank_one { f64::INFINITY } else { l1 / l2 };

    let lower = (2.0 * c2 - 1.0).max(0.0);
    let alpha_range = Interval::new(lower, 1.0);
    let alignment_met = c_star > 0.0;

    let mut alpha = None;
    let mut lambda_threshold = None;
    if alignment_met && l1 > 0.0 {
        let a_max = if rank_one { 1.0 } else { (c2 * gap_ratio / (1.0 + ALPHA_MARGIN) - 1.0 + c2).min(1.0) };
        // c* = 1 collapses the range to its closed end
        let admissible = if lower >= 1.0 { a_max >= 1.0 } else { a_max > lower };
        if admissible {
            alpha = Some(a_max);
            lambda_threshold = if rank_one {
                Some(0.0)
            } else {
                let a = a_max + 1.0 - c2;
                let denom = c2 * l1 - a * l2;
                (denom > 0.0).then(|| a * l1 * l2 / denom)
            };
        }
    }
    let gap_met = alpha.is_some();

    Ok(ConditionReport {
        source,
        n,
        l1,
        l2,
        ones_alignment,
        signal_alignment,
        mean_alignment,
        c_star,
        rank_one,
        gap_ratio,
        alpha_range,
        alpha,
        lambda_threshold,
        alignment_met,
        gap_met,
    })
}

/// The six pieces of the estimated variance components, each already divided
/// by `n - 1` (genetic part) or `n` (residual part).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermDecomposition {
    pub i1g: f64,
    pub i2g: f64,
    pub i3g: f64,
    pub i1e: f64,
    pub i2e: f64,
    pub i3e: f64,
}

impl TermDecomposition {
    pub fn sigma_g2(&self) -> f64 {
        self.i1g + self.i2g + self.i3g
    }

    pub fn sigma_eps2(&self) -> f64 {
        self.i1e + self.i2e + self.i3e
    }
}

fn check_nlambda(nlambda: f64) -> Result<()> {
    if !(nlambda > 0.0 && nlambda.is_finite()) {
        return Err(Error::param("nlambda", format!("must be positive and finite, got {nlambda}")));
    }
    Ok(())
}

/// Split the estimates into signal, noise and cross terms, with noise `y - g`.
pub fn decompose_terms(k: &KernelMatrix, y: &[f64], g: &[f64], nlambda: f64) -> Result<TermDecomposition> {
    terms_from_eigen(k.eigen()?, y, g, nlambda)
}

pub fn terms_from_eigen(eig: &EigenDecomposition, y: &[f64], g: &[f64], nlambda: f64) -> Result<TermDecomposition> {
    check_nlambda(nlambda)?;
    let n = eig.order();
    if y.len() != n || g.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "kernel has order {n}, phenotypes {}, signal {}",
            y.len(),
            g.len()
        )));
    }
    let s = nlambda;
    let eps: Vec<f64> = y.iter().zip(g).map(|(a, b)| a - b).collect();
    let a = eig.coefficients(g)?;
    let b = eig.coefficients(&eps)?;
    let w: Vec<f64> = eig.values().iter().map(|&l| l / (l + s)).collect();
    let r2: Vec<f64> = eig.values().iter().map(|&l| (s / (l + s)).powi(2)).collect();
    let scaled = |c: &[f64]| -> Vec<f64> { c.iter().zip(&w).map(|(c, w)| c * w).collect() };
    let gv = eig.synthesize(&scaled(&a))?;
    let ev = eig.synthesize(&scaled(&b))?;
    let (gc, ec) =
        if n > 0 { (crate::linalg::center(&gv)?, crate::linalg::center(&ev)?) } else { (Vec::new(), Vec::new()) };
    let dg = if n > 1 { (n - 1) as f64 } else { f64::INFINITY };
    let de = n as f64;
    Ok(TermDecomposition {
        i1g: dot(&gc, &gc) / dg,
        i2g: dot(&ec, &ec) / dg,
        i3g: 2.0 * dot(&gc, &ec) / dg,
        i1e: r2.iter().zip(&a).map(|(r, a)| r * a * a).sum::<f64>() / de,
        i2e: r2.iter().zip(&b).map(|(r, b)| r * b * b).sum::<f64>() / de,
        i3e: 2.0 * r2.iter().zip(a.iter().zip(&b)).map(|(r, (a, b))| r * a * b).sum::<f64>() / de,
    })
}

/// `((1/n) sum_i w_i^2, (1/(n-1)) sum_{i>=2} w_i^2)`.
pub fn esd_integrals(k: &KernelMatrix, nlambda: f64) -> Result<(f64, f64)> {
    check_nlambda(nlambda)?;
    Ok(esd_from_values(k.eigen()?.values(), nlambda))
}

pub fn esd_from_values(values: &[f64], nlambda: f64) -> (f64, f64) {
    let n = values.len();
    let sq: Vec<f64> = values.iter().map(|&l| (l / (l + nlambda)).powi(2)).collect();
    let full = if n > 0 { sq.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let minus1 = if n > 1 { sq[1..].iter().sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    (full, minus1)
}

/// Expected values of the two noise quadratic forms given `K`:
/// `sigma^2 / (n-1) tr(S (I - J/n) S)` and `sigma^2 / n tr((s (K + sI)^{-1})^2)`
/// with `S = K (K + sI)^{-1}`.
pub fn noise_trace_expectations(eig: &EigenDecomposition, nlambda: f64, sigma_eps2: f64) -> (f64, f64) {
    let n = eig.order();
    let s = nlambda;
    let sqrt_n = (n as f64).sqrt();
    let mut tr = 0.0;
    let mut proj = 0.0;
    let mut tr_e = 0.0;
    for (k, &l) in eig.values().iter().enumerate() {
        let w2 = (l / (l + s)).powi(2);
        let ones = eig.vector(k).iter().sum::<f64>() / sqrt_n;
        tr += w2;
        proj += w2 * ones * ones;
        tr_e += (s / (l + s)).powi(2);
    }
    let g = if n > 1 { sigma_eps2 * (tr - proj) / (n - 1) as f64 } else { 0.0 };
    let e = if n > 0 { sigma_eps2 * tr_e / n as f64 } else { 0.0 };
    (g, e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionCheck {
    /// `|1^T K (K + sI)^{-1} g|`
    pub lhs: f64,
    /// `alpha w_2 sqrt(n) |g|`
    pub rhs: f64,
    pub holds: bool,
}

fn smoothed_mean_projection(eig: &EigenDecomposition, g: &[f64], s: f64) -> Result<f64> {
    let a = eig.coefficients(g)?;
    Ok(eig.values().iter().enumerate().map(|(k, &l)| l / (l + s) * eig.vector(k).iter().sum::<f64>() * a[k]).sum())
}

fn weight(eig: &EigenDecomposition, i: usize, s: f64) -> f64 {
    let l = eig.values().get(i).copied().unwrap_or(0.0);
    l / (l + s)
}

/// Lower bound on the smoothed projection of `g` onto the constant vector.
/// Refuses when the conditions fail or `nlambda` is below the threshold.
pub fn projection_bound_check(
    k: &KernelMatrix,
    g: &[f64],
    nlambda: f64,
    report: &ConditionReport,
) -> Result<ProjectionCheck> {
    projection_check_from_eigen(k.eigen()?, g, nlambda, report)
}

pub fn projection_check_from_eigen(
    eig: &EigenDecomposition,
    g: &[f64],
    nlambda: f64,
    report: &ConditionReport,
) -> Result<ProjectionCheck> {
    check_nlambda(nlambda)?;
    let (_, alpha) = report.refuse_unless_admitted(nlambda)?;
    let gn = check_signal(eig.order(), g)?;
    let lhs = smoothed_mean_projection(eig, g, nlambda)?.abs();
    let rhs = alpha * weight(eig, 1, nlambda) * (eig.order() as f64).sqrt() * gn;
    let holds = lhs >= rhs - BOUND_SLACK * rhs.abs().max(1.0);
    Ok(ProjectionCheck { lhs, rhs, holds })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCheck {
    pub value: f64,
    pub bounds: Interval,
    pub holds: bool,
}

/// `(1/n)(1^T K (K+sI)^{-1} g)^2 / ((1/n)(1^T g)^2)` against
/// `[alpha^2 w_2^2, c^-2 w_1^2]`.
pub fn projection_ratio_check(
    eig: &EigenDecomposition,
    g: &[f64],
    nlambda: f64,
    report: &ConditionReport,
) -> Result<RatioCheck> {
    check_nlambda(nlambda)?;
    let (c, alpha) = report.refuse_unless_admitted(nlambda)?;
    check_signal(eig.order(), g)?;
    let num = smoothed_mean_projection(eig, g, nlambda)?.powi(2);
    let den = g.iter().sum::<f64>().powi(2);
    let value = num / den;
    let bounds = Interval::new((alpha * weight(eig, 1, nlambda)).powi(2), (weight(eig, 0, nlambda) / c).powi(2));
    Ok(RatioCheck { value, bounds, holds: bounds.contains(value) })
}

/// Bounds on the genetic signal term `i1g` given the conditions.
pub fn signal_term_bounds(eig: &EigenDecomposition, g: &[f64], nlambda: f64, c: f64, alpha: f64) -> Interval {
    let n = eig.order() as f64;
    let w1 = weight(eig, 0, nlambda);
    let w2 = weight(eig, 1, nlambda);
    let msq = dot(g, g) / n;
    let m2 = (g.iter().sum::<f64>() / n).powi(2);
    let c2 = c * c;
    let lower = n * c2 / (n - 1.0) * w1 * w1 * (msq - m2 / (c2 * c2));
    let upper = n / (n - 1.0) * w1 * w1 * (msq - (alpha * w2 / w1).powi(2) * m2);
    Interval::new(lower, upper)
}

/// Bounds on the residual signal term `i1e`; these need no conditions.
pub fn residual_term_bounds(eig: &EigenDecomposition, g: &[f64], nlambda: f64) -> Interval {
    let n = eig.order() as f64;
    let l1 = eig.values().first().copied().unwrap_or(0.0);
    let gg = dot(g, g);
    Interval::new((nlambda / (l1 + nlambda)).powi(2) * gg / n, gg / n)
}

/// Diagnostic quantities and the interval statements built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub source: SignalSource,
    pub n: usize,
    pub nlambda: f64,
    pub sigma_eps2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub esd_full: f64,
    pub esd_minus1: f64,
    pub terms: TermDecomposition,
    /// Conditional expectations of `i2g` and `i2e` given `K`.
    pub i2g_trace: f64,
    pub i2e_trace: f64,
    /// Always-valid lower bound `sigma^2/(n-1) sum_{i>=2} w_i^2` on `i2g_trace`.
    pub i2g_trace_lower: f64,
    /// `(1-c^2) sigma^2/(n-1) sum_i w_i^2`. Reported, not a valid bound in general.
    pub i2g_trace_upper_stated: Option<f64>,
    pub i2e_trace_bounds: Interval,
    pub effective_rank: usize,
    /// `rank * sigma^2 / (n-1)`, which bounds `i2g_trace`.
    pub rank_bound: f64,
    pub i1e_bounds: Interval,
    pub i1e_holds: bool,
    pub i1g_bounds: Option<Interval>,
    pub i1g_holds: Option<bool>,
    pub projection: Option<ProjectionCheck>,
    pub projection_ratio: Option<RatioCheck>,
    pub sigma_g2_bounds: Option<Interval>,
    pub sigma_eps2_bounds: Interval,
    pub ratio_bounds: Option<Interval>,
    /// Threshold cleared, `F_-1` integral small enough, `F` integral large enough.
    pub admissibility: Option<[bool; 3]>,
}

/// Assemble every diagnostic for one fit. Condition-dependent entries are
/// `None` when `report` does not admit `nlambda`.
pub fn bound_report(
    k: &KernelMatrix,
    y: &[f64],
    g: &[f64],
    nlambda: f64,
    sigma_eps2: f64,
    report: &ConditionReport,
) -> Result<BoundReport> {
    bound_report_from_eigen(k.eigen()?, y, g, nlambda, sigma_eps2, report)
}

pub fn bound_report_from_eigen(
    eig: &EigenDecomposition,
    y: &[f64],
    g: &[f64],
    nlambda: f64,
    sigma_eps2: f64,
    report: &ConditionReport,
) -> Result<BoundReport> {
    check_nlambda(nlambda)?;
    if !(sigma_eps2 >= 0.0 && sigma_eps2.is_finite()) {
        return Err(Error::param("sigma_eps2", format!("must be non-negative, got {sigma_eps2}")));
    }
    let n = eig.order();
    check_signal(n, g)?;
    if report.n != n {
        return Err(Error::DimensionMismatch("condition report belongs to another kernel".into()));
    }
    let s = nlambda;
    let terms = terms_from_eigen(eig, y, g, s)?;
    let (esd_full, esd_minus1) = esd_from_values(eig.values(), s);
    let tau1 = weight(eig, 0, s);
    let tau2 = weight(eig, 1, s);
    let (i2g_trace, i2e_trace) = noise_trace_expectations(eig, s, sigma_eps2);
    let nf = n as f64;
    let i2g_trace_lower = if n > 1 { sigma_eps2 * esd_minus1 } else { 0.0 };
    let l1 = report.l1;
    let i2e_trace_bounds = Interval::new((s / (l1 + s)).powi(2) * sigma_eps2, sigma_eps2);
    let effective_rank = eig.values().iter().filter(|&&l| l > RANK_ONE_TOL * l1.max(0.0)).count();
    let rank_bound = if n > 1 { effective_rank as f64 * sigma_eps2 / (nf - 1.0) } else { 0.0 };
    let i1e_bounds = residual_term_bounds(eig, g, s);
    let i1e_holds = i1e_bounds.contains(terms.i1e);

    let var_g = sample_variance(g);
    let mean_g = mean(g);
    let e2 = mean_g * mean_g;
    let sigma_eps2_bounds =
        Interval::new((1.0 - tau1).powi(2) * (var_g + sigma_eps2) + (1.0 - tau1).powi(2) * e2, var_g + sigma_eps2 + e2);

    let c = report.c_star;
    let c2 = c * c;
    let i2g_trace_upper_stated =
        report.alignment_met.then(|| (1.0 - c2) * sigma_eps2 * esd_full * nf / (nf - 1.0).max(1.0));

    let mut out = BoundReport {
        source: report.source,
        n,
        nlambda: s,
        sigma_eps2,
        tau1,
        tau2,
        esd_full,
        esd_minus1,
        terms,
        i2g_trace,
        i2e_trace,
        i2g_trace_lower,
        i2g_trace_upper_stated,
        i2e_trace_bounds,
        effective_rank,
        rank_bound,
        i1e_bounds,
        i1e_holds,
        i1g_bounds: None,
        i1g_holds: None,
        projection: None,
        projection_ratio: None,
        sigma_g2_bounds: None,
        sigma_eps2_bounds,
        ratio_bounds: None,
        admissibility: None,
    };
    if !report.admits(s) {
        return Ok(out);
    }
    let alpha = report.alpha.expect("admitted report carries alpha");
    let i1g_bounds = signal_term_bounds(eig, g, s, c, alpha);
    out.i1g_holds = Some(i1g_bounds.contains(terms.i1g));
    out.i1g_bounds = Some(i1g_bounds);
    out.projection = Some(projection_check_from_eigen(eig, g, s, report)?);
    if g.iter().sum::<f64>() != 0.0 {
        out.projection_ratio = Some(projection_ratio_check(eig, g, s, report)?);
    }

    let gap_term = tau1 * tau1 - (alpha * tau2 / tau1).powi(2);
    let sg_lower = c2 * tau1 * tau1 * var_g + (c2 * tau1 * tau1 - 1.0 / (c2 * c2)) * e2 + sigma_eps2 * esd_minus1;
    let sg_upper = tau1 * tau1 * var_g + gap_term * e2 + (1.0 - c).powi(2) * sigma_eps2 * esd_full;
    out.sigma_g2_bounds = Some(Interval::new(sg_lower, sg_upper));

    let lower_den = c2 * tau1 * tau1 * var_g + gap_term * e2 + (1.0 - c).powi(2) * sigma_eps2 * esd_full;
    let upper_den = sg_lower;
    let ratio_lower = if lower_den > 0.0 { sigma_eps2_bounds.lower / lower_den } else { 0.0 };
    let ratio_upper = if upper_den > 0.0 { sigma_eps2_bounds.upper / upper_den } else { f64::INFINITY };
    out.ratio_bounds = Some(Interval::new(ratio_lower, ratio_upper));

    let snr = var_g / sigma_eps2;
    let bracket =
        snr * snr + (1.0 - c2 * tau1 * tau1) * snr + (var_g / (sigma_eps2 * sigma_eps2) - gap_term / sigma_eps2) * e2;
    let third = if 1.0 - c2 > 0.0 { esd_full >= bracket / (1.0 - c2) } else { bracket <= 0.0 };
    out.admissibility =
        Some([report.lambda_threshold.is_some_and(|t| s >= t), esd_minus1 <= snr * (1.0 - c2 * tau1 * tau1), third]);
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_f64)
}

fn opt_bool(v: Option<bool>) -> String {
    v.map_or_else(|| "NA".to_string(), |b| b.to_string())
}

/// Flat `key=value` rendering of both reports. With a proxy signal every key
/// carries a `proxy.` prefix.
pub fn report_key_values(cond: &ConditionReport, bounds: Option<&BoundReport>) -> Vec<(String, String)> {
    let mut kv: Vec<(String, String)> = vec![
        ("signal_source".into(), cond.source.to_string()),
        ("n".into(), cond.n.to_string()),
        ("l1".into(), fmt_f64(cond.l1)),
        ("l2".into(), fmt_f64(cond.l2)),
        ("ones_alignment".into(), fmt_f64(cond.ones_alignment)),
        ("signal_alignment".into(), fmt_f64(cond.signal_alignment)),
        ("mean_alignment".into(), fmt_f64(cond.mean_alignment)),
        ("c_star".into(), fmt_f64(cond.c_star)),
        ("rank_one".into(), cond.rank_one.to_string()),
        ("gap_ratio".into(), fmt_f64(cond.gap_ratio)),
        ("alpha_range_lower_open".into(), fmt_f64(cond.alpha_range.lower)),
        ("alpha_range_upper".into(), fmt_f64(cond.alpha_range.upper)),
        ("alpha".into(), opt(cond.alpha)),
        ("lambda_threshold".into(), opt(cond.lambda_threshold)),
        ("alignment_met".into(), cond.alignment_met.to_string()),
        ("gap_met".into(), cond.gap_met.to_string()),
    ];
    if let Some(b) = bounds {
        let iv = |name: &str, i: Option<Interval>, kv: &mut Vec<(String, String)>| {
            kv.push((format!("{name}_lower"), opt(i.map(|i| i.lower))));
            kv.push((format!("{name}_upper"), opt(i.map(|i| i.upper))));
        };
        kv.extend([
            ("nlambda".into(), fmt_f64(b.nlambda)),
            ("admitted".into(), cond.admits(b.nlambda).to_string()),
            ("sigma_eps2".into(), fmt_f64(b.sigma_eps2)),
            ("tau1".into(), fmt_f64(b.tau1)),
            ("tau2".into(), fmt_f64(b.tau2)),
            ("esd_full".into(), fmt_f64(b.esd_full)),
            ("esd_minus1".into(), fmt_f64(b.esd_minus1)),
            ("i1g".into(), fmt_f64(b.terms.i1g)),
            ("i2g".into(), fmt_f64(b.terms.i2g)),
            ("i3g".into(), fmt_f64(b.terms.i3g)),
            ("i1e".into(), fmt_f64(b.terms.i1e)),
            ("i2e".into(), fmt_f64(b.terms.i2e)),
            ("i3e".into(), fmt_f64(b.terms.i3e)),
            ("i2g_trace".into(), fmt_f64(b.i2g_trace)),
            ("i2g_gap".into(), fmt_f64(b.terms.i2g - b.i2g_trace)),
            ("i2e_trace".into(), fmt_f64(b.i2e_trace)),
            ("i2e_gap".into(), fmt_f64(b.terms.i2e - b.i2e_trace)),
            ("i2g_trace_lower".into(), fmt_f64(b.i2g_trace_lower)),
            ("i2g_trace_upper_stated".into(), opt(b.i2g_trace_upper_stated)),
            ("effective_rank".into(), b.effective_rank.to_string()),
            ("rank_bound".into(), fmt_f64(b.rank_bound)),
        ]);
        iv("i2e_trace", Some(b.i2e_trace_bounds), &mut kv);
        iv("i1e", Some(b.i1e_bounds), &mut kv);
        kv.push(("i1e_holds".into(), b.i1e_holds.to_string()));
        iv("i1g", b.i1g_bounds, &mut kv);
        kv.push(("i1g_holds".into(), opt_bool(b.i1g_holds)));
        kv.push(("projection_lhs".into(), opt(b.projection.map(|p| p.lhs))));
        kv.push(("projection_rhs".into(), opt(b.projection.map(|p| p.rhs))));
        kv.push(("projection_holds".into(), opt_bool(b.projection.map(|p| p.holds))));
        kv.push(("projection_ratio".into(), opt(b.projection_ratio.map(|p| p.value))));
        iv("projection_ratio", b.projection_ratio.map(|p| p.bounds), &mut kv);
        kv.push(("projection_ratio_holds".into(), opt_bool(b.projection_ratio.map(|p| p.holds))));
        iv("sigma_g2", b.sigma_g2_bounds, &mut kv);
        kv.push(("sigma_g2_interval_ordered".into(), opt_bool(b.sigma_g2_bounds.map(|i| i.is_ordered()))));
        iv("sigma_eps2", Some(b.sigma_eps2_bounds), &mut kv);
        iv("ratio", b.ratio_bounds, &mut kv);
        for (i, name) in ["threshold", "esd_minus1", "esd_full"].iter().enumerate() {
            kv.push((format!("admissible_{name}"), opt_bool(b.admissibility.map(|a| a[i]))));
        }
    }
    if cond.source == SignalSource::Proxy {
        for (k, _) in kv.iter_mut().skip(1) {
            *k = format!("proxy.{k}");
        }
    }
    kv
}

/// Header and record for one-row-per-instance CSV output of the same fields.
pub fn report_csv(cond: &ConditionReport, bounds: Option<&BoundReport>) -> (Vec<String>, Vec<String>) {
    report_key_values(cond, bounds).into_iter().unzip()
}
