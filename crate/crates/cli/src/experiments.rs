//! Tail, derivative, means and ratio runs.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use dti_core::ensembles::{EnsembleSpec, SeedSpec};
use dti_core::harness::{
    empirical_tail, expectation_ratio_series, mean_corollary, normal_critical_value, theorem1_bound, MeanCorollary,
    RatioSeriesResult, StatisticSpec, TailExperimentConfig, TailExperimentReport, TensorSource, ThetaGrid,
};
use dti_core::kernels::MeanKind;
use dti_core::norms::{norm, NormSpec};

use crate::config::{parse_value, read_value, Overrides};
use crate::error::{CliError, CliResult};

/// A tail config file: one experiment, or `{"experiments": [...]}`.
pub fn load_tail_configs(path: &Path) -> CliResult<Vec<TailExperimentConfig>> {
    let mut value = read_value(path)?;
    if let Some(list) = value.get_mut("experiments") {
        let list = list.take();
        let v: Vec<TailExperimentConfig> = parse_value(list, path)?;
        if v.is_empty() {
            return Err(CliError::Usage(format!("{}: no experiments", path.display())));
        }
        Ok(v)
    } else {
        Ok(vec![parse_value(value, path)?])
    }
}

pub fn apply_tail_overrides(config: &mut TailExperimentConfig, o: &Overrides) {
    if let Some(s) = o.seed {
        config.seed = s;
    }
    if let Some(n) = o.samples {
        config.n_samples = n;
        config.n_expectation_samples = n;
    }
    if let Some(t) = &o.thetas {
        config.thetas = ThetaGrid::Values(t.clone());
    }
}

pub fn experiment_name(config: &TailExperimentConfig, index: usize) -> String {
    config.name.clone().unwrap_or_else(|| format!("experiment{index}"))
}

/// Validate every experiment, then run them in order.
pub fn run_tail_experiments(
    configs: &[TailExperimentConfig],
    base_dir: Option<&Path>,
    derivative_only: bool,
) -> CliResult<Vec<TailExperimentReport>> {
    for (i, c) in configs.iter().enumerate() {
        if derivative_only
            && !matches!(
                c.statistic,
                StatisticSpec::Derivative { .. } | StatisticSpec::QuasiDerivative { .. }
            )
        {
            return Err(CliError::Usage(format!(
                "experiment {}: the derivative command takes derivative or quasi_derivative statistics",
                experiment_name(c, i)
            )));
        }
        c.validate()
            .map_err(|e| CliError::Usage(format!("experiment {}: {e}", experiment_name(c, i))))?;
    }
    configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut r = empirical_tail(c, base_dir).map_err(|e| {
                let inner = CliError::from(e);
                let msg = format!("experiment {}: {inner}", experiment_name(c, i));
                match inner {
                    CliError::Usage(_) => CliError::Usage(msg),
                    CliError::Runtime(_) => CliError::Runtime(msg),
                }
            })?;
            r.name = Some(experiment_name(c, i));
            Ok(r)
        })
        .collect()
}

pub fn tail_table(report: &TailExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "== {} : {} ({}), n = {}, failed = {}",
        report.name.as_deref().unwrap_or("experiment"),
        report.statistic,
        report.norm,
        report.n_samples,
        report.failed_samples
    );
    let _ = writeln!(s, "{:>14} {:>10} {:>10} {:>10} {:>14}  verdict", "theta", "p_hat", "ci_lo", "ci_hi", "bound");
    for r in &report.rows {
        let bound = r.bound.map(|b| format!("{b:14.6e}")).unwrap_or_else(|| format!("{:>14}", "-"));
        let _ = writeln!(
            s,
            "{:14.6e} {:10.6} {:10.6} {:10.6} {}  {}",
            r.theta,
            r.p_hat,
            r.ci_lo,
            r.ci_hi,
            bound,
            r.verdict.as_str()
        );
    }
    s
}

fn default_series_terms() -> usize {
    8
}

fn default_confidence() -> f64 {
    0.99
}

/// Configuration of a `means` run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeansConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub ensemble_a: EnsembleSpec,
    #[serde(default)]
    pub ensemble_b: Option<EnsembleSpec>,
    pub kinds: Vec<MeanKind>,
    pub x: TensorSource,
    pub norm: NormSpec,
    pub thetas: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(default = "default_series_terms")]
    pub series_terms: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Pairs of kinds whose bounds must agree within the confidence interval.
    #[serde(default)]
    pub compare: Vec<[MeanKind; 2]>,
}

impl MeansConfig {
    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.samples {
            self.n_samples = n;
        }
        if let Some(t) = &o.thetas {
            self.thetas = t.clone();
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeansRow {
    pub kind: String,
    pub theta: f64,
    pub bound: f64,
    pub bound_lo: f64,
    pub bound_hi: f64,
    /// The same bound with the direct estimate of the kernel sum.
    pub direct_bound: f64,
    /// Corollary sum not below the direct sum, up to the confidence interval.
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeansComparison {
    pub kinds: [String; 2],
    pub sums: [f64; 2],
    pub gap: f64,
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeansReport {
    pub name: Option<String>,
    pub seed: u64,
    pub norm_x: f64,
    pub corollaries: Vec<MeanCorollary>,
    pub rows: Vec<MeansRow>,
    pub comparisons: Vec<MeansComparison>,
    pub all_pass: bool,
}

impl MeansReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,theta,bound,bound_lo,bound_hi,direct_bound,verdict\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{:e},{}",
                r.kind,
                r.theta,
                r.bound,
                r.bound_lo,
                r.bound_hi,
                r.direct_bound,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        for c in &self.comparisons {
            let _ = writeln!(
                s,
                "{}={},,{:e},{:e},{:e},,{}",
                c.kinds[0],
                c.kinds[1],
                c.sums[0],
                c.sums[1],
                c.gap,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

pub fn run_means(config: &MeansConfig, base_dir: Option<&Path>) -> CliResult<MeansReport> {
    let usage = |m: String| CliError::Usage(m);
    let ens_b = config.ensemble_b.as_ref().unwrap_or(&config.ensemble_a);
    config.ensemble_a.validate()?;
    ens_b.validate()?;
    let dim = config.ensemble_a.shape.dim();
    config.norm.validate(dim)?;
    if config.kinds.is_empty() {
        return Err(usage("kinds is empty".into()));
    }
    if config.n_samples < 2 {
        return Err(usage("n_samples must be at least 2".into()));
    }
    if let Some(t) = config.thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(usage(format!("theta must be positive, got {t}")));
    }
    for k in config.kinds.iter().chain(config.compare.iter().flatten()) {
        dti_core::kernels::mean_kernel(*k)?;
    }
    let x = config.x.resolve(&config.ensemble_a.shape, base_dir)?;
    let z = normal_critical_value(config.confidence)?;
    let norm_x = norm(&x, &config.norm)?;
    let seed = SeedSpec::new(config.seed);

    let mut kinds = config.kinds.clone();
    for k in config.compare.iter().flatten() {
        if !kinds.contains(k) {
            kinds.push(*k);
        }
    }
    let corollaries: Vec<MeanCorollary> = kinds
        .iter()
        .map(|k| mean_corollary(*k, &config.ensemble_a, ens_b, config.n_samples, &seed, config.series_terms))
        .collect::<dti_core::Result<_>>()?;

    let mut rows = Vec::new();
    for c in &corollaries {
        let (s, d) = (c.corollary_sum, c.direct_sum);
        let slack = z * (s.std_error.powi(2) + d.std_error.powi(2)).sqrt();
        let pass = s.estimate + slack >= d.estimate;
        for &theta in &config.thetas {
            rows.push(MeansRow {
                kind: c.kind.label(),
                theta,
                bound: theorem1_bound(theta, norm_x, s.estimate, dim)?,
                bound_lo: theorem1_bound(theta, norm_x, (s.estimate - z * s.std_error).max(0.0), dim)?,
                bound_hi: theorem1_bound(theta, norm_x, s.estimate + z * s.std_error, dim)?,
                direct_bound: theorem1_bound(theta, norm_x, d.estimate, dim)?,
                pass,
            });
        }
    }
    let find = |k: &MeanKind| corollaries.iter().find(|c| c.kind == *k).expect("kind evaluated");
    let comparisons: Vec<MeansComparison> = config
        .compare
        .iter()
        .map(|[a, b]| {
            let (ca, cb) = (find(a), find(b));
            let gap = (ca.corollary_sum.estimate - cb.corollary_sum.estimate).abs();
            let allowed = z * (ca.corollary_sum.std_error.powi(2) + cb.corollary_sum.std_error.powi(2)).sqrt();
            MeansComparison {
                kinds: [a.label(), b.label()],
                sums: [ca.corollary_sum.estimate, cb.corollary_sum.estimate],
                gap,
                allowed,
                pass: gap <= allowed,
            }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass) && comparisons.iter().all(|c| c.pass);
    Ok(MeansReport {
        name: config.name.clone(),
        seed: config.seed,
        norm_x,
        corollaries,
        rows,
        comparisons,
        all_pass,
    })
}

pub fn means_table(report: &MeansReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "== {} : mean corollaries, ||X|| = {:.6e}", report.name.as_deref().unwrap_or("means"), report.norm_x);
    let _ = writeln!(s, "{:>16} {:>14} {:>14} {:>14} {:>14}  verdict", "kind", "theta", "bound", "ci_hi", "direct");
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{:>16} {:14.6e} {:14.6e} {:14.6e} {:14.6e}  {}",
            r.kind,
            r.theta,
            r.bound,
            r.bound_hi,
            r.direct_bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    for c in &report.comparisons {
        let _ = writeln!(
            s,
            "compare {} vs {}: {:.6e} vs {:.6e}, gap {:.3e} (allowed {:.3e})  {}",
            c.kinds[0],
            c.kinds[1],
            c.sums[0],
            c.sums[1],
            c.gap,
            c.allowed,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

/// Samples for one ratio case.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "samples", rename_all = "snake_case")]
pub enum RatioSamples {
    /// Paired samples given literally.
    Explicit { x: Vec<f64>, y: Vec<f64> },
    /// `Y = shift + Beta(alpha, beta)` and independent `X ~ Uniform[0, x_scale)`.
    Beta {
        alpha: f64,
        beta: f64,
        shift: f64,
        x_scale: f64,
        n: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSum {
    pub k: usize,
    pub value: f64,
}

fn default_ratio_tolerance() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioCase {
    pub name: String,
    #[serde(flatten)]
    pub samples: RatioSamples,
    #[serde(default)]
    pub expected: Vec<ExpectedSum>,
    #[serde(default = "default_ratio_tolerance")]
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub truncation: usize,
    pub cases: Vec<RatioCase>,
}

impl RatioConfig {
    pub fn apply_overrides(&mut self, o: &Overrides) {
        for c in &mut self.cases {
            if let RatioSamples::Beta { n, seed, .. } = &mut c.samples {
                if let Some(s) = o.seed {
                    *seed = s;
                }
                if let Some(m) = o.samples {
                    *n = m;
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioCaseReport {
    pub name: String,
    pub result: RatioSeriesResult,
    /// `(k, expected, observed, pass)` for every expected partial sum.
    pub checks: Vec<(usize, f64, f64, bool)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub name: Option<String>,
    pub cases: Vec<RatioCaseReport>,
    pub all_pass: bool,
}

impl RatioReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("case,k,partial_sum,reference,expected,verdict\n");
        for c in &self.cases {
            for (k, v) in c.result.partial_sums.iter().enumerate() {
                let check = c.checks.iter().find(|ch| ch.0 == k);
                let (expected, verdict) = match check {
                    Some(ch) => (format!("{:e}", ch.1), if ch.3 { "PASS" } else { "FAIL" }),
                    None => (String::new(), ""),
                };
                let _ = writeln!(s, "{},{},{:e},{:e},{},{}", c.name, k, v, c.result.reference, expected, verdict);
            }
        }
        s
    }
}

fn ratio_samples(s: &RatioSamples) -> CliResult<(Vec<f64>, Vec<f64>)> {
    match s {
        RatioSamples::Explicit { x, y } => Ok((x.clone(), y.clone())),
        RatioSamples::Beta {
            alpha,
            beta,
            shift,
            x_scale,
            n,
            seed,
        } => {
            let dist = Beta::new(*alpha, *beta).map_err(|e| CliError::Usage(format!("beta parameters: {e}")))?;
            if !(x_scale.is_finite() && *x_scale > 0.0) {
                return Err(CliError::Usage(format!("x_scale must be positive, got {x_scale}")));
            }
            let mut rng = SeedSpec::new(*seed).stream(0);
            let y: Vec<f64> = (0..*n).map(|_| shift + dist.sample(&mut rng)).collect();
            let x: Vec<f64> = (0..*n).map(|_| rng.random::<f64>() * x_scale).collect();
            Ok((x, y))
        }
    }
}

pub fn run_ratio(config: &RatioConfig) -> CliResult<RatioReport> {
    if config.cases.is_empty() {
        return Err(CliError::Usage("no ratio cases".into()));
    }
    let mut cases = Vec::new();
    for c in &config.cases {
        if let Some(e) = c.expected.iter().find(|e| e.k > config.truncation) {
            return Err(CliError::Usage(format!(
                "case {}: expected S_{} beyond truncation {}",
                c.name, e.k, config.truncation
            )));
        }
        let (x, y) = ratio_samples(&c.samples)?;
        let result = expectation_ratio_series(&x, &y, config.truncation)
            .map_err(|e| CliError::Usage(format!("case {}: {e}", c.name)))?;
        let checks = c
            .expected
            .iter()
            .map(|e| {
                let got = result.partial_sums[e.k];
                (e.k, e.value, got, (got - e.value).abs() <= c.tolerance)
            })
            .collect();
        cases.push(RatioCaseReport {
            name: c.name.clone(),
            result,
            checks,
        });
    }
    let all_pass = cases.iter().all(|c| c.checks.iter().all(|ch| ch.3));
    Ok(RatioReport {
        name: config.name.clone(),
        cases,
        all_pass,
    })
}

pub fn ratio_table(report: &RatioReport) -> String {
    let mut s = String::new();
    for c in &report.cases {
        let _ = writeln!(s, "== {} : reference E(X/Y) = {:.15}", c.name, c.result.reference);
        for (k, v) in c.result.partial_sums.iter().enumerate() {
            let mark = match c.checks.iter().find(|ch| ch.0 == k) {
                Some(ch) if ch.3 => "  PASS",
                Some(_) => "  FAIL",
                None => "",
            };
            let _ = writeln!(s, "  S_{k} = {v:.15}{mark}");
        }
    }
    s
}
