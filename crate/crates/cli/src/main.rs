use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dti_lab::config::{base_dir, ensure_dir, load, read_value, slug, write_json, write_text, Overrides};
use dti_lab::experiments::{
    apply_tail_overrides, load_tail_configs, means_table, ratio_table, run_means, run_ratio, run_tail_experiments,
    tail_table, MeansConfig, RatioConfig,
};
use dti_lab::verify::{run_verify, VerifyConfig};
use dti_lab::{CliError, CliResult, EXIT_FAIL, EXIT_PASS};

/// Identity checks and Monte Carlo tail certification for double tensor integrals.
#[derive(Parser, Debug)]
#[command(name = "dti-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the deterministic identity suites.
    Verify(RunArgs),
    /// Certify tail bounds against Monte Carlo tail frequencies.
    Tail(RunArgs),
    /// Tail certification restricted to derivative statistics.
    Derivative(RunArgs),
    /// Evaluate the mean-kernel corollary bounds.
    Means(RunArgs),
    /// Partial sums of the expectation-of-ratio series.
    Ratio(RunArgs),
    /// Print build and runtime information; optionally check a config file.
    Info(InfoArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the JSON and CSV reports.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured sample counts.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the threshold grid with explicit values (comma separated).
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    /// Worker threads (falls back to DTI_LAB_THREADS, then all cores).
    #[arg(long, env = "DTI_LAB_THREADS")]
    threads: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            samples: self.samples,
            thetas: self.thetas.clone(),
        }
    }
}

#[derive(Args, Debug)]
struct InfoArgs {
    /// Configuration file to parse and summarise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (falls back to DTI_LAB_THREADS, then all cores).
    #[arg(long, env = "DTI_LAB_THREADS")]
    threads: Option<usize>,
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(f)
}

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn run_verify_cmd(args: &RunArgs) -> CliResult<i32> {
    let mut config: VerifyConfig = load(&args.config)?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(n) = args.samples {
        config.instances = n;
    }
    let base = base_dir(&args.config);
    let summary = run_verify(&config, Some(&base))?;
    ensure_dir(&args.out)?;
    write_json(&args.out.join("verify.json"), &summary)?;
    write_text(&args.out.join("verify.csv"), &summary.to_csv())?;
    println!("{:<36} {:>8} {:>12} {:>12}  verdict", "identity", "shape", "residual", "tolerance");
    for r in &summary.results {
        let shape: Vec<String> = r.shape.iter().map(|m| m.to_string()).collect();
        println!(
            "{:<36} {:>8} {:12.3e} {:12.3e}  {}",
            r.identity,
            shape.join("x"),
            r.residual,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed = summary.results.iter().filter(|r| !r.pass).count();
    println!("{} identities checked, {failed} failed", summary.results.len());
    Ok(verdict(summary.all_pass))
}

fn run_tail_cmd(args: &RunArgs, derivative_only: bool) -> CliResult<i32> {
    let mut configs = load_tail_configs(&args.config)?;
    let o = args.overrides();
    for c in &mut configs {
        apply_tail_overrides(c, &o);
    }
    let base = base_dir(&args.config);
    let reports = run_tail_experiments(&configs, Some(&base), derivative_only)?;
    ensure_dir(&args.out)?;
    let mut all = true;
    for r in &reports {
        let stem = slug(r.name.as_deref().unwrap_or("experiment"));
        write_json(&args.out.join(format!("{stem}.json")), r)?;
        write_text(&args.out.join(format!("{stem}.csv")), &r.to_csv())?;
        print!("{}", tail_table(r));
        all &= r.all_pass();
    }
    let passed = reports.iter().filter(|r| r.all_pass()).count();
    println!("{passed} of {} experiments passed", reports.len());
    Ok(verdict(all))
}

fn run_means_cmd(args: &RunArgs) -> CliResult<i32> {
    let mut config: MeansConfig = load(&args.config)?;
    config.apply_overrides(&args.overrides());
    let report = run_means(&config, Some(&base_dir(&args.config)))?;
    ensure_dir(&args.out)?;
    let stem = slug(config.name.as_deref().unwrap_or("means"));
    write_json(&args.out.join(format!("{stem}.json")), &report)?;
    write_text(&args.out.join(format!("{stem}.csv")), &report.to_csv())?;
    print!("{}", means_table(&report));
    Ok(verdict(report.all_pass))
}

fn run_ratio_cmd(args: &RunArgs) -> CliResult<i32> {
    let mut config: RatioConfig = load(&args.config)?;
    config.apply_overrides(&args.overrides());
    let report = run_ratio(&config)?;
    ensure_dir(&args.out)?;
    let stem = slug(config.name.as_deref().unwrap_or("ratio"));
    write_json(&args.out.join(format!("{stem}.json")), &report)?;
    write_text(&args.out.join(format!("{stem}.csv")), &report.to_csv())?;
    print!("{}", ratio_table(&report));
    Ok(verdict(report.all_pass))
}

/// Guess the command a config belongs to from its top-level keys.
fn config_kind(value: &serde_json::Value) -> &'static str {
    let has = |k: &str| value.get(k).is_some();
    if has("experiments") || has("statistic") {
        "tail"
    } else if has("kinds") {
        "means"
    } else if has("cases") {
        "ratio"
    } else {
        "verify"
    }
}

fn run_info(args: &InfoArgs) -> CliResult<i32> {
    println!("dti-lab {}", env!("CARGO_PKG_VERSION"));
    println!("worker threads: {}", rayon::current_num_threads());
    println!("ensembles: gaussian_hermitian, wishart_pd, fixed_eigenvalues (constant | uniform)");
    println!("kernels: constant, arithmetic_mean, geometric_mean, harmonic_mean, general_mean, logarithmic_mean, divided_difference, second_divided_difference");
    println!("functions: polynomial, exp, log, sqrt, power, polygamma");
    println!("norms: schatten, ky_fan, k_trace, operator");
    println!("statistics: dti_norm, lipschitz, quasi_lipschitz, derivative, quasi_derivative");
    if let Some(path) = &args.config {
        let value = read_value(path)?;
        let kind = config_kind(&value);
        match kind {
            "tail" => {
                let configs = load_tail_configs(path)?;
                for (i, c) in configs.iter().enumerate() {
                    c.validate().map_err(CliError::from)?;
                    println!("experiment {i}: {} on {:?}, hash {}", c.statistic.label(), c.shape().modes(), c.hash());
                }
            }
            "means" => {
                load::<MeansConfig>(path)?;
            }
            "ratio" => {
                load::<RatioConfig>(path)?;
            }
            _ => {
                load::<VerifyConfig>(path)?;
            }
        }
        println!("{}: valid {kind} configuration", path.display());
    }
    Ok(EXIT_PASS)
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Verify(a) => with_threads(a.threads, || run_verify_cmd(&a)),
        Command::Tail(a) => with_threads(a.threads, || run_tail_cmd(&a, false)),
        Command::Derivative(a) => with_threads(a.threads, || run_tail_cmd(&a, true)),
        Command::Means(a) => with_threads(a.threads, || run_means_cmd(&a)),
        Command::Ratio(a) => with_threads(a.threads, || run_ratio_cmd(&a)),
        Command::Info(a) => with_threads(a.threads, || run_info(&a)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dti-lab: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

