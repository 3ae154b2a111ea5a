use clap::{Parser, Subcommand};
use fracdfc::experiments::{
    compare_controllers, compute_metrics, emit_comparison, emit_outputs, metrics_summary, run_closed_loop,
    run_sweep, split_values, tune_linear_baseline, ControllerKind, ExperimentError, Metrics,
    ScenarioConfig, ScenarioFile, BASELINE_GAIN_GRID,
};
use fracdfc::frac_calc::{validate_sliding_gains, FractionalOrder};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fracdfc", version, about = "Delayed-feedback stabilization of fractional-order chaotic plants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory and metrics.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        /// Output directory (overrides `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the adaptive controller against the linear baseline.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        plot: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check sliding-surface gains for a commensurate order.
    ValidateGains {
        #[arg(long)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eta: Vec<f64>,
    },
    /// Re-run a scenario for each value of one config key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated TOML literals, e.g. `0.1,0.2` or `[1,2],[2,3]`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Grid-search the linear baseline gains for a scenario.
    TuneBaseline {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Failure with its exit-code category.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            error: e.into(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn print_metrics(m: &Metrics) {
    print!("{}", metrics_summary(m));
}

fn out_dir(cfg: &ScenarioConfig, flag: Option<PathBuf>, default: &str) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| Path::new("out").join(default))
}

fn simulate(config: &Path, plot: bool, out: Option<PathBuf>) -> CliResult {
    let cfg = ScenarioConfig::from_path(config)?;
    let traj = run_closed_loop(&cfg)?;
    let metrics = compute_metrics(&traj, cfg.convergence_threshold);
    let dir = out_dir(&cfg, out, &format!("{}_{}", cfg.system.name, cfg.kind));
    emit_outputs(&traj, &metrics, &dir, plot)?;
    print_metrics(&metrics);
    log::info!("wrote {}", dir.display());
    if !(metrics.steady_state_error < cfg.convergence_threshold) && cfg.kind != ControllerKind::None {
        log::warn!(
            "steady-state error {} is above the threshold {}",
            metrics.steady_state_error,
            cfg.convergence_threshold
        );
    }
    Ok(())
}

fn compare(config: &Path, plot: bool, out: Option<PathBuf>) -> CliResult {
    let adaptive = ScenarioConfig::from_path(config)?.with_kind(ControllerKind::AdaptiveDelayed);
    let linear = adaptive.clone().with_kind(ControllerKind::LinearDelayed);
    let cmp = compare_controllers(&adaptive, &linear)?;
    let dir = out_dir(&adaptive, out, &format!("{}_compare", adaptive.system.name));
    emit_comparison(&cmp, &dir, plot)?;
    println!("[adaptive]");
    print_metrics(&cmp.adaptive);
    println!("\n[linear]");
    print_metrics(&cmp.linear);
    println!(
        "\nadaptive_lower_error = {}\nadaptive_faster = {}",
        cmp.adaptive_lower_error, cmp.adaptive_faster
    );
    Ok(())
}

fn validate_gains(alpha: f64, eta: &[f64]) -> CliResult {
    let order = FractionalOrder::new(alpha).map_err(|e| Failure {
        code: 2,
        error: e.into(),
    })?;
    let report = validate_sliding_gains(order, eta).map_err(|e| Failure {
        code: 2,
        error: e.into(),
    })?;
    for r in &report.roots {
        println!(
            "w = {:+.6} {:+.6}i  |arg w| = {:.6}  margin = {:+.6}",
            r.w.value.re, r.w.value.im, r.w.abs_arg, r.w.margin
        );
    }
    if report.admissible {
        println!("admissible");
        Ok(())
    } else {
        println!("inadmissible");
        Err(Failure {
            code: 3,
            error: anyhow::anyhow!("sliding gains {eta:?} are not admissible at alpha = {alpha}"),
        })
    }
}

fn sweep(config: &Path, param: &str, values: &str) -> CliResult {
    let base = ScenarioFile::from_path(config)?;
    let values = split_values(values);
    let points = run_sweep(&base, param, &values)?;
    println!("{param},steady_state_error,convergence_time,k_hat_final,control_effort,status");
    for p in points {
        match p.result {
            Ok(m) => println!(
                "{},{},{},{},{},ok",
                p.value, m.steady_state_error, m.convergence_time, m.k_hat_final, m.control_effort
            ),
            Err(e) => println!("{},,,,,{}", p.value, e.replace(',', ";")),
        }
    }
    Ok(())
}

fn tune_baseline(config: &Path) -> CliResult {
    let cfg = ScenarioConfig::from_path(config)?;
    let tuning = tune_linear_baseline(&cfg, &BASELINE_GAIN_GRID)?;
    for (gains, m) in &tuning.tried {
        match m {
            Some(m) => println!("{gains:?}  sse = {}  t_conv = {}", m.steady_state_error, m.convergence_time),
            None => println!("{gains:?}  failed"),
        }
    }
    println!("best K_baseline = {:?}", tuning.gains);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, plot, out } => simulate(&config, plot, out),
        Command::Compare { config, plot, out } => compare(&config, plot, out),
        Command::ValidateGains { alpha, eta } => validate_gains(alpha, &eta),
        Command::Sweep {
            config,
            param,
            values,
        } => sweep(&config, &param, &values),
        Command::TuneBaseline { config } => tune_baseline(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let ctx = f.error.context("fracdfc failed");
            eprintln!("error: {ctx:#}");
            ExitCode::from(f.code)
        }
    }
}
