//! The `flexkal` binary: filtering, simulation, calibration, noise
//! generation, benchmarking, and steady-state inspection as batch commands.
//!
//! Data always goes to files named by `--output`; progress and summaries go
//! to stderr, never stdout. Exit code 0 is success, 1 a processing failure,
//! 2 a usage or input problem. Stochastic commands require an explicit
//! `--seed`, so every value output is reproducible from the command line
//! alone.

use std::fmt::Display;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flexkal_core::{
    default_config_18, estimate_r, galton_standardized, gaussian_stream, histogram,
    normality_stats, simulate_sensor, smoothness_metrics, steady_state, ChannelCalibration,
    GaltonConfig, Histogram, MotorCommand, MultiChannelFilter, SystemConfig, Trace,
    TrajectorySpec, UniformSource, DEFAULT_R_18, R_FLOOR,
};

use crate::config_io::{load_config, save_config};
use crate::report::{render_report, trace_checksum};
use crate::runner::{run_offline, run_realtime};
use crate::trace_io::{format_value, read_trace, render_header, write_trace};

/// A command failure carrying its exit code: 2 for usage and input
/// problems, 1 for processing failures.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn user(msg: impl Display) -> Self {
        Failure {
            code: 2,
            message: msg.to_string(),
        }
    }

    fn internal(msg: impl Display) -> Self {
        Failure {
            code: 1,
            message: msg.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "flexkal",
    version,
    about = "Kalman smoothing for multi-channel bending-sensor traces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter a recorded trace into smoothed values, motor commands, and a
    /// latency report.
    Filter(FilterArgs),
    /// Generate a synthetic noisy trace alongside its clean reference.
    Simulate(SimulateArgs),
    /// Estimate per-channel measurement noise from a stationary trace.
    Calibrate(CalibrateArgs),
    /// Draw Gaussian samples and summarize their distribution.
    Noise(NoiseArgs),
    /// Measure filter throughput and step latency on a synthetic load.
    Bench(BenchArgs),
    /// Print each channel's converged gain and covariance.
    SteadyState(SteadyStateArgs),
}

/// Parses the command line and runs the selected command.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Filter(args) => cmd_filter(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Noise(args) => cmd_noise(args),
        Command::Bench(args) => cmd_bench(args),
        Command::SteadyState(args) => cmd_steady_state(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn resolve_config(path: Option<&Path>) -> Result<SystemConfig, Failure> {
    match path {
        Some(p) => load_config(p).map_err(Failure::user),
        None => Ok(default_config_18()),
    }
}

#[derive(Args)]
struct FilterArgs {
    /// Trace file to filter.
    #[arg(long)]
    input: PathBuf,
    /// Destination for the filtered trace; the command sequence and report
    /// land next to it as <output>.commands.csv and <output>.report.txt.
    #[arg(long)]
    output: PathBuf,
    /// Calibration file; defaults to the built-in 18-channel calibration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Offline)]
    mode: Mode,
    /// Replay rate in realtime mode; defaults to the config sample rate.
    #[arg(long)]
    rate_hz: Option<f64>,
    /// Per-step latency budget; defaults to the config budget.
    #[arg(long)]
    budget_ms: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Offline,
    Realtime,
}

fn cmd_filter(args: FilterArgs) -> CmdResult {
    if let Some(b) = args.budget_ms {
        if !(b.is_finite() && b >= 0.0) {
            return Err(Failure::user("--budget-ms must be finite and non-negative"));
        }
    }
    if let Some(r) = args.rate_hz {
        if !(r.is_finite() && r > 0.0) {
            return Err(Failure::user("--rate-hz must be positive"));
        }
    }
    let config = resolve_config(args.config.as_deref())?;
    let trace = read_trace(&args.input).map_err(Failure::user)?;
    if trace.channels() != config.n_channels() {
        return Err(Failure::user(format!(
            "shape mismatch: input has {} channels, configuration expects {}",
            trace.channels(),
            config.n_channels()
        )));
    }
    let mut filter = MultiChannelFilter::from_config(&config).map_err(Failure::internal)?;
    let budget_ms = args.budget_ms.unwrap_or_else(|| config.step_budget_ms());

    let out = match args.mode {
        Mode::Offline => run_offline(&trace, &mut filter, budget_ms),
        Mode::Realtime => {
            let rate_hz = args.rate_hz.unwrap_or_else(|| config.sample_rate_hz());
            run_realtime(&trace, &mut filter, rate_hz, budget_ms)
        }
    }
    .map_err(Failure::internal)?;

    write_trace(&out.filtered, &args.output).map_err(Failure::internal)?;
    write_commands(
        &out.filtered,
        &out.commands,
        &args.output.with_extension("commands.csv"),
    )
    .map_err(Failure::internal)?;
    let report_text = render_report(&out.report);
    std::fs::write(args.output.with_extension("report.txt"), &report_text)
        .map_err(Failure::internal)?;

    if trace.rows() >= 2 {
        let metrics = smoothness_metrics(&trace, &out.filtered).map_err(Failure::internal)?;
        for (i, m) in metrics.iter().enumerate() {
            let trace_label = &trace.labels()[i];
            let label = if trace_label.is_empty() {
                &config.channels()[i].label
            } else {
                trace_label
            };
            let shown = if label.is_empty() {
                String::new()
            } else {
                format!(" ({label})")
            };
            eprintln!(
                "channel {i}{shown}: first-difference variance {:.4} -> {:.4}, smoothness ratio {:.4}",
                m.raw_var, m.filtered_var, m.ratio
            );
        }
    }
    eprint!("{report_text}");
    Ok(())
}

fn write_commands(
    filtered: &Trace,
    commands: &[MotorCommand],
    path: &Path,
) -> crate::error::Result<()> {
    let mut text = render_header(filtered.labels())?;
    for (i, command) in commands.iter().enumerate() {
        let _ = write!(text, "{}", format_value(filtered.t(i)));
        for v in &command.values {
            let _ = write!(text, ",{v}");
        }
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Args)]
struct SimulateArgs {
    /// Destination for the noisy trace; the clean reference lands next to
    /// it as <output>.clean.csv.
    #[arg(long)]
    output: PathBuf,
    /// RNG seed; the same seed reproduces the same files byte for byte.
    #[arg(long)]
    seed: u64,
    /// Number of samples to generate.
    #[arg(long)]
    rows: usize,
    /// Channel count. Defaults to the variance list length when one is
    /// given, else 1. Exactly 18 channels with no variance source uses the
    /// built-in calibration variances.
    #[arg(long)]
    channels: Option<usize>,
    /// Take per-channel noise variances from a calibration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated per-channel noise variances, overriding the config.
    #[arg(long, value_delimiter = ',')]
    sigma2: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Trajectory::Constant)]
    trajectory: Trajectory,
    /// Level held by the constant trajectory, and the random walk's start.
    #[arg(long, default_value_t = 512.0)]
    level: f64,
    /// Sinusoid midline.
    #[arg(long, default_value_t = 512.0)]
    offset: f64,
    #[arg(long, default_value_t = 200.0)]
    amplitude: f64,
    /// Sinusoid period in rows.
    #[arg(long, default_value_t = 3000)]
    period_rows: u32,
    /// Random-walk step standard deviation.
    #[arg(long, default_value_t = 5.0)]
    step_std: f64,
    /// Random-walk clamp range.
    #[arg(long, default_value_t = 0.0)]
    min: f64,
    #[arg(long, default_value_t = 1023.0)]
    max: f64,
    /// Sample rate defining the timestamp grid.
    #[arg(long, default_value_t = 1000.0)]
    rate_hz: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Trajectory {
    Constant,
    Sinusoid,
    RandomWalk,
}

fn resolve_sigma2(args: &SimulateArgs) -> Result<Vec<f64>, Failure> {
    let sigma2: Vec<f64> = if let Some(list) = &args.sigma2 {
        list.clone()
    } else if let Some(path) = &args.config {
        load_config(path)
            .map_err(Failure::user)?
            .channels()
            .iter()
            .map(|c| c.r_var)
            .collect()
    } else {
        let n = args.channels.unwrap_or(1);
        if n == 0 {
            return Err(Failure::user("--channels must be at least 1"));
        }
        if n == DEFAULT_R_18.len() {
            DEFAULT_R_18.to_vec()
        } else {
            vec![1.0; n]
        }
    };
    if let Some(n) = args.channels {
        if n != sigma2.len() {
            return Err(Failure::user(format!(
                "--channels {n} disagrees with the {} supplied variances",
                sigma2.len()
            )));
        }
    }
    Ok(sigma2)
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    if !(args.rate_hz.is_finite() && args.rate_hz > 0.0) {
        return Err(Failure::user("--rate-hz must be positive"));
    }
    let sigma2 = resolve_sigma2(&args)?;
    let spec = match args.trajectory {
        Trajectory::Constant => TrajectorySpec::Constant { level: args.level },
        Trajectory::Sinusoid => TrajectorySpec::Sinusoid {
            offset: args.offset,
            amplitude: args.amplitude,
            period_rows: args.period_rows,
        },
        Trajectory::RandomWalk => TrajectorySpec::RandomWalk {
            start: args.level,
            step_std: args.step_std,
            min: args.min,
            max: args.max,
        },
    };
    let period_ms = 1e3 / args.rate_hz;
    let (noisy, clean) = simulate_sensor(&spec, &sigma2, args.seed, args.rows, period_ms)
        .map_err(Failure::user)?;
    write_trace(&noisy, &args.output).map_err(Failure::internal)?;
    let clean_path = args.output.with_extension("clean.csv");
    write_trace(&clean, &clean_path).map_err(Failure::internal)?;
    eprintln!(
        "wrote {} rows x {} channels to {} (clean reference: {})",
        noisy.rows(),
        noisy.channels(),
        args.output.display(),
        clean_path.display()
    );
    Ok(())
}

#[derive(Args)]
struct CalibrateArgs {
    /// Stationary trace to estimate noise from.
    #[arg(long)]
    input: PathBuf,
    /// Destination calibration file.
    #[arg(long)]
    output: PathBuf,
    /// Difference away slow drift before estimating.
    #[arg(long)]
    detrend: bool,
}

fn infer_rate_hz(trace: &Trace) -> f64 {
    if trace.rows() < 2 {
        return flexkal_core::calib::DEFAULT_SAMPLE_RATE_HZ;
    }
    let span_ms = trace.t(trace.rows() - 1) - trace.t(0);
    1e3 * (trace.rows() - 1) as f64 / span_ms
}

fn cmd_calibrate(args: CalibrateArgs) -> CmdResult {
    let trace = read_trace(&args.input).map_err(Failure::user)?;
    let estimates = estimate_r(&trace, args.detrend).map_err(Failure::user)?;
    let mut channels = Vec::with_capacity(estimates.len());
    for (i, &r_var) in estimates.iter().enumerate() {
        if r_var <= R_FLOOR {
            eprintln!(
                "warning: channel {i} variance estimate hit the floor ({R_FLOOR:e}); \
                 the channel looks noise-free"
            );
        }
        eprintln!("channel {i}: r_var {}", format_value(r_var));
        let calib = ChannelCalibration::new(i, trace.labels()[i].clone(), r_var, 1.0)
            .map_err(Failure::internal)?;
        channels.push(calib);
    }
    let config = SystemConfig::new(
        channels,
        infer_rate_hz(&trace),
        flexkal_core::filter::DEFAULT_P0,
        flexkal_core::calib::DEFAULT_STEP_BUDGET_MS,
    )
    .map_err(Failure::internal)?;
    save_config(&config, &args.output).map_err(Failure::internal)?;
    eprintln!(
        "wrote calibration for {} channels to {}",
        config.n_channels(),
        args.output.display()
    );
    Ok(())
}

#[derive(Args)]
struct NoiseArgs {
    /// Generator to use.
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    seed: u64,
    /// Destination for samples, one per line; the histogram lands next to
    /// it as <output>.hist.csv.
    #[arg(long)]
    output: PathBuf,
    /// Number of samples to draw.
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    /// Pin rows for the galton method.
    #[arg(long, default_value_t = 12)]
    rows: u32,
    /// Target mean.
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    /// Target standard deviation.
    #[arg(long, default_value_t = 1.0)]
    std: f64,
    /// Histogram bin count over mean +- 4 std.
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    BoxMuller,
    Galton,
}

fn write_histogram(
    hist: &Histogram,
    min: f64,
    max: f64,
    path: &Path,
) -> crate::error::Result<()> {
    let mut text = String::from("lo,hi,count\n");
    let _ = writeln!(text, "-inf,{},{}", format_value(min), hist.below);
    let width = (max - min) / hist.counts.len() as f64;
    for (i, count) in hist.counts.iter().enumerate() {
        let lo = min + width * i as f64;
        let hi = if i + 1 == hist.counts.len() {
            max
        } else {
            min + width * (i + 1) as f64
        };
        let _ = writeln!(text, "{},{},{count}", format_value(lo), format_value(hi));
    }
    let _ = writeln!(text, "{},inf,{}", format_value(max), hist.above);
    std::fs::write(path, text)?;
    Ok(())
}

fn cmd_noise(args: NoiseArgs) -> CmdResult {
    if !args.mean.is_finite() || !(args.std.is_finite() && args.std >= 0.0) {
        return Err(Failure::user(
            "--mean must be finite and --std non-negative",
        ));
    }
    let mut source = UniformSource::new(args.seed);
    let samples = match args.method {
        Method::BoxMuller => gaussian_stream(&mut source, args.count, args.mean, args.std)
            .map_err(Failure::user)?,
        Method::Galton => {
            let cfg = GaltonConfig::new(args.rows).map_err(Failure::user)?;
            (0..args.count)
                .map(|_| args.mean + args.std * galton_standardized(&mut source, &cfg))
                .collect()
        }
    };

    let mut text = String::with_capacity(samples.len() * 20);
    for s in &samples {
        let _ = writeln!(text, "{s}");
    }
    std::fs::write(&args.output, text).map_err(Failure::internal)?;

    let half_range = if args.std > 0.0 { 4.0 * args.std } else { 1.0 };
    let (lo, hi) = (args.mean - half_range, args.mean + half_range);
    let hist = histogram(&samples, args.bins, lo, hi).map_err(Failure::user)?;
    write_histogram(&hist, lo, hi, &args.output.with_extension("hist.csv"))
        .map_err(Failure::internal)?;

    match normality_stats(&samples) {
        Ok(stats) => {
            eprintln!("n: {}", stats.n);
            eprintln!("mean: {:.6}", stats.mean);
            eprintln!("variance: {:.6}", stats.variance);
            eprintln!("skewness: {:.6}", stats.skewness);
            eprintln!("excess_kurtosis: {:.6}", stats.excess_kurtosis);
        }
        Err(_) => eprintln!(
            "n: {} (too few samples for moment statistics)",
            samples.len()
        ),
    }
    Ok(())
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    seed: u64,
    /// Filter bank width.
    #[arg(long, default_value_t = 18)]
    channels: usize,
    /// Synthetic trace length.
    #[arg(long, default_value_t = 94_096)]
    rows: usize,
    /// Per-step latency budget.
    #[arg(long, default_value_t = 1.0)]
    budget_ms: f64,
    /// Also write the report to a file.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    if args.channels == 0 {
        return Err(Failure::user("--channels must be at least 1"));
    }
    if !(args.budget_ms.is_finite() && args.budget_ms >= 0.0) {
        return Err(Failure::user("--budget-ms must be finite and non-negative"));
    }
    let sigma2: Vec<f64> = (0..args.channels)
        .map(|i| DEFAULT_R_18[i % DEFAULT_R_18.len()])
        .collect();
    let spec = TrajectorySpec::Constant { level: 512.0 };
    let (trace, _) = simulate_sensor(&spec, &sigma2, args.seed, args.rows, 1.0)
        .map_err(Failure::internal)?;
    let channels = sigma2
        .iter()
        .enumerate()
        .map(|(i, &r_var)| ChannelCalibration::new(i, String::new(), r_var, 1.0))
        .collect::<flexkal_core::Result<Vec<_>>>()
        .map_err(Failure::internal)?;
    let config = SystemConfig::with_channels(channels).map_err(Failure::internal)?;
    let mut filter = MultiChannelFilter::from_config(&config).map_err(Failure::internal)?;

    let out = run_offline(&trace, &mut filter, args.budget_ms).map_err(Failure::internal)?;
    let mut text = render_report(&out.report);
    let _ = writeln!(
        text,
        "filtered_checksum: 0x{:016x}",
        trace_checksum(&out.filtered)
    );
    if let Some(path) = &args.output {
        std::fs::write(path, &text).map_err(Failure::internal)?;
    }
    eprint!("{text}");
    Ok(())
}

#[derive(Args)]
struct SteadyStateArgs {
    /// Calibration file; defaults to the built-in 18-channel calibration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Destination CSV; printed to stderr when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Convergence threshold on the covariance elements.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap before reporting divergence. Convergence needs on the
    /// order of 1/k0 passes, so heavily distrusted channels take tens of
    /// thousands.
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

fn cmd_steady_state(args: SteadyStateArgs) -> CmdResult {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::user("--tol must be positive"));
    }
    if args.max_iter == 0 {
        return Err(Failure::user("--max-iter must be at least 1"));
    }
    let config = resolve_config(args.config.as_deref())?;
    let filter = MultiChannelFilter::from_config(&config).map_err(Failure::internal)?;

    let mut text = String::from("channel,label,k0,k1,p00,p01,p11,iterations\n");
    for (i, ch) in filter.channels().iter().enumerate() {
        let ss =
            steady_state(ch.model(), ch.noise(), args.tol, args.max_iter).map_err(Failure::internal)?;
        let _ = writeln!(
            text,
            "{i},{},{},{},{},{},{},{}",
            config.channels()[i].label,
            format_value(ss.k_gain[0]),
            format_value(ss.k_gain[1]),
            format_value(ss.p_prior[0][0]),
            format_value(ss.p_prior[0][1]),
            format_value(ss.p_prior[1][1]),
            ss.iterations
        );
    }
    match &args.output {
        Some(path) => std::fs::write(path, &text).map_err(Failure::internal)?,
        None => eprint!("{text}"),
    }
    Ok(())
}
