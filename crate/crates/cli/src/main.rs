//! Command-line front end: scenario execution, parameter sweeps,
//! verification suites, and plot-data emission. The CLI is a thin shell over
//! the library; exit codes are 0 (ok), 1 (configuration error),
//! 2 (simulation failure), 3 (failed verification check).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aerobat_sim::sim::{
    controller_from_metadata, plot_series, run_to_files, tidy_csv_bytes, write_atomic, Figure,
    SimConfig, SimError, TrajectoryLog,
};
use aerobat_sim::verify;

const OUTPUT_DIR_ENV: &str = "AEROBAT_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "aerobat", version, about = "Flapping-wing vehicle and thruster-guard hover simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to $AEROBAT_OUTPUT_DIR, then the config's
    /// output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dotted-key overrides, e.g. --set observer.omega0=20.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trajectory log and metadata.
    Run(RunArgs),
    /// Run a grid of scenarios across a worker pool.
    Sweep {
        #[command(flatten)]
        base: RunArgs,
        /// Swept keys, e.g. --grid observer.omega0=5,10,20 (repeatable;
        /// cartesian product).
        #[arg(long = "grid", value_name = "KEY=V1,V2,...", required = true)]
        grids: Vec<String>,
        /// Worker pool size (0 = one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run a verification suite and report per-check status.
    Verify {
        /// aero-oracle | conservation | observer | closed-loop | all
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Emit tidy long-format CSV for one of the result figures.
    Plotdata {
        /// Trajectory log produced by `run`.
        #[arg(long)]
        log: PathBuf,
        /// gen-forces | tracking
        #[arg(long)]
        figure: String,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Config(String),
    Sim(String),
    VerifyFailed,
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::Geometry(_) => CliError::Config(e.to_string()),
            other => CliError::Sim(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep { base, grids, jobs } => cmd_sweep(base, grids, jobs),
        Command::Verify { suite } => cmd_verify(&suite),
        Command::Plotdata { log, figure, out } => cmd_plotdata(&log, &figure, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Sim(msg)) => {
            eprintln!("simulation failure: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::VerifyFailed) => ExitCode::from(3),
    }
}

fn split_overrides(raw: &[String]) -> Result<Vec<(String, String)>, CliError> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Config(format!("override `{s}` is not KEY=VALUE")))
        })
        .collect()
}

fn output_dir(flag: Option<&Path>, cfg: &SimConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output_dir))
}

fn print_summary(cfg: &SimConfig, outcome: &aerobat_sim::sim::ScenarioOutcome) {
    println!("scenario `{}`: status {}", cfg.label, outcome.status);
    let m = &outcome.metrics;
    println!("  rows                      {}", m.rows);
    println!("  rms position error        {:.4e} m (final half)", m.rms_position_error_m);
    println!("  max attitude error        {:.3} deg (final half)", m.max_attitude_error_deg);
    println!("  saturation fraction       {:.4}", m.saturation_fraction);
    println!("  max observer output error {:.4e}", m.max_observer_output_error);
    println!("  max disturbance est error {:.4e}", m.max_disturbance_estimate_error);
    println!("  final position error      {:.4e} m", m.final_position_error_m);
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let overrides = split_overrides(&args.overrides)?;
    let cfg = SimConfig::from_file(&args.config, &overrides)?;
    let dir = output_dir(args.out.as_deref(), &cfg);
    let (csv, meta, outcome) = run_to_files(&cfg, &dir)?;
    print_summary(&cfg, &outcome);
    println!("  log      {}", csv.display());
    println!("  metadata {}", meta.display());
    if let Some(err) = &outcome.error {
        eprintln!("run ended early: {err} (partial log flushed)");
        return Err(CliError::Sim(err.clone()));
    }
    Ok(())
}

fn parse_grid(axis: &str) -> Result<(String, Vec<String>), CliError> {
    let (key, values) = axis
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("grid `{axis}` is not KEY=V1,V2,...")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if values.is_empty() || values.iter().any(String::is_empty) {
        return Err(CliError::Config(format!("grid `{axis}` has empty values")));
    }
    Ok((key.trim().to_string(), values))
}

fn cmd_sweep(base: RunArgs, grids: Vec<String>, jobs: usize) -> Result<(), CliError> {
    let fixed = split_overrides(&base.overrides)?;
    let axes: Vec<(String, Vec<String>)> =
        grids.iter().map(|g| parse_grid(g)).collect::<Result<_, _>>()?;

    // cartesian product of all grid axes
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &axes {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for v in values {
                let mut q = p.clone();
                q.push((key.clone(), v.clone()));
                next.push(q);
            }
        }
        points = next;
    }

    // validate every configuration up front so a bad grid fails fast
    let mut cfgs = Vec::with_capacity(points.len());
    for (i, point) in points.iter().enumerate() {
        let mut overrides = fixed.clone();
        overrides.extend(point.clone());
        let mut cfg = SimConfig::from_file(&base.config, &overrides)?;
        cfg.label = format!("{}-{i:03}", cfg.label);
        cfgs.push((cfg, point.clone()));
    }
    let dir = output_dir(base.out.as_deref(), &cfgs[0].0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    use rayon::prelude::*;
    type SweepRow = (String, Vec<(String, String)>, aerobat_sim::sim::SummaryMetrics, String);
    let results: Vec<Result<SweepRow, SimError>> = pool.install(|| {
        cfgs.par_iter()
            .map(|(cfg, point)| {
                let (_, _, outcome) = run_to_files(cfg, &dir)?;
                Ok((cfg.label.clone(), point.clone(), outcome.metrics.clone(), outcome.status.clone()))
            })
            .collect()
    });

    let mut summary = String::new();
    let axis_names: Vec<String> = axes.iter().map(|(k, _)| k.clone()).collect();
    summary.push_str("label,");
    summary.push_str(&axis_names.join(","));
    summary.push_str(",status,rms_position_error_m,max_attitude_error_deg,saturation_fraction\n");
    let mut failures = 0usize;
    for r in &results {
        match r {
            Ok((label, point, m, status)) => {
                let values: Vec<String> = point.iter().map(|(_, v)| v.clone()).collect();
                summary.push_str(&format!(
                    "{label},{},{status},{},{},{}\n",
                    values.join(","),
                    m.rms_position_error_m,
                    m.max_attitude_error_deg,
                    m.saturation_fraction
                ));
                if status != "ok" {
                    failures += 1;
                }
            }
            Err(e) => {
                failures += 1;
                summary.push_str(&format!(",,failed: {e},,,\n"));
            }
        }
    }
    let summary_path = dir.join("sweep_summary.csv");
    write_atomic(&summary_path, summary.as_bytes()).map_err(|e| CliError::Sim(e.to_string()))?;
    println!("{} scenarios -> {}", results.len(), summary_path.display());
    if failures > 0 {
        return Err(CliError::Sim(format!("{failures} scenario(s) did not finish cleanly")));
    }
    Ok(())
}

fn cmd_verify(which: &str) -> Result<(), CliError> {
    let suites = if which == "all" {
        verify::registry()
    } else {
        match verify::find_suite(which) {
            Some(s) => vec![s],
            None => {
                return Err(CliError::Config(format!(
                    "unknown suite `{which}`; options: {} or all",
                    verify::suite_names().join(" | ")
                )))
            }
        }
    };
    let mut all_pass = true;
    for suite in suites {
        println!("suite {}: {}", suite.name(), suite.description());
        let checks = suite.run();
        let passed = checks.iter().filter(|c| c.pass).count();
        for c in &checks {
            println!("  {}", c.line());
        }
        println!("  {passed}/{} checks passed", checks.len());
        all_pass &= passed == checks.len();
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn cmd_plotdata(log_path: &Path, figure: &str, out: Option<&Path>) -> Result<(), CliError> {
    let figure = Figure::parse(figure).ok_or_else(|| {
        CliError::Config(format!(
            "unknown figure `{figure}`; options: {}",
            Figure::options().join(" | ")
        ))
    })?;
    let log = TrajectoryLog::read_csv(log_path)?;
    // the sidecar carries the setpoint for the tracking figure
    let meta_path = log_path.with_extension("").with_extension("meta.json");
    let controller = controller_from_metadata(&meta_path);
    let rows = plot_series(&log, figure, controller.as_ref())?;
    let bytes = tidy_csv_bytes(&rows);
    match out {
        Some(path) => {
            write_atomic(path, &bytes).map_err(|e| CliError::Sim(e.to_string()))?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| CliError::Sim(e.to_string()))?;
        }
    }
    Ok(())
}
