//! `dqssa` — simulate a nine-species circadian oscillator model and its
//! quasi-steady-state reductions, and quantify each reduction's accuracy.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use dqssa_cli::config::{load_config, ConfigError, FileConfig};
use dqssa_cli::{csvio, svg};
use dqssa_core::{
    build_table1, detect_period, error_report, simulate_nine, AnalysisError, ErrorReport,
    RateConstants, SolverConfig, SystemId, Table1, Trajectory,
};

#[derive(Parser)]
#[command(
    name = "dqssa",
    version,
    about = "Circadian oscillator model: simulation and reduction-accuracy toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one system and write its trajectory (all nine components)
    Simulate(SimulateArgs),
    /// Report period and error metrics of one approximation vs the original
    Compare(CompareArgs),
    /// Run all five systems and write the accuracy table
    Table1(Table1Args),
    /// Write two-panel figure data: original vs delay-free and original vs
    /// delayed-derived reductions (components D_R, M_R, R)
    Fig1(Fig1Args),
}

#[derive(Args)]
struct CommonArgs {
    /// Integration step, hours
    #[arg(long)]
    dt: Option<f64>,
    /// Integration horizon, hours
    #[arg(long)]
    t_end: Option<f64>,
    /// Transient skipped before period detection, hours
    #[arg(long)]
    skip: Option<f64>,
    /// Emit every N-th step
    #[arg(long)]
    stride: Option<usize>,
    /// Config file with `key = value` parameter overrides
    /// (default taken from $DQSSA_CONFIG when set)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Svg,
}

#[derive(Args)]
struct SimulateArgs {
    /// System to integrate
    #[arg(long, value_parser = parse_system)]
    system: SystemId,
    /// Output file
    #[arg(long)]
    out: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Approximation to compare against the original system
    #[arg(long, value_parser = parse_system)]
    system: SystemId,
    /// Optional CSV report path
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct Table1Args {
    /// CSV output path (a text rendering is printed to stdout)
    #[arg(long, default_value = "table1.csv")]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct Fig1Args {
    /// Output prefix: writes <prefix>_left.csv and <prefix>_right.csv
    #[arg(long, default_value = "fig1")]
    out: PathBuf,
    /// `svg` additionally renders <prefix>_left.svg / <prefix>_right.svg
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[command(flatten)]
    common: CommonArgs,
}

fn parse_system(s: &str) -> Result<SystemId, String> {
    s.parse().map_err(|e: dqssa_core::ParseSystemError| e.to_string())
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Compute(#[from] AnalysisError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 3,
            CliError::Config(_) | CliError::Io { .. } => 4,
        }
    }
}

struct Resolved {
    rates: RateConstants,
    cfg: SolverConfig,
    skip: f64,
}

fn resolve(common: &CommonArgs) -> Result<Resolved, CliError> {
    let file = match &common.config {
        Some(path) => load_config(path)?,
        None => match std::env::var_os("DQSSA_CONFIG") {
            Some(path) => load_config(Path::new(&path))?,
            None => FileConfig::default(),
        },
    };
    let mut cfg = file.solver;
    if let Some(dt) = common.dt {
        cfg.dt = dt;
    }
    if let Some(t_end) = common.t_end {
        cfg.t_end = t_end;
    }
    if let Some(stride) = common.stride {
        cfg.stride = stride;
    }
    Ok(Resolved {
        rates: file.rates,
        cfg,
        skip: common.skip.unwrap_or(100.0),
    })
}

fn write_io<T>(path: &Path, result: std::io::Result<T>) -> Result<T, CliError> {
    result.map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The exact rate equations are integrated without clamping, so species
/// may dip below zero by solver-tolerance amounts; anything larger is
/// worth flagging.
fn warn_negativity(traj: &Trajectory) {
    let mut worst = (0.0f64, "", 0.0f64);
    for i in 0..traj.len() {
        for (k, v) in traj.row(i).iter().enumerate() {
            if *v < worst.0 {
                worst = (*v, traj.components()[k], traj.time(i));
            }
        }
    }
    if worst.0 < -1e-6 {
        eprintln!(
            "warning: component {} reaches {:.3e} at t = {:.3} h",
            worst.1, worst.0, worst.2
        );
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let r = resolve(&args.common)?;
    let traj = simulate_nine(args.system, &r.rates, &r.cfg)?;
    warn_negativity(&traj);
    match args.format {
        OutputFormat::Csv => write_io(&args.out, csvio::write_trajectory_csv(&args.out, &traj))?,
        OutputFormat::Svg => write_io(
            &args.out,
            std::fs::write(&args.out, svg::render_panels(&traj, None, "")),
        )?,
    }
    println!(
        "{}: {} samples over {} h -> {}",
        args.system,
        traj.len(),
        r.cfg.t_end,
        args.out.display()
    );
    Ok(())
}

fn print_report(rep: &ErrorReport) {
    println!("system:          {}", rep.system);
    println!("period original: {:.4} h", rep.p_orig);
    println!("period approx:   {:.4} h", rep.p_approx);
    println!("RelErr(period):  {:.2} %", 100.0 * rep.rel_err_period);
    println!("RelErr(L2):      {:.1} %", 100.0 * rep.rel_err_l2);
    println!(
        "window:          [{:.2}, {:.2}] h",
        rep.window.0, rep.window.1
    );
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let r = resolve(&args.common)?;
    let f = simulate_nine(SystemId::Original, &r.rates, &r.cfg)?;
    let est_f = detect_period(&f, "R", r.skip).map_err(CliError::Compute)?;
    let g = simulate_nine(args.system, &r.rates, &r.cfg)?;
    let rep = error_report(&f, &est_f, &g, r.skip)?;
    print_report(&rep);
    if let Some(out) = &args.out {
        let table = Table1 {
            p_orig: est_f.period,
            reports: vec![rep],
        };
        write_io(out, csvio::write_table1_csv(out, &table))?;
    }
    Ok(())
}

fn cmd_table1(args: &Table1Args) -> Result<(), CliError> {
    let r = resolve(&args.common)?;
    let table = build_table1(&r.rates, &r.cfg, r.skip)?;
    write_io(&args.out, csvio::write_table1_csv(&args.out, &table))?;
    print!("{}", csvio::render_table1_text(&table));
    println!("written: {}", args.out.display());
    Ok(())
}

fn cmd_fig1(args: &Fig1Args) -> Result<(), CliError> {
    let mut r = resolve(&args.common)?;
    if args.common.t_end.is_none() {
        // Presentation window: transient plus several cycles.
        r.cfg.t_end = 150.0;
    }
    let f = simulate_nine(SystemId::Original, &r.rates, &r.cfg)?;
    let qss = simulate_nine(SystemId::Qss, &r.rates, &r.cfg)?;
    let derived = simulate_nine(SystemId::DqssDerived, &r.rates, &r.cfg)?;

    let prefix = args.out.as_os_str().to_string_lossy();
    let panels = [
        (format!("{prefix}_left"), &qss, "qss"),
        (format!("{prefix}_right"), &derived, "derived"),
    ];
    for (stem, g, tag) in panels {
        let csv_path = PathBuf::from(format!("{stem}.csv"));
        write_io(&csv_path, csvio::write_panel_csv(&csv_path, &f, g, tag))?;
        println!("written: {}", csv_path.display());
        if args.format == OutputFormat::Svg {
            let svg_path = PathBuf::from(format!("{stem}.svg"));
            write_io(
                &svg_path,
                std::fs::write(&svg_path, svg::render_panels(&f, Some(g), tag)),
            )?;
            println!("written: {}", svg_path.display());
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Table1(args) => cmd_table1(args),
        Command::Fig1(args) => cmd_fig1(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
