//! `hemowb`: runs the single-vessel benchmarks, convergence studies and
//! network experiments from TOML configurations and writes CSV artifacts.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration or input, 4 solver
//! failure, 5 loss of positivity.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hemowb::harness::{
    convergence_study, run_case, write_snapshot, write_time_series, ErrorReport, NetworkConfig, RunConfig, TimeSample,
};
use hemowb::network::{InitialState, NetworkSimulation};
use hemowb::Error;
use log::info;

#[derive(Parser)]
#[command(name = "hemowb", version, about = "Well-balanced 1D blood flow benchmarks and networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one single-vessel test and write its snapshot and midpoint series.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: SchemeArgs,
    },
    /// Mesh refinement study against a fine order-3 well-balanced reference.
    Convergence {
        config: PathBuf,
        /// Comma-separated cell counts, e.g. 200,400,800,1600.
        #[arg(long, value_delimiter = ',')]
        meshes: Vec<usize>,
        /// Cells of the reference run (default: config, else twice the finest mesh).
        #[arg(long)]
        reference: Option<usize>,
        #[command(flatten)]
        opts: SchemeArgs,
    },
    /// Run a network experiment.
    Network {
        config: PathBuf,
        #[command(flatten)]
        opts: SchemeArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    order: Option<u8>,
    #[arg(long)]
    wb: Option<Switch>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Output directory for CSV files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl SchemeArgs {
    fn apply(&self, order: &mut u8, wb: &mut bool, cfl: &mut f64) {
        if let Some(o) = self.order {
            *order = o;
        }
        if let Some(w) = self.wb {
            *wb = matches!(w, Switch::On);
        }
        if let Some(c) = self.cfl {
            *cfl = c;
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PositivityLoss { .. } | Error::NonPositiveArea { .. } => 5,
        Error::NoSteadyProfile(_) | Error::CriticalSingularity { .. } | Error::NewtonFailed { .. } | Error::Junction { .. } => 4,
        Error::Config(_)
        | Error::Toml(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::InvalidParameter(_)
        | Error::InvalidTubeLaw { .. }
        | Error::Mesh(_)
        | Error::Network(_) => 3,
    }
}

fn load_run(path: &Path, opts: &SchemeArgs) -> hemowb::Result<RunConfig> {
    let mut cfg = RunConfig::load(path)?;
    opts.apply(&mut cfg.order, &mut cfg.well_balanced, &mut cfg.cfl);
    cfg.scheme().validate()?;
    Ok(cfg)
}

fn print_errors(label: &str, e: &ErrorReport) {
    println!("{label}: L1(A/A0) = {:.6e}, L1(u) = {:.6e}", e.area_ratio, e.velocity);
}

fn run(path: &Path, opts: &SchemeArgs) -> hemowb::Result<()> {
    let cfg = load_run(path, opts)?;
    let case = cfg.case()?;
    let scheme = cfg.scheme();
    info!("{}: {} cells, order {}, well-balanced {}", case.name, case.cells, scheme.order, scheme.well_balanced);
    let outcome = run_case(&case, scheme)?;
    let steps = outcome.prepared.sim.steps;
    println!("{}: t = {} s after {steps} steps", case.name, case.t_end);
    if let Some(e) = &outcome.errors {
        print_errors("nondimensional", e);
        print_errors("SI", &e.si(&outcome.prepared.scaling));
    }
    let snapshot = opts.out.join(cfg.snapshot.clone().unwrap_or_else(|| format!("{}_snapshot.csv", case.name).into()));
    let series = opts.out.join(cfg.series.clone().unwrap_or_else(|| format!("{}_series.csv", case.name).into()));
    write_snapshot(&snapshot, &outcome.prepared.snapshot()?)?;
    write_time_series(&series, &outcome.series)?;
    println!("wrote {} and {}", snapshot.display(), series.display());
    Ok(())
}

fn convergence(path: &Path, meshes: &[usize], reference: Option<usize>, opts: &SchemeArgs) -> hemowb::Result<()> {
    let cfg = load_run(path, opts)?;
    let case = cfg.case()?;
    let meshes = if meshes.is_empty() { cfg.meshes.clone() } else { meshes.to_vec() };
    let finest = meshes.iter().copied().max().ok_or_else(|| Error::Config("no meshes given".into()))?;
    let reference = reference.or(cfg.reference_cells).unwrap_or(2 * finest);
    info!("{}: meshes {meshes:?}, reference {reference} cells", case.name);
    let study = convergence_study(&case, cfg.scheme(), &meshes, reference)?;
    let fmt = |o: Option<f64>| o.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
    let mut csv = String::from("cells,L1_A_over_A0,order_A_over_A0,L1_u,order_u\n");
    println!("{:>8} {:>12} {:>6} {:>12} {:>6}", "cells", "L1(A/A0)", "order", "L1(u)", "order");
    for r in &study.rows {
        println!("{:>8} {:>12.4e} {:>6} {:>12.4e} {:>6}", r.cells, r.errors.area_ratio, fmt(r.order_area), r.errors.velocity, fmt(r.order_velocity));
        let opt = |o: Option<f64>| o.map(|o| format!("{o:?}")).unwrap_or_default();
        let _ = writeln!(csv, "{},{:?},{},{:?},{}", r.cells, r.errors.area_ratio, opt(r.order_area), r.errors.velocity, opt(r.order_velocity));
    }
    let file = opts.out.join(format!("{}_convergence.csv", case.name));
    std::fs::create_dir_all(&opts.out)?;
    std::fs::write(&file, csv)?;
    println!("wrote {}", file.display());
    Ok(())
}

fn network(path: &Path, opts: &SchemeArgs) -> hemowb::Result<()> {
    let mut cfg = NetworkConfig::load(path)?;
    opts.apply(&mut cfg.order, &mut cfg.well_balanced, &mut cfg.cfl);
    let base = path.parent().unwrap_or(Path::new("."));
    let run = cfg.resolve(base)?;
    let hydrostatic = matches!(run.initial, InitialState::Hydrostatic { .. });
    let mut sim = NetworkSimulation::new(run.spec.clone(), run.scheme, run.initial)?;
    let names: Vec<String> = run.spec.vessels.iter().map(|v| v.name.clone()).collect();
    info!("{} vessels, {} cells", names.len(), run.spec.vessels.iter().map(|v| v.cells).sum::<usize>());
    let mut series: Vec<Vec<TimeSample>> = vec![Vec::new(); names.len()];
    let record = |sim: &NetworkSimulation, series: &mut Vec<Vec<TimeSample>>| -> hemowb::Result<()> {
        for s in sim.midpoint_samples()? {
            series[s.vessel].push(s.sample);
        }
        Ok(())
    };
    record(&sim, &mut series)?;
    let mut next = run.sample_every;
    sim.run_until(run.t_end, |sim| {
        if sim.seconds() >= next * (1.0 - 1e-12) {
            next += run.sample_every;
            record(sim, &mut series)?;
        }
        Ok(())
    })?;
    println!("t = {} s after {} steps", sim.seconds(), sim.steps);
    println!("max |q| = {:.6e} cm^3/s, max junction mass residual = {:.3e}", sim.max_abs_flow(), sim.max_mass_residual);
    if hydrostatic {
        println!("max |p - p_hyd| = {:.6e} dyn/cm^2", sim.hydrostatic_deviation()?);
    }
    for (k, name) in names.iter().enumerate() {
        write_time_series(&opts.out.join(format!("series_{name}.csv")), &series[k])?;
        write_snapshot(&opts.out.join(format!("snapshot_{name}.csv")), &sim.snapshot(k)?)?;
    }
    println!("wrote {} series and snapshots to {}", names.len(), opts.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, opts } => run(config, opts),
        Command::Convergence { config, meshes, reference, opts } => convergence(config, meshes, *reference, opts),
        Command::Network { config, opts } => network(config, opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
