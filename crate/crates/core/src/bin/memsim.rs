//! Command-line harness: run | sweep | verify | pullin.
//!
//! Exit codes: 0 clean, 2 configuration error, 3 certificate or suite
//! failure, 4 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use memsim::config::SimulationConfig;
use memsim::error::Error;
use memsim::output;
use memsim::potential::{extract_traces, solve_potential};
use memsim::small_gap::{pullin_threshold, run_small_gap, shooting_lambda_star};
use memsim::stepper::run_simulation;
use memsim::sweep::{run_sweep, Axis, SweepPlan};
use memsim::verify::run_all_suites;

#[derive(Parser)]
#[command(name = "memsim", version, about = "MEMS membrane simulator with certified inequality monitoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config flags shared by run and sweep; flags override file values.
#[derive(Args, Clone)]
struct ConfigFlags {
    /// Flat key = value config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "R")]
    lambda: Option<f64>,
    #[arg(long, value_name = "R")]
    epsilon: Option<f64>,
    #[arg(long, value_name = "N")]
    nx: Option<usize>,
    #[arg(long, value_name = "N")]
    nz: Option<usize>,
    /// Initial time step.
    #[arg(long, value_name = "R")]
    dt: Option<f64>,
    #[arg(long, value_name = "R")]
    tmax: Option<f64>,
    /// Certify every K-th accepted step.
    #[arg(long, value_name = "K")]
    cert_every: Option<usize>,
    /// Initial profile: flat | parabolic(c) | custom(path).
    #[arg(long, value_name = "SPEC")]
    profile: Option<String>,
}

impl ConfigFlags {
    fn build(&self) -> memsim::Result<SimulationConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimulationConfig::from_file(path)?,
            None => SimulationConfig::default(),
        };
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.nx {
            cfg.nx = v;
        }
        if let Some(v) = self.nz {
            cfg.nz = v;
        }
        if let Some(v) = self.dt {
            cfg.dt_init = v;
        }
        if let Some(v) = self.tmax {
            cfg.t_max = v;
        }
        if let Some(v) = self.cert_every {
            cfg.cert_every = v;
        }
        if let Some(p) = &self.profile {
            cfg.apply("initial_profile", p)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write trajectory.csv, certificates.csv, summary.json.
    Run {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Force the reduced small-gap model regardless of epsilon.
        #[arg(long)]
        small_gap: bool,
        /// Output directory.
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
        /// Also dump the initial potential field and traces (debug aid).
        #[arg(long)]
        dump_field: bool,
    },
    /// Sweep a (lambda, epsilon) grid and write atlas.csv.
    Sweep {
        #[command(flatten)]
        flags: ConfigFlags,
        /// Lambda axis: start:stop:count[:lin|log].
        #[arg(long, value_name = "SPEC")]
        lambda_axis: Option<String>,
        /// Epsilon axis: start:stop:count[:lin|log].
        #[arg(long, value_name = "SPEC")]
        epsilon_axis: Option<String>,
        #[arg(long, value_name = "N", default_value_t = 4)]
        workers: usize,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
    /// Run the built-in verification suites.
    Verify {
        /// Smaller grids for a quick interactive check.
        #[arg(long)]
        fast: bool,
    },
    /// Locate the small-gap pull-in threshold; writes branch.csv and threshold.json.
    Pullin {
        #[arg(long, value_name = "N", default_value_t = 513)]
        nx: usize,
        #[arg(long, value_name = "R", default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_name = "DIR", default_value = "out")]
        out: PathBuf,
    },
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Config { .. } => ExitCode::from(2),
        _ => ExitCode::from(4),
    }
}

fn cmd_run(flags: &ConfigFlags, small_gap: bool, out: &PathBuf, dump_field: bool) -> ExitCode {
    let cfg = match flags.build() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("memsim: {e}");
            return exit_for(&e);
        }
    };
    let reduced = small_gap || cfg.epsilon == 0.0;
    if dump_field && !reduced {
        if let Err(e) = dump_initial_field(&cfg, out) {
            eprintln!("memsim: field dump failed: {e}");
            return exit_for(&e);
        }
    }
    let result = if reduced { run_small_gap(&cfg) } else { run_simulation(&cfg) };
    let traj = match result {
        Ok(t) => t,
        Err(e) => {
            eprintln!("memsim: {e}");
            return exit_for(&e);
        }
    };
    if let Err(e) = write_run_artifacts(&traj, &cfg, out) {
        eprintln!("memsim: {e}");
        return exit_for(&e);
    }
    let failed = traj.certificates.iter().filter(|c| !c.pass).count();
    eprintln!(
        "status {} at t = {:.6e}; {} certificates, {} failed",
        traj.status.kind.as_str(),
        traj.t_end,
        traj.certificates.len(),
        failed,
    );
    if failed > 0 {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn write_run_artifacts(
    traj: &memsim::Trajectory,
    cfg: &SimulationConfig,
    out: &PathBuf,
) -> memsim::Result<()> {
    output::write_text(out, "trajectory.csv", &output::trajectory_csv(traj))?;
    output::write_text(out, "certificates.csv", &output::certificates_csv(&traj.certificates))?;
    output::write_text(out, "summary.json", &output::summary_json(traj, cfg))?;
    Ok(())
}

fn dump_initial_field(cfg: &SimulationConfig, out: &PathBuf) -> memsim::Result<()> {
    let grid = cfg.build_grid()?;
    let state = cfg.initial_state(&grid)?;
    let field = solve_potential(&state, cfg.epsilon, &grid, cfg.tol_linear, cfg.delta_touch)?;
    let traces = extract_traces(&field, &state, &grid);
    output::write_text(out, "field.csv", &output::field_csv(&field, &grid))?;
    output::write_text(out, "traces.csv", &output::traces_csv(&traces, &grid))?;
    Ok(())
}

fn cmd_sweep(
    flags: &ConfigFlags,
    lambda_axis: Option<&str>,
    epsilon_axis: Option<&str>,
    workers: usize,
    out: &PathBuf,
) -> ExitCode {
    let base = match flags.build() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("memsim: {e}");
            return exit_for(&e);
        }
    };
    let parse_axis = |key, spec: Option<&str>, single| match spec {
        Some(s) => Axis::parse(key, s),
        None => Ok(Axis::single(single)),
    };
    let plan = match (
        parse_axis("lambda_axis", lambda_axis, base.lambda),
        parse_axis("epsilon_axis", epsilon_axis, base.epsilon),
    ) {
        (Ok(la), Ok(ea)) => SweepPlan { lambda_axis: la, epsilon_axis: ea, base },
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("memsim: {e}");
            return exit_for(&e);
        }
    };
    match run_sweep(&plan, workers) {
        Ok(rows) => {
            if let Err(e) = output::write_text(out, "atlas.csv", &memsim::sweep::atlas_csv(&rows)) {
                eprintln!("memsim: {e}");
                return exit_for(&e);
            }
            let errors = rows.iter().filter(|r| r.status == "error").count();
            eprintln!("{} sweep points, {} errored", rows.len(), errors);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("memsim: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_verify(fast: bool) -> ExitCode {
    let results = run_all_suites(fast);
    let mut all_pass = true;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
        all_pass &= r.pass;
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn cmd_pullin(nx: usize, tol: f64, out: &PathBuf) -> ExitCode {
    match pullin_threshold(nx, tol) {
        Ok((lambda_star, branch)) => {
            let oracle = shooting_lambda_star();
            let write = output::write_text(out, "branch.csv", &output::branch_csv(&branch)).and_then(
                |_| {
                    output::write_text(
                        out,
                        "threshold.json",
                        &output::threshold_json(lambda_star, nx, tol, oracle),
                    )
                },
            );
            if let Err(e) = write {
                eprintln!("memsim: {e}");
                return exit_for(&e);
            }
            println!("lambda_star = {lambda_star:.8} (shooting oracle {oracle:.8})");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("memsim: {e}");
            exit_for(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { flags, small_gap, out, dump_field } => {
            cmd_run(flags, *small_gap, out, *dump_field)
        }
        Command::Sweep { flags, lambda_axis, epsilon_axis, workers, out } => cmd_sweep(
            flags,
            lambda_axis.as_deref(),
            epsilon_axis.as_deref(),
            *workers,
            out,
        ),
        Command::Verify { fast } => cmd_verify(*fast),
        Command::Pullin { nx, tol, out } => cmd_pullin(*nx, *tol, out),
    }
}
