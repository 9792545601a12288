//! `gyrokin`: property suites, limit-model runs and the drift convergence check.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use gyrokin::config::RunConfig;
use gyrokin::diagnostics::write_csv;
use gyrokin::drift::{drift_check, DriftReport};
use gyrokin::grid::project_initial;
use gyrokin::gyroaverage::GyroQuadratureConfig;
use gyrokin::physics::PlasmaParams;
use gyrokin::snapshot;
use gyrokin::solver::{Solver, SolverState};
use gyrokin::verify::{self, Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "gyrokin", version, about = "Gyroaveraged collision operators and reduced kinetic runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run property suites and print a JSON report; exits 0 iff every check passes.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Scale chi by 1/pi^2 in the normalization check (fault injection).
        #[arg(long)]
        corrupt_chi: bool,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the limit model; writes diagnostics.csv and snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides output.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare full and averaged characteristics over a list of epsilon values.
    DriftCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "1e-1,5e-2,2.5e-2")]
        eps: String,
        /// Overrides output.dir from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for failed checks and runtime errors.
const FAILURE: u8 = 1;
/// Exit code for invalid input.
const INVALID: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(INVALID);
    }
    let result = match cli.command {
        Command::Verify {
            suite,
            seed,
            corrupt_chi,
            report,
        } => cmd_verify(suite, seed, corrupt_chi, report.as_deref()),
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::DriftCheck { config, eps, out } => cmd_drift(&config, &eps, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn invalid_input(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: INVALID, err: err.into() }
}

fn runtime(err: impl Into<anyhow::Error>) -> Failure {
    Failure { code: FAILURE, err: err.into() }
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("GYROKIN_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().with_context(|| format!("GYROKIN_THREADS={v:?} is not a thread count"))?;
    if n == 0 {
        bail!("GYROKIN_THREADS must be >= 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn cmd_verify(suite: Suite, seed: u64, corrupt_chi: bool, report: Option<&Path>) -> Result<u8, Failure> {
    let rep = verify::run(suite, &VerifyOptions { seed, corrupt_chi }).map_err(runtime)?;
    let text = serde_json::to_string_pretty(&rep).map_err(runtime)?;
    println!("{text}");
    if let Some(path) = report {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display())).map_err(runtime)?;
    }
    for c in rep.failures() {
        eprintln!("FAIL {}/{}: measured {:e}, tolerance {:e}", c.suite, c.name, c.measured, c.tolerance);
    }
    eprintln!("{} of {} checks passed", rep.checks.iter().filter(|c| c.pass).count(), rep.checks.len());
    Ok(if rep.pass { 0 } else { FAILURE })
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::load(path).with_context(|| format!("loading {}", path.display())).map_err(invalid_input)
}

fn output_dir(cfg: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf, Failure> {
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())).map_err(runtime)?;
    Ok(dir)
}

/// Sequentially numbered snapshot dumps in the output directory.
struct Snapshots<'a> {
    dir: &'a Path,
    params: PlasmaParams,
    count: usize,
    last_time: Option<f64>,
}

impl Snapshots<'_> {
    fn dump(&mut self, state: &SolverState) -> gyrokin::Result<()> {
        // A failed write still uses up its number, so a later flush gets a fresh name.
        let stem = self.dir.join(format!("snapshot_{:04}", self.count));
        self.count += 1;
        snapshot::dump(&stem, &state.density, state.time, &self.params)?;
        self.last_time = Some(state.time);
        Ok(())
    }
}

fn cmd_simulate(config: &Path, out: Option<PathBuf>) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    let setup = cfg.run_setup().map_err(invalid_input)?;
    let gq = GyroQuadratureConfig::new(setup.solver.gyro_nodes).map_err(invalid_input)?;
    let params = setup.params;
    let solver = Solver::new(setup).map_err(invalid_input)?;
    let dir = output_dir(&cfg, out)?;

    let g0 = project_initial(&cfg.initial.full(&cfg.plasma, cfg.grid.length_y), &solver.setup.grid, params.omega_c(), &gq).map_err(runtime)?;
    eprintln!("simulate: {} steps of dt={:e}", solver.n_steps, solver.dt);

    let every = cfg.output.snapshot_every;
    let mut snaps = Snapshots { dir: &dir, params, count: 0, last_time: None };
    let mut ticks = 0usize;
    let n_steps = solver.n_steps;
    let outcome = solver.run(g0, |k, state| {
        let tick = ticks;
        ticks += 1;
        if (every > 0 && tick % every == 0) || k == n_steps {
            snaps.dump(state)?;
        }
        Ok(())
    });
    let (state, err) = match outcome {
        Ok(s) => (s, None),
        Err((e, s)) => (s, Some(e)),
    };
    let csv_path = dir.join("diagnostics.csv");
    let file = File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display())).map_err(runtime)?;
    write_csv(BufWriter::new(file), &state.history).map_err(runtime)?;
    let Some(e) = err else {
        eprintln!("wrote {} rows to {} and {} snapshots", state.history.len(), csv_path.display(), snaps.count);
        return Ok(0);
    };
    // Flush the last good state before reporting the failure.
    if snaps.last_time != Some(state.time) {
        match snaps.dump(&state) {
            Ok(()) => eprintln!("flushed last good state at t={:e} as snapshot_{:04}", state.time, snaps.count - 1),
            Err(fe) => eprintln!("could not flush last good state: {fe}"),
        }
    }
    Err(runtime(anyhow!(e).context(format!("run stopped at t={:e}", state.time))))
}

fn parse_eps(list: &str) -> anyhow::Result<Vec<f64>> {
    list.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("eps entry {s:?} is not a number")))
        .collect()
}

fn write_drift_csv(path: &Path, rep: &DriftReport) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["eps", "error", "order"])?;
    for (k, row) in rep.rows.iter().enumerate() {
        let order = if k == 0 { String::new() } else { format!("{:e}", rep.orders[k - 1]) };
        w.write_record([format!("{:e}", row.eps), format!("{:e}", row.error), order])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_drift(config: &Path, eps: &str, out: Option<PathBuf>) -> Result<u8, Failure> {
    let cfg = load_config(config)?;
    let eps = parse_eps(eps).map_err(invalid_input)?;
    let drift = cfg.drift.ok_or_else(|| invalid_input(anyhow!("config has no drift section")))?;
    let rep = drift_check(&cfg.potential, &cfg.plasma, &eps, &drift).map_err(invalid_input)?;
    let dir = output_dir(&cfg, out)?;

    let stdout = std::io::stdout();
    let mut o = stdout.lock();
    let table = (|| -> std::io::Result<()> {
        writeln!(o, "{:>12} {:>14} {:>10}", "eps", "error", "order")?;
        for (k, row) in rep.rows.iter().enumerate() {
            let order = match k {
                0 => "-".to_string(),
                _ if rep.orders[k - 1].is_nan() => "roundoff".to_string(),
                _ => format!("{:.4}", rep.orders[k - 1]),
            };
            writeln!(o, "{:>12.4e} {:>14.6e} {:>10}", row.eps, row.error, order)?;
        }
        let order = rep.min_order();
        if order.is_finite() {
            writeln!(o, "observed order: {order:.4}")
        } else {
            writeln!(o, "observed order: undefined (errors at roundoff level)")
        }
    })();
    table.map_err(runtime)?;

    let path = dir.join("drift_check.csv");
    write_drift_csv(&path, &rep).with_context(|| format!("writing {}", path.display())).map_err(runtime)?;
    Ok(0)
}
