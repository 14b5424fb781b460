//! `tdacm` subcommands.
//!
//! Exit codes: 0 on success, 1 on usage, scenario or I/O errors, 2 when a
//! numerical oracle fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use tdacm_core::controllers::ControllerKind;
use tdacm_core::oracle;
use tdacm_core::sim::{self, Scenario, TrajectoryLog};

use crate::config::{load_scenario, save_scenario, scenario_json};
use crate::export::export;
use crate::report::compare;
use crate::{AppError, AppResult};

/// Environment variable that overrides the scenario seed.
pub const SEED_ENV: &str = "TDACM_SEED";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_ORACLE: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tdacm",
    version,
    about = "Aerial continuum manipulator vision/force simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write its CSV log and metrics.json.
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the scenario seed and TDACM_SEED.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_kind)]
        controller: Option<ControllerKind>,
        /// Step size [s].
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run the scenario with the PID, CISMC and CFTSMC controllers and tabulate their errors.
    Compare {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the finite-difference and identity oracles.
    Check {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Print or write the stock scenario files.
    Scenario {
        which: Stock,
        /// Write `<name>.json` files instead of printing.
        #[arg(long)]
        emit: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stock {
    Test1,
    Test2,
    Test3,
}

impl Stock {
    pub fn scenarios(self) -> Vec<Scenario> {
        match self {
            Stock::Test1 => sim::scenario_test1().to_vec(),
            Stock::Test2 => vec![sim::scenario_test2()],
            Stock::Test3 => {
                let [.., cftsmc] = sim::scenario_test3();
                vec![cftsmc]
            }
        }
    }
}

fn parse_kind(s: &str) -> Result<ControllerKind, String> {
    ControllerKind::from_name(s).ok_or_else(|| {
        let names: Vec<_> = ControllerKind::ALL.iter().map(|k| k.name()).collect();
        format!(
            "unknown controller '{s}' (expected one of {})",
            names.join(", ")
        )
    })
}

/// Seed precedence: command-line flag, then `TDACM_SEED`, then the file.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, file: u64) -> AppResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| AppError::Config(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        None => Ok(file),
    }
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

fn simulate(s: &Scenario) -> AppResult<TrajectoryLog> {
    sim::run(s).map_err(|f| AppError::Run {
        scenario: s.name.clone(),
        source: f.error,
    })
}

fn ensure_dir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn cmd_run(
    path: &Path,
    out: &Path,
    seed: Option<u64>,
    kind: Option<ControllerKind>,
    dt: Option<f64>,
    w: &mut dyn Write,
) -> AppResult<()> {
    let mut s = load_scenario(path)?;
    s.seed = resolve_seed(seed, env_seed().as_deref(), s.seed)?;
    if let Some(k) = kind {
        s = s.with_controller(k);
    }
    if let Some(dt) = dt {
        s.dt = dt;
    }
    s.validate()?;
    ensure_dir(out)?;
    let csv = out.join(format!("{}.csv", s.name));
    let started = Instant::now();
    let log = match sim::run(&s) {
        Ok(log) => log,
        Err(failure) => {
            export(&failure.partial, &csv)?;
            let _ = writeln!(w, "partial log: {}", csv.display());
            return Err(AppError::Run {
                scenario: s.name.clone(),
                source: failure.error,
            });
        }
    };
    let elapsed = started.elapsed();
    export(&log, &csv)?;
    let report = compare(std::slice::from_ref(&log))?;
    let metrics = out.join("metrics.json");
    report.save_json(&metrics)?;
    let last = log
        .records
        .last()
        .expect("a valid scenario logs at least one record");
    let _ = writeln!(
        w,
        "{}: {} records in {:.2} s, seed {}, controller {}\nfinal |e_s| = {:.3e}, e_f = {:.3e} N\n{}\n{}",
        s.name,
        log.records.len(),
        elapsed.as_secs_f64(),
        s.seed,
        s.controller.kind.name(),
        last.e_s.norm(),
        last.e_f,
        csv.display(),
        metrics.display()
    );
    Ok(())
}

/// Runs the baselines and the proposed law on the same scenario, in parallel.
pub fn run_comparison(base: &Scenario) -> AppResult<Vec<TrajectoryLog>> {
    let kinds = [
        ControllerKind::Pid,
        ControllerKind::Cismc,
        ControllerKind::Cftsmc,
    ];
    let scenarios: Vec<Scenario> = kinds
        .iter()
        .map(|&k| base.clone().with_controller(k))
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| scope.spawn(move || simulate(s)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

fn cmd_compare(path: &Path, out: &Path, seed: Option<u64>, w: &mut dyn Write) -> AppResult<()> {
    let mut s = load_scenario(path)?;
    s.seed = resolve_seed(seed, env_seed().as_deref(), s.seed)?;
    ensure_dir(out)?;
    let logs = run_comparison(&s)?;
    for log in &logs {
        export(
            log,
            &out.join(format!("{}-{}.csv", s.name, log.controller.name())),
        )?;
    }
    let report = compare(&logs)?;
    report.save_json(&out.join("metrics.json"))?;
    let _ = write!(w, "{}", report.render());
    Ok(())
}

fn cmd_check(seed: u64, w: &mut dyn Write) -> bool {
    let started = Instant::now();
    let results = oracle::run_all(seed);
    let mut ok = true;
    for r in &results {
        let verdict = if r.passed() { "ok" } else { "FAILED" };
        ok &= r.passed();
        let _ = writeln!(
            w,
            "{:<45} max {:.3e}  tol {:.0e}  n {:>6}  {verdict}",
            r.name, r.max_error, r.tolerance, r.samples
        );
    }
    let _ = writeln!(
        w,
        "{} checks in {:.2} s",
        results.len(),
        started.elapsed().as_secs_f64()
    );
    ok
}

fn cmd_scenario(which: Stock, emit: bool, out: &Path, w: &mut dyn Write) -> AppResult<()> {
    let all = which.scenarios();
    if emit {
        ensure_dir(out)?;
        for s in &all {
            let path = out.join(format!("{}.json", s.name));
            save_scenario(s, &path)?;
            let _ = writeln!(w, "{}", path.display());
        }
    } else {
        for s in &all {
            let _ = write!(w, "{}", scenario_json(s));
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command, writing to `out` and `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run {
            scenario,
            out: dir,
            seed,
            controller,
            dt,
        } => cmd_run(&scenario, &dir, seed, controller, dt, out),
        Command::Compare {
            scenario,
            out: dir,
            seed,
        } => cmd_compare(&scenario, &dir, seed, out),
        Command::Check { seed } => {
            return if cmd_check(seed, out) {
                EXIT_OK
            } else {
                EXIT_ORACLE
            };
        }
        Command::Scenario {
            which,
            emit,
            out: dir,
        } => cmd_scenario(which, emit, &dir, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
