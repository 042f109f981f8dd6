//! `kk`: scenario-driven front end for kk-core.
//!
//! Exit codes: 0 ok, 2 audit failure, 3 blowup, 4 region violation,
//! 64 unparsable input, 66 missing input, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kk_core::fv::{solve_fv, FVConfig};
use kk_core::grid::Trajectory;
use kk_core::io;
use kk_core::model::{audit_conditions, ConditionReport, SamplePlan, Verdict};
use kk_core::scenario::Scenario;
use kk_core::svg::{self, Panel, Series};
use kk_core::sweep::{run_sweep, write_bundle};
use kk_core::viscous::{self, check_region, ViscousConfig};
use kk_core::Error;

const EXIT_OK: u8 = 0;
const EXIT_OTHER: u8 = 1;
const EXIT_AUDIT: u8 = 2;
const EXIT_BLOWUP: u8 = 3;
const EXIT_REGION: u8 = 4;
const EXIT_PARSE: u8 = 64;
const EXIT_MISSING: u8 = 66;

/// Audit sample count and the threshold M above which s·f(s) ≤ 0 is required.
const AUDIT_SAMPLES: usize = 1024;
const AUDIT_THRESHOLD_M: f64 = 1.0;

#[derive(Parser)]
#[command(name = "kk", version, about = "Nonsymmetric Keyfitz-Kranzer balance-law laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit the scenario's model against the structural conditions.
    Audit(Common),
    /// Run one viscous (or inviscid) solve and write the trajectory.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Viscosity; defaults to the smallest epsilon of the scenario.
        #[arg(long, conflicts_with = "inviscid")]
        epsilon: Option<f64>,
        /// Run the finite-volume scheme instead of the viscous solver.
        #[arg(long)]
        inviscid: bool,
        /// Solve even when required audit checks fail.
        #[arg(long)]
        force: bool,
    },
    /// Run every epsilon of the scenario and write the diagnostics bundle.
    Sweep(Common),
    /// Plot rho, w, W, Z for every snapshot of a trajectory index.
    Plot(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON (trajectory index JSON for `plot`).
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error already mapped to its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Json(_) | Error::Config(_) | Error::Input(_) => EXIT_PARSE,
            Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING,
            Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound) => {
                EXIT_MISSING
            }
            Error::Csv(_) => EXIT_PARSE,
            Error::Blowup { .. } | Error::Domain { .. } => EXIT_BLOWUP,
            Error::RegionViolation { .. } => EXIT_REGION,
            _ => EXIT_OTHER,
        };
        let message = match &e {
            Error::Json(j) => format!(
                "parse error at line {}, column {}: {e}",
                j.line(),
                j.column()
            ),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

type CmdResult = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Audit(c) => cmd_audit(&c),
        Command::Solve {
            common,
            epsilon,
            inviscid,
            force,
        } => cmd_solve(&common, epsilon, inviscid, force),
        Command::Sweep(c) => cmd_sweep(&c),
        Command::Plot(c) => cmd_plot(&c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("kk: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> std::result::Result<Scenario, Failure> {
    if !path.exists() {
        return Err(Failure {
            code: EXIT_MISSING,
            message: format!("{} not found", path.display()),
        });
    }
    Scenario::load(path).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn out_dir(c: &Common, scenario: &Scenario) -> PathBuf {
    if let Some(o) = &c.out {
        return o.clone();
    }
    if let Some(o) = &scenario.outputs {
        return c.input.parent().unwrap_or(Path::new(".")).join(o);
    }
    PathBuf::from("out").join(&scenario.name)
}

fn threads() -> usize {
    std::env::var("KK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

fn audit(scenario: &Scenario) -> std::result::Result<ConditionReport, Failure> {
    let plan = SamplePlan::for_model(&scenario.model, AUDIT_SAMPLES);
    Ok(audit_conditions(&scenario.model, &plan, AUDIT_THRESHOLD_M)?)
}

fn cmd_audit(c: &Common) -> CmdResult {
    let scenario = load(&c.input)?;
    let report = audit(&scenario)?;
    let dir = out_dir(c, &scenario);
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    let path = dir.join("audit.json");
    io::write_audit_json(&path, &report)?;
    for check in &report.conditions {
        let verdict = match check.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Na => "na",
        };
        println!(
            "{:<34} {:<4} {:<13} residual {:e} at [{:e}, {:e}]",
            serde_json::to_value(check.condition).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            verdict,
            if check.required { "required" } else { "informational" },
            check.residual,
            check.witness[0],
            check.witness[1]
        );
    }
    println!("report written to {}", path.display());
    if report.required_pass() {
        Ok(EXIT_OK)
    } else {
        for f in report.failures() {
            eprintln!(
                "kk: required check {:?} failed at witness (rho, w) = ({}, {})",
                f.condition, f.witness[0], f.witness[1]
            );
        }
        Ok(EXIT_AUDIT)
    }
}

fn cmd_solve(c: &Common, epsilon: Option<f64>, inviscid: bool, force: bool) -> CmdResult {
    let scenario = load(&c.input)?;
    let report = audit(&scenario)?;
    if !report.required_pass() {
        let names: Vec<String> = report.failures().map(|f| format!("{:?}", f.condition)).collect();
        if force {
            eprintln!("kk: warning: proceeding despite failed audit checks: {}", names.join(", "));
        } else {
            eprintln!("kk: audit failed ({}); pass --force to solve anyway", names.join(", "));
            return Ok(EXIT_AUDIT);
        }
    }
    let run_inviscid = inviscid || (epsilon.is_none() && scenario.epsilons.is_empty());
    let traj = if run_inviscid {
        solve_fv(&scenario.model, &scenario, &FVConfig::for_scenario(&scenario))?
    } else {
        let eps = epsilon
            .or_else(|| scenario.epsilons.last().copied())
            .expect("epsilon list checked non-empty");
        let cfg = ViscousConfig::for_scenario(&scenario, eps);
        viscous::solve(&scenario.model, &scenario, &cfg)?
    };
    // The viscous solver checks the region online; the inviscid run is
    // checked here against the same tolerance.
    let mut region_error = None;
    let verdict = match scenario.region {
        None => "none",
        Some(r) => {
            if run_inviscid {
                region_error = traj
                    .snapshots
                    .iter()
                    .find_map(|f| check_region(&scenario.model, &traj.grid, r, f).err());
            }
            if region_error.is_some() {
                "outside"
            } else {
                "inside"
            }
        }
    };
    let dir = out_dir(c, &scenario);
    let index = io::write_trajectory(&dir, "trajectory", &traj, &scenario.model_config)?;
    print_summary(&traj, verdict);
    println!("trajectory index written to {}", index.display());
    match region_error {
        Some(e) => Err(e.into()),
        None => Ok(EXIT_OK),
    }
}

fn print_summary(traj: &Trajectory, region: &str) {
    let s = &traj.stats;
    println!(
        "epsilon={:e} t_end={:e} steps={} min_rho={:e} max_rho={:e} max_abs_w={:e} region={region} floor_events={}",
        traj.epsilon,
        traj.t_end(),
        s.steps,
        s.min_rho,
        s.max_rho,
        s.max_abs_w,
        s.floor_event_count
    );
}

fn cmd_sweep(c: &Common) -> CmdResult {
    let scenario = load(&c.input)?;
    let result = run_sweep(&scenario, threads())?;
    let dir = out_dir(c, &scenario);
    let files = write_bundle(&dir, &result)?;
    for (t, r) in result.trajectories.iter().zip(&result.summary.reports) {
        let region = if scenario.region.is_some() { "inside" } else { "none" };
        print_summary(t, region);
        for d in &r.dissipation {
            println!("  D[{}] = {:e}", d.pair, d.d);
        }
    }
    for g in &result.summary.gaps {
        println!("L1 gap eps {:e} -> {:e}: {:e}", g.eps_coarse, g.eps_fine, g.l1);
    }
    for g in &result.summary.reduction {
        println!("reduction gap at eps {:e}: {:e}", g.epsilon, g.gap);
    }
    println!("{} files written to {}", files.len(), dir.display());
    match result.failures.into_iter().next() {
        None => Ok(EXIT_OK),
        Some(f) => {
            let mut failure = Failure::from(f.error);
            failure.message = format!("member epsilon = {} failed: {}", f.epsilon, failure.message);
            Err(failure)
        }
    }
}

fn cmd_plot(c: &Common) -> CmdResult {
    if !c.input.exists() {
        return Err(Failure {
            code: EXIT_MISSING,
            message: format!("{} not found", c.input.display()),
        });
    }
    let index = io::read_index(&c.input)?;
    if index.files.is_empty() {
        return Err(Failure {
            code: EXIT_MISSING,
            message: format!("{} lists no snapshots", c.input.display()),
        });
    }
    let (index, traj) = io::read_trajectory(&c.input)?;
    let model = index.model.build()?;
    let dir = c.out.clone().unwrap_or_else(|| c.input.parent().unwrap_or(Path::new(".")).to_path_buf());
    std::fs::create_dir_all(&dir).map_err(Error::from)?;
    let xs = traj.grid.centers();
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let w = snap.w_values();
        let big_w: Vec<f64> = snap.rho.iter().zip(&w).map(|(&r, &z)| model.phi(r, z)).collect();
        let panels = [
            Panel::new("rho", "x", "rho").with(Series::new("rho", &xs, &snap.rho)),
            Panel::new("w", "x", "w").with(Series::new("w", &xs, &w)),
            Panel::new("W = Phi(w) - P(rho)", "x", "W").with(Series::new("W", &xs, &big_w)),
            Panel::new("Z = w", "x", "Z").with(Series::new("Z", &xs, &w)),
        ];
        let title = format!("{} epsilon={:e} t={:e}", index.model.name, index.epsilon, snap.t);
        let path = dir.join(format!("plot_{k:04}.svg"));
        std::fs::write(&path, svg::render(&title, &panels, 2)).map_err(Error::from)?;
    }
    println!("{} plots written to {}", traj.snapshots.len(), dir.display());
    Ok(EXIT_OK)
}
