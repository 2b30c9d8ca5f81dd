//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 no bifurcation for the
//! requested parameters, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::continuation::{
    distance_profile, eigenvalue_range, state_distance, sweep_observed, BranchOrigin, ContinuationError, SeedLadder,
};
use crate::contour::{Boundary, VortexContourCoeffs};
use crate::dispersion::{critical_radius, eigenvalues_for_fold, feasibility};
use crate::io::{BranchFile, StateFile};
use crate::render::render_svg;
use crate::solver::{default_nodes, max_modes, newton_solve, SolverConfig};
use crate::validate::{annulus_suite, convergence_suite, jacobian_suite, Check, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "vstates", version, about = "Doubly connected rotating vortex patches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Cosine modes per boundary [default: the most the grid resolves]
    #[arg(long)]
    modes: Option<usize>,
    /// Quadrature nodes, a multiple of m [default: smallest m·2^r ≥ 512]
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-9)]
    fd_step: f64,
}

impl SolverArgs {
    fn config(&self, fold: usize) -> Result<SolverConfig, String> {
        let nodes = self.nodes.unwrap_or_else(|| default_nodes(fold));
        let config = SolverConfig {
            fd_step: self.fd_step,
            tol: self.tol,
            max_iter: self.max_iter,
            modes: self.modes.unwrap_or_else(|| max_modes(fold, nodes)),
            nodes,
        };
        config.validate(fold).map_err(|e| e.to_string())?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bifurcation speeds Ω_m^±(b) from the annulus
    Dispersion {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        json: bool,
    },
    /// Solve for one state by Newton iteration
    Solve {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, allow_negative_numbers = true)]
        omega: f64,
        /// Initial a_{1,1}
        #[arg(long, conflicts_with = "seed_file", allow_negative_numbers = true)]
        seed_a1: Option<f64>,
        /// Initial a_{2,1}
        #[arg(long, conflicts_with = "seed_file", allow_negative_numbers = true)]
        seed_a2: Option<f64>,
        /// Start from the coefficients of a saved state
        #[arg(long)]
        seed_file: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the state here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_timestamp: bool,
        #[arg(long)]
        json: bool,
    },
    /// Follow a branch in Ω with warm starts
    Sweep {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        m: usize,
        /// Start one step inside [Ω⁻, Ω⁺] from this end (omega_minus | omega_plus)
        #[arg(long, conflicts_with_all = ["start", "end"])]
        from: Option<BranchOrigin>,
        #[arg(long, requires = "end", allow_negative_numbers = true)]
        start: Option<f64>,
        #[arg(long, requires = "start", allow_negative_numbers = true)]
        end: Option<f64>,
        /// Step in Ω; with --from only its magnitude is used
        #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
        step: f64,
        /// Seed the first point with this a_{1,1} only
        #[arg(long, conflicts_with = "seed_a2", allow_negative_numbers = true)]
        seed_a1: Option<f64>,
        /// Seed the first point with this a_{2,1} only
        #[arg(long, allow_negative_numbers = true)]
        seed_a2: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Branch table (CSV)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every state as JSON into this directory
        #[arg(long)]
        states_dir: Option<PathBuf>,
        #[arg(long)]
        no_timestamp: bool,
        /// No per-point progress on stderr
        #[arg(long)]
        quiet: bool,
    },
    /// Draw saved states as SVG
    Render {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Points per boundary curve
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Run a self-check suite
    Validate {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 0.63)]
        b: f64,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long)]
        nodes: Option<usize>,
        /// Modes for the Jacobian suite
        #[arg(long, default_value_t = 15)]
        modes: usize,
    },
}

struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn check_radius(b: f64) -> Result<(), Failure> {
    if b > 0.0 && b < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("b must lie in (0, 1), got {b}")))
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Dispersion { m, b, json } => dispersion(m, b, json),
        Command::Solve { b, m, omega, seed_a1, seed_a2, seed_file, solver, out, no_timestamp, json } => {
            solve(b, m, omega, seed_a1, seed_a2, seed_file, &solver, out, !no_timestamp, json)
        }
        Command::Sweep {
            b,
            m,
            from,
            start,
            end,
            step,
            seed_a1,
            seed_a2,
            solver,
            out,
            states_dir,
            no_timestamp,
            quiet,
        } => {
            let ladder = match (seed_a1, seed_a2) {
                (Some(a), _) => Some(SeedLadder { boundary: Boundary::Outer, amplitudes: vec![a], accept_trivial: false }),
                (_, Some(a)) => Some(SeedLadder { boundary: Boundary::Inner, amplitudes: vec![a], accept_trivial: false }),
                _ => None,
            };
            let range = match (from, start, end) {
                (Some(origin), _, _) => Ok(origin),
                (None, Some(s), Some(e)) => Err((s, e)),
                _ => {
                    eprintln!("error: give either --from or both --start and --end");
                    return EXIT_USAGE;
                }
            };
            sweep(b, m, range, step, ladder, &solver, out, states_dir, !no_timestamp, quiet)
        }
        Command::Render { inputs, out, samples } => render(&inputs, &out, samples),
        Command::Validate { suite, b, m, nodes, modes } => validate(suite, b, m, nodes, modes),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn dispersion(m: u32, b: f64, as_json: bool) -> Result<i32, Failure> {
    check_radius(b)?;
    if m == 0 {
        return Err(usage("m must be at least 1"));
    }
    let f = feasibility(m, b);
    let b_m = critical_radius(m).ok();
    let point = if m >= 3 {
        eigenvalues_for_fold(m, b).map_err(|e| usage(e.to_string()))?.point().copied()
    } else {
        None
    };
    if as_json {
        let mut v = json!({ "m": m, "b": b, "feasibility": f, "feasible": point.is_some(), "critical_radius": b_m });
        if let Some(p) = point {
            v["omega_minus"] = json!(p.omega_minus);
            v["omega_plus"] = json!(p.omega_plus);
            v["lambda_minus"] = json!(p.lambda_minus);
            v["lambda_plus"] = json!(p.lambda_plus);
            v["transversal"] = json!(p.transversal);
        }
        println!("{}", serde_json::to_string_pretty(&v).expect("plain JSON values serialize"));
    } else {
        println!("m = {m}, b = {b}");
        println!("f_m(b)          {f:.12}");
        match b_m {
            Some(r) => println!("critical radius {r:.12}"),
            None => println!("critical radius none (m < 3)"),
        }
        match point {
            Some(p) => {
                println!("feasible        yes");
                println!("omega_minus     {:.12}", p.omega_minus);
                println!("omega_plus      {:.12}", p.omega_plus);
                println!("lambda_minus    {:.12}", p.lambda_minus);
                println!("lambda_plus     {:.12}", p.lambda_plus);
                println!("transversal     {}", p.transversal);
            }
            None => println!("feasible        no"),
        }
    }
    Ok(if point.is_some() { EXIT_OK } else { EXIT_INFEASIBLE })
}

#[allow(clippy::too_many_arguments)]
fn solve(
    b: f64,
    m: usize,
    omega: f64,
    seed_a1: Option<f64>,
    seed_a2: Option<f64>,
    seed_file: Option<PathBuf>,
    solver: &SolverArgs,
    out: Option<PathBuf>,
    timestamp: bool,
    as_json: bool,
) -> Result<i32, Failure> {
    check_radius(b)?;
    let config = solver.config(m).map_err(usage)?;
    let seed = match seed_file {
        Some(path) => {
            let s = StateFile::read(&path).map_err(|e| usage(e.to_string()))?;
            if s.b != b || s.m != m {
                return Err(usage(format!("seed file holds b = {}, m = {}; asked for b = {b}, m = {m}", s.b, s.m)));
            }
            s.coeffs().map_err(|e| usage(e.to_string()))?.resized(config.modes)
        }
        None => {
            let mut c = VortexContourCoeffs::annulus(b, m, config.modes).map_err(|e| usage(e.to_string()))?;
            c.a1[0] = seed_a1.unwrap_or(0.0);
            c.a2[0] = seed_a2.unwrap_or(0.0);
            c
        }
    };
    let report = newton_solve(b, omega, m, &seed, &config).map_err(|e| Failure(EXIT_NUMERICAL, e.to_string()))?;
    let state = StateFile::from_report(omega, &report, &config, timestamp);
    if let Some(path) = &out {
        state.write(path).map_err(|e| usage(e.to_string()))?;
    }
    let distance = state_distance(&report.coeffs, config.nodes);
    if as_json {
        let v = json!({
            "converged": report.converged,
            "trivial": report.trivial,
            "iterations": report.iterations,
            "residual_max": report.residual_max,
            "a1_1": report.coeffs.a1[0],
            "a2_1": report.coeffs.a2[0],
            "distance": distance,
            "history": report.history,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("plain JSON values serialize"));
    } else {
        println!(
            "converged in {} iterations, residual {:.3e}{}",
            report.iterations,
            report.residual_max,
            if report.trivial { " (trivial: the annulus)" } else { "" }
        );
        println!("a1_1 = {:.10}, a2_1 = {:.10}", report.coeffs.a1[0], report.coeffs.a2[0]);
        println!("boundary distance {distance:.6}");
        if let Some(path) = out {
            println!("wrote {}", path.display());
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    b: f64,
    m: usize,
    range: Result<BranchOrigin, (f64, f64)>,
    step: f64,
    ladder: Option<SeedLadder>,
    solver: &SolverArgs,
    out: Option<PathBuf>,
    states_dir: Option<PathBuf>,
    timestamp: bool,
    quiet: bool,
) -> Result<i32, Failure> {
    check_radius(b)?;
    let config = solver.config(m).map_err(usage)?;
    let (start, end, step) = match range {
        Ok(origin) => eigenvalue_range(b, m, origin, step.abs()).map_err(sweep_failure)?,
        Err((start, end)) => (start, end, step),
    };
    let ladder = ladder.unwrap_or_else(|| SeedLadder::for_origin(BranchOrigin::from_step(step)));
    let result = sweep_observed(b, m, start, end, step, &ladder, &config, |r| {
        if !quiet {
            eprintln!("Ω = {:.6}  iterations {}  distance {:.6}", r.omega, r.report.iterations, r.distance);
        }
    });
    let branch = result.map_err(sweep_failure)?;

    let file = BranchFile::from_branch(&branch, &config, timestamp);
    match &out {
        Some(path) => file.write(path).map_err(|e| usage(e.to_string()))?,
        None => print!("{}", file.to_csv().map_err(|e| usage(e.to_string()))?),
    }
    if let Some(dir) = states_dir {
        fs::create_dir_all(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        for (i, r) in branch.records.iter().enumerate() {
            let state = StateFile::from_report(r.omega, &r.report, &config, timestamp);
            state.write(&dir.join(format!("state_{i:04}.json"))).map_err(|e| usage(e.to_string()))?;
        }
    }
    let profile = distance_profile(&branch);
    eprintln!(
        "{} states; minimum distance {:.6} at Ω = {:.6}",
        branch.records.len(),
        profile.min_distance,
        profile.argmin_omega
    );
    match branch.terminated_at {
        Some(t) => eprintln!(
            "terminated at Ω = {t:.6}: {}",
            branch.termination_reason.as_deref().unwrap_or("solve failed")
        ),
        None => eprintln!("reached the end of the range"),
    }
    Ok(EXIT_OK)
}

fn sweep_failure(e: ContinuationError) -> Failure {
    match e {
        ContinuationError::EmptyBranch { .. } => Failure(EXIT_NUMERICAL, e.to_string()),
        ContinuationError::Infeasible { .. } => Failure(EXIT_INFEASIBLE, e.to_string()),
        other => usage(other.to_string()),
    }
}

fn render(inputs: &[PathBuf], out: &PathBuf, samples: usize) -> Result<i32, Failure> {
    let states = inputs
        .iter()
        .map(|p| StateFile::read(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(e.to_string()))?;
    let svg = render_svg(&states, samples).map_err(|e| usage(e.to_string()))?;
    fs::write(out, svg).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    println!("wrote {} ({} states)", out.display(), states.len());
    Ok(EXIT_OK)
}

fn validate(suite: Suite, b: f64, m: usize, nodes: Option<usize>, modes: usize) -> Result<i32, Failure> {
    check_radius(b)?;
    if m == 0 {
        return Err(usage("m must be at least 1"));
    }
    let checks: Vec<Check> = match suite {
        Suite::Annulus => annulus_suite(b, nodes.unwrap_or(256)),
        Suite::Jacobian => {
            let nodes = nodes.unwrap_or(512);
            let config = SolverConfig { modes, ..SolverConfig::for_grid(m, nodes) };
            config.validate(m).map_err(|e| usage(e.to_string()))?;
            jacobian_suite(b, m, &config)
        }
        Suite::Convergence => convergence_suite(b, m, nodes.unwrap_or_else(|| default_nodes(m))),
    };
    for c in &checks {
        println!("{c}");
    }
    Ok(if checks.iter().all(Check::passed) { EXIT_OK } else { EXIT_NUMERICAL })
}
