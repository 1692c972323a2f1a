//! Command-line front end. Exit codes: 0 success, 1 infeasible or failed
//! verification, 2 usage, parse or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::instance::{
    random_instance, validate_instance, FleetSpec, MetricInstance, Multiplicity, RandomSpec, VehicleClass,
};
use crate::io::{
    parse_instance, parse_instance_unchecked, read_solution, write_instance, write_solution, SolutionFile,
};
use crate::oracle::{exact_min_tours, verify_paths, verify_solution, OracleLimits, OracleOutcome, VerifyReport};
use crate::solvers::{reduce_dcvrp_to_bdcvrp, solve_bdcvrp, solve_min_nht, solve_min_nt};
use crate::tree::Tour;
use crate::EPS;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cdvrp",
    version,
    about = "Capacity- and distance-constrained vehicle routing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    MinNt,
    MinNht,
    Bdcvrp,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random Euclidean instance
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "box", default_value_t = 1.0)]
        side: f64,
        /// Comma-separated classes `CAPACITY:BOUND[:MULTIPLICITY]`
        #[arg(long)]
        fleet: String,
        /// Demand range `LO:HI`
        #[arg(long, default_value = "1:1")]
        demand: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report every metric, demand and fleet violation of an instance
    Validate { file: PathBuf },
    /// Solve an instance
    Solve {
        file: PathBuf,
        #[arg(long, value_enum)]
        alg: Algorithm,
        /// Path length target for min-nht (defaults to the smallest distance bound)
        #[arg(long)]
        lambda: Option<f64>,
        /// Balance target for bdcvrp
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a solution file against an instance
    Verify {
        file: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Exact minimum number of tours by exhaustive search
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = OracleLimits::default().max_n)]
        max_n: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pad a solution's tours to equal length, writing the padded instance
    Reduce {
        file: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the padded tours as a solution file
        #[arg(long)]
        solution_out: Option<PathBuf>,
    },
    /// Solve with both heuristics and the oracle, reporting tour-count ratios
    Compare {
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = OracleLimits::default().max_n)]
        max_n: usize,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_infeasibility() {
                EXIT_INFEASIBLE
            } else {
                EXIT_USAGE
            },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Syntax errors are usage errors; a well-formed instance that fails
/// validation is reported as infeasible.
fn load_instance(path: &Path) -> Result<MetricInstance, Failure> {
    let text = read(path)?;
    parse_instance_unchecked(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure {
        code: EXIT_INFEASIBLE,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_solution(path: &Path) -> Result<SolutionFile, Failure> {
    read_solution(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, target: Option<&Path>, text: &str) -> Result<(), Failure> {
    match target {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| usage(e.to_string())),
    }
}

fn parse_fleet_flag(spec: &str) -> Result<FleetSpec, Failure> {
    let mut classes = Vec::new();
    for part in spec.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad fleet entry `{part}`")))
        };
        let class = match fields.as_slice() {
            [q, t] => VehicleClass::new(num(q)?, num(t)?),
            [q, t, m] => {
                let mult = match m.trim() {
                    "inf" => Multiplicity::Unbounded,
                    k => Multiplicity::Limited(k.parse().map_err(|_| usage(format!("bad multiplicity `{k}`")))?),
                };
                VehicleClass::new(num(q)?, num(t)?).with_multiplicity(mult)
            }
            _ => {
                return Err(usage(format!(
                    "bad fleet entry `{part}`, expected CAPACITY:BOUND[:MULT]"
                )))
            }
        };
        classes.push(class);
    }
    FleetSpec::new(classes).map_err(|e| usage(e.to_string()))
}

fn parse_range(spec: &str) -> Result<(f64, f64), Failure> {
    let bad = || usage(format!("bad demand range `{spec}`, expected LO:HI"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn print_report(err: &mut dyn Write, report: &VerifyReport) {
    for v in &report.violations {
        let _ = writeln!(err, "{v}");
    }
}

fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Gen {
            n,
            seed,
            side,
            fleet,
            demand,
            output,
        } => {
            let spec = RandomSpec {
                n,
                seed,
                side,
                demand_range: parse_range(&demand)?,
                fleet: parse_fleet_flag(&fleet)?,
            };
            let inst = random_instance(&spec)?;
            emit(out, output.as_deref(), &write_instance(&inst))?;
            Ok(EXIT_OK)
        }
        Command::Validate { file } => {
            let inst =
                parse_instance_unchecked(&read(&file)?).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let report = validate_instance(&inst, EPS);
            if report.ok() {
                let _ = writeln!(out, "ok");
                Ok(EXIT_OK)
            } else {
                for v in &report.violations {
                    let _ = writeln!(err, "{v}");
                }
                Ok(EXIT_INFEASIBLE)
            }
        }
        Command::Solve {
            file,
            alg,
            lambda,
            alpha,
            output,
        } => {
            let inst = load_instance(&file)?;
            let text = match alg {
                Algorithm::MinNt => write_solution(&solve_min_nt(&inst)?, &inst),
                Algorithm::Bdcvrp => write_solution(&solve_bdcvrp(&inst, alpha)?, &inst),
                Algorithm::MinNht => {
                    let lambda = lambda.unwrap_or_else(|| inst.fleet().t_min());
                    SolutionFile::from_paths(&solve_min_nht(&inst, lambda, false)?, &inst).to_json()
                }
            };
            emit(out, output.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Verify { file, solution, alpha } => {
            let inst = load_instance(&file)?;
            let sol = load_solution(&solution)?;
            let report = if sol.is_paths() {
                let bound = sol
                    .meta
                    .get("length_bound")
                    .and_then(Value::as_f64)
                    .or_else(|| sol.parameters.get("lambda").copied())
                    .ok_or_else(|| usage("path solution lacks a length bound"))?;
                let seqs: Vec<Vec<usize>> = sol.tours.iter().map(|t| t.sequence.clone()).collect();
                verify_paths(&inst, &seqs, bound)
            } else {
                let routed = sol.to_solution(&inst)?;
                verify_solution(&inst, &routed, alpha)
            };
            if report.ok() {
                let _ = writeln!(out, "ok");
                Ok(EXIT_OK)
            } else {
                print_report(err, &report);
                Ok(EXIT_INFEASIBLE)
            }
        }
        Command::Oracle { file, max_n, output } => {
            let inst = load_instance(&file)?;
            let limits = OracleLimits {
                max_n,
                ..OracleLimits::default()
            };
            match exact_min_tours(&inst, limits)? {
                OracleOutcome::Optimal(sol) => {
                    emit(out, output.as_deref(), &write_solution(&sol, &inst))?;
                    Ok(EXIT_OK)
                }
                OracleOutcome::Infeasible => {
                    let _ = writeln!(err, "infeasible: no set of tours satisfies the fleet");
                    Ok(EXIT_INFEASIBLE)
                }
            }
        }
        Command::Reduce {
            file,
            solution,
            alpha,
            output,
            solution_out,
        } => {
            let inst = load_instance(&file)?;
            let sol = load_solution(&solution)?;
            let tours: Vec<Tour> = sol.to_solution(&inst)?.tours.into_iter().map(|t| t.tour).collect();
            let gadget = reduce_dcvrp_to_bdcvrp(&inst, &tours, alpha)?;
            emit(out, Some(&output), &write_instance(&gadget.instance))?;
            if let Some(p) = solution_out {
                emit(
                    out,
                    Some(&p),
                    &write_solution(&gadget.padded_solution(), &gadget.instance),
                )?;
            }
            Ok(EXIT_OK)
        }
        Command::Compare { file, alpha, max_n } => {
            let inst = load_instance(&file)?;
            let nt = solve_min_nt(&inst)?;
            let bd = solve_bdcvrp(&inst, alpha)?;
            let limits = OracleLimits {
                max_n,
                ..OracleLimits::default()
            };
            let oracle = match exact_min_tours(&inst, limits) {
                Ok(OracleOutcome::Optimal(s)) => Some(s.pi),
                Ok(OracleOutcome::Infeasible) => None,
                Err(Error::ResourceLimit(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let ratio = |pi: usize| match oracle {
                Some(0) | None => Value::Null,
                Some(opt) => json!(crate::io::round12(pi as f64 / opt as f64)),
            };
            let report = json!({
                "instance": inst.name(),
                "n": inst.n(),
                "min_nt": { "pi": nt.pi, "alpha": crate::io::round12(nt.alpha) },
                "bdcvrp": {
                    "pi": bd.pi,
                    "alpha": crate::io::round12(bd.alpha),
                    "balanced": bd.meta.notes.get("balanced").cloned().unwrap_or(Value::Null),
                },
                "oracle_pi": oracle,
                "ratio_min_nt": ratio(nt.pi),
                "ratio_bdcvrp": ratio(bd.pi),
            });
            let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
            text.push('\n');
            emit(out, None, &text)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the CLI with explicit output streams; returns the exit code.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match run(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}
