//! `symclass`: verification and classification workflows with JSON reports.
//!
//! Reports go to stdout as JSON with sorted keys; a one-line summary goes to
//! stderr. Exit code 0 on pass, 1 on a failed check, 2 on usage errors.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use symclass::catalog::verify_all;
use symclass::classifier::classify;
use symclass::equiv::{EquivTransform, DEFAULT_DOMAIN};
use symclass::expr::{default_seed, set_default_seed, Decision};
use symclass::liealg::{bracket, AlgebraElement};
use symclass::numcheck::{pde_residual, transported_residual, Boundary, Field, Grid, Seed};
use symclass::symmetry::{is_symmetry, Potential};
use symclass::{parse, Exec};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "symclass", version, about = "Symmetry checks and potential classification for iψ_t + ψ_xx + |ψ|²ψ + Vψ = 0")]
struct Cli {
    /// Run sequentially instead of on the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every table case, mapping and cross reference.
    VerifyTables,
    /// Reduce a potential to its canonical case.
    Classify {
        #[arg(long)]
        potential: String,
    },
    /// Lie bracket of two operators.
    Bracket {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Check the classifying condition for one operator.
    CheckSymmetry {
        #[arg(long)]
        potential: String,
        #[arg(long)]
        op: String,
    },
    /// Apply a transform description file to a potential.
    Transform {
        /// JSON file with T, T_inv, X, Psi, eps, reflect_x, reflect_t.
        #[arg(long)]
        file: String,
        #[arg(long)]
        potential: String,
        /// Also transform this solution (seed name or expression).
        #[arg(long)]
        solution: Option<String>,
        /// t-interval for validation, as `t0,t1`.
        #[arg(long)]
        domain: Option<String>,
    },
    /// Finite-difference residual of a solution on a grid.
    ResidualCheck {
        #[arg(long, default_value = "0")]
        potential: String,
        /// `soliton`, `soliton:a`, `plane_wave:a,k`, `zero` or an expression.
        #[arg(long)]
        solution: String,
        /// Transform file; the grid is then in the new variables.
        #[arg(long)]
        transform: Option<String>,
        /// `t0,t1,x0,x1,nt,nx`.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "dirichlet_zero")]
        boundary: String,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
}

struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

struct Outcome {
    pass: bool,
    summary: String,
    body: Value,
}

fn decision(d: Decision) -> &'static str {
    match d {
        Decision::Exact => "exact",
        Decision::Numeric => "numeric",
        Decision::Unevaluable => "unevaluable",
    }
}

fn potential(text: &str) -> Result<Potential, Usage> {
    Potential::parse(text).map_err(|e| Usage(format!("potential: {e}")))
}

fn operator(text: &str) -> Result<AlgebraElement, Usage> {
    AlgebraElement::parse(text).map_err(|e| Usage(format!("operator {text:?}: {e}")))
}

fn transform_file(path: &str) -> Result<EquivTransform, Usage> {
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{path}: {e}")))?;
    EquivTransform::from_json(&text).map_err(|e| Usage(format!("{path}: {e}")))
}

fn solution(text: &str) -> Result<symclass::Expr, Usage> {
    match Seed::parse(text) {
        Some(s) => Ok(s.expr()),
        None => parse(text).map_err(|e| Usage(format!("solution: {e}"))),
    }
}

fn interval(text: &str) -> Result<(f64, f64), Usage> {
    let parts: Vec<f64> = text.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [a, b] if a < b => Ok((*a, *b)),
        _ => Err(Usage(format!("domain {text:?}: expected t0,t1 with t0 < t1"))),
    }
}

fn run(cmd: &Command, exec: Exec) -> Result<Outcome, Usage> {
    Ok(match cmd {
        Command::VerifyTables => {
            let r = verify_all(exec);
            let passed = r.cases.iter().filter(|c| c.pass).count();
            Outcome {
                pass: r.pass,
                summary: format!(
                    "{passed}/{} cases, {} mappings, {} inversions",
                    r.cases.len(),
                    r.mappings.len(),
                    r.inversions.len()
                ),
                body: serde_json::to_value(&r)?,
            }
        }
        Command::Classify { potential: p } => {
            let r = classify(&potential(p)?);
            let summary = match r.case {
                Some((t, c)) => format!("{:?}: table {t} case {c}", r.status),
                None => format!("{:?}", r.status),
            };
            Outcome { pass: r.is_matched() && r.verified, summary, body: serde_json::to_value(r.report())? }
        }
        Command::Bracket { a, b } => {
            let q = bracket(&operator(a)?, &operator(b)?);
            Outcome { pass: true, summary: q.to_string(), body: json!({ "bracket": q.to_string() }) }
        }
        Command::CheckSymmetry { potential: p, op } => {
            let c = is_symmetry(&potential(p)?, &operator(op)?);
            Outcome {
                pass: c.holds,
                summary: format!("{} ({})", if c.holds { "symmetry" } else { "not a symmetry" }, decision(c.decision)),
                body: json!({
                    "holds": c.holds,
                    "decision": decision(c.decision),
                    "residual": c.residual,
                    "evidence": c.evidence,
                }),
            }
        }
        Command::Transform { file, potential: p, solution: s, domain } => {
            let g = transform_file(file)?;
            let domain = domain.as_deref().map(interval).transpose()?.unwrap_or(DEFAULT_DOMAIN);
            let validation = g.validate(domain).err().map(|e| e.to_string());
            let mapped = g.apply_to_potential(&potential(p)?).to_string();
            let mapped_solution = s.as_deref().map(solution).transpose()?.map(|e| g.apply_to_solution(&e).to_string());
            Outcome {
                pass: validation.is_none(),
                summary: format!("V -> {mapped}"),
                body: json!({
                    "transform": g.to_spec(),
                    "domain": [domain.0, domain.1],
                    "valid": validation.is_none(),
                    "validation": validation,
                    "potential": mapped,
                    "solution": mapped_solution,
                }),
            }
        }
        Command::ResidualCheck { potential: p, solution: s, transform, grid, boundary, tolerance } => {
            let v = potential(p)?;
            let psi = solution(s)?;
            let grid = Grid::parse(grid, boundary.parse::<Boundary>()?)?;
            let r = match transform {
                Some(path) => transported_residual(&psi, &v, &transform_file(path)?, &grid, exec),
                None => pde_residual(&Field::Expr(psi), &v, &grid, exec),
            };
            let r = r.map_err(|e| Usage(e.to_string()))?;
            let pass = r.max_residual < *tolerance;
            Outcome {
                pass,
                summary: format!("max residual {:.3e} ({} path, tolerance {tolerance:e})", r.max_residual, r.path),
                body: json!({
                    "max_residual": r.max_residual,
                    "grid": r.grid,
                    "path": r.path,
                    "tolerance": tolerance,
                }),
            }
        }
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::VerifyTables => "verify-tables",
        Command::Classify { .. } => "classify",
        Command::Bracket { .. } => "bracket",
        Command::CheckSymmetry { .. } => "check-symmetry",
        Command::Transform { .. } => "transform",
        Command::ResidualCheck { .. } => "residual-check",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(s) = std::env::var("SYMCLASS_SEED") {
        match s.trim().parse::<u64>() {
            Ok(seed) => set_default_seed(seed),
            Err(_) => {
                eprintln!("error: SYMCLASS_SEED must be a decimal integer, got {s:?}");
                return ExitCode::from(2);
            }
        }
    }
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let name = command_name(&cli.command);
    match run(&cli.command, exec) {
        Ok(o) => {
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "seed": default_seed(),
                "status": if o.pass { "pass" } else { "fail" },
                "result": o.body,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            eprintln!("{name}: {} [{}]", o.summary, if o.pass { "pass" } else { "fail" });
            ExitCode::from(if o.pass { 0 } else { 1 })
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
