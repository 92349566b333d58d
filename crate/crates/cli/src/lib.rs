//! Command-line front end. [`run`] takes the argument vector and returns the
//! exit code and both output streams, so tests can drive it without a
//! process.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use precsched::baseline::{list_schedule, lower_bounds};
use precsched::harness::{compare, gap_search, GapSearchConfig, SCHEMA};
use precsched::instance::{generate, parse_instance, parse_instance_json, serialize_instance, Model};
use precsched::lp::{build_time_indexed_lp, lp_min_makespan_with_point, point_entries, solve_feasibility, LpOutcome};
use precsched::oracle::{exact_makespan, ORACLE_MAX_JOBS};
use precsched::qptas::{run_qptas, Params, Source, DEFAULT_BASE_THRESHOLD};
use precsched::sa::{sa_min_makespan, solve_sa_with_cap, SaOutcome, DEFAULT_MAX_LIFTED_VARS};
use precsched::scalar::{format_rational, parse_rational};
use precsched::{BigRational, Instance, Rational};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "precsched", about = "Unit-job scheduling with precedences: exact, list, LP, lifts, rounding")]
struct Cli {
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Desk,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceArg {
    Mixture,
    Lift,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
struct RoundingArgs {
    #[arg(long, default_value = "1/2")]
    epsilon: String,
    #[arg(long, value_enum, default_value = "desk")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long = "C", default_value_t = 3)]
    c: usize,
    #[arg(long, default_value = "1/4")]
    delta: String,
    /// Batches kept by a type-2 recursion; default ⌊(C−1)/2⌋.
    #[arg(long)]
    retain: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BASE_THRESHOLD)]
    base_threshold: usize,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    #[arg(long, value_enum, default_value = "mixture")]
    source: SourceArg,
    /// Schedules in the mixture source.
    #[arg(long, default_value_t = 4)]
    samples: usize,
    /// Lift level for the explicit source.
    #[arg(long, default_value_t = 1)]
    lift_level: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_LIFTED_VARS)]
    cap: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value = "gnp")]
        model: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Edge probability (gnp) or layer count (layered).
        #[arg(long, default_value = "1/2")]
        param: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Optimal makespan by search over downsets.
    Exact {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Greedy list schedule.
    List {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Minimum feasible horizon of the time-indexed LP, or feasibility at one horizon.
    Lp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "T")]
        horizon: Option<usize>,
        /// Include the nonzero entries of the point found.
        #[arg(long)]
        point: bool,
    },
    /// Lifted LP: minimum feasible horizon, or feasibility at one horizon.
    Sa {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[arg(long = "T")]
        horizon: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_LIFTED_VARS)]
        cap: usize,
    },
    /// Recursive rounding with discard accounting.
    Qptas {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "T")]
        horizon: Option<usize>,
        #[command(flatten)]
        rounding: RoundingArgs,
    },
    /// Search random instances for LP integrality gaps.
    GapSearch {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sa_rounds: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_MAX_LIFTED_VARS)]
        cap: usize,
    },
    /// One row with every method's makespan.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        rounding: RoundingArgs,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Solver(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn solver(e: impl ToString) -> Failure {
    Failure::Solver(e.to_string())
}

fn read_instance(path: &PathBuf) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let parsed = if text.trim_start().starts_with('{') { parse_instance_json(&text) } else { parse_instance(&text) };
    parsed.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn rational(flag: &str, text: &str) -> Result<BigRational, Failure> {
    parse_rational(text).map_err(|e| usage(format!("--{flag}: {e}")))
}

fn envelope(command: &str, body: Value) -> Value {
    let mut map = match body {
        Value::Object(map) => map,
        other => {
            let mut map = serde_json::Map::new();
            map.insert("result".into(), other);
            map
        }
    };
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    Value::Object(map)
}

fn to_value<V: serde::Serialize>(v: V) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn params_for(inst: &Instance, r: &RoundingArgs) -> Result<Params, Failure> {
    let epsilon = rational("epsilon", &r.epsilon)?;
    let params = match r.mode {
        ModeArg::Paper => Params::paper(inst.m(), epsilon, inst.n()),
        ModeArg::Desk => Params::desk(inst.m(), epsilon, r.k, r.c, rational("delta", &r.delta)?, r.retain, inst.n())
            .map(|p| p.with_base_threshold(r.base_threshold)),
    };
    let params = params.map_err(usage)?;
    Ok(match r.mode {
        ModeArg::Desk => params.with_budget(r.budget),
        ModeArg::Paper => params,
    })
}

fn source_for(r: &RoundingArgs) -> Source {
    match r.source {
        SourceArg::Mixture => Source::Mixture { samples: r.samples, seed: r.seed },
        SourceArg::Lift => Source::Lift { level: r.lift_level, cap: r.cap },
    }
}

fn dispatch(command: Command) -> Result<(&'static str, Value), Failure> {
    match command {
        Command::Gen { model, n, m, param, seed, format } => {
            let model: Model = model.parse().map_err(usage)?;
            let inst = generate(model, n, m, &rational("param", &param)?, seed).map_err(usage)?;
            match format {
                FormatArg::Json => {
                    // The instance fields sit at top level so the output reads back as an instance.
                    let mut body = to_value(&inst);
                    body["model"] = json!(model.to_string());
                    body["seed"] = json!(seed);
                    Ok(("gen", body))
                }
                FormatArg::Text => Ok(("gen", Value::String(serialize_instance(&inst)))),
            }
        }
        Command::Exact { input } => {
            let inst = read_instance(&input)?;
            let (opt, schedule) = exact_makespan(&inst).map_err(solver)?;
            Ok(("exact", json!({ "opt": opt, "schedule": to_value(&schedule) })))
        }
        Command::List { input } => {
            let inst = read_instance(&input)?;
            let schedule = list_schedule(&inst);
            Ok((
                "list",
                json!({
                    "makespan": schedule.makespan(),
                    "lower_bounds": to_value(lower_bounds(&inst)),
                    "schedule": to_value(&schedule),
                }),
            ))
        }
        Command::Lp { input, horizon, point } => {
            let inst = read_instance(&input)?;
            match horizon {
                None => {
                    let (t, p) = lp_min_makespan_with_point(&inst);
                    let mut body = json!({ "T_min": t });
                    if point {
                        let idx = build_time_indexed_lp::<Rational>(&inst, t).1;
                        body["point"] = to_value(point_entries(&idx, &p));
                    }
                    Ok(("lp", body))
                }
                Some(t) => {
                    if t == 0 {
                        return Err(usage("--T must be positive"));
                    }
                    let (lp, idx) = build_time_indexed_lp::<Rational>(&inst, t);
                    let outcome = solve_feasibility(&lp);
                    let mut body = json!({ "T": t, "feasible": outcome.is_feasible() });
                    if let (true, LpOutcome::Feasible(p)) = (point, &outcome) {
                        body["point"] = to_value(point_entries(&idx, p));
                    }
                    Ok(("lp", body))
                }
            }
        }
        Command::Sa { input, rounds, horizon, cap } => {
            let inst = read_instance(&input)?;
            match horizon {
                None => {
                    let witness = if inst.n() <= ORACLE_MAX_JOBS { Some(exact_makespan(&inst).map_err(solver)?.1) } else { None };
                    let r = sa_min_makespan(&inst, rounds, witness.as_ref(), cap).map_err(solver)?;
                    Ok(("sa", json!({ "rounds": rounds, "t_min": r.t_min, "lp_min": r.lp_min, "certificate": to_value(r.certificate), "solves": r.solves })))
                }
                Some(t) => {
                    if t == 0 {
                        return Err(usage("--T must be positive"));
                    }
                    let outcome = solve_sa_with_cap::<Rational>(&inst, t, rounds, cap).map_err(solver)?;
                    Ok(("sa", json!({ "rounds": rounds, "T": t, "feasible": matches!(outcome, SaOutcome::Feasible(_)) })))
                }
            }
        }
        Command::Qptas { input, horizon, rounding } => {
            let inst = read_instance(&input)?;
            let params = params_for(&inst, &rounding)?;
            let t = match horizon {
                Some(0) => return Err(usage("--T must be positive")),
                Some(t) => t,
                None if inst.n() <= ORACLE_MAX_JOBS => exact_makespan(&inst).map_err(solver)?.0,
                None => lp_min_makespan_with_point(&inst).0,
            };
            let report = run_qptas(&inst, t, &params, &source_for(&rounding)).map_err(solver)?;
            Ok(("qptas", to_value(&report)))
        }
        Command::GapSearch { m, n_max, trials, seed, sa_rounds, cap } => {
            if m == 0 || n_max == 0 {
                return Err(usage("--m and --n-max must be positive"));
            }
            if n_max > ORACLE_MAX_JOBS {
                return Err(usage(format!("--n-max is capped at {ORACLE_MAX_JOBS}")));
            }
            let cfg = GapSearchConfig { m, n_max, trials, seed, sa_rounds, lift_cap: cap };
            let report = gap_search(&cfg).map_err(solver)?;
            Ok(("gap-search", to_value(&report)))
        }
        Command::Compare { input, rounding } => {
            let inst = read_instance(&input)?;
            let params = params_for(&inst, &rounding)?;
            let row = compare(&inst, &params, &source_for(&rounding), rounding.cap).map_err(solver)?;
            Ok(("compare", json!({ "row": to_value(&row), "epsilon": format_rational(&params.epsilon) })))
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let out = cli.out.clone();
    let (code, body, stderr) = match dispatch(cli.command) {
        Ok((_, Value::String(text))) => (0, text, String::new()),
        Ok((name, body)) => (0, render(&envelope(name, body)), String::new()),
        Err(Failure::Usage(msg)) => return Output { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
        Err(Failure::Solver(msg)) => (1, render(&json!({ "schema": SCHEMA, "error": msg })), format!("error: {msg}\n")),
    };
    match out {
        Some(path) => match fs::write(&path, &body) {
            Ok(()) => Output { code, stdout: String::new(), stderr },
            Err(e) => Output { code: 2, stdout: String::new(), stderr: format!("error: {}: {e}\n", path.display()) },
        },
        None => Output { code, stdout: body, stderr },
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("json renders");
    s.push('\n');
    s
}
