use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperwalk::assoc::{build_reduction, find_certificate, is_associative, Associativity, CertCase};
use hyperwalk::cli_io::{
    params_to_json, parse_instance, parse_operator, parse_params, parse_pattern, parse_schedule, read_file,
    round_floats, IoError,
};
use hyperwalk::complexity::{check_admissibility, cost_exponent, ModelError};
use hyperwalk::lp::{
    optimize_over_schedules, solve_schedule, ExponentLpError, LpOptions, OptimizeConfig, OptimizeError,
    OptimizeMode, ScheduleOptimum,
};
use hyperwalk::oracle::{find_subhypergraph, QueryCounter};
use hyperwalk::pattern::{validate_schedule, PatternHypergraph};
use hyperwalk::rational::{format_rational, parse_rational};
use hyperwalk::schedule_enum::{count_complete_schedules, enumerate_complete_schedules, heuristic_schedules, EnumError};
use hyperwalk::stats::{verify_tail_bounds, TailGrid};
use hyperwalk::walk_sim::{
    mc_lambda_claim, mc_lemma3_random, mc_pair_swap, mc_regularity, mc_vertex_swap, Lemma3Params, RegularityParams,
    SimError, SwapParams,
};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hyperwalk", version, about = "Schedules, exponent LPs and classical checks for nested-walk hypergraph finding")]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count or list valid loading schedules.
    Schedules {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, conflicts_with = "heuristic")]
        count_only: bool,
        #[command(flatten)]
        heur: HeuristicArgs,
    },
    /// Minimize the cost exponent over schedules, or solve one schedule's LP.
    Optimize {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, conflicts_with = "heuristic")]
        exhaustive: bool,
        #[command(flatten)]
        heur: HeuristicArgs,
        /// Solve only this schedule (or seed the heuristic with it).
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Margin for strict conditions, e.g. 1/1024.
        #[arg(long)]
        margin: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Enforce the strict n/r_i conditions.
        #[arg(long)]
        strict_vertex: bool,
    },
    /// Cost breakdown and admissibility of given parameters.
    Evaluate {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        strict_vertex: bool,
    },
    /// Monte Carlo checks of the walk's classical data structures.
    Simulate {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        n: u32,
        /// JSON parameters of the check (defaults apply when omitted).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact verification of the hypergeometric tail bounds.
    Verify {
        #[command(subcommand)]
        what: VerifyWhat,
    },
    /// Classical search for a copy of the pattern in an instance.
    Find {
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Ternary associativity checks.
    Assoc {
        #[command(subcommand)]
        what: AssocWhat,
    },
}

#[derive(Args)]
struct HeuristicArgs {
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum VerifyWhat {
    Tails {
        #[arg(long, default_value_t = 60)]
        nmax: u64,
    },
}

#[derive(Subcommand)]
enum AssocWhat {
    Check {
        #[arg(long)]
        table: PathBuf,
    },
    Certificate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_parser = parse_case)]
        case: CertCase,
    },
}

fn parse_case(s: &str) -> Result<CertCase, String> {
    s.parse()
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    LambdaClaim,
    Lemma3,
    Regularity,
    VertexSwap,
    PairSwap,
}

/// Exit codes.
const VERDICT_FAIL: u8 = 1;
const INVALID_INPUT: u8 = 3;
const INTERNAL: u8 = 4;

struct Report {
    body: Value,
    pass: bool,
}

fn ok(body: Value) -> Report {
    Report { body, pass: true }
}

fn is_input_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<IoError>()
            || c.is::<ModelError>()
            || c.is::<SimError>()
            || c.is::<EnumError>()
            || matches!(c.downcast_ref::<OptimizeError>(), Some(OptimizeError::Enum(_)))
            || matches!(c.downcast_ref::<ExponentLpError>(), Some(ExponentLpError::Model(_)))
            || c.is::<hyperwalk::rational::RationalParseError>()
    })
}

fn seed_or_env(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(hyperwalk::seed_from_env)
}

fn load_pattern(path: &Path) -> anyhow::Result<PatternHypergraph> {
    Ok(parse_pattern(&read_file(path)?)?)
}

fn schedule_json(s: &hyperwalk::pattern::LoadingSchedule) -> Value {
    json!(s.to_compact())
}

fn optimum_json(o: &ScheduleOptimum) -> Value {
    json!({
        "exponent": format_rational(&o.exponent),
        "schedule": schedule_json(&o.schedule),
        "witness": params_to_json(&o.witness),
        "tight_rows": o.tight_rows,
        "strict_ok": o.strict_ok,
        "margin": o.margin.as_ref().map(format_rational),
        "margin_exponent": o.margin_exponent.as_ref().map(format_rational),
        "margin_witness": o.margin_witness.as_ref().map(params_to_json),
    })
}

fn run(cmd: Command) -> anyhow::Result<Report> {
    match cmd {
        Command::Schedules { pattern, count_only, heur } => {
            let h = load_pattern(&pattern)?;
            if count_only {
                let c = count_complete_schedules(&h)?;
                let count = u64::try_from(c).map(Value::from).unwrap_or_else(|_| Value::String(c.to_string()));
                return Ok(ok(json!({"command": "schedules", "count": count})));
            }
            let list: Vec<Value> = if heur.heuristic {
                heuristic_schedules(&h, heur.budget, seed_or_env(heur.seed))?.map(|s| schedule_json(&s)).collect()
            } else {
                enumerate_complete_schedules(&h)?.map(|s| schedule_json(&s)).collect()
            };
            Ok(ok(json!({"command": "schedules", "count": list.len(), "schedules": list})))
        }
        Command::Optimize {
            pattern,
            exhaustive,
            heur,
            schedule,
            margin,
            jobs,
            strict_vertex,
        } => {
            let h = load_pattern(&pattern)?;
            let options = LpOptions {
                margin: margin.as_deref().map(parse_rational).transpose()?,
                relax_vertex: !strict_vertex,
            };
            let fixed = schedule.as_deref().map(|p| -> anyhow::Result<_> { Ok(parse_schedule(&read_file(p)?)?) }).transpose()?;
            if let Some(s) = &fixed {
                validate_schedule(&h, s).map_err(ModelError::from)?;
            }
            if let (Some(s), false, false) = (&fixed, exhaustive, heur.heuristic) {
                let o = solve_schedule(&h, s, &options)?;
                let mut body = optimum_json(&o);
                body["command"] = json!("optimize");
                body["mode"] = json!("fixed");
                return Ok(ok(body));
            }
            let mode = if heur.heuristic {
                OptimizeMode::Heuristic {
                    budget: heur.budget,
                    seed: seed_or_env(heur.seed),
                }
            } else {
                OptimizeMode::Exhaustive
            };
            let config = OptimizeConfig {
                mode: mode.clone(),
                options,
                jobs,
                seeds: fixed.iter().cloned().collect(),
                symmetry: true,
            };
            let r = optimize_over_schedules(&h, &config)?;
            let mut body = optimum_json(&r.best);
            body["command"] = json!("optimize");
            body["mode"] = json!(if heur.heuristic { "heuristic" } else { "exhaustive" });
            body["argmin_count"] = json!(r.argmins.len());
            body["argmins"] = r.argmins.iter().map(schedule_json).collect();
            if let Some(s) = &fixed {
                body["schedule_is_argmin"] = json!(r.argmins.contains(s));
            }
            Ok(ok(body))
        }
        Command::Evaluate {
            pattern,
            schedule,
            params,
            strict_vertex,
        } => {
            let h = load_pattern(&pattern)?;
            let s = parse_schedule(&read_file(&schedule)?)?;
            let p = parse_params(&read_file(&params)?, &h)?;
            let cost = cost_exponent(&h, &s, &p)?;
            let adm = check_admissibility(&h, &p, !strict_vertex)?;
            Ok(ok(json!({
                "command": "evaluate",
                "cost": serde_json::to_value(&cost)?,
                "admissibility": serde_json::to_value(&adm)?,
            })))
        }
        Command::Simulate {
            check,
            n,
            params,
            trials,
            seed,
        } => {
            let seed = seed_or_env(seed);
            let text = params.as_deref().map(read_file).transpose()?;
            fn load<T: for<'de> serde::Deserialize<'de>>(text: &Option<String>, default: T) -> anyhow::Result<T> {
                match text {
                    Some(t) => serde_json::from_str(t).map_err(|e| {
                        anyhow::Error::new(IoError::Parse {
                            what: "simulation params",
                            line: e.line(),
                            column: e.column(),
                            message: e.to_string(),
                        })
                    }),
                    None => Ok(default),
                }
            }
            let (name, frequency, bound, pass, report) = match check {
                Check::LambdaClaim => {
                    if !(1..=1625).contains(&n) {
                        return Err(IoError::Validation {
                            what: "simulate",
                            message: format!("n = {n} outside 1..=1625"),
                        }
                        .into());
                    }
                    let r = mc_lambda_claim(n, trials, seed);
                    ("lambda-claim", r.frequency, 1.0, r.pass, serde_json::to_value(&r)?)
                }
                Check::Lemma3 => {
                    let p = load(
                        &text,
                        Lemma3Params {
                            gamma_size: 100,
                            sym_diff: 20,
                            p: 120,
                            r: 30,
                        },
                    )?;
                    let r = mc_lemma3_random(n, &p, trials, seed)?;
                    let pass = r.frequency >= LEMMA3_PASS;
                    ("lemma3", r.frequency, r.floor, pass, serde_json::to_value(&r)?)
                }
                Check::Regularity => {
                    let p = load(
                        &text,
                        RegularityParams {
                            r_i: 16,
                            r_j: 16,
                            r_k: 16,
                            f_ij: 128,
                            f_ik: 128,
                            kappa: 1,
                        },
                    )?;
                    let r = mc_regularity(&p, trials, seed)?;
                    ("regularity", r.frequency, r.bound, r.pass, serde_json::to_value(&r)?)
                }
                Check::VertexSwap | Check::PairSwap => {
                    let p = load(
                        &text,
                        SwapParams {
                            r_i: 16,
                            r_j: 16,
                            r_k: 16,
                            f_ij: 128,
                            f_ik: 128,
                            f_jk: 128,
                        },
                    )?;
                    let (name, r) = if matches!(check, Check::VertexSwap) {
                        ("vertex-swap", mc_vertex_swap(&p, trials, seed)?)
                    } else {
                        ("pair-swap", mc_pair_swap(&p, trials, seed)?)
                    };
                    (name, r.frequency, r.tolerance, r.pass, serde_json::to_value(&r)?)
                }
            };
            Ok(Report {
                body: json!({
                    "command": "simulate",
                    "check": name,
                    "n": n,
                    "seed": seed,
                    "frequency": frequency,
                    "bound": bound,
                    "pass": pass,
                    "report": report,
                }),
                pass,
            })
        }
        Command::Verify {
            what: VerifyWhat::Tails { nmax },
        } => {
            let r = verify_tail_bounds(&TailGrid::standard(nmax), false);
            let pass = r.ok();
            Ok(Report {
                body: json!({
                    "command": "verify tails",
                    "pass": pass,
                    "points_checked": r.points_checked,
                    "skipped": r.skipped,
                    "resolved_exactly": r.resolved_exactly,
                    "violations": serde_json::to_value(&r.violations)?,
                    "grid": serde_json::to_value(&r.grid)?,
                }),
                pass,
            })
        }
        Command::Find { pattern, instance } => {
            let h = load_pattern(&pattern)?;
            let g = parse_instance(&read_file(&instance)?)?;
            let mut counter = QueryCounter::new();
            let emb = find_subhypergraph(&g, &h, &mut counter);
            Ok(ok(json!({
                "command": "find",
                "found": emb.is_some(),
                "embedding": emb,
                "queries": {"distinct": counter.distinct(), "total": counter.total()},
            })))
        }
        Command::Assoc { what } => match what {
            AssocWhat::Check { table } => {
                let f = parse_operator(&read_file(&table)?)?;
                let r = is_associative(&f);
                Ok(ok(json!({
                    "command": "assoc check",
                    "n": f.n(),
                    "associative": r == Associativity::Associative,
                    "violation": match r {
                        Associativity::Violation { tuple } => json!(tuple),
                        Associativity::Associative => Value::Null,
                    },
                })))
            }
            AssocWhat::Certificate { table, case } => {
                let f = parse_operator(&read_file(&table)?)?;
                let cert = find_certificate(&f, case);
                let reduction = build_reduction(&f, case);
                let mut counter = QueryCounter::new();
                let occurrence = reduction.find_occurrence(&mut counter);
                if occurrence.map(|o| o.to_vec()) != cert.map(|c| c.tuple.to_vec()) {
                    return Err(anyhow!("reduction and direct search disagree"));
                }
                Ok(ok(json!({
                    "command": "assoc certificate",
                    "case": case.to_string(),
                    "certificate": cert.map(|c| c.tuple.to_vec()),
                    "reduction_queries": counter.total(),
                })))
            }
        },
    }
}

/// Satisfaction frequency required of the coupling check.
const LEMMA3_PASS: f64 = 0.99;

fn emit(report: &Report, output: Option<&Path>) -> anyhow::Result<()> {
    let mut body = report.body.clone();
    round_floats(&mut body);
    let text = serde_json::to_string_pretty(&body)? + "\n";
    print!("{text}");
    if let Some(path) = output {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|r| emit(&r, cli.output.as_deref()).map(|_| r.pass));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERDICT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_input_error(&e) { INVALID_INPUT } else { INTERNAL })
        }
    }
}
