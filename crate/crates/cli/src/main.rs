//! Command-line front end for the possibilistic decision library.
//!
//! Exit codes: 0 success; 1 evaluation error (bad criterion input,
//! exceeded audit budget, ...); 2 unusable input (usage error,
//! unreadable file, parse error); 3 an audit check failed and reported a
//! counterexample.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qdm_core::axioms::{
    self, census_pu_classes, normalized_lottery_count, total_lottery_count, AuditSpec, CheckName,
    DEFAULT_BUDGET,
};
use qdm_core::criteria::Assignment;
use qdm_core::dsl::{self, Problem, Query, QueryOutcome, ReductionMode};
use qdm_core::{Attitude, Criterion, RefinedPolicy};

#[derive(Parser)]
#[command(
    name = "qdm",
    version,
    about = "Qualitative decision making under possibilistic uncertainty",
    long_about = "Evaluate and compare possibilistic lotteries under the classical and refined \
                  qualitative criteria, reduce compound lotteries, and run exhaustive axiom \
                  audits on desk-scale spaces."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Collapse duplicate elements when merging refined degrees
    /// (default: keep them; collapsing restores the classical ties).
    #[arg(long, global = true, value_name = "BOOL")]
    nabla_dedupe: Option<bool>,

    /// Collapse duplicate pairwise merges in the refined min
    /// (default: collapse).
    #[arg(long, global = true, value_name = "BOOL")]
    delta_dedupe: Option<bool>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse::<Criterion>().map_err(|e| e.to_string())
}

fn parse_attitude(s: &str) -> Result<Attitude, String> {
    s.parse::<Attitude>().map_err(|e| e.to_string())
}

fn parse_reduction(s: &str) -> Result<ReductionMode, String> {
    match s {
        "R" => Ok(ReductionMode::Classical),
        "RR" => Ok(ReductionMode::Refined),
        other => Err(format!("expected `R` or `RR`, got `{other}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a criterion on one lottery, or run every query of the file.
    Eval {
        /// Problem file (.qdm).
        file: PathBuf,
        /// Lottery to evaluate; omit to run the file's own queries.
        lottery: Option<String>,
        #[arg(long, value_parser = parse_criterion)]
        criterion: Option<Criterion>,
        #[arg(long, value_parser = parse_attitude)]
        attitude: Option<Attitude>,
        /// Assignment name (defaults to the only one declared).
        #[arg(long)]
        assignment: Option<String>,
    },
    /// Compare two lotteries under a criterion.
    Compare {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, value_parser = parse_criterion)]
        criterion: Criterion,
        #[arg(long, value_parser = parse_attitude)]
        attitude: Option<Attitude>,
        #[arg(long)]
        assignment: Option<String>,
    },
    /// Reduce a compound lottery to a simple (R) or refined (RR) one.
    Reduce {
        file: PathBuf,
        lottery: String,
        /// Reduction rule: R (max-min) or RR (information-preserving).
        #[arg(long, value_parser = parse_reduction)]
        under: ReductionMode,
    },
    /// Exhaustively audit the axioms on a generated desk-scale space.
    Audit {
        /// Number of consequences of the generated space.
        #[arg(long, default_value_t = 3)]
        consequences: usize,
        /// Number of scale levels.
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Mixture depth exercised by the substitution checks.
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, value_parser = parse_criterion, default_value = "pu")]
        criterion: Criterion,
        #[arg(long, value_parser = parse_attitude, default_value = "pessimistic")]
        attitude: Attitude,
        /// Comma-separated check names (default: every check for the criterion).
        #[arg(long)]
        checks: Option<String>,
        /// Instance ceiling per check.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Count lotteries and value classes of a generated space.
    Census {
        #[arg(long, default_value_t = 5)]
        consequences: usize,
        #[arg(long, default_value_t = 11)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let policy = RefinedPolicy {
        nabla_dedupe: cli
            .nabla_dedupe
            .unwrap_or(RefinedPolicy::default().nabla_dedupe),
        delta_dedupe: cli
            .delta_dedupe
            .unwrap_or(RefinedPolicy::default().delta_dedupe),
    };
    match run(cli, policy) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("qdm: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn eval_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn load_problem(path: &PathBuf) -> Result<(Problem, String), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let problem =
        dsl::parse(&text).map_err(|e| input_error(format!("{}:{e}", path.display())))?;
    Ok((problem, text))
}

fn run(cli: Cli, policy: RefinedPolicy) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Eval {
            ref file,
            ref lottery,
            criterion,
            attitude,
            ref assignment,
        } => {
            let (problem, source) = load_problem(file)?;
            let outcomes = match lottery {
                Some(name) => {
                    let criterion = criterion.ok_or_else(|| {
                        input_error("--criterion is required when naming a lottery")
                    })?;
                    let query = Query::Eval {
                        lottery: name.clone(),
                        criterion,
                        attitude,
                        assignment: assignment.clone(),
                    };
                    vec![problem
                        .run_query(&query, policy)
                        .map_err(|e| eval_error(e.to_string()))?]
                }
                None => problem
                    .run_all(policy)
                    .map_err(|e| eval_error(e.to_string()))?,
            };
            emit_outcomes(cli.format, file, &source, policy, &outcomes);
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            ref file,
            ref left,
            ref right,
            criterion,
            attitude,
            ref assignment,
        } => {
            let (problem, source) = load_problem(file)?;
            let query = Query::Compare {
                left: left.clone(),
                right: right.clone(),
                criterion,
                attitude,
                assignment: assignment.clone(),
            };
            let outcome = problem
                .run_query(&query, policy)
                .map_err(|e| eval_error(e.to_string()))?;
            emit_outcomes(cli.format, file, &source, policy, &[outcome]);
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce {
            ref file,
            ref lottery,
            under,
        } => {
            let (problem, source) = load_problem(file)?;
            let query = Query::Reduce {
                lottery: lottery.clone(),
                mode: under,
            };
            let outcome = problem
                .run_query(&query, policy)
                .map_err(|e| eval_error(e.to_string()))?;
            emit_outcomes(cli.format, file, &source, policy, &[outcome]);
            Ok(ExitCode::SUCCESS)
        }
        Command::Audit {
            consequences,
            levels,
            depth,
            criterion,
            attitude,
            ref checks,
            budget,
        } => {
            let names = match checks {
                Some(list) => {
                    let mut names = Vec::new();
                    for part in list.split(',').filter(|p| !p.is_empty()) {
                        names.push(
                            part.parse::<CheckName>()
                                .map_err(|e| input_error(e.to_string()))?,
                        );
                    }
                    names
                }
                None => axioms::default_checks(criterion),
            };
            if names.is_empty() {
                return Err(input_error(format!(
                    "criterion {criterion} has no audit checks; use pu or rpu"
                )));
            }
            let mut spec = AuditSpec::new(consequences, levels);
            spec.max_depth = depth;
            spec.criterion = criterion;
            spec.attitude = attitude;
            spec.policy = policy;
            spec.budget = budget;
            let report =
                axioms::run_audit(&spec, &names).map_err(|e| eval_error(e.to_string()))?;
            match cli.format {
                Format::Text => print!("{}", report.render_text()),
                Format::Structured => {
                    let doc = json!({
                        "invocation": {
                            "subcommand": "audit",
                            "consequences": consequences,
                            "levels": levels,
                            "depth": depth,
                            "criterion": criterion,
                            "attitude": attitude,
                            "checks": names.iter().map(|n| n.name()).collect::<Vec<_>>(),
                            "budget": budget,
                        },
                        "policy": policy,
                        "checks": report.checks,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("report serializes")
                    );
                }
            }
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Command::Census {
            consequences,
            levels,
            budget,
        } => {
            let mut spec = AuditSpec::new(consequences, levels);
            spec.budget = budget;
            let space = spec.space();
            let scale = spec.scale();
            let assignment = Assignment::spread(&space, &scale);
            let census = census_pu_classes(&space, &scale, &assignment, budget)
                .map_err(|e| eval_error(e.to_string()))?;
            let check = axioms::check_census(&spec).map_err(|e| eval_error(e.to_string()))?;
            match cli.format {
                Format::Text => {
                    println!(
                        "space: {consequences} consequences, {levels} levels ({} lotteries, {} normalized)",
                        total_lottery_count(consequences, levels),
                        normalized_lottery_count(consequences, levels),
                    );
                    println!(
                        "classes: {} nonempty of at most {}",
                        census.class_count,
                        2 * levels - 1
                    );
                    println!("most populated: {}", census.most_populated.render(&scale));
                    for (value, count) in &census.classes {
                        println!("  {:<12} {count}", value.render(&scale));
                    }
                    if !check.passed() {
                        println!("census check FAILED");
                    }
                }
                Format::Structured => {
                    let doc = json!({
                        "invocation": {
                            "subcommand": "census",
                            "consequences": consequences,
                            "levels": levels,
                            "budget": budget,
                        },
                        "lotteries": total_lottery_count(consequences, levels).to_string(),
                        "normalized": normalized_lottery_count(consequences, levels).to_string(),
                        "class_count": census.class_count,
                        "most_populated": census.most_populated.render(&scale),
                        "classes": census.classes.iter()
                            .map(|(v, c)| json!([v.render(&scale), c]))
                            .collect::<Vec<_>>(),
                        "check": check,
                    });
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&doc).expect("census serializes")
                    );
                }
            }
            if check.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn emit_outcomes(
    format: Format,
    file: &PathBuf,
    source: &str,
    policy: RefinedPolicy,
    outcomes: &[QueryOutcome],
) {
    match format {
        Format::Text => {
            let single = outcomes.len() == 1;
            for outcome in outcomes {
                if !single {
                    println!("query {}", outcome.description);
                }
                let indent = if single { "" } else { "  " };
                for (label, value) in &outcome.values {
                    println!("{indent}{label} = {value}");
                }
                if let Some(verdict) = outcome.verdict {
                    println!("{indent}{verdict}");
                }
                for warning in &outcome.warnings {
                    eprintln!("warning: {warning}");
                }
            }
        }
        Format::Structured => {
            let doc = json!({
                "invocation": {
                    "input": file.display().to_string(),
                    "source": source,
                },
                "policy": policy,
                "results": outcomes.iter().map(|o| json!({
                    "query": o.description,
                    "values": o.values,
                    "verdict": o.verdict,
                    "warnings": o.warnings,
                })).collect::<Vec<_>>(),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("outcome serializes")
            );
        }
    }
}
