use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::ToPrimitive;

use markoff::census::{run_census, CensusConfig, CensusError, OutputFormat};
use markoff::dot::{export_dot, DotError};
use markoff::graph::{GraphError, GraphOptions, MarkoffGraph, DEFAULT_MAX_LIFT_MOVES};
use markoff::surface::{MarkoffTriple, SurfaceError, DEFAULT_ORACLE_BOUND};
use markoff::verify::verify;
use markoff::Prime;

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(name = "markoff", version, about = "Markoff graphs over prime fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Component census for every prime in a range.
    Census {
        #[arg(long = "min")]
        min_p: u64,
        #[arg(long = "max")]
        max_p: u64,
        #[arg(long, default_value = "csv", value_parser = OutputFormat::from_str)]
        format: OutputFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON-lines file of completed primes; an existing file is resumed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Skip the Penner-coordinate identities.
        #[arg(long)]
        no_penner: bool,
    },
    /// Run the invariant suite at one prime.
    Verify {
        p: u64,
        #[arg(long, default_value_t = DEFAULT_ORACLE_BOUND)]
        oracle_bound: u64,
    },
    /// Lift a vertex mod p to an integer Markoff triple.
    Lift {
        p: u64,
        #[arg(allow_negative_numbers = true)]
        x1: String,
        #[arg(allow_negative_numbers = true)]
        x2: String,
        #[arg(allow_negative_numbers = true)]
        x3: String,
    },
    /// Print the graph in Graphviz format.
    ExportDot {
        p: u64,
        /// Export even when p exceeds the size guard.
        #[arg(long)]
        force: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

fn graph_failure(e: GraphError) -> Failure {
    let code = match &e {
        GraphError::PathTooLong { .. } | GraphError::Surface(SurfaceError::TooLarge { .. }) => {
            EXIT_RESOURCE
        }
        _ => EXIT_USAGE,
    };
    Failure::new(code, e)
}

fn census_failure(e: CensusError) -> Failure {
    let code = match &e {
        CensusError::Config(_) => EXIT_USAGE,
        CensusError::Io { .. }
        | CensusError::Checkpoint { .. }
        | CensusError::Csv(_)
        | CensusError::Json(_) => EXIT_IO,
        CensusError::Graph { source, .. } => return graph_failure(source.clone()),
    };
    Failure::new(code, e)
}

fn parse_prime(p: u64) -> Result<Prime, Failure> {
    Prime::new(p).map_err(|e| Failure::new(EXIT_USAGE, e))
}

fn reduce(text: &str, p: Prime) -> Result<u64, Failure> {
    let value = BigInt::from_str(text)
        .map_err(|_| Failure::new(EXIT_USAGE, format!("{text:?} is not an integer")))?;
    let modulus = BigInt::from(p.get());
    let r = ((value % &modulus) + &modulus) % &modulus;
    Ok(r.to_u64().expect("residue fits in u64"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Census {
            min_p,
            max_p,
            format,
            out,
            checkpoint,
            workers,
            no_penner,
        } => {
            let config = CensusConfig {
                format,
                output: out,
                checkpoint,
                workers,
                penner_checks: !no_penner,
                ..CensusConfig::new(min_p, max_p)
            };
            let summary = run_census(&config).map_err(census_failure)?;
            for r in summary.out_of_scope() {
                eprintln!(
                    "note: p = {} is outside the p > 3 hypothesis; component sizes {:?}, divisible by p: {}",
                    r.p,
                    r.component_sizes,
                    if r.chen_ok_all { "yes" } else { "no" }
                );
            }
            for r in summary.disconnected() {
                eprintln!(
                    "finding: the graph mod {} is not connected (component sizes {:?})",
                    r.p, r.component_sizes
                );
            }
            for v in &summary.violations {
                eprintln!("violation: p = {}: {}", v.p, v.reason);
            }
            eprintln!(
                "census: {} prime(s), {} resumed from checkpoint, {} violation(s)",
                summary.records.len(),
                summary.resumed.len(),
                summary.violations.len()
            );
            Ok(if summary.violations.is_empty() {
                0
            } else {
                EXIT_VIOLATION
            })
        }
        Command::Verify { p, oracle_bound } => {
            let p = parse_prime(p)?;
            let report = verify(p, oracle_bound).map_err(graph_failure)?;
            println!("{report}");
            Ok(if report.passed() { 0 } else { EXIT_VIOLATION })
        }
        Command::Lift { p, x1, x2, x3 } => {
            let p = parse_prime(p)?;
            let coords = [reduce(&x1, p)?, reduce(&x2, p)?, reduce(&x3, p)?];
            let target = MarkoffTriple::new(p, coords).map_err(|e| Failure::new(EXIT_USAGE, e))?;
            let graph = MarkoffGraph::build_with(
                p,
                GraphOptions {
                    penner_checks: false,
                },
            )
            .map_err(graph_failure)?;
            let index = target.encode().map_err(|e| graph_failure(e.into()))?;
            match graph
                .lift_to_integers(index, DEFAULT_MAX_LIFT_MOVES)
                .map_err(graph_failure)?
            {
                Some(lift) => {
                    let reduced = lift.triple.reduce(p);
                    let ok = lift.triple.is_markoff() && reduced == target.residues();
                    println!("target: {target} mod {p}");
                    println!("path from (1, 1, 1): {}", lift.path);
                    println!("integer triple: {}", lift.triple);
                    println!(
                        "check: a1² + a2² + a3² = 3·a1·a2·a3 over Z: {}; reduces to ({}, {}, {}) mod {p}: {}",
                        if lift.triple.is_markoff() { "ok" } else { "FAILED" },
                        reduced[0],
                        reduced[1],
                        reduced[2],
                        if reduced == target.residues() { "ok" } else { "FAILED" },
                    );
                    Ok(if ok { 0 } else { EXIT_VIOLATION })
                }
                None => {
                    println!("no lift via base component: {target} is not connected to (1, 1, 1) mod {p}");
                    Ok(0)
                }
            }
        }
        Command::ExportDot { p, force } => {
            let p = parse_prime(p)?;
            let text = export_dot(p, force).map_err(|e| match e {
                DotError::TooLarge { .. } => Failure::new(EXIT_USAGE, e),
                DotError::Surface(s) => graph_failure(s.into()),
            })?;
            print!("{text}");
            Ok(0)
        }
    }
}
