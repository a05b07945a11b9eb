use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voterlab::dsl;
use voterlab::fault::{enumerate, InjectionSemantics, MaxFaults};
use voterlab::metrics::{fmr, fmr_builtin, rank, read_metrics_csv, reliability_curve};
use voterlab::report::{
    emit_analysis, emit_comparison, emit_curve, emit_ranking, emit_table, emit_truth_table, AnalysisFormat,
    ComparisonRow, TableFormat,
};
use voterlab::{builtin, Netlist, VoterName};

/// Fault masking analysis for TMR majority voters.
#[derive(Parser)]
#[command(name = "voterlab", version)]
struct Cli {
    /// Write the command's output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in voters.
    List,
    /// Print a voter as canonical DSL text.
    Show {
        /// Built-in voter name or path to a .voter file.
        voter: String,
    },
    /// Print the fault-free truth table.
    Truth {
        /// Built-in voter name or path to a .voter file.
        voter: String,
    },
    /// Print the truth-cum-fault enumeration table.
    Enumerate {
        /// Built-in voter name or path to a .voter file.
        voter: String,
        #[command(flatten)]
        fault: FaultArgs,
        /// Output format: md or csv.
        #[arg(long, default_value = "md")]
        format: TableFormat,
    },
    /// Compute the fault masking ratio.
    Fmr {
        /// Built-in voter name or path to a .voter file.
        voter: String,
        #[command(flatten)]
        fault: FaultArgs,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print the simplex vs. TMR reliability curve as CSV.
    Reliability {
        /// Grid spacing for module reliability; 1/step must be an integer.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Rank voters by FT-FOM from a metrics CSV.
    Rank {
        /// CSV with columns voter,power_uw,delay_ns,area_um2,fmr_percent.
        #[arg(long, value_name = "FILE")]
        metrics: PathBuf,
        /// Output format: md or csv.
        #[arg(long, default_value = "md")]
        format: TableFormat,
    },
    /// Check a .voter file and report the first error.
    Parse {
        /// Path to a .voter file.
        file: PathBuf,
    },
    /// Summarise FMR for all built-in voters under both semantics.
    Compare,
}

#[derive(Args)]
struct FaultArgs {
    /// Fault model: assign (force every internal node) or propagate (flip nodes).
    #[arg(long, default_value = "assign")]
    semantics: InjectionSemantics,
    /// Largest number of simultaneously disturbed internal nodes, or `all`.
    #[arg(long, default_value = "all")]
    max_faults: MaxFaults,
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<voterlab::Error> for Failure {
    fn from(e: voterlab::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Domain(e.to_string())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn is_path(arg: &str) -> bool {
    arg.contains(['.', '/', '\\'])
}

enum Source {
    Builtin(VoterName),
    File(Netlist),
}

impl Source {
    fn netlist(&self) -> Netlist {
        match self {
            Source::Builtin(v) => builtin(*v),
            Source::File(n) => n.clone(),
        }
    }
}

fn load(arg: &str) -> Result<Source, Failure> {
    if is_path(arg) {
        let text = read(Path::new(arg))?;
        let netlist = dsl::parse(&text).map_err(|e| Failure::Domain(format!("{arg}:{e}")))?;
        Ok(Source::File(netlist))
    } else {
        Ok(Source::Builtin(arg.parse()?))
    }
}

fn run(command: Command) -> Result<String, Failure> {
    Ok(match command {
        Command::List => VoterName::ALL.iter().map(|v| format!("{:<10} {}\n", v.as_str(), v.description())).collect(),
        Command::Show { voter } => dsl::serialize(&load(&voter)?.netlist()),
        Command::Truth { voter } => emit_truth_table(&load(&voter)?.netlist())?,
        Command::Enumerate { voter, fault, format } => {
            let rows = enumerate(&load(&voter)?.netlist(), fault.semantics, fault.max_faults)?;
            emit_table(&rows, format)?
        }
        Command::Fmr { voter, fault, json } => {
            let report = match load(&voter)? {
                Source::Builtin(v) => fmr_builtin(v, fault.semantics, fault.max_faults)?,
                Source::File(n) => fmr(&n, fault.semantics, fault.max_faults)?,
            };
            emit_analysis(&report, if json { AnalysisFormat::Json } else { AnalysisFormat::Text })
        }
        Command::Reliability { step } => emit_curve(&reliability_curve(step)?)?,
        Command::Rank { metrics, format } => {
            let entries = read_metrics_csv(&read(&metrics)?)?;
            emit_ranking(&rank(&entries)?, format)
        }
        Command::Parse { file } => {
            let text = read(&file)?;
            dsl::parse(&text).map_err(|e| Failure::Domain(format!("{}:{e}", file.display())))?;
            "ok\n".to_string()
        }
        Command::Compare => {
            let mut rows = Vec::new();
            for v in VoterName::ALL {
                rows.push(ComparisonRow {
                    voter: v.to_string(),
                    internal_nodes: builtin(v).internal_nodes().len(),
                    assignment: fmr_builtin(v, InjectionSemantics::Assignment, MaxFaults::All)?,
                    propagation: fmr_builtin(v, InjectionSemantics::Propagation, MaxFaults::All)?,
                    published: Some(v.published_fmr().to_string()),
                });
            }
            emit_comparison(&rows)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
