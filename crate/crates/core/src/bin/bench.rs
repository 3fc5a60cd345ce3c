use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coevo::experiment::{run_experiment, summarize, summary_csv, write_records, ExperimentConfig, DEFAULT_TARGET};
use coevo::game::{appendix_oracle, trace_best_response_dynamics, verify_pne, BestResponseOptions, GameFunction, DEFAULT_PNE_TOL};
use coevo::partition::parse_partition;
use coevo::{Error, Partition, RunRecord};

#[derive(Parser)]
#[command(name = "bench", about = "Benchmark harness for cooperative coevolution and its equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (JSON, or TOML by extension) over its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Alternating best responses on a two-variable function; prints CSV.
    Trace {
        #[arg(long)]
        function: String,
        /// Comma-separated start point.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        max_cycles: usize,
    },
    /// Certify whether a point is a pure Nash equilibrium for a partition.
    Pne {
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// 1-based groups, e.g. "[[1],[2]]".
        #[arg(long)]
        partition: String,
        #[arg(long, default_value_t = DEFAULT_PNE_TOL)]
        tol: f64,
    },
    /// Summary table of record CSVs.
    Summarize {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TARGET)]
        target: f64,
    },
}

fn parse_point(s: &str) -> coevo::Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad coordinate `{t}`"))))
        .collect()
}

fn run(cli: Cli) -> coevo::Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            if out.is_some() {
                config.output_path = out;
            }
            let records = run_experiment(&config)?;
            if let Some(dir) = &config.output_path {
                for p in write_records(dir, &records, config.fitness_target)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            print!("{}", summary_csv(&summarize(&records, config.fitness_target)));
        }
        Command::Trace { function, start, max_cycles } => {
            let f: GameFunction = function.parse()?;
            let x0 = parse_point(&start)?;
            let trace = trace_best_response_dynamics(&f, &Partition::singletons(x0.len()), &x0, max_cycles, &BestResponseOptions::default())?;
            print!("{}", trace.to_csv());
            eprintln!("cycles={} converged={}", trace.cycles, trace.converged);
        }
        Command::Pne { function, point, partition, tol } => {
            let x = parse_point(&point)?;
            let f = GameFunction::from_id(&function, x.len())?;
            let p = parse_partition(&partition, x.len())?;
            let cert = verify_pne(&f, &p, &x, tol, &BestResponseOptions::default())?;
            println!("function={f} point={x:?} partition={p}");
            println!("is_pne={} is_strict={} unbounded={}", cert.is_pne, cert.is_strict, cert.unbounded);
            println!("per_group_gap={:?}", cert.per_group_gap);
            if let Ok(expected) = appendix_oracle(&f, &x, &p) {
                println!("closed_form={expected}");
            }
        }
        Command::Summarize { files, target } => {
            let records = files
                .iter()
                .map(|path| RunRecord::from_csv(&std::fs::read_to_string(path)?))
                .collect::<coevo::Result<Vec<_>>>()?;
            print!("{}", summary_csv(&summarize(&records, target)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::CovarianceFailure => ExitCode::FAILURE,
                _ => ExitCode::from(2),
            }
        }
    }
}
