use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mtt_typecheck::frontend::{run_typecheck, Algorithm, Options, RunReport};
use mtt_typecheck::inference::InferOptions;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Algo {
    Ours,
    Classical,
    Mps,
}

/// Exact typechecking of a macro tree transducer against input and output
/// types. Exit status: 0 well-typed, 1 ill-typed, 2 error.
#[derive(Debug, Parser)]
#[command(name = "mttcheck", version)]
struct Cli {
    /// Transducer file.
    mtt: PathBuf,
    /// Input type (`.bta`, `.rtg`/`.grammar` or `.schema`).
    input: PathBuf,
    /// Output type, same formats as the input type.
    output: PathBuf,

    #[arg(long, value_enum, default_value = "ours")]
    algo: Algo,
    #[arg(long)]
    no_cartesian: bool,
    #[arg(long)]
    no_partition: bool,
    #[arg(long)]
    no_complement_output: bool,
    #[arg(long)]
    no_preprocess: bool,
    /// Print the witness in ranked and decoded form with its bad output.
    #[arg(long)]
    witness: bool,
    /// Print state counts, phase timings and emptiness counters.
    #[arg(long)]
    stats: bool,
    /// Print the full report as one JSON object instead.
    #[arg(long)]
    json: bool,
    /// Cross-check against evaluating every input of up to N nodes.
    #[arg(long, value_name = "N")]
    oracle_depth: Option<usize>,
    #[arg(long, value_name = "N", default_value_t = 1 << 16)]
    max_subsets: usize,
}

fn print_human(cli: &Cli, report: &RunReport) {
    println!("{}", report.verdict_line());
    if cli.witness {
        if let Some(w) = &report.witness {
            if let Some(d) = &w.decoded {
                println!("document: {d}");
            }
            println!("output:   {}", w.bad_output);
        }
    }
    if cli.stats {
        println!("algorithm: {}", report.options.algorithm);
        println!("ata states: {}", report.ata_states_materialized);
        println!("output dbta states: {}", report.output_dbta_states);
        println!("complement rule: {}", report.options.complement_active);
        if let Some(s) = &report.emptiness {
            println!(
                "emptiness: calls={} expanded={} assumed-empty={} known-nonempty={} contradictions={} reuse={} backtracks={}",
                s.calls, s.expanded, s.assumed_empty_hits, s.known_nonempty_hits, s.contradictions, s.witness_reuse, s.backtracks
            );
        }
        for p in &report.timings {
            println!("time {}: {:.3} ms", p.phase, p.millis);
        }
    }
    if let Some(o) = &report.oracle {
        match &o.counterexample {
            Some(t) => println!("oracle (<= {} nodes): counterexample {t}", o.depth),
            None => println!("oracle (<= {} nodes): no counterexample", o.depth),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let options = Options {
        algorithm: match cli.algo {
            Algo::Ours => Algorithm::Ours,
            Algo::Classical => Algorithm::Classical,
            Algo::Mps => Algorithm::Mps,
        },
        infer: InferOptions {
            cartesian: !cli.no_cartesian,
            partition: !cli.no_partition,
            complement: !cli.no_complement_output,
        },
        preprocess: !cli.no_preprocess,
        max_subsets: cli.max_subsets,
        oracle_depth: cli.oracle_depth,
    };
    let report = match run_typecheck(&cli.mtt, &cli.input, &cli.output, &options) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("mttcheck: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.json {
        println!("{}", report.to_json());
    } else {
        print_human(&cli, &report);
    }
    if report.oracle.as_ref().is_some_and(|o| !o.consistent) {
        eprintln!("mttcheck: verdict disagrees with the oracle");
        return ExitCode::from(2);
    }
    ExitCode::from(report.exit_code() as u8)
}
