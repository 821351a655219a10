//! Thin command-line front end over the library pipelines.

use clap::{Args, Parser, Subcommand};
use leontief::report::{
    self, AnalyzeOptions, BenchOptions, GraphOptions, PipelineError, SimulateOptions,
    ThresholdSpec,
};
use leontief::table::{Orientation, ParseOptions};
use leontief::walk::DEFAULT_STEP_CAP;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "leontief", version, about = "Structural analysis of input-output tables via absorbing Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ParseFlags {
    /// Transpose the flow matrix on ingest (column-major sources).
    #[arg(long)]
    transpose: bool,
    /// Drop zero-output poles with a warning instead of failing.
    #[arg(long)]
    drop_zero_poles: bool,
}

impl ParseFlags {
    fn options(self) -> ParseOptions {
        ParseOptions {
            transpose: self.transpose,
            drop_zero_output: self.drop_zero_poles,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis pipeline and write a JSON report.
    Analyze {
        input: PathBuf,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "indirect")]
        orientation: Orientation,
        /// Entries per sensitivity-extreme list.
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Export the essential-flow web as DOT.
    Graph {
        input: PathBuf,
        /// DOT destination; stdout when omitted.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, default_value = "indirect")]
        orientation: Orientation,
        /// Edge filter: 'fair' for 1/(n+1) or a value in (0, 1].
        #[arg(long, default_value = "fair")]
        threshold: ThresholdSpec,
        /// Keep pole self-loops in the output.
        #[arg(long)]
        self_loops: bool,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Monte-Carlo random walks with a z-scored comparison to the analytic
    /// absorption quantities.
    Simulate {
        input: PathBuf,
        /// Start pole code.
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 100_000)]
        walks: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        step_cap: u64,
        #[arg(long, default_value = "indirect")]
        orientation: Orientation,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        parse: ParseFlags,
    },
    /// Cross-country panel: summary rows, correlation matrix and scatter
    /// data.
    Bench {
        /// Panel manifest: country,growth_rate,table_path.
        panel: Option<PathBuf>,
        /// Precomputed summary rows replacing per-country analysis.
        #[arg(long)]
        summary_override: Option<PathBuf>,
        /// Country codes excluded from the correlation step.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        /// Output directory for the three CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        parse: ParseFlags,
    },
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), PipelineError> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| PipelineError::Io {
            path: p.display().to_string(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run() -> Result<(), PipelineError> {
    match Cli::parse().command {
        Command::Analyze {
            input,
            output,
            orientation,
            top_k,
            parse,
        } => {
            let report = report::analyze(
                &input,
                AnalyzeOptions {
                    orientation,
                    parse: parse.options(),
                    top_k,
                },
            )?;
            write_output(output.as_deref(), &report::to_json_pretty(&report))
        }
        Command::Graph {
            input,
            dot,
            orientation,
            threshold,
            self_loops,
            parse,
        } => {
            let rendered = report::graph_dot(
                &input,
                GraphOptions {
                    orientation,
                    threshold,
                    self_loops,
                    parse: parse.options(),
                },
            )?;
            write_output(dot.as_deref(), &rendered)
        }
        Command::Simulate {
            input,
            start,
            walks,
            seed,
            step_cap,
            orientation,
            output,
            parse,
        } => {
            let report = report::simulate_run(
                &input,
                &SimulateOptions {
                    orientation,
                    start,
                    walks,
                    seed,
                    step_cap,
                    parse: parse.options(),
                },
            )?;
            write_output(output.as_deref(), &report::to_json_pretty(&report))
        }
        Command::Bench {
            panel,
            summary_override,
            exclude,
            out,
            parse,
        } => {
            let output = report::bench(
                panel.as_deref(),
                summary_override.as_deref(),
                &BenchOptions {
                    exclude,
                    parse: parse.options(),
                },
            )?;
            fs::create_dir_all(&out).map_err(|e| PipelineError::Io {
                path: out.display().to_string(),
                source: e,
            })?;
            for (name, content) in [
                ("bench_summary.csv", &output.summary_csv),
                ("bench_correlations.csv", &output.correlations_csv),
                ("bench_scatter.csv", &output.scatter_csv),
            ] {
                write_output(Some(&out.join(name)), content)?;
            }
            for note in &output.diagnostics {
                eprintln!("note: {note}");
            }
            for failure in &output.failures {
                eprintln!("error: {failure}");
            }
            if output.failures.is_empty() {
                Ok(())
            } else {
                Err(PipelineError::Usage(format!(
                    "{} of {} countries failed",
                    output.failures.len(),
                    output.failures.len() + output.rows.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
