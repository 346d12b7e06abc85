use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qbnf_core::pipeline::DEFAULT_TOLERANCE;
use qbnf_core::{
    emit_plot_data, parse_config, run_pipeline, run_props, PipelineOptions, PlotSeries, QbnfError,
    RunReport,
};

#[derive(Parser)]
#[command(
    name = "qbnf",
    version,
    about = "Quantum Birkhoff normal forms on the torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the configuration, the approximation function and the frequency scan.
    Check(RunArgs),
    /// Run the full pipeline and write the JSON report.
    Run(RunArgs),
    /// Run the seeded property suites.
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        cases: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract a two-column data series from a report.
    Plot {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        report: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        series: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    full_coeffs: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<bool, QbnfError> {
    match command {
        Command::Check(args) => pipeline(args, true),
        Command::Run(args) => pipeline(args, false),
        Command::Props { seed, cases, out } => {
            let report = run_props(seed, cases)?;
            for s in &report.suites {
                eprintln!(
                    "{:<28} {:>5} cases  {:>3} failures  worst {:.3e}",
                    s.name, s.cases, s.failures, s.worst
                );
            }
            let text =
                serde_json::to_string_pretty(&report).map_err(|e| QbnfError::Io(e.to_string()))?;
            write_output(out.as_deref(), &text)?;
            Ok(report.success)
        }
        Command::Plot {
            report,
            config,
            series,
            out,
        } => {
            let which: PlotSeries = series.parse()?;
            let value: serde_json::Value = match (report, config) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| QbnfError::Io(format!("{}: {e}", path.display())))?;
                    serde_json::from_str(&text)
                        .map_err(|e| QbnfError::Input(format!("report: {e}")))?
                }
                (None, Some(path)) => {
                    let cfg = parse_config(&path)?;
                    let rep = run_pipeline(&cfg, PipelineOptions::default())?;
                    serde_json::to_value(&rep).map_err(|e| QbnfError::Io(e.to_string()))?
                }
                (None, None) => {
                    return Err(QbnfError::Input("plot needs --report or --config".into()))
                }
            };
            write_output(out.as_deref(), &emit_plot_data(&value, which)?)?;
            Ok(true)
        }
    }
}

fn pipeline(args: RunArgs, check_only: bool) -> Result<bool, QbnfError> {
    let cfg = parse_config(&args.config)?;
    let options = PipelineOptions {
        check_only,
        tolerance: args.tolerance,
        full_coeffs: args.full_coeffs,
        seed: args.seed,
    };
    let started = Instant::now();
    let report = run_pipeline(&cfg, options)?;
    eprintln!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    summarize(&report);
    write_output(args.out.as_deref(), &report.to_json()?)?;
    Ok(report.success)
}

fn summarize(report: &RunReport) {
    for e in &report.errors {
        match e.t {
            Some(t) => eprintln!("error [t={t}] {}: {}", e.stage, e.detail),
            None => eprintln!("error {}: {}", e.stage, e.detail),
        }
    }
    for run in &report.runs {
        if let Some(rec) = &run.recursion {
            let flag = if rec.conjugacy.relative <= report.tolerance {
                "ok"
            } else {
                "exceeds tolerance"
            };
            eprintln!(
                "t={}: conjugacy residual {:.3e} (relative {:.3e}, {flag})",
                run.t, rec.conjugacy.max_norm, rec.conjugacy.relative
            );
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), QbnfError> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| QbnfError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            let tail = if text.ends_with('\n') { "" } else { "\n" };
            match write!(out, "{text}{tail}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}
