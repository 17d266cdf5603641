use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phwc_cli::flowcmd::flow_manifest;
use phwc_cli::{
    apply_tolerances, emit_report, load_manifest_text, parse_manifest, read_report, run_checks,
    verify_paper, CliError, CliResult, Format, Report,
};

#[derive(Parser)]
#[command(
    name = "phwc",
    version,
    about = "Residual checks for maps into Hermitian targets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the manifest's checks at its sample points.
    Check(RunArgs),
    /// Like `check` with 1000 points unless `--points` is given.
    Sweep(RunArgs),
    /// Run the tension flow described by the manifest's flow block.
    Flow {
        #[command(flatten)]
        run: RunArgs,
        /// Write the final grid here (overrides the manifest).
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Run both built-in examples and the randomized suites.
    VerifyPaper(OutArgs),
    /// Re-render a saved JSON report.
    Report {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Manifest path or builtin name (example1, example2, heat).
    manifest: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, `check=value`; repeatable.
    #[arg(long = "tol", value_name = "CHECK=VALUE")]
    tol: Vec<String>,
    #[arg(long)]
    points: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

fn write(report: &Report, out: &OutputArgs) -> CliResult<()> {
    let format = match out.format {
        FormatArg::Json => Format::Json,
        FormatArg::Table => Format::Table,
    };
    let bytes = emit_report(report, format);
    match &out.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

fn run(command: Command) -> CliResult<bool> {
    match command {
        Command::Check(args) => checks(args, None),
        Command::Sweep(args) => checks(args, Some(1000)),
        Command::Flow { run, snapshot } => {
            let m = parse_manifest(&load_manifest_text(&run.manifest)?)?;
            if !run.tol.is_empty() {
                return Err(CliError::validation(
                    "--tol",
                    "flow takes its tolerance from flow.stop_tol",
                ));
            }
            let seed = run.seed.or(m.sample.seed).unwrap_or(0);
            let count = run.points.unwrap_or(if m.sample.count > 0 {
                m.sample.count
            } else {
                20
            });
            let snapshot = snapshot.as_ref().map(|p| p.to_string_lossy().into_owned());
            let out = flow_manifest(&m, count, seed, snapshot.as_deref())?;
            let last = out
                .result
                .trace
                .last()
                .expect("trace holds the initial state");
            eprintln!(
                "flow: {} steps, t = {:.4}, energy {:.6e}, max|tau| {:.3e}, converged: {}",
                last.step, last.time, last.energy, last.max_tension, out.result.converged
            );
            write(&out.report, &run.out)?;
            Ok(out.report.passed())
        }
        Command::VerifyPaper(args) => {
            let report = verify_paper(args.seed);
            write(&report, &args.out)?;
            Ok(report.passed())
        }
        Command::Report { input, out } => {
            let report = read_report(&std::fs::read(input)?)?;
            write(&report, &out)?;
            Ok(report.passed())
        }
    }
}

fn checks(args: RunArgs, default_points: Option<usize>) -> CliResult<bool> {
    let mut m = parse_manifest(&load_manifest_text(&args.manifest)?)?;
    apply_tolerances(&mut m.checks, &args.tol)?;
    let count = args.points.or(default_points).unwrap_or(m.sample.count);
    let seed = match args.seed.or(m.sample.seed) {
        Some(s) => s,
        None if count == 0 => 0,
        None => {
            return Err(CliError::validation(
                "sample.seed",
                "a seed is required when count > 0",
            ))
        }
    };
    let report = run_checks(&m, &m.checks, count, seed);
    write(&report, &args.out)?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
