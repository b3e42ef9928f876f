use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use slo_cli::{
    run_experiment, summarize, summary_csv, summary_table, ExperimentSpec, HarnessError,
};

#[derive(Parser)]
#[command(
    name = "slo",
    version,
    about = "Run and summarize sequential local optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write traces plus a summary table.
    Run(Box<RunArgs>),
    /// Tabulate existing trace CSVs.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tensor, autoencoder, supervised or quartic.
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated subset of gd,bpg,pgd,ngd,ls,agp.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    #[arg(long)]
    rounds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    budget_evals: Option<String>,
    #[arg(long)]
    budget_seconds: Option<String>,
    /// Output directory for traces and the summary.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any other config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write an SVG chart per method.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Reference optimum; defaults to the lowest value in the files.
    #[arg(long)]
    f_star: Option<f64>,
    /// Write summary.csv here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

fn build_spec(args: &RunArgs) -> Result<ExperimentSpec, HarnessError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            ExperimentSpec::from_config(&text)?
        }
        None => ExperimentSpec::default(),
    };
    if let Some(p) = &args.problem {
        spec.set("problem", p)?;
    }
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            slo_cli::SpecError::new(format!("--set expects key=value, got `{kv}`"))
        })?;
        spec.set(k.trim(), v.trim())?;
    }
    let flags = [
        ("methods", &args.method),
        ("epsilon", &args.epsilon),
        ("radius", &args.radius),
        ("margin", &args.margin),
        ("rounds", &args.rounds),
        ("seed", &args.seed),
        ("budget_evals", &args.budget_evals),
        ("budget_seconds", &args.budget_seconds),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            spec.set(key, v)?;
        }
    }
    if let Some(out) = &args.out {
        spec.output_dir = Some(out.clone());
    }
    spec.svg |= args.svg;
    Ok(spec)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run(args) => {
            let spec = build_spec(&args)?;
            let out = run_experiment(&spec)?;
            print!("{}", summary_table(&out.summary));
        }
        Command::Summarize(args) => {
            let summary = summarize(&args.files, args.f_star)?;
            print!("{}", summary_table(&summary));
            if let Some(dir) = args.out {
                fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
                let path = dir.join("summary.csv");
                fs::write(&path, summary_csv(&summary)).map_err(|e| HarnessError::io(&path, e))?;
            }
        }
    }
    Ok(())
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            eprintln!("{}", error_line("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
