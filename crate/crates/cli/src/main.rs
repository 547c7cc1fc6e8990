use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qrlab_cli::{execute, verdict, CliError, Command, Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "qrlab",
    version,
    about = "Verification campaigns for uniformly quasiregular maps"
)]
struct Args {
    /// Command to run; may instead be set as `name` in the `[command]` table.
    command: Option<Command>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `output` in the config, else `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("QRLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| CliError::Config(format!("QRLAB_THREADS={v:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let command = cfg.resolve_command(args.command)?;
    let out = args
        .out
        .or_else(|| cfg.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let (report, _) = execute(command, &cfg, args.format, &out)?;
    print!("{}", report.to_text());
    verdict(&report)
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qrlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
