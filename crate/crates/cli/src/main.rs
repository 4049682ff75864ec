use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pingpong_cli::{run_with_workers, Command, RunConfig, Status};

/// Finds and certifies ping-pong partners in desk-scale group actions.
///
/// Exit status: 0 pass, 1 failure with witness, 2 refusal or exhausted
/// budget, 64 malformed input, 65 operation unsupported by the model.
/// `PINGPONG_WORKERS` sets the number of worker threads.
#[derive(Parser)]
#[command(name = "pingpong", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Where to write the JSON record; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn workers() -> Result<Option<usize>, String> {
    match std::env::var("PINGPONG_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| format!("PINGPONG_WORKERS={v:?} is not a positive integer")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let parse_error = |msg: String| {
        eprintln!("pingpong: {msg}");
        ExitCode::from(Status::ParseError.exit_code() as u8)
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => return parse_error(format!("{}: {e}", cli.config.display())),
    };
    let cfg = match RunConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => return parse_error(format!("{}: {e}", cli.config.display())),
    };
    let workers = match workers() {
        Ok(w) => w,
        Err(e) => return parse_error(e),
    };
    let outcome = run_with_workers(cli.command, &cfg, workers);
    let rendered = outcome.render();
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("pingpong: {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{rendered}"),
    }
    if let Some(msg) = outcome.record.get("error").and_then(|e| e.get("message")).and_then(|m| m.as_str()) {
        eprintln!("pingpong: {}: {msg}", outcome.status.name());
    }
    ExitCode::from(outcome.status.exit_code() as u8)
}
