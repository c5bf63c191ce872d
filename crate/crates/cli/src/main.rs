use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use relax2d_cli::{load_config_text, run, CliError, Command, RunSpec};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sub {
    Envelope,
    Roc,
    Fem,
    Compare,
    Plotdata,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Envelope => Command::Envelope,
            Sub::Roc => Command::Roc,
            Sub::Fem => Command::Fem,
            Sub::Compare => Command::Compare,
            Sub::Plotdata => Command::Plotdata,
        }
    }
}

/// Relaxation of planar Biot-type energies.
#[derive(Debug, Parser)]
#[command(name = "relax2d", version)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// JSON file, or inline JSON starting with `{`. Defaults to `{}`.
    #[arg(long)]
    config: Option<String>,
    /// Output directory (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for element and grid loops.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = (|| {
        if let Some(n) = args.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let text = match &args.config {
            Some(c) => load_config_text(c)?,
            None => "{}".to_string(),
        };
        let spec = RunSpec::parse(args.command.into(), &text, args.out.clone(), args.seed)?;
        run(&spec)
    })();
    match outcome {
        Ok(o) => {
            print!("{}", o.summary);
            for a in &o.artifacts {
                println!("wrote {}", a.display());
            }
            if let Some(e) = &o.failure {
                eprintln!("error: {e}");
            }
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
