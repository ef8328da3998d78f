use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isoframe_bench::{emit, emit_lines, run_experiment, run_lines, BenchError, ExperimentSpec, Preset};

#[derive(Parser)]
#[command(name = "bench", about = "Surrogate accuracy sweeps across domain transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "bench-out")]
    out_dir: PathBuf,
    /// Use a built-in sweep instead of a spec file: 2d, 4d, 8d or 16d.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// At most 10 repeats and 10⁴ test points.
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the RMSE sweep.
    Run { spec: Option<PathBuf> },
    /// Sample fitted surrogates along random lines.
    Lines {
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        lines: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

fn load(cli: &Cli, path: Option<&PathBuf>) -> Result<ExperimentSpec, BenchError> {
    let mut spec = match (path, &cli.preset) {
        (Some(_), Some(_)) => return Err(BenchError::Spec("give either a spec file or --preset".into())),
        (Some(p), None) => {
            let text = std::fs::read_to_string(p).map_err(|e| BenchError::Spec(format!("{}: {e}", p.display())))?;
            ExperimentSpec::from_json(&text)?
        }
        (None, Some(name)) => Preset::parse(name)
            .ok_or_else(|| BenchError::Spec(format!("unknown preset `{name}`")))?
            .spec(),
        (None, None) => return Err(BenchError::Spec("no spec file or --preset given".into())),
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if cli.quick {
        spec = spec.quick();
    }
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { spec } => load(&cli, spec.as_ref()).and_then(|spec| {
            let result = run_experiment(&spec)?;
            emit(&result, &spec, &cli.out_dir)?;
            Ok(result.failures())
        }),
        Command::Lines { spec, lines, points } => load(&cli, spec.as_ref()).and_then(|spec| {
            let sets = run_lines(&spec, *lines, *points)?;
            emit_lines(&sets, &cli.out_dir)?;
            Ok(0)
        }),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} cells failed; see the failure column of rmse.csv");
            ExitCode::from(3)
        }
        Err(e @ BenchError::Spec(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
