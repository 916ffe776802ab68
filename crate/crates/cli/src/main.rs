use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use qsync_cli::error::CliError;
use qsync_cli::{backend, output, scenario, sweep};

#[derive(Parser)]
#[command(name = "qsync", version, about = "Two-qubit synchronization-transition simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV + summary.
    Run {
        file: PathBuf,
        /// Output directory (overrides QSYNC_OUT_DIR).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the scenario's parameter sweep.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Execute runs sequentially instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Run the scenario under two backends and report deviations.
    Compare {
        file: PathBuf,
        /// Comma-separated backend pair, e.g. `qcm,lindblad`.
        #[arg(long)]
        backends: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("QSYNC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsync: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { file, out_dir } => {
            let scenario = scenario::parse_scenario(&file)?;
            let out_dir = resolve_out_dir(out_dir);
            let start = Instant::now();
            let result = backend::run_backend(&scenario)?;
            let csv = output::write_run(
                &scenario,
                &result,
                &out_dir,
                start.elapsed().as_secs_f64(),
            )?;
            println!("wrote {}", csv.display());
            if let Some(n) = result.transition_n {
                println!("transition detected at n = {n}");
            }
            Ok(())
        }
        Command::Sweep { file, out_dir, serial } => {
            let scenario = scenario::parse_scenario(&file)?;
            if scenario.sweep.is_none() {
                return Err(CliError::Validation("scenario has no [sweep] section".into()));
            }
            let out_dir = resolve_out_dir(out_dir);
            let start = Instant::now();
            let result = sweep::run_sweep(&scenario, &out_dir, serial, || {
                start.elapsed().as_secs_f64()
            })?;
            println!("wrote {} ({} runs)", result.grid_csv.display(), result.runs);
            Ok(())
        }
        Command::Compare { file, backends, out_dir } => {
            let scenario = scenario::parse_scenario(&file)?;
            let mut parts = backends.split(',');
            let (a, b) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => {
                    (scenario::Backend::parse(a.trim())?, scenario::Backend::parse(b.trim())?)
                }
                _ => {
                    return Err(CliError::Validation(
                        "--backends expects exactly two names, e.g. qcm,lindblad".into(),
                    ))
                }
            };
            let out_dir = resolve_out_dir(out_dir);
            std::fs::create_dir_all(&out_dir)?;
            let start = Instant::now();
            let comparison = backend::compare_backends(&scenario, a, b)?;

            let stem = scenario.output_stem();
            for (tag, which, out) in
                [(a.name(), "a", &comparison.a), (b.name(), "b", &comparison.b)]
            {
                let mut labeled = scenario.clone();
                labeled.backend = scenario::Backend::parse(tag)?;
                labeled.output = Some(format!("{stem}.{tag}"));
                let csv = output::render_csv(&labeled, &out.series)?;
                output::write_atomic(
                    &out_dir.join(format!("{stem}.{tag}.csv")),
                    csv.as_bytes(),
                )?;
                let _ = which;
            }
            let summary = serde_json::json!({
                "name": scenario.name,
                "backends": [a.name(), b.name()],
                "max_deviation": comparison
                    .max_deviation
                    .iter()
                    .map(|(label, dev)| serde_json::json!({"observable": label, "max_abs_dev": dev}))
                    .collect::<Vec<_>>(),
                "wall_time_s": start.elapsed().as_secs_f64(),
                "version": output::VERSION,
            });
            let path = out_dir.join(format!("{stem}.compare.json"));
            output::write_atomic(&path, format!("{summary:#}\n").as_bytes())?;
            println!("wrote {}", path.display());
            for (label, dev) in &comparison.max_deviation {
                println!("  {label}: max |dev| = {dev:.6}");
            }
            Ok(())
        }
        Command::Validate { file } => {
            scenario::parse_scenario(&file)?;
            println!("OK");
            Ok(())
        }
    }
}
