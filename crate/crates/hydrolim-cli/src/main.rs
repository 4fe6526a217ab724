use clap::{Parser, Subcommand};
use hydrolim_cli::{
    checks, config::ExperimentConfig, experiment, HarnessError, RunOptions,
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hydrolim",
    about = "Simulation lab for the small-aspect-ratio compressible flow system and its hydrostatic limit",
    version
)]
struct Cli {
    /// Output directory; the HYDROLIM_OUT environment variable overrides it
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the eps sweep (0 = auto)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Suppress progress output
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON configuration
    Run {
        /// Path to the configuration file
        #[arg(value_name = "CONFIG")]
        config: Option<PathBuf>,
        /// Alternative way of passing the configuration path
        #[arg(long = "config", value_name = "PATH", conflicts_with = "config")]
        config_flag: Option<PathBuf>,
    },
    /// Recompute aggregates from the CSV series of a finished run and print
    /// the rate table; fails if they disagree with the stored summary
    Rates {
        /// Directory containing summary.json and the CSV files
        #[arg(value_name = "SUMMARY_DIR")]
        dir: PathBuf,
    },
    /// Print the linear-model eigenvalue table and run the oracle self-tests
    Oracle,
    /// Run the structural invariant suite at small scale
    Check,
}

fn resolve_out_dir(cli_out: &Option<PathBuf>, config: &ExperimentConfig) -> PathBuf {
    if let Ok(env_out) = std::env::var("HYDROLIM_OUT") {
        if !env_out.is_empty() {
            return PathBuf::from(env_out);
        }
    }
    if let Some(out) = cli_out {
        return out.clone();
    }
    if let Some(out) = &config.out_dir {
        return PathBuf::from(out);
    }
    PathBuf::from("hydrolim_out")
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::Run {
            config,
            config_flag,
        } => {
            let path = config.or(config_flag).ok_or_else(|| {
                HarnessError::Config(
                    "missing configuration: pass `run <CONFIG>` or `run --config <PATH>`".into(),
                )
            })?;
            let config = ExperimentConfig::load(&path)?;
            let opts = RunOptions {
                out_dir: resolve_out_dir(&cli.out, &config),
                threads: cli.threads,
                quiet: cli.quiet,
            };
            let summary = experiment::run_experiment(&config, &opts)?;
            if !cli.quiet {
                println!("wrote {}", opts.out_dir.join(experiment::SUMMARY_FILE).display());
            }
            print!("{}", experiment::format_rate_table(&summary));
            let diverged = summary.runs.iter().filter(|r| !r.completed).count();
            if diverged > 0 {
                eprintln!("warning: {diverged} eps run(s) diverged; see summary.json");
            }
            Ok(0)
        }
        Command::Rates { dir } => {
            let verified = experiment::verify_summary_against_csv(&dir)?;
            println!("summary and CSV series agree to 1e-12");
            print!("{}", experiment::format_rate_table(&verified));
            Ok(0)
        }
        Command::Oracle => {
            let report = checks::oracle_report();
            for line in &report.lines {
                println!("{line}");
            }
            Ok(if report.ok { 0 } else { 1 })
        }
        Command::Check => {
            let report = checks::invariant_suite();
            for line in &report.lines {
                println!("{line}");
            }
            Ok(if report.ok { 0 } else { 1 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
