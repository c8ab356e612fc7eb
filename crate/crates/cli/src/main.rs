use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use omtrans::{Experiment, Result};
use omtrans_cli::analyze::{analyze, read_stream, AnalyzeOptions};
use omtrans_cli::{exit_code, load_config, parse_count, run, RunOptions, StreamFormat};

const DEFAULT_OUT: &str = "omtrans-out";

#[derive(Parser)]
#[command(name = "omtrans", version, about = "Simulate and analyse optomechanical transduction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV tables and summary.
    Run {
        #[arg(value_parser = parse_experiment)]
        experiment: Experiment,
        /// TOML file merged over the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "paper_defaults")]
        preset: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Repetitions setting the statistics (accepts e.g. 1e7).
        #[arg(long, value_parser = parse_count)]
        reps: Option<u64>,
        #[arg(long, env = "OMTRANS_OUT_DIR")]
        out: Option<PathBuf>,
        /// Encoding of saved click streams.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Correlation analysis of a saved click stream (.csv, or .bin with .meta).
    Analyze {
        stream: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_delta_i: usize,
        /// CW histogram bin width, s.
        #[arg(long, default_value_t = 20e-9)]
        bin_width: f64,
        /// CW histogram half range, s.
        #[arg(long, default_value_t = 10e-6)]
        max_tau: f64,
        #[arg(long, env = "OMTRANS_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Print the resolved configuration as TOML.
    Config {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "paper_defaults")]
        preset: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

fn parse_experiment(s: &str) -> std::result::Result<Experiment, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
        format!("unknown experiment `{s}` (one of: {})", names.join(", "))
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            preset,
            seed,
            reps,
            out,
            format,
        } => {
            let mut cfg = load_config(&preset, config.as_deref())?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            if let Some(r) = reps {
                cfg.set_repetitions(experiment, r)?;
            }
            let out_dir = out
                .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            let format = match format {
                Format::Csv => StreamFormat::Csv,
                Format::Binary => StreamFormat::Binary,
            };
            let files = run(experiment, &cfg, &RunOptions { out_dir, format })?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Analyze {
            stream,
            max_delta_i,
            bin_width,
            max_tau,
            out,
        } => {
            let s = read_stream(&stream)?;
            let stem = stream.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let dir = out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)).join(format!("analyze-{stem}"));
            let opts = AnalyzeOptions {
                max_delta_i,
                bin_width,
                max_tau,
            };
            for f in analyze(&s, &opts, &dir)? {
                println!("{}", f.display());
            }
        }
        Command::Config { config, preset } => {
            print!("{}", load_config(&preset, config.as_deref())?.to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
