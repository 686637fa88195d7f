use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gasfc_cli::commands::{self, BaselineKind, DenoiseArgs, MpArgs};
use gasfc_cli::{cmd_evaluate, cmd_run, exit_code, EXIT_OK, EXIT_USAGE};
use gasfc_core::wavelets::WaveletName;

/// Ethereum gas-price forecasting toolkit.
#[derive(Parser)]
#[command(name = "gasfc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate raw transaction and block dumps into per-block features.
    Ingest {
        #[arg(long)]
        transactions: PathBuf,
        #[arg(long)]
        blocks: PathBuf,
        /// Percentile ranks of the gas price to add as columns.
        #[arg(long, value_delimiter = ',', default_value = "5,25,50,75,95")]
        percentiles: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Downsample block features (and price ticks) onto a regular grid.
    Frame {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        ticks: Option<PathBuf>,
        /// Step in seconds.
        #[arg(long, default_value_t = 300)]
        resolution: i64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wavelet coherence between two variables of a frame.
    Coherence {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// First row to use.
        #[arg(long, requires = "rows")]
        from: Option<usize>,
        /// Number of rows to use.
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hard-threshold wavelet denoising of one variable.
    Denoise {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long, default_value = "min_gas_price")]
        variable: String,
        #[arg(long, default_value = "db4")]
        wavelet: WaveletName,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 3.0)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Matrix profile of one variable.
    Mp {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long, default_value = "min_gas_price")]
        variable: String,
        #[arg(long, default_value_t = 288)]
        window: usize,
        /// Write snapshots on growing prefixes into the output directory.
        #[arg(long)]
        rolling: bool,
        #[arg(long, default_value_t = 288)]
        step: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the frame with the profile aligned as column `mp`.
        #[arg(long)]
        aligned: Option<PathBuf>,
    },
    /// Train and evaluate a forecasting experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the lookahead table from one or more run directories.
    Evaluate {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "min_gas_price")]
        label: String,
        /// Minutes per lookahead step.
        #[arg(long, default_value_t = 5)]
        step_minutes: i64,
    },
    /// Trailing-window oracle recommendations per block.
    Baseline {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        candidate: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Geth,
    Gse,
}

fn dispatch(cmd: Command) -> gasfc_core::Result<String> {
    match cmd {
        Command::Ingest {
            transactions,
            blocks,
            percentiles,
            out,
        } => commands::cmd_ingest(&transactions, &blocks, &percentiles, &out),
        Command::Frame {
            features,
            ticks,
            resolution,
            out,
        } => commands::cmd_frame(&features, ticks.as_deref(), resolution, &out),
        Command::Coherence { frame, x, y, from, rows, out } => {
            let range = rows.map(|r| (from.unwrap_or(0), r));
            commands::cmd_coherence(&frame, &x, &y, range, &out)
        }
        Command::Denoise {
            frame,
            variable,
            wavelet,
            depth,
            levels,
            lambda,
            out,
        } => commands::cmd_denoise(&DenoiseArgs {
            frame: &frame,
            variable: &variable,
            wavelet,
            depth,
            levels: &levels,
            lambda,
            out: &out,
        }),
        Command::Mp {
            frame,
            variable,
            window,
            rolling,
            step,
            out,
            aligned,
        } => commands::cmd_mp(&MpArgs {
            frame: &frame,
            variable: &variable,
            window,
            rolling: rolling.then_some(step),
            out: &out,
            aligned: aligned.as_deref(),
        }),
        Command::Run { config, out } => cmd_run(&config, out.as_deref()).map(|d| format!("run_dir={}\n", d.display())),
        Command::Evaluate {
            runs,
            label,
            step_minutes,
        } => cmd_evaluate(&runs).map(|r| r.to_table(&label, step_minutes)),
        Command::Baseline {
            features,
            kind,
            candidate,
            out,
        } => {
            let kind = match kind {
                Kind::Geth => BaselineKind::Geth,
                Kind::Gse => BaselineKind::Gse,
            };
            commands::cmd_baseline(&features, kind, candidate, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK } as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()) as u8)
        }
    }
}
