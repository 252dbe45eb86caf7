//! `harmo`: score the rhythmic harmony between a music track and a pose
//! sequence, inspect beats and meters, generate synthetic pairs and plot
//! beat timelines.

mod commands;
mod fail;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use harmo_core::AnalysisConfig;

use fail::CliError;

#[derive(Parser)]
#[command(name = "harmo", version, about = "Audio-visual rhythmic harmony scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score one audio/pose pair and write the full report.
    Analyze {
        audio: PathBuf,
        poses: PathBuf,
        #[command(flatten)]
        io: OutputArgs,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Detect raw and salient beats of an audio file, a pose file or both.
    Beats {
        #[arg(long, required_unless_present = "poses")]
        audio: Option<PathBuf>,
        #[arg(long)]
        poses: Option<PathBuf>,
        #[command(flatten)]
        io: OutputArgs,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Classify the meter of an audio file (or a beat JSON) and cut it into meter units.
    Meter {
        input: PathBuf,
        /// Frame rate of the meter-unit temporal indices.
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        #[command(flatten)]
        io: OutputArgs,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Generate a synthetic click track and pose sequence with known beats.
    Synth {
        /// Generator settings (JSON); built-in defaults when omitted.
        spec: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write poses as CSV instead of JSON.
        #[arg(long)]
        pose_csv: bool,
    },
    /// Render a report or beat JSON as an SVG timeline or a CSV beat table.
    Plot {
        input: PathBuf,
        /// Output file; `.svg` or `.csv`.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score many pairs listed in a CSV manifest (columns `audio,poses[,name]`) in parallel.
    Batch {
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Config file plus per-flag overrides (flags win).
#[derive(Args, Clone, Default)]
struct Tuning {
    /// JSON or TOML config file.
    #[arg(long, env = "HARMO_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lambda1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    t_delay: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    transition_beats: Option<usize>,
    /// Moving-average width applied to the joint velocity sum.
    #[arg(long)]
    smooth_j: Option<usize>,
    /// Frame rate for CSV pose files.
    #[arg(long)]
    pose_fps: Option<f64>,
}

impl Tuning {
    fn resolve(&self) -> Result<AnalysisConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => AnalysisConfig::load(path).map_err(|e| CliError::new(fail::CONFIG, e.to_string()))?,
            None => AnalysisConfig::default(),
        };
        if let Some(v) = self.lambda1 {
            cfg.lambda1 = v;
        }
        if let Some(v) = self.lambda2 {
            cfg.lambda2 = v;
        }
        if let Some(v) = self.t_delay {
            cfg.t_delay = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.transition_beats {
            cfg.transition_beats = v;
        }
        if self.smooth_j.is_some() {
            cfg.smooth_j = self.smooth_j;
        }
        cfg.validate().map_err(|e| CliError::new(fail::CONFIG, e.to_string()))?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Analyze { audio, poses, io, tuning } => {
            let cfg = tuning.resolve()?;
            commands::analyze(&audio, &poses, tuning.pose_fps, &cfg, io.output.as_deref(), io.format == Format::Csv)
        }
        Command::Beats { audio, poses, io, tuning } => {
            let cfg = tuning.resolve()?;
            commands::beats(audio.as_deref(), poses.as_deref(), tuning.pose_fps, &cfg, io.output.as_deref(), io.format == Format::Csv)
        }
        Command::Meter { input, fps, io, tuning } => {
            let cfg = tuning.resolve()?;
            commands::meter(&input, fps, &cfg, io.output.as_deref(), io.format == Format::Csv)
        }
        Command::Synth { spec, out_dir, seed, pose_csv } => commands::synth(spec.as_deref(), &out_dir, seed, pose_csv),
        Command::Plot { input, output } => commands::plot(&input, &output),
        Command::Batch { manifest, out_dir, jobs, tuning } => {
            let cfg = tuning.resolve()?;
            commands::batch(&manifest, &out_dir, jobs, tuning.pose_fps, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("harmo: {e}");
            ExitCode::from(e.code)
        }
    }
}
