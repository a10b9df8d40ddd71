use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use siamalign::dataeval::{Difficulty, DEFAULT_TOLERANCE};
use siamalign::dtw::DEFAULT_RADIUS;
use siamalign::pipeline::DtwKind;
use siamalign::signal::{Transform, DEFAULT_CONTEXT};
use siamalign::simmatrix::{MatrixMode, DEFAULT_THRESHOLD};
use std::path::PathBuf;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "siamalign",
    version,
    about = "Audio-to-score alignment with a Siamese CNN and DTW"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic corpus of aligned score/performance pairs
    GenData(GenDataArgs),
    /// Train a Siamese network on a corpus
    Train(TrainArgs),
    /// Align a performance WAV to a score (MIDI or WAV)
    Align(AlignArgs),
    /// Score alignment accuracy over a corpus for the mode × transform grid
    Eval(EvalArgs),
    /// Write PGM images of spectrograms and the similarity matrix with its path
    Plot(PlotArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenDataArgs {
    /// Output dataset root
    #[arg(long)]
    pub out: PathBuf,
    /// Number of pieces
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// easy, medium or hard
    #[arg(long, default_value_t = Difficulty::Medium)]
    pub difficulty: Difficulty,
    /// Notes per piece
    #[arg(long, default_value_t = 80)]
    pub notes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset root written by gen-data
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for the model and loss CSV
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = Transform::Cqt)]
    pub transform: Transform,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Patch pairs sampled for training [default: 800 for stft, 2400 for cqt]
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = siamalign::net::DEFAULT_MARGIN)]
    pub margin: f64,
    /// Frames per patch (odd)
    #[arg(long, default_value_t = DEFAULT_CONTEXT)]
    pub context: usize,
}

/// Flags shared by `align` and `plot`.
#[derive(Debug, Args, Serialize)]
pub struct AlignFlags {
    /// Score as a MIDI file (rendered with the default timbre) or WAV
    #[arg(long)]
    pub score: PathBuf,
    /// Performance WAV
    #[arg(long)]
    pub perf: PathBuf,
    /// Model file, or a directory holding model-<transform>.siam
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = Transform::Cqt)]
    pub transform: Transform,
    #[arg(long, default_value_t = MatrixMode::Distance)]
    pub mode: MatrixMode,
    #[arg(long, default_value_t = DtwKind::Fast)]
    pub dtw: DtwKind,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_CONTEXT)]
    pub context: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AlignArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: AlignFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct PlotArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: AlignFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Dataset root written by gen-data
    #[arg(long)]
    pub data: PathBuf,
    /// Model directory (model-stft.siam, model-cqt.siam) or, with
    /// --transform, a single model file
    #[arg(long)]
    pub model: PathBuf,
    /// Evaluate one transform only [default: both]
    #[arg(long)]
    pub transform: Option<Transform>,
    #[arg(long, default_value_t = DtwKind::Fast)]
    pub dtw: DtwKind,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: usize,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Accuracy tolerance in seconds
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_CONTEXT)]
    pub context: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("--{name} must be a positive number, got {v}"))
    }
}

fn context_ok(context: usize) -> Result<(), String> {
    // two 2×2 poolings need at least four rows
    if context % 2 == 1 && context >= 5 {
        Ok(())
    } else {
        Err(format!("--context must be odd and at least 5, got {context}"))
    }
}

impl Cli {
    /// Checks cross-field constraints clap cannot express.
    pub fn validate(&self) -> Result<(), String> {
        match &self.command {
            Command::GenData(a) => {
                if a.count == 0 || a.notes == 0 {
                    return Err("--count and --notes must be at least 1".into());
                }
            }
            Command::Train(a) => {
                positive("learning-rate", a.learning_rate)?;
                positive("margin", a.margin)?;
                context_ok(a.context)?;
                if a.epochs == 0 || a.batch_size == 0 || a.pairs == Some(0) {
                    return Err("--epochs, --batch-size and --pairs must be at least 1".into());
                }
            }
            Command::Align(AlignArgs { flags }) | Command::Plot(PlotArgs { flags }) => {
                positive("threshold", flags.threshold)?;
                context_ok(flags.context)?;
            }
            Command::Eval(a) => {
                positive("threshold", a.threshold)?;
                positive("tolerance", a.tolerance)?;
                context_ok(a.context)?;
                if a.transform.is_none() && a.model.is_file() {
                    return Err("--model is a single file; pass --transform or a model directory".into());
                }
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> &PathBuf {
        match &self.command {
            Command::GenData(a) => &a.out,
            Command::Train(a) => &a.out,
            Command::Align(a) => &a.flags.out,
            Command::Plot(a) => &a.flags.out,
            Command::Eval(a) => &a.out,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.command {
            Command::GenData(a) => Some(a.seed),
            Command::Train(a) => Some(a.seed),
            _ => None,
        }
    }
}
