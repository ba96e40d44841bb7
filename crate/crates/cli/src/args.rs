use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use inc_core::model::ModelSpec;
use inc_core::numcore::Precision;
use inc_core::trainer::{Mode, TrainConfig};

#[derive(Debug, Parser)]
#[command(name = "inc", version, about = "Implicit neural compression of mesh snapshot data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset file.
    Gen(GenArgs),
    /// Train a compressor and write the model, report.csv and summary.json.
    Compress(CompressArgs),
    /// Evaluate a model on a mesh and write the reconstruction.
    Reconstruct(ReconstructArgs),
    /// Compare two dataset files.
    Eval(EvalArgs),
    /// Estimate a sketch size from losses and an intrinsic dimension.
    Dimest(DimestArgs),
    /// Repeated training runs over a list of sample factors.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Pulse2d,
    Branch3d,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Grid side for pulse2d.
    #[arg(long, default_value_t = 32)]
    pub side: usize,
    /// Point count for branch3d.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    /// Number of snapshots.
    #[arg(long = "T", default_value_t = 64)]
    pub time_count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    OfflineBaseline,
    OfflineSubsample,
    OfflineFjlt,
    InsituBaseline,
    InsituSubsample,
    InsituFjlt,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::OfflineBaseline => Mode::OfflineBaseline,
            ModeArg::OfflineSubsample => Mode::OfflineSubsample,
            ModeArg::OfflineFjlt => Mode::OfflineFjlt,
            ModeArg::InsituBaseline => Mode::InSituBaseline,
            ModeArg::InsituSubsample => Mode::InSituSubsample,
            ModeArg::InsituFjlt => Mode::InSituFjlt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    #[value(name = "32")]
    F32,
    #[value(name = "64")]
    F64,
}

/// Optimization and architecture flags shared by `compress` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub batch_full: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_sketch: usize,
    /// Optimizer steps per arriving snapshot.
    #[arg(long, default_value_t = 300)]
    pub cycles: usize,
    /// Full-snapshot buffer capacity.
    #[arg(long, default_value_t = 1)]
    pub full_capacity: usize,
    /// Sketch buffer capacity (default: T - 1).
    #[arg(long)]
    pub sketch_capacity: Option<usize>,
    #[arg(long, value_enum, default_value = "32")]
    pub precision: PrecisionArg,
    #[arg(long, default_value_t = ModelSpec::default().hyper_width)]
    pub hyper_width: usize,
    #[arg(long, default_value_t = ModelSpec::default().hyper_blocks)]
    pub hyper_blocks: usize,
    #[arg(long, default_value_t = ModelSpec::default().target_width)]
    pub target_width: usize,
    #[arg(long, default_value_t = ModelSpec::default().target_blocks)]
    pub target_blocks: usize,
    #[arg(long, default_value_t = ModelSpec::default().omega0)]
    pub omega0: f64,
    #[arg(long, default_value_t = ModelSpec::default().omega_hidden)]
    pub omega_hidden: f64,
    #[arg(long, default_value_t = ModelSpec::default().hyper_scale)]
    pub hyper_scale: f64,
    /// Snapshots per offline step (default: batch-full + batch-sketch).
    #[arg(long)]
    pub offline_batch: Option<usize>,
    /// Offline optimizer steps (default: T * cycles).
    #[arg(long)]
    pub offline_steps: Option<usize>,
}

impl TrainArgs {
    pub fn config(&self, mode: Mode, sample_factor: f64, seed: u64) -> TrainConfig {
        TrainConfig {
            mode,
            lr: self.lr,
            lambda: self.lambda,
            batch_full: self.batch_full,
            batch_sketch: self.batch_sketch,
            cycles_per_snapshot: self.cycles,
            sample_factor,
            full_capacity: self.full_capacity,
            sketch_capacity: self.sketch_capacity,
            master_seed: seed,
            precision: match self.precision {
                PrecisionArg::F32 => Precision::F32,
                PrecisionArg::F64 => Precision::F64,
            },
            model: ModelSpec {
                hyper_width: self.hyper_width,
                hyper_blocks: self.hyper_blocks,
                target_width: self.target_width,
                target_blocks: self.target_blocks,
                omega0: self.omega0,
                omega_hidden: self.omega_hidden,
                hyper_scale: self.hyper_scale,
            },
            offline_batch: self.offline_batch,
            offline_steps: self.offline_steps,
            test_every: 0,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    /// Dataset file (INCD).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Sketch size as a percentage of the mesh size.
    #[arg(long, default_value_t = 5.0)]
    pub sample_factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record the error on snapshots seen so far every this many arrivals.
    #[arg(long, default_value_t = 0)]
    pub test_every: usize,
    /// Output directory.
    #[arg(short, long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Model artifact.
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset file providing the mesh.
    #[arg(long)]
    pub mesh: PathBuf,
    /// Comma-separated snapshot indices (default: all).
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<usize>>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth dataset.
    #[arg(long)]
    pub reference: PathBuf,
    /// Reconstructed dataset.
    #[arg(long)]
    pub candidate: PathBuf,
    /// Also write the metrics JSON here.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DimestArgs {
    /// Relative training loss of the full-data run.
    #[arg(long)]
    pub full_loss: f64,
    /// Relative training loss of the sketched run.
    #[arg(long)]
    pub sketch_loss: f64,
    /// Intrinsic dimension; estimated from --model when omitted.
    #[arg(long = "M")]
    pub m: Option<f64>,
    /// Mesh size; taken from --mesh when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Model trained on the first snapshot, for the dimension estimate.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Dataset file providing the mesh.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub t: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub perturb: f64,
    #[arg(long, default_value_t = inc_core::dimest::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "insitu-fjlt")]
    pub mode: ModeArg,
    /// Comma-separated sample factors.
    #[arg(long, value_delimiter = ',', required = true)]
    pub factors: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Seed of the first trial; trial i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV with one row per (factor, seed).
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub train: TrainArgs,
}
