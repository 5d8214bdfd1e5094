mod commands;
mod failure;
mod state_spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wehrl_core::Preset;

use crate::failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "wehrl", version, about = "Wehrl moments and GME estimation for symmetric multiqubit states")]
struct Cli {
    /// Run on a single worker thread.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the three main subsets (split train/test) and the squeezed set.
    Generate(GenerateArgs),
    /// Wehrl moments W^(1..q_max) and ratios of one state.
    Moments(MomentsArgs),
    /// Reference GME and moment-based estimates of one state.
    Gme(GmeArgs),
    /// Train one regressor per q_max on a generated dataset.
    Train(TrainArgs),
    /// MRE reports for the requested methods on a dataset split.
    Evaluate(EvaluateArgs),
    /// Method-comparison and GME-histogram tables from earlier outputs.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetArg {
    Paper,
    Desk,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Paper => Preset::Paper,
            PresetArg::Desk => Preset::Desk,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Dicke,
    Permanent,
    Quadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Squeezed,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Squeezed => "squeezed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Ratio,
    Accel,
    Ann,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n_qubits: usize,
    /// Highest stored moment order.
    #[arg(long, default_value_t = 8)]
    pub q_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    pub preset: PresetArg,
    /// Records per main subset (overrides the preset).
    #[arg(long)]
    pub per_subset: Option<usize>,
    /// Squeezed records (overrides the preset; 0 skips the set).
    #[arg(long)]
    pub squeezed: Option<usize>,
    #[arg(long, default_value_t = wehrl_core::dataset::DEFAULT_SQUEEZE_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = wehrl_core::dataset::DEFAULT_SQUEEZE_DT)]
    pub dt: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct StateArgs {
    /// ghz | dicke:K | coherent:THETA:PHI | majorana:T1:P1,T2:P2,... |
    /// amplitudes:RE:IM,RE:IM,...
    #[arg(long)]
    pub state: String,
    /// Needed for ghz, dicke and coherent states.
    #[arg(long)]
    pub n_qubits: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 8)]
    pub q_max: usize,
    #[arg(long, value_enum, default_value_t = Route::Dicke)]
    pub route: Route,
    /// Write moments.json and config.json here instead of printing.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GmeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 8)]
    pub q_max: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Ratio, MethodArg::Accel])]
    pub methods: Vec<MethodArg>,
    /// Model file for the ann method (its q_max is used).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Directory written by `generate`.
    #[arg(long)]
    pub data: PathBuf,
    /// One model per listed q_max.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub q_max: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    pub preset: PresetArg,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Held-out loss every this many epochs.
    #[arg(long, default_value_t = 1)]
    pub eval_every: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Split::Test)]
    pub split: Split,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Ratio, MethodArg::Accel])]
    pub methods: Vec<MethodArg>,
    /// Directory written by `train` (needed for ann).
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Truncations to evaluate; defaults to 2..=stored q_max.
    #[arg(long, value_delimiter = ',')]
    pub q_max: Vec<usize>,
    /// Also write per-state prediction dumps.
    #[arg(long)]
    pub dump_predictions: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ExportArgs {
    /// Directory written by `evaluate`.
    #[arg(long)]
    pub reports: Option<PathBuf>,
    /// Directory written by `generate`, for GME histograms.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.deterministic {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build_global()
            .map_err(|e| Failure::Other(e.into()))?;
    }
    let deterministic = cli.deterministic;
    match cli.command {
        Command::Generate(a) => commands::generate(&a, deterministic),
        Command::Moments(a) => commands::moments(&a, deterministic),
        Command::Gme(a) => commands::gme(&a, deterministic),
        Command::Train(a) => commands::train(&a, deterministic),
        Command::Evaluate(a) => commands::evaluate(&a, deterministic),
        Command::Export(a) => commands::export(&a, deterministic),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wehrl: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
