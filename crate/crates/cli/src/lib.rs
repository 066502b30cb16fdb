//! `techdraw` command line: dataset generation, previews, evaluation and
//! dataset verification.

mod settings;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use techdraw_core::dataset::{
    self, encode_png, label_lines, produce_sample, DEFAULT_RECOGNIZER_COUNT,
};
use techdraw_core::eval::{CerMode, Interpolation};
use techdraw_core::{
    derive_image_seed, evaluate, generate_dataset, read_ground_truth, read_predictions, regenerate,
    verify_dataset, write_recognizer_set, Composer, EvalOptions, ImageType, Mix,
};

pub use settings::{Preset, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config {origin}: {message}")]
    Config { origin: String, message: String },

    #[error(transparent)]
    Core(#[from] techdraw_core::Error),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "techdraw",
    version,
    about = "Synthetic technical-drawing datasets and detector scoring"
)]
pub struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a detection dataset of part drawings and clutter sheets.
    Generate(GenerateArgs),
    /// Generate 50x35 character images with a transcript file.
    RecognizerSet(RecognizerArgs),
    /// Render a few images of one type into a folder.
    Preview(PreviewArgs),
    /// Score a prediction file against ground truth.
    Evaluate(EvaluateArgs),
    /// Check a dataset directory against its manifest.
    Validate(ValidateArgs),
}

/// Generator settings shared by the generating commands.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Flat TOML file with generator settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override one setting, e.g. `--set augment.contrast=[0.8,1.2]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,

    /// Number of images.
    #[arg(long, conflicts_with = "preset")]
    pub n: Option<usize>,

    /// Part and clutter fractions, e.g. `0.7,0.3`.
    #[arg(long, conflicts_with = "preset", value_parser = parse_mix)]
    pub mix: Option<Mix>,

    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct RecognizerArgs {
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    /// Image type: 1 part drawing, 2 clutter sheet, 3 characters.
    #[arg(long = "type", value_parser = clap::value_parser!(u8).range(1..=3))]
    pub image_type: u8,

    /// Number of images.
    #[arg(long, default_value_t = 4)]
    pub k: usize,

    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InterpolationArg {
    AllPoints,
    ElevenPoint,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CerModeArg {
    Corpus,
    PerString,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Dataset directory or annotation file.
    #[arg(long)]
    pub gt: PathBuf,

    /// Prediction file.
    #[arg(long)]
    pub pred: PathBuf,

    /// Directory for `report.txt` and `report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Row label in the report table.
    #[arg(long, default_value = "model")]
    pub model: String,

    #[arg(long, default_value_t = techdraw_core::eval::DEFAULT_IOU_THRESHOLD)]
    pub iou: f64,

    #[arg(long, value_enum, default_value = "all-points")]
    pub interpolation: InterpolationArg,

    #[arg(long, value_enum, default_value = "corpus")]
    pub cer_mode: CerModeArg,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Dataset directory.
    #[arg(long)]
    pub gt: PathBuf,

    /// Also re-render every image from the manifest and compare digests.
    #[arg(long)]
    pub regenerate: bool,

    #[arg(long)]
    pub workers: Option<usize>,
}

fn parse_mix(s: &str) -> Result<Mix, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [p, c] = parts[..] else {
        return Err("expected two fractions, e.g. 0.7,0.3".into());
    };
    let num = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| format!("`{v}` is not a number"))
    };
    Mix::new(num(p)?, num(c)?).map_err(|e| e.to_string())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|source| {
        techdraw_core::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|source| {
        techdraw_core::Error::Io {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    let say = |out: &mut dyn Write, msg: String| {
        let _ = writeln!(out, "{msg}");
    };
    match cli.command {
        Command::Generate(a) => {
            let s = Settings::load(&a.cfg, a.preset, a.n, a.mix)?;
            let n =
                s.n.ok_or_else(|| CliError::Usage("generate needs --preset or --n".into()))?;
            let mix = s.mix.unwrap_or_default();
            let composer = Composer::new(s.composer)?;
            let m = generate_dataset(
                &composer,
                n,
                mix,
                s.workers.unwrap_or_else(default_workers),
                &a.out,
            )?;
            say(
                out,
                format!(
                    "wrote {} images ({} part, {} clutter) to {} with seed {}",
                    m.images.len(),
                    m.count(ImageType::Part),
                    m.count(ImageType::Clutter),
                    a.out.display(),
                    m.master_seed
                ),
            );
        }
        Command::RecognizerSet(a) => {
            let s = Settings::load(&a.cfg, None, a.n, None)?;
            let n = s.n.unwrap_or(DEFAULT_RECOGNIZER_COUNT);
            let composer = Composer::new(s.composer)?;
            let m = write_recognizer_set(
                &composer,
                n,
                s.workers.unwrap_or_else(default_workers),
                &a.out,
            )?;
            say(
                out,
                format!(
                    "wrote {} character images to {}",
                    m.images.len(),
                    a.out.display()
                ),
            );
        }
        Command::Preview(a) => {
            let s = Settings::load(&a.cfg, None, None, None)?;
            let t =
                ImageType::try_from(a.image_type).map_err(|e| CliError::Usage(e.to_string()))?;
            let composer = Composer::new(s.composer)?;
            create_dir(&a.out)?;
            for i in 0..a.k as u64 {
                let sample = produce_sample(
                    &composer,
                    i,
                    t,
                    derive_image_seed(composer.config().seed, i),
                )?;
                let stem = format!("preview_t{}_{i:03}", t.number());
                write_bytes(
                    &a.out.join(format!("{stem}.png")),
                    &encode_png(&sample.image)?,
                )?;
                write_bytes(
                    &a.out.join(format!("{stem}.txt")),
                    label_lines(&sample.scene.labeled_objects).as_bytes(),
                )?;
            }
            say(
                out,
                format!(
                    "wrote {} type-{} previews to {}",
                    a.k,
                    t.number(),
                    a.out.display()
                ),
            );
        }
        Command::Evaluate(a) => {
            if !(a.iou > 0.0 && a.iou <= 1.0) {
                return Err(CliError::Usage(format!(
                    "--iou {} must be in (0, 1]",
                    a.iou
                )));
            }
            let opts = EvalOptions {
                iou_threshold: a.iou,
                interpolation: match a.interpolation {
                    InterpolationArg::AllPoints => Interpolation::AllPoints,
                    InterpolationArg::ElevenPoint => Interpolation::ElevenPoint,
                },
                cer_mode: match a.cer_mode {
                    CerModeArg::Corpus => CerMode::Corpus,
                    CerModeArg::PerString => CerMode::PerString,
                },
            };
            let gt = read_ground_truth(&a.gt)?;
            let preds = read_predictions(&a.pred)?;
            let report = evaluate(&gt, &preds, &opts)?;
            let table = report.to_table(&a.model);
            if let Some(dir) = &a.out {
                create_dir(dir)?;
                write_bytes(&dir.join("report.txt"), table.as_bytes())?;
                write_bytes(&dir.join("report.json"), report.to_json().as_bytes())?;
            }
            say(out, table.trim_end().to_string());
        }
        Command::Validate(a) => {
            let mut bad = verify_dataset(&a.gt)?;
            if a.regenerate {
                bad.extend(regenerate(
                    &a.gt,
                    a.workers.unwrap_or_else(default_workers),
                )?);
            }
            if !bad.is_empty() {
                let list: Vec<String> = bad.iter().map(ToString::to_string).collect();
                return Err(CliError::Failed(format!(
                    "{} file(s) do not match the manifest:\n  {}",
                    bad.len(),
                    list.join("\n  ")
                )));
            }
            let m = dataset::read_manifest(&a.gt)?;
            say(
                out,
                format!(
                    "ok: {} images and {} files match the manifest",
                    m.images.len(),
                    m.files.len()
                ),
            );
        }
    }
    Ok(())
}
