use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pricefuse::commands::{self, ImageOption, PreprocessOptions, SynthOptions};
use pricefuse::config::ExperimentConfig;
use pricefuse::manifest::KeyValues;
use pricefuse::{Error, Result};
use pricefuse_core::synth::SynthMode;

/// Multimodal cellphone price-class prediction: preprocessing, training,
/// evaluation and embedding export.
#[derive(Parser)]
#[command(name = "pricefuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a cellphone CSV (plus optional images/embeddings) into a dataset directory.
    Preprocess(PreprocessArgs),
    /// Train one of the five models on a dataset directory.
    Train(TrainArgs),
    /// Score classifiers on fused embeddings of a trained model.
    Evaluate(EvaluateArgs),
    /// Write fused embeddings (and optionally raw layer activations) as PFT1 files.
    Embed(EmbedArgs),
    /// Export a 2-D PCA projection of fused embeddings as CSV.
    Visualize(VisualizeArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
}

/// Flags shared by commands that read an experiment config.
#[derive(Args)]
struct ConfigArgs {
    /// key=value config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    model: Option<u8>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    l1_alpha: Option<f64>,
    /// `output` (final dense kernel) or `all` (every dense/conv kernel).
    #[arg(long)]
    l1_placement: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma list, e.g. `knn,svm,fully_connected`.
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    knn_k: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self, paths: &[(&str, &Option<PathBuf>)]) -> Result<ExperimentConfig> {
        let mut o = KeyValues::new();
        macro_rules! opt {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    o.set(stringify!($field), v);
                }
            )*};
        }
        opt!(
            model,
            epochs,
            learning_rate,
            batch_size,
            l1_alpha,
            l1_placement,
            seed,
            classifiers,
            knn_k
        );
        for (k, p) in paths {
            if let Some(p) = p {
                o.set(k, p.display());
            }
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
            o.set(k.trim(), v.trim());
        }
        ExperimentConfig::resolve(self.config.as_deref(), &o)
    }
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    let p = p
        .as_deref()
        .ok_or_else(|| Error::Config(format!("no {what} given (flag or config key `{what}`)")))?;
    pricefuse::io::require_exists(p, what)?;
    Ok(p)
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Directory holding the files named in the picture column.
    #[arg(long, conflicts_with = "image_stack")]
    image_dir: Option<PathBuf>,
    /// Prebuilt PFT1 [records, H, W, 3] stack keyed by CSV row.
    #[arg(long)]
    image_stack: Option<PathBuf>,
    #[arg(long, default_value_t = pricefuse::images::IMAGE_SIDE)]
    image_side: usize,
    /// PFT1 [records, E] embedding matrix keyed by CSV row (for model 2).
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also write each fitted classifier under OUT/classifiers/.
    #[arg(long)]
    save_classifiers: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Dump every layer's output for this source record index.
    #[arg(long, value_name = "RECORD")]
    dump_activations: Option<usize>,
}

#[derive(Args)]
struct VisualizeArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Seed of the power-iteration start vectors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2000)]
    records: usize,
    /// `unimodal` or `multimodal`.
    #[arg(long, default_value = "multimodal")]
    mode: String,
    #[arg(long)]
    tabular_width: Option<usize>,
    #[arg(long)]
    image_side: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    split_ratio: f64,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Preprocess(a) => {
            let mut opts = PreprocessOptions::new(&a.csv);
            opts.images = match (a.image_dir, a.image_stack) {
                (Some(d), _) => Some(ImageOption::Directory(d)),
                (None, Some(s)) => Some(ImageOption::Stack(s)),
                _ => None,
            };
            opts.image_side = a.image_side;
            opts.embeddings = a.embeddings;
            opts.split_ratio = a.split_ratio;
            opts.split_seed = a.split_seed;
            let s = commands::preprocess(&opts, &a.out)?;
            Ok(format!(
                "wrote {} records ({} train, {} test, width {}), skipped {}",
                s.dataset.records(),
                s.dataset.train.len(),
                s.dataset.test.len(),
                s.dataset.tabular_width(),
                s.skipped.len()
            ))
        }
        Command::Train(a) => {
            let cfg = a.config.resolve(&[("dataset", &a.dataset)])?;
            let s = commands::train(&cfg, required(&cfg.dataset, "dataset")?, &a.out)?;
            Ok(format!(
                "model {}: train accuracy {:.4}, test accuracy {}",
                s.checkpoint.spec.id.number(),
                s.train_accuracy,
                s.test_accuracy.map_or("n/a".into(), |t| format!("{t:.4}"))
            ))
        }
        Command::Evaluate(a) => {
            let cfg = a
                .config
                .resolve(&[("dataset", &a.dataset), ("checkpoint", &a.checkpoint)])?;
            let r = commands::evaluate(
                &cfg,
                required(&cfg.checkpoint, "checkpoint")?,
                required(&cfg.dataset, "dataset")?,
                &a.out,
                a.save_classifiers,
            )?;
            Ok(r.to_text())
        }
        Command::Embed(a) => {
            let s = commands::embed(&a.checkpoint, &a.dataset, &a.out, a.dump_activations)?;
            Ok(format!(
                "fused embeddings: train {:?}, test {:?}; {} activation files",
                s.train.shape(),
                s.test.shape(),
                s.activations.len()
            ))
        }
        Command::Visualize(a) => {
            let s = commands::visualize(&a.checkpoint, &a.dataset, &a.out, a.seed)?;
            Ok(format!(
                "{} points, explained variance ratio {:?}, silhouette {:.4}",
                s.labels.len(),
                s.pca.explained_variance_ratio,
                s.silhouette
            ))
        }
        Command::Synth(a) => {
            let mode = match a.mode.as_str() {
                "unimodal" => SynthMode::Unimodal,
                "multimodal" => SynthMode::Multimodal,
                other => return Err(Error::Config(format!("unknown synth mode `{other}`"))),
            };
            let mut opts = SynthOptions::new(a.seed, a.records, mode);
            opts.tabular_width = a.tabular_width.unwrap_or(opts.tabular_width);
            opts.image_side = a.image_side.unwrap_or(opts.image_side);
            opts.split_ratio = a.split_ratio;
            opts.split_seed = a.split_seed;
            let ds = commands::synth(&opts, &a.out)?;
            Ok(format!(
                "wrote {} ({} train, {} test)",
                ds.source,
                ds.train.len(),
                ds.test.len()
            ))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let first = e
                .to_string()
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("error kind=usage message={first:?}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(msg) => {
            println!("{}", msg.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::FAILURE
        }
    }
}
