//! Command-line pipeline: dataset generation, training, evaluation, and
//! slot-level inference.
//!
//! Exit codes: 0 success, 2 usage/configuration error, 3 data-format error,
//! 4 training divergence.

mod config;

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use config::FileConfig;
use wctlab_core::dataset::{
    assemble_dataset, io::load_dataset, io::save_dataset, vectorize, VectorizationMode,
};
use wctlab_core::eval::{evaluate_dataset, render_text, to_csv};
use wctlab_core::labeling::{label_to_wct, LabelScheme, WctDecision};
use wctlab_core::mlp::io::{load_checkpoint, save_checkpoint, Checkpoint};
use wctlab_core::mlp::{train, Head, MlpModel, TrainConfig};
use wctlab_core::srs::{DescrambledSlot, SlotMeta};
use wctlab_core::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "wctlab",
    version,
    about = "Wireless channel type recognition laboratory"
)]
struct Cli {
    /// Worker thread cap (falls back to the WCTLAB_THREADS env var).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset from a TOML config.
    Generate {
        /// Config file path.
        #[arg(long)]
        config: PathBuf,
        /// Output dataset path.
        #[arg(long)]
        out: PathBuf,
        /// Master seed (overrides the config's seed; default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Vectorization mode (overrides the config).
        #[arg(long, value_parser = parse_mode)]
        mode: Option<VectorizationMode>,
    },
    /// Train a network on a generated dataset.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        /// Classification scheme; must match the dataset's labels.
        #[arg(long, value_parser = parse_scheme)]
        scheme: LabelScheme,
        /// Output checkpoint path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        batch: Option<usize>,
        /// Hidden layer sizes as "h1,h2,h3".
        #[arg(long)]
        hidden: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Per-epoch metrics CSV path (default: <out>.history.csv).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a dataset's inference split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Also write the machine-readable report here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Classify raw descrambled slots from a text file (one slot per line,
    /// 2·N_des whitespace- or comma-separated floats, interleaved re im).
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_mode(s: &str) -> Result<VectorizationMode, String> {
    match s {
        "reim" => Ok(VectorizationMode::RealImag),
        "magphase" => Ok(VectorizationMode::MagPhase),
        other => Err(format!("unknown mode {other:?} (expected reim|magphase)")),
    }
}

fn parse_scheme(s: &str) -> Result<LabelScheme, String> {
    match s {
        "single" => Ok(LabelScheme::Single),
        "multi" => Ok(LabelScheme::Multi),
        other => Err(format!("unknown scheme {other:?} (expected single|multi)")),
    }
}

/// Error categories mapped to exit codes.
enum CliError {
    Usage(String),
    Data(String),
    Diverged(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Diverged(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Diverged(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) => CliError::Usage(e.to_string()),
            CoreError::Format { .. } | CoreError::Io { .. } => CliError::Data(e.to_string()),
            CoreError::Diverged { .. } => CliError::Diverged(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("WCTLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("wctlab: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wctlab: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            config,
            out,
            seed,
            mode,
        } => cmd_generate(&config, &out, seed, mode),
        Command::Train {
            dataset,
            scheme,
            out,
            epochs,
            lr,
            batch,
            hidden,
            seed,
            history,
        } => cmd_train(
            &dataset, scheme, &out, epochs, lr, batch, hidden, seed, history,
        ),
        Command::Eval {
            model,
            dataset,
            csv,
        } => cmd_eval(&model, &dataset, csv),
        Command::Infer { model, input } => cmd_infer(&model, &input),
    }
}

fn cmd_generate(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    mode: Option<VectorizationMode>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", config.display())))?;
    let fc: FileConfig = toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", config.display())))?;
    let cfg = fc.to_sim_config().map_err(CliError::Usage)?;
    cfg.validate().map_err(CliError::from)?;
    let seed = seed.or(fc.seed).unwrap_or(0);
    let mode = mode.unwrap_or(fc.dataset.mode);
    let opts = fc.split_options(seed);

    let ds = assemble_dataset(
        &cfg,
        mode,
        fc.dataset.labels,
        fc.dataset.convention,
        &opts,
        seed,
    )?;
    save_dataset(&ds, out)?;
    println!(
        "samples {}x{}, train {}, infer {}",
        2 * ds.n_des,
        ds.train.n_columns() + ds.infer.n_columns(),
        ds.train.n_columns(),
        ds.infer.n_columns()
    );
    println!(
        "labels {} ({}), wrote {}",
        ds.label_space.label_dim(),
        ds.scheme().as_str(),
        out.display()
    );
    Ok(())
}

fn parse_hidden(s: &str) -> Result<[usize; 3], CliError> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("cannot parse hidden sizes {s:?}")))?;
    match parts.as_slice() {
        &[a, b, c] if a > 0 && b > 0 && c > 0 => Ok([a, b, c]),
        _ => Err(CliError::Usage(format!(
            "--hidden needs exactly three positive sizes, got {s:?}"
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    dataset: &Path,
    scheme: LabelScheme,
    out: &Path,
    epochs: Option<usize>,
    lr: Option<f64>,
    batch: Option<usize>,
    hidden: Option<String>,
    seed: Option<u64>,
    history: Option<PathBuf>,
) -> Result<(), CliError> {
    let ds = load_dataset(dataset)?;
    if ds.scheme() != scheme {
        return Err(CliError::Usage(format!(
            "dataset {} is labeled {} but --scheme is {}",
            dataset.display(),
            ds.scheme().as_str(),
            scheme.as_str()
        )));
    }

    let mut cfg = TrainConfig::default();
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    if let Some(l) = lr {
        cfg.learning_rate = l;
    }
    if let Some(b) = batch {
        cfg.batch_size = b;
    }
    if let Some(h) = hidden {
        cfg.hidden_dims = parse_hidden(&h)?;
    }
    if let Some(s) = seed {
        cfg.init_seed = s;
    }
    cfg.validate().map_err(CliError::from)?;

    let in_dim = 2 * ds.n_des;
    let out_dim = ds.label_space.label_dim();
    let dims = [
        in_dim,
        cfg.hidden_dims[0],
        cfg.hidden_dims[1],
        cfg.hidden_dims[2],
        out_dim,
    ];
    let head = Head::from_label_space(&ds.label_space);
    let mut model = MlpModel::<f32>::init(dims, head, cfg.init_seed)?;
    eprintln!(
        "training {} model {dims:?} on {} samples ({} epochs, batch {}, lr {})",
        scheme.as_str(),
        ds.train.n_columns(),
        cfg.epochs,
        cfg.batch_size,
        cfg.learning_rate
    );
    let history_rows = train(
        &mut model,
        &ds.train.samples.view(),
        &ds.train.labels.view(),
        Some((&ds.infer.samples.view(), &ds.infer.labels.view())),
        &cfg,
    )?;

    let history_path =
        history.unwrap_or_else(|| PathBuf::from(format!("{}.history.csv", out.display())));
    let mut csv = String::from("epoch,train_loss,train_accuracy,infer_loss,infer_accuracy\n");
    for m in &history_rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            m.epoch,
            m.train_loss,
            m.train_accuracy.map(|v| v.to_string()).unwrap_or_default(),
            m.infer_loss.map(|v| v.to_string()).unwrap_or_default(),
            m.infer_accuracy.map(|v| v.to_string()).unwrap_or_default(),
        ));
    }
    std::fs::write(&history_path, csv)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", history_path.display())))?;

    let final_metrics = history_rows.last().cloned();
    let ckpt = Checkpoint {
        model,
        label_space: ds.label_space.clone(),
        mode: ds.mode,
        standardization: ds.standardization.clone(),
        n_des: ds.n_des,
        train_config: cfg,
        final_metrics: final_metrics.clone(),
    };
    save_checkpoint(&ckpt, out)?;
    if let Some(m) = final_metrics {
        println!(
            "trained: final train loss {:.6}, inference accuracy {}",
            m.train_loss,
            m.infer_accuracy
                .map(|a| format!("{:.2}%", 100.0 * a))
                .unwrap_or_else(|| "n/a".into())
        );
    }
    println!("wrote {} and {}", out.display(), history_path.display());
    Ok(())
}

fn cmd_eval(model: &Path, dataset: &Path, csv: Option<PathBuf>) -> Result<(), CliError> {
    let ckpt = load_checkpoint(model)?;
    let ds = load_dataset(dataset)?;
    if ckpt.label_space != ds.label_space {
        return Err(CliError::Usage(format!(
            "checkpoint {} and dataset {} disagree on the label space",
            model.display(),
            dataset.display()
        )));
    }
    let report = evaluate_dataset(&ckpt.model, &ds)?;
    print!("{}", render_text(&report));
    if let Some(path) = csv {
        std::fs::write(&path, to_csv(&report))
            .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_infer(model: &Path, input: &Path) -> Result<(), CliError> {
    let ckpt = load_checkpoint(model)?;
    let expected = 2 * ckpt.n_des;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", input.display())))?;

    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let values: Vec<f32> = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f32>())
            .collect::<Result<_, _>>()
            .map_err(|e| {
                CliError::Data(format!(
                    "{}:{}: cannot parse value: {e}",
                    input.display(),
                    lineno + 1
                ))
            })?;
        if values.len() != expected {
            return Err(CliError::Data(format!(
                "{}:{}: slot has {} values, expected {expected} (2 per descrambled sample, re im interleaved)",
                input.display(),
                lineno + 1,
                values.len()
            )));
        }
        let complex: Vec<_> = values
            .chunks_exact(2)
            .map(|p| num_complex::Complex32::new(p[0], p[1]))
            .collect();
        let slot = DescrambledSlot {
            s: complex,
            meta: SlotMeta::default(),
            snr_db: f64::NAN,
        };
        let mut fv = vectorize(&slot, ckpt.mode);
        if let Some(ref st) = ckpt.standardization {
            st.apply_vec(&mut fv.v);
        }
        let x = ndarray::Array2::from_shape_vec((expected, 1), fv.v).expect("length checked above");
        let pred = ckpt.model.predict(&x.view())?;
        let classes: Vec<usize> = pred.column(0).iter().map(|&v| v as usize).collect();
        let decision = label_to_wct(&ckpt.label_space, &classes)?;
        match &ckpt.label_space {
            wctlab_core::labeling::LabelSpace::Single { .. } => match decision {
                WctDecision::Configured { name, .. } => println!("slot {lineno}: {name}"),
                WctDecision::Unconfigured { classes } => {
                    println!("slot {lineno}: unconfigured combination {classes:?}")
                }
            },
            wctlab_core::labeling::LabelSpace::Multi { layout, .. } => {
                let features: Vec<String> = layout
                    .tasks
                    .iter()
                    .zip(&classes)
                    .map(|(task, &idx)| {
                        format!("{}={}", task.feature.as_str(), task.classes[idx].label)
                    })
                    .collect();
                let suffix = match decision {
                    WctDecision::Configured { name, .. } => name,
                    WctDecision::Unconfigured { .. } => "unconfigured combination".into(),
                };
                println!("slot {lineno}: {} -> {suffix}", features.join(" "));
            }
        }
    }
    Ok(())
}
