//! `train`: fit the model on the training split and save a checkpoint.

use crate::commands::{field_config, FieldFlags};
use crate::config::{ConfigFile, Manifest};
use crate::error::Result;
use std::fs;
use std::path::{Path, PathBuf};
use tabletitle::corpus::{Split, Vocabulary};
use tabletitle::model::{
    save_checkpoint, train, Hyperparams, ModelParams, TrainLogRow, TrainOutcome,
};

/// Hyperparameter overrides shared by `train` and `pipeline`.
#[derive(Debug, clap::Args)]
pub struct HyperFlags {
    /// Adagrad initial learning rate.
    #[arg(long, value_name = "F")]
    lr: Option<f64>,
    /// Global gradient-norm clip.
    #[arg(long, value_name = "F")]
    clip: Option<f64>,
    /// Examples per optimization step.
    #[arg(long, value_name = "N")]
    batch: Option<usize>,
    /// Non-improving evaluations tolerated before early stopping.
    #[arg(long, value_name = "N")]
    patience: Option<usize>,
    /// Weight-init and batch-order seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Token embedding width.
    #[arg(long, value_name = "N")]
    embedding_dim: Option<usize>,
    /// Recurrent state width.
    #[arg(long, value_name = "N")]
    hidden_dim: Option<usize>,
    /// Cap on linearized source length.
    #[arg(long, value_name = "N")]
    max_source_len: Option<usize>,
    /// Validate every this many steps.
    #[arg(long, value_name = "N")]
    eval_every: Option<usize>,
    /// Hard step limit.
    #[arg(long, value_name = "N")]
    max_steps: Option<usize>,
}

impl HyperFlags {
    pub fn resolve(&self, cfg: &ConfigFile) -> Result<Hyperparams> {
        let d = Hyperparams::default();
        Ok(Hyperparams {
            embedding_dim: cfg.resolve(&self.embedding_dim, "embedding_dim", d.embedding_dim)?,
            hidden_dim: cfg.resolve(&self.hidden_dim, "hidden_dim", d.hidden_dim)?,
            learning_rate: cfg.resolve(&self.lr, "lr", d.learning_rate)?,
            gradient_clip: cfg.resolve(&self.clip, "clip", d.gradient_clip)?,
            batch_size: cfg.resolve(&self.batch, "batch", d.batch_size)?,
            max_source_len: cfg.resolve(&self.max_source_len, "max_source_len", d.max_source_len)?,
            init_magnitude: cfg.resolve(&None, "init_magnitude", d.init_magnitude)?,
            accumulator_init: cfg.resolve(&None, "accumulator_init", d.accumulator_init)?,
            patience: cfg.resolve(&self.patience, "patience", d.patience)?,
            seed: cfg.resolve(&self.seed, "seed", d.seed)?,
            eval_every: cfg.resolve(&self.eval_every, "eval_every", d.eval_every)?,
            max_steps: cfg.resolve(&self.max_steps, "max_steps", d.max_steps)?,
            pgen_bias: cfg.resolve(&None, "pgen_bias", d.pgen_bias)?,
        })
    }
}

/// Records every effective hyperparameter in the run manifest.
pub fn manifest_hyper(m: &mut Manifest, h: &Hyperparams) {
    m.push("embedding_dim", h.embedding_dim);
    m.push("hidden_dim", h.hidden_dim);
    m.push("lr", h.learning_rate);
    m.push("clip", h.gradient_clip);
    m.push("batch", h.batch_size);
    m.push("max_source_len", h.max_source_len);
    m.push("init_magnitude", h.init_magnitude);
    m.push("accumulator_init", h.accumulator_init);
    m.push("patience", h.patience);
    m.push("seed", h.seed);
    m.push("eval_every", h.eval_every);
    m.push("max_steps", h.max_steps);
    m.push("pgen_bias", h.pgen_bias);
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Split dataset file.
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,
    /// Vocabulary file.
    #[arg(long, value_name = "FILE")]
    vocab: Option<PathBuf>,
    /// Output directory for checkpoint.bin and train.log.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(flatten)]
    hyper: HyperFlags,
    #[command(flatten)]
    fields: FieldFlags,
}

/// Encodes the train/validation splits, trains, and writes
/// `checkpoint.bin` + `train.log` into `out`.
pub fn train_model(
    data: &Path,
    vocab: &Vocabulary,
    out: &Path,
    hyper: &Hyperparams,
    include_rows: bool,
    include_prefix_suffix: bool,
) -> Result<TrainOutcome<f32>> {
    let config = field_config(include_rows, include_prefix_suffix, hyper.max_source_len);
    let train_set = super::dataset::load_encoded(data, vocab, Split::Train, &config)?;
    let val_set = super::dataset::load_encoded(data, vocab, Split::Validation, &config)?;
    log::info!(
        "training on {} example(s), validating on {}",
        train_set.len(),
        val_set.len()
    );

    let params = ModelParams::<f32>::init(vocab.size(), hyper);
    let outcome = train(params, &train_set, &val_set, hyper, |row| {
        log::info!(
            "step {}: train loss {:.4}, validation loss {:.4}",
            row.step,
            row.train_loss,
            row.val_loss
        );
    })?;
    log::info!(
        "finished after {} step(s){}; best validation loss {:.4}",
        outcome.steps,
        if outcome.stopped_early { " (early stop)" } else { "" },
        outcome.best_val_loss
    );

    fs::create_dir_all(out)?;
    save_checkpoint(&out.join("checkpoint.bin"), hyper, &outcome.params)?;
    let mut log_text = String::from(TrainLogRow::TSV_HEADER);
    log_text.push('\n');
    for row in &outcome.log {
        log_text.push_str(&row.tsv_line());
        log_text.push('\n');
    }
    fs::write(out.join("train.log"), log_text)?;
    Ok(outcome)
}

pub fn run(args: &TrainArgs, cfg: &ConfigFile) -> Result<()> {
    let data: PathBuf = cfg.resolve_required(&args.data, "data")?;
    let vocab_path: PathBuf = cfg.resolve_required(&args.vocab, "vocab")?;
    let out: PathBuf = cfg.resolve_required(&args.out, "out")?;
    let hyper = args.hyper.resolve(cfg)?;
    let (include_rows, include_prefix_suffix) = args.fields.resolve(cfg)?;

    let vocab = Vocabulary::load(&vocab_path)?;
    train_model(&data, &vocab, &out, &hyper, include_rows, include_prefix_suffix)?;

    let mut m = Manifest::new("train");
    m.push("data", data.display());
    m.push("vocab", vocab_path.display());
    m.push("out", out.display());
    m.push("include_rows", include_rows);
    m.push("include_prefix_suffix", include_prefix_suffix);
    manifest_hyper(&mut m, &hyper);
    m.push_digest("dataset", &data)?;
    m.push_digest("vocab", &vocab_path)?;
    m.write(&out.join("train.manifest"))?;
    Ok(())
}
