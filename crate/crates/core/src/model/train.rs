//! Training loop: shuffled mini-batches, periodic validation, early stopping.

use crate::corpus::EncodedExample;
use crate::error::{Error, Result};
use crate::model::backward::backward_batch;
use crate::model::forward::{forward_batch, forward_example};
use crate::model::optim::Adagrad;
use crate::model::params::{Hyperparams, ModelParams, Scalar};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Offset mixed into the seed for batch shuffling, so shuffle order is
/// decoupled from weight initialization.
const SHUFFLE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// One line of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLogRow {
    pub step: usize,
    /// Mean batch loss since the previous evaluation.
    pub train_loss: f64,
    pub val_loss: f64,
    /// Wall-clock time since training started. Informational only; every
    /// other output is independent of timing.
    pub wall_ms: u64,
}

impl TrainLogRow {
    pub const TSV_HEADER: &'static str = "step\ttrain_loss\tval_loss\twall_ms";

    pub fn tsv_line(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{}",
            self.step, self.train_loss, self.val_loss, self.wall_ms
        )
    }
}

/// Result of a training run.
pub struct TrainOutcome<F> {
    /// Weights of the best validation checkpoint seen.
    pub params: ModelParams<F>,
    pub best_val_loss: f64,
    /// Optimization steps actually taken.
    pub steps: usize,
    /// True when early stopping fired before `max_steps`.
    pub stopped_early: bool,
    pub log: Vec<TrainLogRow>,
}

/// Mean per-example loss over a dataset (no gradients).
pub fn mean_loss<F: Scalar>(params: &ModelParams<F>, set: &[EncodedExample]) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut total = 0.0f64;
    for example in set {
        total += forward_example(params, example)?.loss;
    }
    Ok(total / set.len() as f64)
}

/// Trains with Adagrad until `max_steps` or early stopping.
///
/// Every `eval_every` steps (and at the final step) the validation loss is
/// computed; when it fails to improve more than `patience` consecutive
/// times, training stops and the best-validation weights are returned.
/// `progress` sees each log row as it is produced.
pub fn train<F: Scalar>(
    params: ModelParams<F>,
    train_set: &[EncodedExample],
    val_set: &[EncodedExample],
    hyper: &Hyperparams,
    mut progress: impl FnMut(&TrainLogRow),
) -> Result<TrainOutcome<F>> {
    hyper.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut params = params;
    let mut opt = Adagrad::new(&params, hyper);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(SHUFFLE_SALT));
    let start = Instant::now();

    let mut best_val = f64::INFINITY;
    let mut best_params = params.clone();
    let mut stall = 0usize;
    let mut step = 0usize;
    let mut log: Vec<TrainLogRow> = Vec::new();
    let mut interval_loss = 0.0f64;
    let mut interval_batches = 0usize;
    let mut stopped_early = false;

    'training: loop {
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut rng);
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<EncodedExample> =
                chunk.iter().map(|&i| train_set[i].clone()).collect();
            let (loss, caches) = forward_batch(&params, &batch)?;
            let grads = backward_batch(&params, &caches);
            opt.step(&mut params, &grads)?;
            step += 1;
            interval_loss += loss;
            interval_batches += 1;

            if step.is_multiple_of(hyper.eval_every) || step == hyper.max_steps {
                let val_loss = mean_loss(&params, val_set)?;
                let row = TrainLogRow {
                    step,
                    train_loss: interval_loss / interval_batches as f64,
                    val_loss,
                    wall_ms: start.elapsed().as_millis() as u64,
                };
                progress(&row);
                log.push(row);
                interval_loss = 0.0;
                interval_batches = 0;

                if val_loss < best_val {
                    best_val = val_loss;
                    best_params = params.clone();
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > hyper.patience {
                        stopped_early = true;
                        break 'training;
                    }
                }
            }
            if step >= hyper.max_steps {
                break 'training;
            }
        }
    }

    Ok(TrainOutcome {
        params: best_params,
        best_val_loss: best_val,
        steps: step,
        stopped_early,
        log,
    })
}
