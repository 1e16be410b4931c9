//! Adagrad with global-norm gradient clipping.

use crate::error::{Error, Result};
use crate::model::params::{Hyperparams, ModelParams, Scalar};
use ndarray::Zip;

/// Adagrad: per-cell accumulators of squared gradients, a fixed learning
/// rate, and a global-norm clip applied to the whole gradient first.
pub struct Adagrad<F> {
    accumulators: ModelParams<F>,
    learning_rate: F,
    clip: f64,
    steps_taken: usize,
}

impl<F: Scalar> Adagrad<F> {
    /// Accumulators start at `hyper.accumulator_init` in every cell.
    pub fn new(template: &ModelParams<F>, hyper: &Hyperparams) -> Self {
        Adagrad {
            accumulators: template.full_like(F::from_f64(hyper.accumulator_init)),
            learning_rate: F::from_f64(hyper.learning_rate),
            clip: hyper.gradient_clip,
            steps_taken: 0,
        }
    }

    /// L2 norm over every gradient cell, accumulated in 64-bit.
    pub fn global_norm(grads: &ModelParams<F>) -> f64 {
        grads
            .tensors()
            .iter()
            .map(|(_, t)| {
                t.iter()
                    .map(|&v| {
                        let x = Scalar::to_f64(v);
                        x * x
                    })
                    .sum::<f64>()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Applies one update in place and returns the pre-clip global norm.
    ///
    /// If the gradient norm is not finite the step is aborted untouched and
    /// reported as [`Error::NonFiniteGradient`]. A zero gradient leaves the
    /// parameters (and accumulators) unchanged.
    pub fn step(&mut self, params: &mut ModelParams<F>, grads: &ModelParams<F>) -> Result<f64> {
        let norm = Self::global_norm(grads);
        if !norm.is_finite() {
            return Err(Error::NonFiniteGradient {
                step: self.steps_taken + 1,
            });
        }
        let scale = if norm > self.clip {
            F::from_f64(self.clip / norm)
        } else {
            F::one()
        };
        let lr = self.learning_rate;
        for (((_, mut p), (_, g)), (_, mut acc)) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.accumulators.tensors_mut())
        {
            Zip::from(&mut p).and(&g).and(&mut acc).for_each(|p, &g, acc| {
                let clipped = g * scale;
                *acc += clipped * clipped;
                *p -= lr * clipped / acc.sqrt();
            });
        }
        self.steps_taken += 1;
        Ok(norm)
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }
}
