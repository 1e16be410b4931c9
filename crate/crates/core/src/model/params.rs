//! Hyperparameters, model weights, and seeded initialization.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, LinalgScalar, ScalarOperand};
use num_traits::Float;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point element type of the model.
///
/// Production models use `f32` (the checkpoint format stores 32-bit floats);
/// tests that compare against finite differences instantiate `f64`.
pub trait Scalar:
    Float
    + ScalarOperand
    + LinalgScalar
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(self) -> f64 {
        self
    }
}

/// Training and architecture hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub gradient_clip: f64,
    pub batch_size: usize,
    /// Cap on the linearized source length, in tokens.
    pub max_source_len: usize,
    /// Weights initialize uniformly in `[-init_magnitude, init_magnitude]`.
    pub init_magnitude: f64,
    /// Initial value of every Adagrad accumulator cell.
    pub accumulator_init: f64,
    /// Number of consecutive non-improving evaluations tolerated before
    /// early stopping; 0 stops at the first non-improvement.
    pub patience: usize,
    pub seed: u64,
    /// Evaluate on the validation split every this many optimization steps.
    pub eval_every: usize,
    pub max_steps: usize,
    /// Whether the generation-probability gate has a bias term.
    pub pgen_bias: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            embedding_dim: 128,
            hidden_dim: 256,
            learning_rate: 0.15,
            gradient_clip: 2.0,
            batch_size: 64,
            max_source_len: 150,
            init_magnitude: 0.02,
            accumulator_init: 0.1,
            patience: 3,
            seed: 13,
            eval_every: 50,
            max_steps: 10_000,
            pgen_bias: true,
        }
    }
}

impl Hyperparams {
    /// Dimension of the additive attention space.
    pub fn attention_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("embedding_dim", self.embedding_dim),
            ("hidden_dim", self.hidden_dim),
            ("batch_size", self.batch_size),
            ("max_source_len", self.max_source_len),
            ("eval_every", self.eval_every),
            ("max_steps", self.max_steps),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Shape(format!("{name} must be positive")));
            }
        }
        let positive_f = [
            ("learning_rate", self.learning_rate),
            ("gradient_clip", self.gradient_clip),
            ("accumulator_init", self.accumulator_init),
        ];
        for (name, value) in positive_f {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Shape(format!("{name} must be positive and finite")));
            }
        }
        if !(self.init_magnitude >= 0.0 && self.init_magnitude.is_finite()) {
            return Err(Error::Shape("init_magnitude must be non-negative".into()));
        }
        Ok(())
    }
}

/// One LSTM's weights: `w` is `4H x (input + H)` with gate order
/// input/forget/cell/output; `b` is `4H`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights<F> {
    pub w: Array2<F>,
    pub b: Array1<F>,
}

/// Plain affine map `y = w·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<F> {
    pub w: Array2<F>,
    pub b: Array1<F>,
}

/// Additive attention weights: score_i = v·tanh(w_enc·e_i + w_dec·h + b).
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights<F> {
    pub w_enc: Array2<F>, // A x 2H
    pub w_dec: Array2<F>, // A x H
    pub v: Array1<F>,     // A
    pub b: Array1<F>,     // A
}

/// Generation-probability gate: p = sigmoid(w_ctx·c + w_state·h + w_input·x + b).
#[derive(Debug, Clone, PartialEq)]
pub struct PgenWeights<F> {
    pub w_ctx: Array1<F>,   // 2H
    pub w_state: Array1<F>, // H
    pub w_input: Array1<F>, // E
    /// Scalar bias kept as a 1-element tensor for uniform traversal.
    pub b: Array1<F>,
    /// When false the bias stays frozen at zero.
    pub bias_enabled: bool,
}

/// All learnable weights of the pointer-generator model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub vocab_size: usize,
    pub embedding: Array2<F>, // V x E
    pub enc_fw: LstmWeights<F>,
    pub enc_bw: LstmWeights<F>,
    pub reduce_h: Linear<F>, // H x 2H
    pub reduce_c: Linear<F>, // H x 2H
    pub attention: AttentionWeights<F>,
    pub decoder: LstmWeights<F>,
    pub output: Linear<F>, // V x 3H
    pub pgen: PgenWeights<F>,
}

impl<F: Scalar> ModelParams<F> {
    /// All-zero weights with the shapes implied by `hyper` and `vocab_size`.
    pub fn zeros(vocab_size: usize, hyper: &Hyperparams) -> Self {
        let e = hyper.embedding_dim;
        let h = hyper.hidden_dim;
        let a = hyper.attention_dim();
        let v = vocab_size;
        ModelParams {
            vocab_size,
            embedding: Array2::zeros((v, e)),
            enc_fw: LstmWeights {
                w: Array2::zeros((4 * h, e + h)),
                b: Array1::zeros(4 * h),
            },
            enc_bw: LstmWeights {
                w: Array2::zeros((4 * h, e + h)),
                b: Array1::zeros(4 * h),
            },
            reduce_h: Linear {
                w: Array2::zeros((h, 2 * h)),
                b: Array1::zeros(h),
            },
            reduce_c: Linear {
                w: Array2::zeros((h, 2 * h)),
                b: Array1::zeros(h),
            },
            attention: AttentionWeights {
                w_enc: Array2::zeros((a, 2 * h)),
                w_dec: Array2::zeros((a, h)),
                v: Array1::zeros(a),
                b: Array1::zeros(a),
            },
            decoder: LstmWeights {
                w: Array2::zeros((4 * h, e + h)),
                b: Array1::zeros(4 * h),
            },
            output: Linear {
                w: Array2::zeros((v, 3 * h)),
                b: Array1::zeros(v),
            },
            pgen: PgenWeights {
                w_ctx: Array1::zeros(2 * h),
                w_state: Array1::zeros(h),
                w_input: Array1::zeros(e),
                b: Array1::zeros(1),
                bias_enabled: hyper.pgen_bias,
            },
        }
    }

    /// Seeded initialization: every weight matrix and vector is drawn
    /// uniformly from `[-init_magnitude, init_magnitude]`; biases start at
    /// zero. The draw order is fixed, so a seed fully determines the model.
    pub fn init(vocab_size: usize, hyper: &Hyperparams) -> Self {
        let mut params = Self::zeros(vocab_size, hyper);
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let dist = Uniform::new_inclusive(-hyper.init_magnitude, hyper.init_magnitude);
        let mut fill = |target: &mut [F]| {
            for slot in target {
                *slot = F::from_f64(dist.sample(&mut rng));
            }
        };
        fill(params.embedding.as_slice_mut().unwrap());
        fill(params.enc_fw.w.as_slice_mut().unwrap());
        fill(params.enc_bw.w.as_slice_mut().unwrap());
        fill(params.reduce_h.w.as_slice_mut().unwrap());
        fill(params.reduce_c.w.as_slice_mut().unwrap());
        fill(params.attention.w_enc.as_slice_mut().unwrap());
        fill(params.attention.w_dec.as_slice_mut().unwrap());
        fill(params.attention.v.as_slice_mut().unwrap());
        fill(params.decoder.w.as_slice_mut().unwrap());
        fill(params.output.w.as_slice_mut().unwrap());
        fill(params.pgen.w_ctx.as_slice_mut().unwrap());
        fill(params.pgen.w_state.as_slice_mut().unwrap());
        fill(params.pgen.w_input.as_slice_mut().unwrap());
        params
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.reduce_h.w.nrows()
    }

    /// Same shapes, all cells zero. Used for gradient buffers.
    pub fn zeros_like(&self) -> Self {
        self.map(|_| F::zero())
    }

    /// Same shapes, every cell set to `value`. Used for Adagrad accumulators.
    pub fn full_like(&self, value: F) -> Self {
        self.map(|_| value)
    }

    fn map(&self, f: impl Fn(F) -> F + Copy) -> Self {
        ModelParams {
            vocab_size: self.vocab_size,
            embedding: self.embedding.mapv(f),
            enc_fw: LstmWeights {
                w: self.enc_fw.w.mapv(f),
                b: self.enc_fw.b.mapv(f),
            },
            enc_bw: LstmWeights {
                w: self.enc_bw.w.mapv(f),
                b: self.enc_bw.b.mapv(f),
            },
            reduce_h: Linear {
                w: self.reduce_h.w.mapv(f),
                b: self.reduce_h.b.mapv(f),
            },
            reduce_c: Linear {
                w: self.reduce_c.w.mapv(f),
                b: self.reduce_c.b.mapv(f),
            },
            attention: AttentionWeights {
                w_enc: self.attention.w_enc.mapv(f),
                w_dec: self.attention.w_dec.mapv(f),
                v: self.attention.v.mapv(f),
                b: self.attention.b.mapv(f),
            },
            decoder: LstmWeights {
                w: self.decoder.w.mapv(f),
                b: self.decoder.b.mapv(f),
            },
            output: Linear {
                w: self.output.w.mapv(f),
                b: self.output.b.mapv(f),
            },
            pgen: PgenWeights {
                w_ctx: self.pgen.w_ctx.mapv(f),
                w_state: self.pgen.w_state.mapv(f),
                w_input: self.pgen.w_input.mapv(f),
                b: self.pgen.b.mapv(f),
                bias_enabled: self.pgen.bias_enabled,
            },
        }
    }

    /// Named views of every tensor, in a fixed order shared with
    /// [`ModelParams::tensors_mut`] and the checkpoint format.
    pub fn tensors(&self) -> Vec<(&'static str, ArrayViewD<'_, F>)> {
        vec![
            ("embedding", self.embedding.view().into_dyn()),
            ("enc_fw.w", self.enc_fw.w.view().into_dyn()),
            ("enc_fw.b", self.enc_fw.b.view().into_dyn()),
            ("enc_bw.w", self.enc_bw.w.view().into_dyn()),
            ("enc_bw.b", self.enc_bw.b.view().into_dyn()),
            ("reduce_h.w", self.reduce_h.w.view().into_dyn()),
            ("reduce_h.b", self.reduce_h.b.view().into_dyn()),
            ("reduce_c.w", self.reduce_c.w.view().into_dyn()),
            ("reduce_c.b", self.reduce_c.b.view().into_dyn()),
            ("attention.w_enc", self.attention.w_enc.view().into_dyn()),
            ("attention.w_dec", self.attention.w_dec.view().into_dyn()),
            ("attention.v", self.attention.v.view().into_dyn()),
            ("attention.b", self.attention.b.view().into_dyn()),
            ("decoder.w", self.decoder.w.view().into_dyn()),
            ("decoder.b", self.decoder.b.view().into_dyn()),
            ("output.w", self.output.w.view().into_dyn()),
            ("output.b", self.output.b.view().into_dyn()),
            ("pgen.w_ctx", self.pgen.w_ctx.view().into_dyn()),
            ("pgen.w_state", self.pgen.w_state.view().into_dyn()),
            ("pgen.w_input", self.pgen.w_input.view().into_dyn()),
            ("pgen.b", self.pgen.b.view().into_dyn()),
        ]
    }

    /// Mutable counterpart of [`ModelParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, F>)> {
        vec![
            ("embedding", self.embedding.view_mut().into_dyn()),
            ("enc_fw.w", self.enc_fw.w.view_mut().into_dyn()),
            ("enc_fw.b", self.enc_fw.b.view_mut().into_dyn()),
            ("enc_bw.w", self.enc_bw.w.view_mut().into_dyn()),
            ("enc_bw.b", self.enc_bw.b.view_mut().into_dyn()),
            ("reduce_h.w", self.reduce_h.w.view_mut().into_dyn()),
            ("reduce_h.b", self.reduce_h.b.view_mut().into_dyn()),
            ("reduce_c.w", self.reduce_c.w.view_mut().into_dyn()),
            ("reduce_c.b", self.reduce_c.b.view_mut().into_dyn()),
            ("attention.w_enc", self.attention.w_enc.view_mut().into_dyn()),
            ("attention.w_dec", self.attention.w_dec.view_mut().into_dyn()),
            ("attention.v", self.attention.v.view_mut().into_dyn()),
            ("attention.b", self.attention.b.view_mut().into_dyn()),
            ("decoder.w", self.decoder.w.view_mut().into_dyn()),
            ("decoder.b", self.decoder.b.view_mut().into_dyn()),
            ("output.w", self.output.w.view_mut().into_dyn()),
            ("output.b", self.output.b.view_mut().into_dyn()),
            ("pgen.w_ctx", self.pgen.w_ctx.view_mut().into_dyn()),
            ("pgen.w_state", self.pgen.w_state.view_mut().into_dyn()),
            ("pgen.w_input", self.pgen.w_input.view_mut().into_dyn()),
            ("pgen.b", self.pgen.b.view_mut().into_dyn()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Hyperparams {
        Hyperparams {
            embedding_dim: 4,
            hidden_dim: 6,
            ..Hyperparams::default()
        }
    }

    #[test]
    fn defaults_match_the_training_recipe() {
        let h = Hyperparams::default();
        assert_eq!(h.embedding_dim, 128);
        assert_eq!(h.hidden_dim, 256);
        assert_eq!(h.learning_rate, 0.15);
        assert_eq!(h.gradient_clip, 2.0);
        assert_eq!(h.batch_size, 64);
        assert_eq!(h.max_source_len, 150);
        assert_eq!(h.init_magnitude, 0.02);
        assert_eq!(h.accumulator_init, 0.1);
        assert!(h.pgen_bias);
        h.validate().unwrap();
    }

    #[test]
    fn validate_rejects_degenerate_values() {
        let h = Hyperparams { hidden_dim: 0, ..Hyperparams::default() };
        assert!(h.validate().is_err());
        let h = Hyperparams { learning_rate: -1.0, ..Hyperparams::default() };
        assert!(h.validate().is_err());
        let h = Hyperparams { gradient_clip: f64::NAN, ..Hyperparams::default() };
        assert!(h.validate().is_err());
    }

    #[test]
    fn shapes_follow_the_architecture() {
        let hyper = tiny();
        let p = ModelParams::<f32>::zeros(20, &hyper);
        let (e, h) = (4, 6);
        assert_eq!(p.embedding.dim(), (20, e));
        assert_eq!(p.enc_fw.w.dim(), (4 * h, e + h));
        assert_eq!(p.reduce_h.w.dim(), (h, 2 * h));
        assert_eq!(p.attention.w_enc.dim(), (h, 2 * h));
        assert_eq!(p.attention.w_dec.dim(), (h, h));
        assert_eq!(p.decoder.w.dim(), (4 * h, e + h));
        assert_eq!(p.output.w.dim(), (20, 3 * h));
        assert_eq!(p.pgen.w_ctx.len(), 2 * h);
        assert_eq!(p.pgen.b.len(), 1);
        assert_eq!(p.embedding_dim(), e);
        assert_eq!(p.hidden_dim(), h);
    }

    #[test]
    fn init_is_seeded_bounded_and_leaves_biases_zero() {
        let hyper = tiny();
        let a = ModelParams::<f32>::init(20, &hyper);
        let b = ModelParams::<f32>::init(20, &hyper);
        assert_eq!(a, b, "same seed, same weights");

        let other = ModelParams::<f32>::init(
            20,
            &Hyperparams {
                seed: 14,
                ..tiny()
            },
        );
        assert_ne!(a, other, "different seed, different weights");

        let m = hyper.init_magnitude as f32;
        for (name, t) in a.tensors() {
            if name.ends_with(".b") || name == "pgen.b" {
                assert!(t.iter().all(|&x| x == 0.0), "{name} should start at zero");
            } else {
                assert!(t.iter().all(|&x| x.abs() <= m), "{name} out of range");
            }
        }
        assert!(
            a.embedding.iter().any(|&x| x != 0.0),
            "weights are actually drawn"
        );
    }

    #[test]
    fn tensor_views_cover_every_parameter_exactly_once() {
        let p = ModelParams::<f32>::zeros(20, &tiny());
        let names: Vec<&str> = p.tensors().iter().map(|(n, _)| *n).collect();
        let mut unique = names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), names.len());
        assert_eq!(names.len(), 21);

        let total: usize = p.tensors().iter().map(|(_, t)| t.len()).sum();
        let (v, e, h) = (20usize, 4usize, 6usize);
        let expected = v * e                       // embedding
            + 2 * (4 * h * (e + h) + 4 * h)        // encoder LSTMs
            + 2 * (h * 2 * h + h)                  // state reductions
            + (h * 2 * h) + (h * h) + h + h        // attention
            + 4 * h * (e + h) + 4 * h              // decoder LSTM
            + v * 3 * h + v                        // output projection
            + 2 * h + h + e + 1; // p_gen gate
        assert_eq!(total, expected);
    }
}
