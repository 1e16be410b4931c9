//! Pointer-generator sequence-to-sequence model.
//!
//! A bidirectional LSTM encodes the linearized table context; an attentional
//! LSTM decoder emits the title one token at a time, mixing a generation
//! distribution over the fixed vocabulary with a copy distribution over
//! source positions. Forward, backward, and the Adagrad optimizer are
//! implemented directly over `ndarray` so training is exactly reproducible.

mod backward;
mod checkpoint;
mod forward;
mod optim;
mod params;
mod train;

pub use backward::{backward_batch, backward_example};
pub use checkpoint::{
    checkpoint_from_bytes, checkpoint_to_bytes, load_checkpoint, save_checkpoint,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use forward::{
    attention, encode_source, final_distribution, forward_batch, forward_example, p_gen,
    teacher_input, EncoderCache, ExampleCache, PGEN_MARGIN, PROB_FLOOR,
};
pub use optim::Adagrad;
pub use params::{
    AttentionWeights, Hyperparams, Linear, LstmWeights, ModelParams, PgenWeights, Scalar,
};
pub use train::{mean_loss, train, TrainLogRow, TrainOutcome};

pub(crate) use forward::{decoder_step, DecoderStep};
