//! Table title generation toolkit.
//!
//! The library covers the full path from raw HTML to generated titles:
//!
//! * [`extract`] — pull the textual context of each `<table>` out of a page;
//! * [`corpus`] — dataset records, reference-title aggregation, splits, and
//!   the tokenize → linearize → vocabulary → ids pipeline;
//! * [`model`] — a pointer-generator sequence-to-sequence model with
//!   hand-written gradients and an Adagrad training loop;
//! * [`decode`] — beam search with copy/generate/mixed modes;
//! * [`eval`] — ROUGE scoring and the two extractive baselines;
//! * [`synth`] — a small synthetic corpus generator for tests and demos.

pub mod corpus;
pub mod decode;
mod error;
pub mod eval;
pub mod extract;
pub mod model;
pub mod synth;

pub use error::{Error, Result};
