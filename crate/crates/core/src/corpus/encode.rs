//! Turning token sequences into model ids, including the per-example
//! extended vocabulary that lets the model copy out-of-vocabulary tokens.

use crate::corpus::linearize::{linearize, FieldConfig};
use crate::corpus::tokenize;
use crate::corpus::vocab::{Vocabulary, STOP_ID, UNK_ID};
use crate::corpus::DatasetRecord;
use crate::error::{Error, Result};

/// One example ready for the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    /// Source tokens as in-vocabulary ids (OOV tokens become UNK).
    pub source_ids: Vec<usize>,
    /// Source tokens over the extended vocabulary: OOV tokens get the ids
    /// `vocab_size + k` in order of first occurrence.
    pub source_extended_ids: Vec<usize>,
    /// The OOV tokens backing the extended ids, in assignment order.
    pub oov_tokens: Vec<String>,
    /// Target title ids over the extended vocabulary, ending in STOP. Target
    /// tokens that are OOV but absent from the source fall back to UNK.
    pub target_ids: Vec<usize>,
}

/// Encodes source tokens, assigning extended ids to OOV tokens.
pub fn encode_tokens(
    tokens: &[String],
    vocab: &Vocabulary,
) -> (Vec<usize>, Vec<usize>, Vec<String>) {
    let mut source_ids = Vec::with_capacity(tokens.len());
    let mut extended = Vec::with_capacity(tokens.len());
    let mut oov_tokens: Vec<String> = Vec::new();
    for token in tokens {
        match vocab.id(token) {
            Some(id) => {
                source_ids.push(id);
                extended.push(id);
            }
            None => {
                source_ids.push(UNK_ID);
                let k = match oov_tokens.iter().position(|t| t == token) {
                    Some(k) => k,
                    None => {
                        oov_tokens.push(token.clone());
                        oov_tokens.len() - 1
                    }
                };
                extended.push(vocab.size() + k);
            }
        }
    }
    (source_ids, extended, oov_tokens)
}

/// Encodes a title against the vocabulary and the source's OOV list,
/// appending STOP.
pub fn encode_target(title: &str, vocab: &Vocabulary, oov_tokens: &[String]) -> Vec<usize> {
    let mut ids: Vec<usize> = tokenize(title)
        .iter()
        .map(|token| match vocab.id(token) {
            Some(id) => id,
            None => oov_tokens
                .iter()
                .position(|t| t == token)
                .map(|k| vocab.size() + k)
                .unwrap_or(UNK_ID),
        })
        .collect();
    ids.push(STOP_ID);
    ids
}

/// Encodes a full dataset record: linearized source plus target title.
pub fn encode_example(
    record: &DatasetRecord,
    vocab: &Vocabulary,
    config: &FieldConfig,
) -> EncodedExample {
    let tokens = linearize(&record.context, config);
    let (source_ids, source_extended_ids, oov_tokens) = encode_tokens(&tokens, vocab);
    let target_ids = encode_target(&record.title, vocab, &oov_tokens);
    EncodedExample {
        source_ids,
        source_extended_ids,
        oov_tokens,
        target_ids,
    }
}

/// Renders decoded ids back to a title string.
///
/// PAD, START, STOP and field markers are dropped. Extended ids resolve
/// through `oov_tokens`; with `debug_oov` those tokens render as
/// `__token__` so copied OOV words are visible in output.
pub fn render_title(
    ids: &[usize],
    vocab: &Vocabulary,
    oov_tokens: &[String],
    debug_oov: bool,
) -> Result<String> {
    let limit = vocab.size() + oov_tokens.len();
    let mut words: Vec<String> = Vec::with_capacity(ids.len());
    for &id in ids {
        if id >= limit {
            return Err(Error::InvalidId { id, limit });
        }
        if matches!(id, crate::corpus::PAD_ID | crate::corpus::START_ID | STOP_ID)
            || Vocabulary::is_marker_id(id)
        {
            continue;
        }
        if id < vocab.size() {
            words.push(vocab.token(id).expect("id < size").to_string());
        } else {
            let token = &oov_tokens[id - vocab.size()];
            if debug_oov {
                words.push(format!("__{token}__"));
            } else {
                words.push(token.clone());
            }
        }
    }
    Ok(words.join(" "))
}
