//! Vocabulary with fixed special tokens and field markers.

use crate::corpus::linearize::{linearize, FieldConfig};
use crate::corpus::tokenize;
use crate::corpus::DatasetRecord;
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fs;
use std::path::Path;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const START_ID: usize = 2;
pub const STOP_ID: usize = 3;

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const START_TOKEN: &str = "<s>";
pub const STOP_TOKEN: &str = "</s>";

/// Field markers, one per context field, in linearization order. Their ids
/// are fixed: `FIELD_MARKERS[k]` has id `4 + k`.
pub const FIELD_MARKERS: [&str; 8] = [
    "#page_title",
    "#section_heading",
    "#caption",
    "#spanning_header",
    "#column_header",
    "#prefix",
    "#suffix",
    "#row",
];

/// Id of `FIELD_MARKERS[0]`.
pub const FIRST_MARKER_ID: usize = 4;
/// Total reserved ids: four specials plus eight field markers.
pub const NUM_RESERVED: usize = 12;
/// First id available to corpus tokens.
pub const FIRST_REGULAR_ID: usize = NUM_RESERVED;

/// Token/id bijection. Ids `0..NUM_RESERVED` are always the special tokens
/// and field markers; corpus tokens follow in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    token_to_id: HashMap<String, usize>,
}

impl Vocabulary {
    /// A vocabulary holding only the reserved sentinels and field markers.
    pub fn with_reserved() -> Self {
        let mut v = Vocabulary {
            id_to_token: Vec::new(),
            token_to_id: HashMap::new(),
        };
        for tok in [PAD_TOKEN, UNK_TOKEN, START_TOKEN, STOP_TOKEN] {
            v.push_token(tok).expect("reserved tokens are distinct");
        }
        for marker in FIELD_MARKERS {
            v.push_token(marker).expect("markers are distinct");
        }
        v
    }

    /// Appends one token, assigning it the next id.
    pub fn push_token(&mut self, token: &str) -> Result<()> {
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::Vocab(format!(
                "token {token:?} is empty or contains whitespace"
            )));
        }
        if self.token_to_id.contains_key(token) {
            return Err(Error::Vocab(format!("duplicate token {token:?}")));
        }
        self.token_to_id
            .insert(token.to_string(), self.id_to_token.len());
        self.id_to_token.push(token.to_string());
        Ok(())
    }

    fn add_if_new(&mut self, token: &str) {
        if !self.token_to_id.contains_key(token) {
            let id = self.id_to_token.len();
            self.token_to_id.insert(token.to_string(), id);
            self.id_to_token.push(token.to_string());
        }
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    /// Id of `token`, or [`UNK_ID`] when out of vocabulary.
    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    /// Whether `id` denotes a field marker.
    pub fn is_marker_id(id: usize) -> bool {
        (FIRST_MARKER_ID..NUM_RESERVED).contains(&id)
    }

    /// Writes the vocabulary as one token per line; the line number is the id.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.id_to_token.join("\n");
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Loads a vocabulary file, validating the reserved prefix.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_lines(text.lines())
    }

    /// Builds a vocabulary from an iterator of lines (ids = line numbers).
    pub fn from_lines<'a>(lines: impl Iterator<Item = &'a str>) -> Result<Self> {
        let mut v = Vocabulary {
            id_to_token: Vec::new(),
            token_to_id: HashMap::new(),
        };
        for line in lines {
            v.push_token(line)?;
        }
        if v.size() < NUM_RESERVED {
            return Err(Error::Vocab(format!(
                "expected at least {NUM_RESERVED} reserved tokens, found {}",
                v.size()
            )));
        }
        let expected = [PAD_TOKEN, UNK_TOKEN, START_TOKEN, STOP_TOKEN]
            .into_iter()
            .chain(FIELD_MARKERS);
        for (id, want) in expected.enumerate() {
            if v.id_to_token[id] != want {
                return Err(Error::Vocab(format!(
                    "reserved slot {id} holds {:?}, expected {want:?}",
                    v.id_to_token[id]
                )));
            }
        }
        Ok(v)
    }
}

/// Builds the vocabulary from the given (training) records.
///
/// Every source token produced by `linearize` under `config` and every token
/// of each accepted title enters the vocabulary in first-occurrence order
/// after the reserved ids. There is no frequency cutoff.
pub fn build_vocab(records: &[DatasetRecord], config: &FieldConfig) -> Result<Vocabulary> {
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut vocab = Vocabulary::with_reserved();
    for record in records {
        for token in linearize(&record.context, config) {
            vocab.add_if_new(&token);
        }
        for token in tokenize(&record.title) {
            vocab.add_if_new(&token);
        }
    }
    Ok(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::TableContext;
    use tempfile::tempdir;

    fn record(page_title: &str, title: &str) -> DatasetRecord {
        DatasetRecord {
            context: TableContext {
                page_title: tokenize(page_title),
                ..TableContext::default()
            },
            title: title.to_string(),
            ..DatasetRecord::default()
        }
    }

    #[test]
    fn reserved_ids_are_fixed() {
        let v = build_vocab(&[record("a", "")], &FieldConfig::default()).unwrap();
        assert_eq!(v.id(PAD_TOKEN), Some(PAD_ID));
        assert_eq!(v.id(UNK_TOKEN), Some(UNK_ID));
        assert_eq!(v.id(START_TOKEN), Some(START_ID));
        assert_eq!(v.id(STOP_TOKEN), Some(STOP_ID));
        for (k, marker) in FIELD_MARKERS.iter().enumerate() {
            assert_eq!(v.id(marker), Some(FIRST_MARKER_ID + k));
        }
        assert_eq!(v.id("a"), Some(FIRST_REGULAR_ID));
    }

    #[test]
    fn corpus_tokens_enter_in_first_occurrence_order() {
        let records = vec![
            record("beta alpha", "alpha gamma"),
            record("delta beta", ""),
        ];
        let v = build_vocab(&records, &FieldConfig::default()).unwrap();
        assert_eq!(v.id("beta"), Some(12));
        assert_eq!(v.id("alpha"), Some(13));
        assert_eq!(v.id("gamma"), Some(14));
        assert_eq!(v.id("delta"), Some(15));
        assert_eq!(v.size(), 16);
        assert_eq!(v.id_or_unk("missing"), UNK_ID);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            build_vocab(&[], &FieldConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let v = build_vocab(
            &[record("nicole eggert - wikipedia", "nicole eggert filmography")],
            &FieldConfig::default(),
        )
        .unwrap();
        v.save(&path).unwrap();
        let loaded = Vocabulary::load(&path).unwrap();
        assert_eq!(loaded, v);

        // Line number is the id.
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], PAD_TOKEN);
        assert_eq!(lines[FIRST_REGULAR_ID], "nicole");
    }

    #[test]
    fn load_rejects_corrupt_files() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("vocab.txt");

        std::fs::write(&path, "<pad>\n<unk>\n").unwrap();
        assert!(matches!(Vocabulary::load(&path), Err(Error::Vocab(_))));

        let mut swapped: Vec<&str> = vec![
            UNK_TOKEN, PAD_TOKEN, START_TOKEN, STOP_TOKEN,
        ];
        swapped.extend(FIELD_MARKERS);
        std::fs::write(&path, swapped.join("\n")).unwrap();
        assert!(matches!(Vocabulary::load(&path), Err(Error::Vocab(_))));

        let mut dup: Vec<&str> = vec![PAD_TOKEN, UNK_TOKEN, START_TOKEN, STOP_TOKEN];
        dup.extend(FIELD_MARKERS);
        dup.extend(["word", "word"]);
        std::fs::write(&path, dup.join("\n")).unwrap();
        assert!(matches!(Vocabulary::load(&path), Err(Error::Vocab(_))));
    }

    #[test]
    fn marker_id_predicate() {
        assert!(!Vocabulary::is_marker_id(STOP_ID));
        assert!(Vocabulary::is_marker_id(4));
        assert!(Vocabulary::is_marker_id(11));
        assert!(!Vocabulary::is_marker_id(12));
    }
}
