//! Synthetic (context, title) corpus for tests and demos.
//!
//! Four templates pair a short table context with a compositional title.
//! Every title mixes tokens that must be *generated* (template words such
//! as "of" that never occur in the context) with a two-token person or
//! place name that must be *copied* — and the corpus is split so that
//! train and held-out names are out-of-vocabulary when the vocabulary is
//! built from [`SyntheticCorpus::vocab_source`] alone.

use crate::corpus::{title_verbatim, tokenize, DatasetRecord};
use crate::extract::TableContext;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deterministic synthetic corpus.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Records whose names seed the vocabulary (in-vocab names).
    pub vocab_source: Vec<DatasetRecord>,
    /// Training records; their names are OOV for a vocabulary built from
    /// `vocab_source`.
    pub train: Vec<DatasetRecord>,
    /// Held-out records with a third disjoint name pool.
    pub heldout: Vec<DatasetRecord>,
}

const VOCAB_RECORDS: usize = 8;
const TRAIN_RECORDS: usize = 32;
const HELDOUT_RECORDS: usize = 8;

const FIRST_NAMES: [&str; 12] = [
    "dana", "miro", "kelan", "sobel", "arvid", "petra", "ilsa", "tomaz", "renko", "vesna",
    "ozren", "lidia",
];
const LAST_NAMES: [&str; 12] = [
    "wheeler", "kovach", "ferns", "okafor", "lindqvist", "maduro", "brandt", "acosta", "novik",
    "salo", "herrera", "dukic",
];

struct Template {
    /// Section heading above the table.
    heading: &'static str,
    /// Column headers of the table.
    columns: &'static [&'static str],
    /// Title tokens; `{}` slots take the two name tokens.
    title: &'static str,
}

const TEMPLATES: [Template; 4] = [
    Template {
        heading: "filmography",
        columns: &["year", "title", "role"],
        title: "filmography of {} {}",
    },
    Template {
        heading: "mayors",
        columns: &["name", "term", "party"],
        title: "list of {} {} mayors",
    },
    Template {
        heading: "awards",
        columns: &["year", "award", "result"],
        title: "awards won by {} {}",
    },
    Template {
        heading: "discography",
        columns: &["album", "year", "label"],
        title: "albums recorded by {} {}",
    },
];

fn record(first: &str, last: &str, template: &Template) -> DatasetRecord {
    let context = TableContext {
        page_title: tokenize(&format!("{first} {last} - wikipedia")),
        section_headings: vec![(2, tokenize(template.heading))],
        column_headers: template.columns.iter().map(|c| tokenize(c)).collect(),
        ..TableContext::default()
    };
    let title = template
        .title
        .replacen("{}", first, 1)
        .replacen("{}", last, 1);
    DatasetRecord {
        title_verbatim: title_verbatim(&context, &title),
        candidate_titles: vec![title.clone()],
        title,
        context,
        split: None,
    }
}

/// Builds the corpus for a seed. The same seed always yields the same
/// records; the seed shuffles which names land in which pool.
///
/// The name *tokens* of the three pools are pairwise disjoint — not just
/// the full names — so a vocabulary built from `vocab_source` leaves every
/// train and held-out name token out-of-vocabulary.
pub fn synthetic_corpus(seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut firsts = FIRST_NAMES.to_vec();
    let mut lasts = LAST_NAMES.to_vec();
    firsts.shuffle(&mut rng);
    lasts.shuffle(&mut rng);

    // Token budget per pool: 3 + 6 + 3 of each name list gives 9, 36 and 9
    // combinations for the 8, 32 and 8 records.
    let mut pool = |nf: usize, nl: usize, count: usize| -> Vec<DatasetRecord> {
        let fs: Vec<&str> = firsts.drain(..nf).collect();
        let ls: Vec<&str> = lasts.drain(..nl).collect();
        let mut pairs: Vec<(&str, &str)> = fs
            .iter()
            .flat_map(|&f| ls.iter().map(move |&l| (f, l)))
            .collect();
        pairs.shuffle(&mut rng);
        pairs
            .into_iter()
            .take(count)
            .enumerate()
            .map(|(i, (f, l))| record(f, l, &TEMPLATES[i % TEMPLATES.len()]))
            .collect()
    };
    SyntheticCorpus {
        vocab_source: pool(3, 3, VOCAB_RECORDS),
        train: pool(6, 6, TRAIN_RECORDS),
        heldout: pool(3, 3, HELDOUT_RECORDS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, linearize, FieldConfig};
    use std::collections::BTreeSet;

    fn name_tokens(records: &[DatasetRecord]) -> BTreeSet<String> {
        records
            .iter()
            .flat_map(|r| r.context.page_title[..2].to_vec())
            .collect()
    }

    #[test]
    fn corpus_has_the_documented_shape() {
        let corpus = synthetic_corpus(13);
        assert_eq!(corpus.vocab_source.len(), 8);
        assert_eq!(corpus.train.len(), 32);
        assert_eq!(corpus.heldout.len(), 8);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = synthetic_corpus(13);
        let b = synthetic_corpus(13);
        let titles = |c: &SyntheticCorpus| {
            c.train.iter().map(|r| r.title.clone()).collect::<Vec<_>>()
        };
        assert_eq!(titles(&a), titles(&b));
        let c = synthetic_corpus(14);
        assert_ne!(titles(&a), titles(&c));
    }

    #[test]
    fn name_pools_are_disjoint() {
        let corpus = synthetic_corpus(13);
        let vocab_names = name_tokens(&corpus.vocab_source);
        let train_names = name_tokens(&corpus.train);
        let heldout_names = name_tokens(&corpus.heldout);
        assert!(vocab_names.is_disjoint(&train_names));
        assert!(vocab_names.is_disjoint(&heldout_names));
        assert!(train_names.is_disjoint(&heldout_names));
        assert!(!heldout_names.is_empty());
        // Every record's own name also appears in its title.
        for r in corpus.train.iter().chain(&corpus.heldout) {
            let title_toks = tokenize(&r.title);
            for tok in &r.context.page_title[..2] {
                assert!(title_toks.contains(tok), "{tok} missing from {:?}", r.title);
            }
        }
    }

    #[test]
    fn titles_fit_the_decode_window_with_distinct_tokens() {
        let corpus = synthetic_corpus(13);
        for r in corpus
            .vocab_source
            .iter()
            .chain(&corpus.train)
            .chain(&corpus.heldout)
        {
            let toks = tokenize(&r.title);
            assert!(toks.len() >= 4 && toks.len() <= 20, "{:?}", r.title);
            let unique: BTreeSet<_> = toks.iter().collect();
            assert_eq!(unique.len(), toks.len(), "repeat in {:?}", r.title);
        }
    }

    #[test]
    fn titles_need_both_copying_and_generating() {
        let corpus = synthetic_corpus(13);
        let vocab = build_vocab(&corpus.vocab_source, &FieldConfig::default()).unwrap();
        for r in corpus.train.iter().chain(&corpus.heldout) {
            let source = linearize(&r.context, &FieldConfig::default());
            let title_toks = tokenize(&r.title);
            // At least one title token never occurs in the source: the
            // model must generate it from the vocabulary.
            assert!(
                title_toks.iter().any(|t| !source.contains(t)),
                "{:?} fully copyable",
                r.title
            );
            // The name tokens are out-of-vocabulary: the model must copy.
            let oov: Vec<_> = title_toks.iter().filter(|t| vocab.id(t).is_none()).collect();
            assert!(!oov.is_empty(), "{:?} fully in-vocab", r.title);
            // And each OOV token is copyable from the source.
            for t in oov {
                assert!(source.contains(t), "{t} not in source of {:?}", r.title);
            }
        }
    }

    #[test]
    fn template_words_are_in_the_vocabulary() {
        let corpus = synthetic_corpus(13);
        let vocab = build_vocab(&corpus.vocab_source, &FieldConfig::default()).unwrap();
        for word in [
            "filmography",
            "of",
            "list",
            "mayors",
            "awards",
            "won",
            "by",
            "albums",
            "recorded",
        ] {
            assert!(vocab.id(word).is_some(), "{word} missing");
        }
    }
}
