//! Scratch calibration run (deleted before commit).

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;
use tabletitle::corpus::{
    build_vocab, encode_example, encode_tokens, linearize, tokenize, FieldConfig, Vocabulary,
    STOP_ID,
};
use tabletitle::decode::{
    beam_search, generate, mask_step_distribution, step_distribution, DecodeContext, DecodeMode,
    DecodeOptions,
};
use tabletitle::eval::rouge_n;
use tabletitle::model::{
    encode_source, load_checkpoint, mean_loss, save_checkpoint, train, Hyperparams, ModelParams,
};
use tabletitle::synth::synthetic_corpus;

fn trained_params(
    train_set: &[tabletitle::corpus::EncodedExample],
    vocab: &Vocabulary,
) -> ModelParams<f32> {
    let ck = Path::new("/tmp/synth_ck.bin");
    let hyper = Hyperparams {
        batch_size: 8,
        max_steps: 1200,
        ..Hyperparams::default()
    };
    if ck.exists() {
        let (_, params) = load_checkpoint(ck).unwrap();
        return params;
    }
    let t0 = Instant::now();
    let out = train(
        ModelParams::<f32>::init(vocab.size(), &hyper),
        train_set,
        train_set,
        &hyper,
        |row| {
            eprintln!(
                "step {} train {:.4} val {:.4} wall {}ms",
                row.step, row.train_loss, row.val_loss, row.wall_ms
            );
        },
    )
    .unwrap();
    eprintln!("trained {} steps in {:?}", out.steps, t0.elapsed());
    save_checkpoint(ck, &hyper, &out.params).unwrap();
    out.params
}

#[test]
fn calibrate() {
    let corpus = synthetic_corpus(13);
    let fields = FieldConfig::default();
    let vocab = build_vocab(&corpus.vocab_source, &fields).unwrap();
    eprintln!("vocab size {}", vocab.size());
    let train_set: Vec<_> = corpus
        .train
        .iter()
        .map(|r| encode_example(r, &vocab, &fields))
        .collect();
    let params = trained_params(&train_set, &vocab);
    let loss = mean_loss(&params, &train_set).unwrap();
    eprintln!("final mean train loss {loss:.4}");

    // Per-record losses for the worst records.
    let mut per: Vec<(f64, String)> = corpus
        .train
        .iter()
        .zip(&train_set)
        .map(|(r, e)| {
            (
                mean_loss(&params, std::slice::from_ref(e)).unwrap(),
                r.title.clone(),
            )
        })
        .collect();
    per.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (l, t) in per.iter().take(6) {
        eprintln!("  loss {l:.4}  {t:?}");
    }

    let opts = DecodeOptions::default();
    let mut exact = 0;
    for r in &corpus.train {
        let g = generate(&params, &vocab, &r.context, &fields, &opts).unwrap();
        if g.title == r.title {
            exact += 1;
        }
    }
    eprintln!("exact {}/32 (beam 8)", exact);

    // Probe one failing record in detail.
    let bad = corpus
        .train
        .iter()
        .find(|r| {
            let g = generate(&params, &vocab, &r.context, &fields, &opts).unwrap();
            g.title != r.title
        })
        .unwrap();
    let g = generate(&params, &vocab, &bad.context, &fields, &opts).unwrap();
    eprintln!(
        "probe record {:?}: beam8 -> {:?} (score {:.4}, ids {:?}, finished {})",
        bad.title, g.title, g.score, g.ids, g.finished
    );
    for beam in [1usize, 4, 16, 32] {
        let o = DecodeOptions {
            beam_size: beam,
            ..DecodeOptions::default()
        };
        let gb = generate(&params, &vocab, &bad.context, &fields, &o).unwrap();
        eprintln!("  beam {beam}: {:?} (score {:.4})", gb.title, gb.score);
    }
    // Rescore the gold sequence step by step under the same masking.
    let toks = linearize(&bad.context, &fields);
    let (src, ext, oov) = encode_tokens(&toks, &vocab);
    let gold = encode_example(bad, &vocab, &fields).target_ids;
    let enc = encode_source(&params, &src).unwrap();
    let ctx = DecodeContext {
        params: &params,
        enc: &enc,
        source_extended_ids: &ext,
        oov_count: oov.len(),
        mode: DecodeMode::CopyGenerate,
    };
    let mut h = enc.h0.clone();
    let mut c = enc.c0.clone();
    let mut emitted = BTreeSet::new();
    let mut prev = None;
    let mut lp = 0.0;
    for (t, &id) in gold.iter().enumerate() {
        let step = step_distribution(&ctx, &h, &c, prev).unwrap();
        let mut dist = step.dist;
        mask_step_distribution(&mut dist, &emitted, t, &DecodeOptions::default()).unwrap();
        let top: Vec<(usize, f64)> = {
            let mut v: Vec<(usize, f64)> = dist.iter().cloned().enumerate().collect();
            v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            v.truncate(3);
            v
        };
        eprintln!(
            "  gold step {t}: P[gold {id}] = {:.6}, top3 {:?}",
            dist[id], top
        );
        lp += dist[id].ln();
        emitted.insert(id);
        prev = Some(id);
        h = step.h;
        c = step.c;
    }
    eprintln!(
        "  gold log prob {lp:.4}, score {:.4} over {} ids",
        lp / gold.len() as f64,
        gold.len()
    );

    for mode in [
        DecodeMode::CopyGenerate,
        DecodeMode::CopyOnly,
        DecodeMode::GenerateOnly,
    ] {
        let o = DecodeOptions {
            mode,
            ..DecodeOptions::default()
        };
        let mut r1 = 0.0;
        for r in &corpus.heldout {
            let g = generate(&params, &vocab, &r.context, &fields, &o).unwrap();
            r1 += rouge_n(&tokenize(&g.title), &tokenize(&r.title), 1);
        }
        eprintln!("{mode}: heldout mean rouge1 {:.4}", r1 / 8.0);
    }

    let mut contexts: Vec<_> = corpus
        .train
        .iter()
        .chain(&corpus.heldout)
        .map(|r| r.context.clone())
        .collect();
    for s in 101..=110u64 {
        let c = synthetic_corpus(s);
        contexts.extend(c.heldout.iter().map(|r| r.context.clone()));
    }
    for block in [true, false] {
        let o = DecodeOptions {
            block_repeats: block,
            ..DecodeOptions::default()
        };
        let mut dup_tokens = 0usize;
        let mut total = 0usize;
        let mut dup_titles = 0usize;
        for ctx2 in &contexts {
            let toks = linearize(ctx2, &fields);
            let (src, ext, oov) = encode_tokens(&toks, &vocab);
            let hyp = beam_search(&params, &src, &ext, oov.len(), &o).unwrap();
            let ids: Vec<usize> = hyp.ids.iter().copied().filter(|&i| i != STOP_ID).collect();
            let uniq: BTreeSet<_> = ids.iter().collect();
            dup_tokens += ids.len() - uniq.len();
            total += ids.len();
            if ids.len() != uniq.len() {
                dup_titles += 1;
            }
        }
        eprintln!(
            "block_repeats={block}: dup tokens {dup_tokens}/{total}, dup titles {dup_titles}/{}",
            contexts.len()
        );
    }
}
