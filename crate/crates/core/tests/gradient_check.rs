//! Full finite-difference check of the hand-written gradients.
//!
//! Every coordinate of every parameter tensor is perturbed by ±ε and the
//! analytic gradient compared against the central difference on a small
//! 64-bit model. Tiny gradients (below the cancellation noise floor) are
//! compared absolutely via the floor in the denominator.

use std::time::Instant;
use tabletitle::corpus::EncodedExample;
use tabletitle::model::{backward_batch, forward_batch, forward_example, Hyperparams, ModelParams};

const EPS: f64 = 1e-4;
const TOLERANCE: f64 = 1e-4;
const DENOM_FLOOR: f64 = 1e-6;

fn batch() -> Vec<EncodedExample> {
    // Vocabulary of 12 (reserved ids only); the UNK position in each source
    // carries extended id 12, and each target copies that OOV token once so
    // the copy path, the generation path, and the gate all get gradient.
    vec![
        EncodedExample {
            source_ids: vec![4, 5, 1, 6, 7, 8],
            source_extended_ids: vec![4, 5, 12, 6, 7, 8],
            oov_tokens: vec!["nyberg".to_string()],
            target_ids: vec![5, 12, 6, 3],
        },
        EncodedExample {
            source_ids: vec![9, 1, 10],
            source_extended_ids: vec![9, 12, 10],
            oov_tokens: vec!["kessel".to_string()],
            target_ids: vec![12, 9, 3],
        },
    ]
}

#[test]
fn every_parameter_matches_central_differences() {
    let start = Instant::now();
    let hyper = Hyperparams {
        embedding_dim: 4,
        hidden_dim: 6,
        seed: 42,
        ..Hyperparams::default()
    };
    let mut params = ModelParams::<f64>::init(12, &hyper);
    let examples = batch();

    let (_, caches) = forward_batch(&params, &examples).unwrap();
    let grads = backward_batch(&params, &caches);

    let names: Vec<String> = grads.tensors().iter().map(|(n, _)| n.to_string()).collect();
    let mut worst = (0.0f64, String::new());
    let mut checked = 0usize;

    for name in names {
        let len = grads
            .tensors()
            .into_iter()
            .find(|(n, _)| *n == name)
            .unwrap()
            .1
            .len();
        for k in 0..len {
            let analytic = *grads
                .tensors()
                .into_iter()
                .find(|(n, _)| *n == name)
                .unwrap()
                .1
                .iter()
                .nth(k)
                .unwrap();

            let poke = |delta: f64, params: &mut ModelParams<f64>| {
                *params
                    .tensors_mut()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .unwrap()
                    .1
                    .iter_mut()
                    .nth(k)
                    .unwrap() += delta;
            };

            poke(EPS, &mut params);
            let plus: f64 = examples
                .iter()
                .map(|e| forward_example(&params, e).unwrap().loss)
                .sum::<f64>()
                / examples.len() as f64;
            poke(-2.0 * EPS, &mut params);
            let minus: f64 = examples
                .iter()
                .map(|e| forward_example(&params, e).unwrap().loss)
                .sum::<f64>()
                / examples.len() as f64;
            poke(EPS, &mut params);

            let fd = (plus - minus) / (2.0 * EPS);
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(DENOM_FLOOR);
            if rel > worst.0 {
                worst = (rel, format!("{name}[{k}]: analytic {analytic} vs fd {fd}"));
            }
            assert!(
                rel < TOLERANCE,
                "{name}[{k}]: analytic {analytic} vs fd {fd} (rel {rel:.3e})"
            );
            checked += 1;
        }
    }

    assert!(checked > 1000, "only {checked} coordinates checked");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}");
    eprintln!("checked {checked} coordinates, worst rel err {:.3e} at {}", worst.0, worst.1);
}

#[test]
fn gradient_is_zero_for_parameters_off_the_computation_path() {
    let hyper = Hyperparams {
        embedding_dim: 4,
        hidden_dim: 6,
        seed: 43,
        ..Hyperparams::default()
    };
    let params = ModelParams::<f64>::init(12, &hyper);
    let (_, caches) = forward_batch(&params, &batch()).unwrap();
    let grads = backward_batch(&params, &caches);
    // Embedding row 11 is used by no source or teacher-forced input.
    assert!(grads.embedding.row(11).iter().all(|&v| v == 0.0));
    // The PAD embedding is likewise untouched.
    assert!(grads.embedding.row(0).iter().all(|&v| v == 0.0));
}
