//! Hand-written reverse-mode gradients for the pointer-generator model.
//!
//! `backward_example` walks one example's forward cache in reverse and
//! accumulates exact gradients of the mean negative log-likelihood into a
//! gradient buffer shaped like the parameters. The finite-difference tests
//! hold every formula here to account.

use crate::model::forward::{ExampleCache, LstmStepCache, PROB_FLOOR};
use crate::model::params::{LstmWeights, ModelParams, Scalar};
use ndarray::{s, Array1, Array2, Axis};
use std::ops::AddAssign;

/// `dw += a ⊗ b`.
fn outer_add<F: Scalar>(dw: &mut Array2<F>, a: &Array1<F>, b: &Array1<F>) {
    for (i, &ai) in a.iter().enumerate() {
        if ai == F::zero() {
            continue;
        }
        for (slot, &bj) in dw.row_mut(i).iter_mut().zip(b.iter()) {
            *slot += ai * bj;
        }
    }
}

/// `out += wᵀ · v`.
fn matvec_t_add<F: Scalar>(out: &mut Array1<F>, w: &Array2<F>, v: &Array1<F>) {
    for (i, &vi) in v.iter().enumerate() {
        if vi == F::zero() {
            continue;
        }
        for (slot, &wij) in out.iter_mut().zip(w.row(i).iter()) {
            *slot += vi * wij;
        }
    }
}

/// `out += s · v`.
fn axpy<F: Scalar>(out: &mut Array1<F>, scale: F, v: &Array1<F>) {
    for (slot, &vi) in out.iter_mut().zip(v.iter()) {
        *slot += scale * vi;
    }
}

/// Backward through one LSTM step. Returns `(d[x; h_prev], dc_prev)`.
fn lstm_backward<F: Scalar>(
    w: &LstmWeights<F>,
    cache: &LstmStepCache<F>,
    dh: &Array1<F>,
    dc_in: &Array1<F>,
    grad: &mut LstmWeights<F>,
) -> (Array1<F>, Array1<F>) {
    let hidden = dh.len();
    let one = F::one();
    let mut dz = Array1::zeros(4 * hidden);
    let mut dc_prev = Array1::zeros(hidden);
    for k in 0..hidden {
        let i = cache.gates[k];
        let f = cache.gates[hidden + k];
        let g = cache.gates[2 * hidden + k];
        let o = cache.gates[3 * hidden + k];
        let tc = cache.tc[k];

        let d_o = dh[k] * tc;
        let dc = dc_in[k] + dh[k] * o * (one - tc * tc);
        let di = dc * g;
        let df = dc * cache.c_prev[k];
        let dg = dc * i;
        dc_prev[k] = dc * f;

        dz[k] = di * i * (one - i);
        dz[hidden + k] = df * f * (one - f);
        dz[2 * hidden + k] = dg * (one - g * g);
        dz[3 * hidden + k] = d_o * o * (one - o);
    }
    outer_add(&mut grad.w, &dz, &cache.xh);
    grad.b += &dz;
    let mut dxh = Array1::zeros(cache.xh.len());
    matvec_t_add(&mut dxh, &w.w, &dz);
    (dxh, dc_prev)
}

/// Accumulates `scale · ∂(example loss)/∂θ` into `grads`.
///
/// The example loss is the mean step NLL, so each step contributes with
/// weight `scale / T`. Steps whose gold probability fell below the
/// [`PROB_FLOOR`] contribute a constant loss and therefore no gradient.
pub fn backward_example<F: Scalar>(
    params: &ModelParams<F>,
    cache: &ExampleCache<F>,
    grads: &mut ModelParams<F>,
    scale: F,
) {
    let hidden = params.hidden_dim();
    let emb_dim = params.embedding_dim();
    let vocab = params.vocab_size;
    let n_src = cache.enc.source_ids.len();
    let n_steps = cache.steps.len();
    if n_steps == 0 {
        return;
    }
    let step_scale = scale / F::from_f64(n_steps as f64);
    let one = F::one();

    // Gradient flowing into the encoder states from all decoder steps.
    let mut d_states = Array2::<F>::zeros((n_src, 2 * hidden));
    // Carry into the `h`/`c` recurrence, from the following step.
    let mut dh_carry = Array1::<F>::zeros(hidden);
    let mut dc_carry = Array1::<F>::zeros(hidden);

    for t in (0..n_steps).rev() {
        let step = &cache.steps[t];
        let g = step.pgen;
        let x = step.lstm.xh.slice(s![..emb_dim]).to_owned();

        let mut dh_t = Array1::<F>::zeros(hidden);
        let mut dx = Array1::<F>::zeros(emb_dim);
        let mut dctx = Array1::<F>::zeros(2 * hidden);
        let mut dalpha = Array1::<F>::zeros(n_src);

        if step.p_gold.to_f64() > PROB_FLOOR {
            let dp = -step_scale / step.p_gold;

            // p_gold = [gold < V]·g·P_vocab[gold] + (1-g)·Σ_{ext_i = gold} α_i
            let pv_gold = if step.gold < vocab {
                step.p_vocab[step.gold]
            } else {
                F::zero()
            };
            let mut copy_mass = F::zero();
            for (i, &w) in cache.ext_ids.iter().enumerate() {
                if w == step.gold {
                    copy_mass += step.attn.alpha[i];
                }
            }
            let dg = dp * (pv_gold - copy_mass);

            // Generate path: softmax + output projection.
            if step.gold < vocab {
                let dpv_gold = dp * g;
                let s1 = dpv_gold * pv_gold;
                let mut dlogits = step.p_vocab.mapv(|p| -s1 * p);
                dlogits[step.gold] += dpv_gold * pv_gold;
                outer_add(&mut grads.output.w, &dlogits, &step.out_in);
                grads.output.b += &dlogits;
                let mut d_out_in = Array1::<F>::zeros(3 * hidden);
                matvec_t_add(&mut d_out_in, &params.output.w, &dlogits);
                dh_t += &d_out_in.slice(s![..hidden]);
                dctx += &d_out_in.slice(s![hidden..]);
            }

            // Copy path: attention mass at the gold extended id.
            let da_copy = dp * (one - g);
            for (i, &w) in cache.ext_ids.iter().enumerate() {
                if w == step.gold {
                    dalpha[i] += da_copy;
                }
            }

            // Generation gate.
            let dpre = dg * g * (one - g);
            axpy(&mut grads.pgen.w_ctx, dpre, &step.attn.ctx);
            axpy(&mut grads.pgen.w_state, dpre, &step.lstm.h);
            axpy(&mut grads.pgen.w_input, dpre, &x);
            if params.pgen.bias_enabled {
                grads.pgen.b[0] += dpre;
            }
            axpy(&mut dctx, dpre, &params.pgen.w_ctx);
            axpy(&mut dh_t, dpre, &params.pgen.w_state);
            axpy(&mut dx, dpre, &params.pgen.w_input);
        }

        // Context vector: ctx = Σ α_i e_i.
        for i in 0..n_src {
            dalpha[i] += cache.enc.states.row(i).dot(&dctx);
            let a = step.attn.alpha[i];
            if a != F::zero() {
                for (slot, &d) in d_states.row_mut(i).iter_mut().zip(dctx.iter()) {
                    *slot += a * d;
                }
            }
        }

        // Attention softmax.
        let dot = dalpha.dot(&step.attn.alpha);
        // Scores s_i = v · tanh(q_i).
        let att_dim = params.attention.v.len();
        let mut dq = Array2::<F>::zeros((n_src, att_dim));
        for i in 0..n_src {
            let dscore = step.attn.alpha[i] * (dalpha[i] - dot);
            if dscore == F::zero() {
                continue;
            }
            for k in 0..att_dim {
                let th = step.attn.th[(i, k)];
                grads.attention.v[k] += dscore * th;
                dq[(i, k)] = dscore * params.attention.v[k] * (one - th * th);
            }
        }
        grads.attention.w_enc += &dq.t().dot(&cache.enc.states);
        d_states += &dq.dot(&params.attention.w_enc);
        let sum_dq = dq.sum_axis(Axis(0));
        outer_add(&mut grads.attention.w_dec, &sum_dq, &step.lstm.h);
        grads.attention.b += &sum_dq;
        matvec_t_add(&mut dh_t, &params.attention.w_dec, &sum_dq);

        // Decoder LSTM step.
        dh_t += &dh_carry;
        let (dxh, dc_prev) =
            lstm_backward(&params.decoder, &step.lstm, &dh_t, &dc_carry, &mut grads.decoder);
        dx += &dxh.slice(s![..emb_dim]);
        dh_carry = dxh.slice(s![emb_dim..]).to_owned();
        dc_carry = dc_prev;

        grads.embedding.row_mut(step.input_id).add_assign(&dx);
    }

    // Initial decoder state: h0 = reduce_h·cat_h + b, c0 likewise.
    let dh0 = dh_carry;
    let dc0 = dc_carry;
    outer_add(&mut grads.reduce_h.w, &dh0, &cache.enc.cat_h);
    grads.reduce_h.b += &dh0;
    let mut dcat_h = Array1::<F>::zeros(2 * hidden);
    matvec_t_add(&mut dcat_h, &params.reduce_h.w, &dh0);
    outer_add(&mut grads.reduce_c.w, &dc0, &cache.enc.cat_c);
    grads.reduce_c.b += &dc0;
    let mut dcat_c = Array1::<F>::zeros(2 * hidden);
    matvec_t_add(&mut dcat_c, &params.reduce_c.w, &dc0);

    // Forward encoder chain: final state feeds the reduction.
    let mut carry_h = dcat_h.slice(s![..hidden]).to_owned();
    let mut carry_c = dcat_c.slice(s![..hidden]).to_owned();
    for i in (0..n_src).rev() {
        let mut dh = carry_h;
        dh += &d_states.row(i).slice(s![..hidden]);
        let (dxh, dc_prev) =
            lstm_backward(&params.enc_fw, &cache.enc.fw[i], &dh, &carry_c, &mut grads.enc_fw);
        grads
            .embedding
            .row_mut(cache.enc.source_ids[i])
            .add_assign(&dxh.slice(s![..emb_dim]));
        carry_h = dxh.slice(s![emb_dim..]).to_owned();
        carry_c = dc_prev;
    }

    // Backward encoder chain: bw[k] processed source position n-1-k, so its
    // final state (k = n-1) sits at position 0.
    let mut carry_h = dcat_h.slice(s![hidden..]).to_owned();
    let mut carry_c = dcat_c.slice(s![hidden..]).to_owned();
    for k in (0..n_src).rev() {
        let pos = n_src - 1 - k;
        let mut dh = carry_h;
        dh += &d_states.row(pos).slice(s![hidden..]);
        let (dxh, dc_prev) =
            lstm_backward(&params.enc_bw, &cache.enc.bw[k], &dh, &carry_c, &mut grads.enc_bw);
        grads
            .embedding
            .row_mut(cache.enc.source_ids[pos])
            .add_assign(&dxh.slice(s![..emb_dim]));
        carry_h = dxh.slice(s![emb_dim..]).to_owned();
        carry_c = dc_prev;
    }
}

/// Gradients of the batch loss (mean example loss) for one batch.
pub fn backward_batch<F: Scalar>(
    params: &ModelParams<F>,
    caches: &[ExampleCache<F>],
) -> ModelParams<F> {
    let mut grads = params.zeros_like();
    if caches.is_empty() {
        return grads;
    }
    let scale = F::one() / F::from_f64(caches.len() as f64);
    for cache in caches {
        backward_example(params, cache, &mut grads, scale);
    }
    grads
}
