//! Styled language generator: a bidirectional GRU encoder over semantic
//! terms (plus a trailing style token) feeding an attention decoder that
//! emits the sentence.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nncore::{
    apply_mask, dot, dropout_mask, matvec, matvec_t_acc, outer_acc, softmax, softmax_ce_backward,
    softmax_cross_entropy, Dense, Embedding, GruCell, GruStepCache, Parameterized, Real, Tensor,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangGenConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Per-direction encoder width. The decoder state is the concatenation
    /// of both directions, so its width is twice this.
    pub enc_hidden: usize,
    pub bos_id: usize,
    pub eos_id: usize,
    pub unk_id: usize,
    /// Start the decoder from zeros instead of the final encoder states.
    pub zero_decoder_init: bool,
    pub init_scale: f64,
}

impl LangGenConfig {
    pub fn new(vocab_size: usize) -> Self {
        LangGenConfig {
            vocab_size,
            embed_dim: 128,
            enc_hidden: 128,
            bos_id: 2,
            eos_id: 3,
            unk_id: 1,
            zero_decoder_init: false,
            init_scale: 0.08,
        }
    }

    pub fn dec_hidden(&self) -> usize {
        2 * self.enc_hidden
    }

    fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.embed_dim == 0 || self.enc_hidden == 0 {
            return Err(Error::InvalidArg(
                "language generator dimensions must be nonzero".into(),
            ));
        }
        if self.bos_id >= self.vocab_size
            || self.eos_id >= self.vocab_size
            || self.unk_id >= self.vocab_size
        {
            return Err(Error::InvalidArg(
                "bos/eos/unk ids must lie inside the vocabulary".into(),
            ));
        }
        Ok(())
    }
}

/// Attention weights recorded per emitted decode step.
#[derive(Debug, Clone)]
pub struct AttentionTrace {
    /// One row per decode step, one weight per encoder position.
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct LangGen<F: Real> {
    pub cfg: LangGenConfig,
    pub embedding: Embedding<F>,
    pub enc_fwd: GruCell<F>,
    pub enc_bwd: GruCell<F>,
    pub dec: GruCell<F>,
    /// Bilinear attention weight, `[2·enc_hidden, dec_hidden]`.
    pub attn: Tensor<F>,
    pub out: Dense<F>,
}

impl<F: Real> Parameterized<F> for LangGen<F> {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&str, &'a Tensor<F>)) {
        self.embedding.visit(&mut |n, t| f(&format!("embedding.{n}"), t));
        self.enc_fwd.visit(&mut |n, t| f(&format!("enc_fwd.{n}"), t));
        self.enc_bwd.visit(&mut |n, t| f(&format!("enc_bwd.{n}"), t));
        self.dec.visit(&mut |n, t| f(&format!("dec.{n}"), t));
        f("attn.w", &self.attn);
        self.out.visit(&mut |n, t| f(&format!("out.{n}"), t));
    }
    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&str, &'a mut Tensor<F>)) {
        self.embedding.visit_mut(&mut |n, t| f(&format!("embedding.{n}"), t));
        self.enc_fwd.visit_mut(&mut |n, t| f(&format!("enc_fwd.{n}"), t));
        self.enc_bwd.visit_mut(&mut |n, t| f(&format!("enc_bwd.{n}"), t));
        self.dec.visit_mut(&mut |n, t| f(&format!("dec.{n}"), t));
        f("attn.w", &mut self.attn);
        self.out.visit_mut(&mut |n, t| f(&format!("out.{n}"), t));
    }
}

/// Encoder pass bookkeeping.
struct Encoding<F: Real> {
    ids: Vec<usize>,
    masks: Vec<Option<Vec<F>>>,
    fwd_caches: Vec<GruStepCache<F>>,
    /// Run order: position T-1 first.
    bwd_caches: Vec<GruStepCache<F>>,
    /// Concatenated `[h_fwd_i ; h_bwd_i]` per position.
    states: Vec<Vec<F>>,
    h0: Vec<F>,
}

struct DecStep<F: Real> {
    cache: GruStepCache<F>,
    h: Vec<F>,
    input_id: usize,
    mask: Option<Vec<F>>,
    u: Vec<F>,
    alphas: Vec<F>,
    cat: Vec<F>,
    probs: Vec<F>,
    target: usize,
}

impl<F: Real> LangGen<F> {
    pub fn new(cfg: LangGenConfig, rng: &mut impl rand::Rng) -> Result<Self> {
        cfg.validate()?;
        let s = cfg.init_scale;
        let e = cfg.enc_hidden;
        let d = cfg.dec_hidden();
        Ok(LangGen {
            embedding: Embedding::uniform(cfg.vocab_size, cfg.embed_dim, s, rng),
            enc_fwd: GruCell::uniform(e, cfg.embed_dim, s, rng),
            enc_bwd: GruCell::uniform(e, cfg.embed_dim, s, rng),
            dec: GruCell::uniform(d, cfg.embed_dim, s, rng),
            attn: Tensor::uniform(&[2 * e, d], s, rng),
            out: Dense::uniform(cfg.vocab_size, 2 * e + d, s, rng),
            cfg,
        })
    }

    pub fn zeros_like(&self) -> Self {
        let cfg = self.cfg.clone();
        let e = cfg.enc_hidden;
        let d = cfg.dec_hidden();
        LangGen {
            embedding: Embedding::zeros(cfg.vocab_size, cfg.embed_dim),
            enc_fwd: GruCell::zeros(e, cfg.embed_dim),
            enc_bwd: GruCell::zeros(e, cfg.embed_dim),
            dec: GruCell::zeros(d, cfg.embed_dim),
            attn: Tensor::zeros(&[2 * e, d]),
            out: Dense::zeros(cfg.vocab_size, 2 * e + d),
            cfg,
        }
    }

    fn check_ids(&self, ids: &[usize], what: &str) -> Result<()> {
        if let Some(&t) = ids.iter().find(|&&t| t >= self.cfg.vocab_size) {
            return Err(Error::Shape(format!(
                "{what} id {t} outside vocabulary of {}",
                self.cfg.vocab_size
            )));
        }
        Ok(())
    }

    /// Bilinear attention over encoder states: weights softmax(hᵀ W h_dec),
    /// context the weighted state sum. Exposed for direct inspection.
    pub fn attention(&self, states: &[Vec<F>], h_dec: &[F]) -> (Vec<F>, Vec<F>) {
        let two_e = 2 * self.cfg.enc_hidden;
        let mut u = vec![F::ZERO; two_e];
        matvec(&self.attn, h_dec, &mut u);
        let scores: Vec<F> = states.iter().map(|s| dot(s, &u)).collect();
        let alphas = softmax(&scores);
        let mut ctx = vec![F::ZERO; two_e];
        for (a, s) in alphas.iter().zip(states) {
            for (c, v) in ctx.iter_mut().zip(s) {
                *c = *c + *a * *v;
            }
        }
        (ctx, alphas)
    }

    fn attention_with_u(&self, states: &[Vec<F>], h_dec: &[F]) -> (Vec<F>, Vec<F>, Vec<F>) {
        let two_e = 2 * self.cfg.enc_hidden;
        let mut u = vec![F::ZERO; two_e];
        matvec(&self.attn, h_dec, &mut u);
        let scores: Vec<F> = states.iter().map(|s| dot(s, &u)).collect();
        let alphas = softmax(&scores);
        let mut ctx = vec![F::ZERO; two_e];
        for (a, s) in alphas.iter().zip(states) {
            for (c, v) in ctx.iter_mut().zip(s) {
                *c = *c + *a * *v;
            }
        }
        (ctx, alphas, u)
    }

    /// Run the bidirectional encoder over `terms ++ [style_id]`.
    fn encode(
        &self,
        terms: &[usize],
        style_id: usize,
        dropout: f64,
        rng: &mut Option<&mut dyn RngCore>,
    ) -> Result<Encoding<F>> {
        let cfg = &self.cfg;
        let ids: Vec<usize> = terms
            .iter()
            .copied()
            .chain(std::iter::once(style_id))
            .collect();
        self.check_ids(&ids, "term")?;
        let t_len = ids.len();
        let e = cfg.enc_hidden;

        let mut xs: Vec<Vec<F>> = Vec::with_capacity(t_len);
        let mut masks: Vec<Option<Vec<F>>> = Vec::with_capacity(t_len);
        for &id in &ids {
            let mut x = self.embedding.lookup(id).to_vec();
            if dropout > 0.0 {
                let rng = rng
                    .as_deref_mut()
                    .ok_or_else(|| Error::InvalidArg("dropout requires an rng".into()))?;
                let m = dropout_mask::<F>(x.len(), dropout, rng)?;
                apply_mask(&mut x, &m);
                masks.push(Some(m));
            } else {
                masks.push(None);
            }
            xs.push(x);
        }

        let mut states = vec![vec![F::ZERO; 2 * e]; t_len];
        let mut fwd_caches = Vec::with_capacity(t_len);
        let mut h = vec![F::ZERO; e];
        for i in 0..t_len {
            let (h_next, cache) = self.enc_fwd.step(&xs[i], &h);
            states[i][..e].copy_from_slice(&h_next);
            fwd_caches.push(cache);
            h = h_next;
        }
        let fwd_final = h;

        let mut bwd_caches = Vec::with_capacity(t_len);
        let mut h = vec![F::ZERO; e];
        for i in (0..t_len).rev() {
            let (h_next, cache) = self.enc_bwd.step(&xs[i], &h);
            states[i][e..].copy_from_slice(&h_next);
            bwd_caches.push(cache);
            h = h_next;
        }
        let bwd_final = h;

        let h0 = if cfg.zero_decoder_init {
            vec![F::ZERO; cfg.dec_hidden()]
        } else {
            let mut h0 = fwd_final;
            h0.extend_from_slice(&bwd_final);
            h0
        };

        Ok(Encoding {
            ids,
            masks,
            fwd_caches,
            bwd_caches,
            states,
            h0,
        })
    }

    /// Teacher-forced mean cross-entropy of `sentence ++ [EOS]` given the
    /// terms and style token.
    pub fn loss(&self, terms: &[usize], style_id: usize, sentence: &[usize]) -> Result<F> {
        self.run(terms, style_id, sentence, None, 0.0, None)
    }

    pub fn loss_and_grads(
        &self,
        terms: &[usize],
        style_id: usize,
        sentence: &[usize],
        grads: &mut LangGen<F>,
        dropout: f64,
        rng: Option<&mut dyn RngCore>,
    ) -> Result<F> {
        self.run(terms, style_id, sentence, Some(grads), dropout, rng)
    }

    fn run(
        &self,
        terms: &[usize],
        style_id: usize,
        sentence: &[usize],
        grads: Option<&mut LangGen<F>>,
        dropout: f64,
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<F> {
        self.check_ids(sentence, "sentence")?;
        let cfg = &self.cfg;
        let enc = self.encode(terms, style_id, dropout, &mut rng)?;
        let e = cfg.enc_hidden;
        let two_e = 2 * e;

        let input_ids: Vec<usize> = std::iter::once(cfg.bos_id)
            .chain(sentence.iter().copied())
            .collect();
        let targets: Vec<usize> = sentence
            .iter()
            .copied()
            .chain(std::iter::once(cfg.eos_id))
            .collect();
        let scored = targets.len();

        let mut steps: Vec<DecStep<F>> = Vec::with_capacity(input_ids.len());
        let mut h = enc.h0.clone();
        let mut total = F::ZERO;
        for (k, &id) in input_ids.iter().enumerate() {
            let mut x = self.embedding.lookup(id).to_vec();
            let mask = if dropout > 0.0 {
                let rng = rng
                    .as_deref_mut()
                    .ok_or_else(|| Error::InvalidArg("dropout requires an rng".into()))?;
                let m = dropout_mask::<F>(x.len(), dropout, rng)?;
                apply_mask(&mut x, &m);
                Some(m)
            } else {
                None
            };
            let (h_next, cache) = self.dec.step(&x, &h);
            let (ctx, alphas, u) = self.attention_with_u(&enc.states, &h_next);
            let mut cat = ctx;
            cat.extend_from_slice(&h_next);
            let logits = self.out.forward(&cat);
            let (ce, probs) = softmax_cross_entropy(&logits, targets[k])?;
            total = total + ce;
            steps.push(DecStep {
                cache,
                h: h_next.clone(),
                input_id: id,
                mask,
                u,
                alphas,
                cat,
                probs,
                target: targets[k],
            });
            h = h_next;
        }

        let denom = F::from_f64(scored as f64);
        let loss = total / denom;
        if !loss.is_finite() {
            return Err(Error::NonFinite("language generator loss".into()));
        }
        let Some(grads) = grads else {
            return Ok(loss);
        };

        // ---- backward ----
        let t_len = enc.states.len();
        let inv = F::ONE / denom;
        let mut d_states = vec![vec![F::ZERO; two_e]; t_len];
        let mut dh = vec![F::ZERO; cfg.dec_hidden()];

        for step in steps.iter().rev() {
            let mut dlogits = softmax_ce_backward(&step.probs, step.target);
            for d in dlogits.iter_mut() {
                *d = *d * inv;
            }
            let dcat = self.out.backward(&step.cat, &dlogits, &mut grads.out);
            let (dc, dh_direct) = dcat.split_at(two_e);
            for (a, b) in dh.iter_mut().zip(dh_direct) {
                *a = *a + *b;
            }

            // Attention backward: ctx = Σ αᵢ sᵢ, αᵢ = softmax(sᵢ·u).
            let dalpha: Vec<F> = enc.states.iter().map(|s| dot(dc, s)).collect();
            let mix: F = dalpha
                .iter()
                .zip(&step.alphas)
                .map(|(da, a)| *da * *a)
                .sum();
            let de: Vec<F> = step
                .alphas
                .iter()
                .zip(&dalpha)
                .map(|(a, da)| *a * (*da - mix))
                .collect();
            let mut du = vec![F::ZERO; two_e];
            for i in 0..t_len {
                let s = &enc.states[i];
                let ds = &mut d_states[i];
                for k in 0..two_e {
                    ds[k] = ds[k] + step.alphas[i] * dc[k] + de[i] * step.u[k];
                    du[k] = du[k] + de[i] * s[k];
                }
            }
            outer_acc(&mut grads.attn, &du, &step.h);
            matvec_t_acc(&self.attn, &du, &mut dh);

            let (mut dx, dh_prev) = self.dec.backward(&step.cache, &dh, &mut grads.dec);
            if let Some(mask) = &step.mask {
                apply_mask(&mut dx, mask);
            }
            self.embedding.backward(step.input_id, &dx, &mut grads.embedding);
            dh = dh_prev;
        }

        // Decoder-init path: dh now holds d(h0).
        let (d_fwd_final, d_bwd_final) = if cfg.zero_decoder_init {
            (vec![F::ZERO; e], vec![F::ZERO; e])
        } else {
            (dh[..e].to_vec(), dh[e..].to_vec())
        };

        let mut dxs = vec![vec![F::ZERO; cfg.embed_dim]; t_len];

        // Forward-direction chain, walked back in time.
        let mut dhf = d_fwd_final;
        for i in (0..t_len).rev() {
            for k in 0..e {
                dhf[k] = dhf[k] + d_states[i][k];
            }
            let (dx, dh_prev) = self.enc_fwd.backward(&enc.fwd_caches[i], &dhf, &mut grads.enc_fwd);
            for (a, b) in dxs[i].iter_mut().zip(dx) {
                *a = *a + b;
            }
            dhf = dh_prev;
        }

        // Backward-direction chain: run order was T-1..0, so its reverse
        // visits positions 0..T-1; caches index as T-1-p.
        let mut dhb = d_bwd_final;
        for p in 0..t_len {
            for k in 0..e {
                dhb[k] = dhb[k] + d_states[p][e + k];
            }
            let cache = &enc.bwd_caches[t_len - 1 - p];
            let (dx, dh_prev) = self.enc_bwd.backward(cache, &dhb, &mut grads.enc_bwd);
            for (a, b) in dxs[p].iter_mut().zip(dx) {
                *a = *a + b;
            }
            dhb = dh_prev;
        }

        for (i, mut dx) in dxs.into_iter().enumerate() {
            if let Some(mask) = &enc.masks[i] {
                apply_mask(&mut dx, mask);
            }
            self.embedding.backward(enc.ids[i], &dx, &mut grads.embedding);
        }
        Ok(loss)
    }

    /// Greedy decode. UNK is never emitted (its logit is skipped in the
    /// argmax); decoding stops at EOS or after `max_len` tokens. Returns the
    /// tokens and the attention row recorded at every step taken.
    pub fn generate(
        &self,
        terms: &[usize],
        style_id: usize,
        max_len: usize,
    ) -> Result<(Vec<usize>, AttentionTrace)> {
        let mut no_rng: Option<&mut dyn RngCore> = None;
        let enc = self.encode(terms, style_id, 0.0, &mut no_rng)?;
        let cfg = &self.cfg;
        let mut h = enc.h0.clone();
        let mut prev = cfg.bos_id;
        let mut out = Vec::new();
        let mut trace = AttentionTrace { rows: Vec::new() };
        while out.len() < max_len {
            let x = self.embedding.lookup(prev);
            h = self.dec.step_nograd(x, &h);
            let (ctx, alphas) = self.attention(&enc.states, &h);
            let mut cat = ctx;
            cat.extend_from_slice(&h);
            let logits = self.out.forward(&cat);
            let probs = softmax(&logits);
            let mut best = usize::MAX;
            for i in 0..probs.len() {
                if i == cfg.unk_id {
                    continue;
                }
                if best == usize::MAX || probs[i] > probs[best] {
                    best = i;
                }
            }
            if !probs[best].is_finite() {
                return Err(Error::NonFinite("language generator decode".into()));
            }
            trace.rows.push(alphas.iter().map(|a| a.to_f64()).collect());
            if best == cfg.eos_id {
                break;
            }
            out.push(best);
            prev = best;
        }
        Ok((out, trace))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::{check_gradients, Adam, AdamConfig, GradCheckOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_cfg() -> LangGenConfig {
        LangGenConfig {
            vocab_size: 11,
            embed_dim: 5,
            enc_hidden: 4,
            bos_id: 2,
            eos_id: 3,
            unk_id: 1,
            zero_decoder_init: false,
            init_scale: 0.2,
        }
    }

    #[test]
    fn zero_model_loss_is_log_vocab() {
        let model = LangGen::<f64>::new(tiny_cfg(), &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap()
            .zeros_like();
        let expect = (11f64).ln();
        for (terms, sent) in [
            (vec![], vec![6usize, 7]),
            (vec![4usize, 5], vec![6, 7, 8]),
        ] {
            let loss = model.loss(&terms, 9, &sent).unwrap();
            assert!((loss - expect).abs() < 1e-12, "loss {loss} vs {expect}");
        }
    }

    fn gradcheck_config(cfg: LangGenConfig, terms: Vec<usize>, sentence: Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let model = LangGen::<f64>::new(cfg, &mut rng).unwrap();
        let style = 9usize;

        let mut grads = model.zeros_like();
        model
            .loss_and_grads(&terms, style, &sentence, &mut grads, 0.0, None)
            .unwrap();

        let params = model.param_vec();
        let names = model.param_names();
        let analytic = grads.param_vec();
        let template = model.clone();
        let mut loss_fn = move |vals: &[Tensor<f64>]| {
            let mut m = template.clone();
            m.load_param_vec(vals)?;
            m.loss(&terms, style, &sentence)
        };
        let report = check_gradients(
            &mut loss_fn,
            &params,
            &names,
            &analytic,
            &GradCheckOptions {
                max_coords: 30,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(
            report.passes(1e-5),
            "max rel {:.3e} at {:?}",
            report.max_rel_error,
            report.worst
        );
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        gradcheck_config(tiny_cfg(), vec![4, 7, 5], vec![6, 8, 10, 7]);
    }

    #[test]
    fn analytic_gradients_match_with_zero_decoder_init() {
        gradcheck_config(
            LangGenConfig {
                zero_decoder_init: true,
                ..tiny_cfg()
            },
            vec![4, 7],
            vec![6, 8, 10],
        );
    }

    #[test]
    fn analytic_gradients_match_with_empty_terms() {
        gradcheck_config(tiny_cfg(), vec![], vec![6, 8]);
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = LangGen::<f32>::new(tiny_cfg(), &mut rng).unwrap();
        let (_, trace) = model.generate(&[4, 5, 6], 9, 8).unwrap();
        assert!(!trace.rows.is_empty());
        for row in &trace.rows {
            assert_eq!(row.len(), 4); // three terms + style token
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6, "row sums to {sum}");
            assert!(row.iter().all(|&a| a >= 0.0));
        }
    }

    #[test]
    fn unk_is_never_emitted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut model = LangGen::<f32>::new(tiny_cfg(), &mut rng).unwrap();
        // Stack the output bias heavily toward UNK; it must still not appear.
        model.out.b.data_mut()[1] = 50.0;
        let (tokens, _) = model.generate(&[4, 5], 9, 6).unwrap();
        assert!(!tokens.contains(&1), "unk leaked into {tokens:?}");
    }

    #[test]
    fn decode_respects_max_len_and_excludes_eos() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = LangGen::<f32>::new(tiny_cfg(), &mut rng).unwrap();
        let (tokens, trace) = model.generate(&[4], 9, 5).unwrap();
        assert!(tokens.len() <= 5);
        assert!(!tokens.contains(&3));
        assert!(trace.rows.len() >= tokens.len());
    }

    #[test]
    fn decoder_init_mode_changes_the_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let enc_init = LangGen::<f64>::new(tiny_cfg(), &mut rng).unwrap();
        let mut zero_init = enc_init.clone();
        zero_init.cfg.zero_decoder_init = true;
        let a = enc_init.loss(&[4, 5], 9, &[6, 7]).unwrap();
        let b = zero_init.loss(&[4, 5], 9, &[6, 7]).unwrap();
        assert!((a - b).abs() > 1e-9, "init mode had no effect: {a} vs {b}");
    }

    #[test]
    fn style_token_changes_the_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let model = LangGen::<f64>::new(tiny_cfg(), &mut rng).unwrap();
        let a = model.loss(&[4, 5], 9, &[6, 7]).unwrap();
        let b = model.loss(&[4, 5], 10, &[6, 7]).unwrap();
        assert!((a - b).abs() > 1e-9, "style token had no effect");
    }

    #[test]
    fn dropout_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let model = LangGen::<f32>::new(tiny_cfg(), &mut rng).unwrap();
        let mut g1 = model.zeros_like();
        let mut g2 = model.zeros_like();
        let mut r1 = ChaCha8Rng::seed_from_u64(21);
        let mut r2 = ChaCha8Rng::seed_from_u64(21);
        let l1 = model
            .loss_and_grads(&[4, 5], 9, &[6, 7], &mut g1, 0.3, Some(&mut r1))
            .unwrap();
        let l2 = model
            .loss_and_grads(&[4, 5], 9, &[6, 7], &mut g2, 0.3, Some(&mut r2))
            .unwrap();
        assert_eq!(l1, l2);
        assert_eq!(g1.param_vec(), g2.param_vec());
    }

    #[test]
    fn adam_steps_overfit_one_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut model = LangGen::<f32>::new(tiny_cfg(), &mut rng).unwrap();
        let terms = [4usize, 5];
        let sent = [6usize, 7, 8];
        let first = model.loss(&terms, 9, &sent).unwrap();
        let cfg = AdamConfig {
            lr: 0.01,
            ..Default::default()
        };
        let mut opt = Adam::new(&model, cfg);
        for _ in 0..400 {
            let mut grads = model.zeros_like();
            model
                .loss_and_grads(&terms, 9, &sent, &mut grads, 0.0, None)
                .unwrap();
            opt.update(&mut model, &grads).unwrap();
        }
        let last = model.loss(&terms, 9, &sent).unwrap();
        assert!(last < first * 0.2, "loss stuck: {first} -> {last}");
        let (tokens, _) = model.generate(&terms, 9, 10).unwrap();
        assert_eq!(tokens, sent, "overfit decode should reproduce the pair");
    }

    #[test]
    fn invalid_ids_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = LangGen::<f32>::new(tiny_cfg(), &mut rng).unwrap();
        assert!(model.loss(&[11], 9, &[6]).is_err());
        assert!(model.loss(&[4], 11, &[6]).is_err());
        assert!(model.loss(&[4], 9, &[11]).is_err());
    }
}
