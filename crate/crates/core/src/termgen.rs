//! Term generator: maps an image feature vector to an ordered sequence of
//! semantic terms with a projected-image GRU decoder.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nncore::{
    apply_mask, dropout_mask, softmax, softmax_ce_backward, softmax_cross_entropy, tanh_backward,
    tanh_vec, Dense, Embedding, GruCell, GruStepCache, Parameterized, Real, Tensor,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermGenConfig {
    pub vocab_size: usize,
    pub feature_dim: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub bos_id: usize,
    pub eos_id: usize,
    /// Use the projected image as the initial hidden state instead of as
    /// the first input step.
    pub image_as_h0: bool,
    /// Skip the tanh on the image projection.
    pub linear_projection: bool,
    pub init_scale: f64,
}

impl TermGenConfig {
    pub fn new(vocab_size: usize) -> Self {
        TermGenConfig {
            vocab_size,
            feature_dim: crate::corpus::FEATURE_DIM,
            embed_dim: 128,
            hidden_dim: 256,
            bos_id: 2,
            eos_id: 3,
            image_as_h0: false,
            linear_projection: false,
            init_scale: 0.08,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.feature_dim == 0 || self.embed_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::InvalidArg(
                "term generator dimensions must be nonzero".into(),
            ));
        }
        if self.bos_id >= self.vocab_size || self.eos_id >= self.vocab_size {
            return Err(Error::InvalidArg(
                "bos/eos ids must lie inside the vocabulary".into(),
            ));
        }
        Ok(())
    }

    /// Where the image projection lands: the input space, or the hidden
    /// state directly.
    fn proj_dim(&self) -> usize {
        if self.image_as_h0 {
            self.hidden_dim
        } else {
            self.embed_dim
        }
    }
}

#[derive(Debug, Clone)]
pub struct TermGen<F: Real> {
    pub cfg: TermGenConfig,
    pub embedding: Embedding<F>,
    pub proj: Dense<F>,
    pub gru: GruCell<F>,
    pub out: Dense<F>,
}

impl<F: Real> Parameterized<F> for TermGen<F> {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&str, &'a Tensor<F>)) {
        self.embedding.visit(&mut |n, t| f(&format!("embedding.{n}"), t));
        self.proj.visit(&mut |n, t| f(&format!("proj.{n}"), t));
        self.gru.visit(&mut |n, t| f(&format!("gru.{n}"), t));
        self.out.visit(&mut |n, t| f(&format!("out.{n}"), t));
    }
    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&str, &'a mut Tensor<F>)) {
        self.embedding.visit_mut(&mut |n, t| f(&format!("embedding.{n}"), t));
        self.proj.visit_mut(&mut |n, t| f(&format!("proj.{n}"), t));
        self.gru.visit_mut(&mut |n, t| f(&format!("gru.{n}"), t));
        self.out.visit_mut(&mut |n, t| f(&format!("out.{n}"), t));
    }
}

/// One decode step's bookkeeping for the backward pass.
struct StepTrace<F: Real> {
    cache: GruStepCache<F>,
    h: Vec<F>,
    /// Token id consumed at this step, if the input was an embedding.
    input_id: Option<usize>,
    mask: Option<Vec<F>>,
    /// Softmax probabilities and the gold id, if this step is scored.
    scored: Option<(Vec<F>, usize)>,
}

impl<F: Real> TermGen<F> {
    pub fn new(cfg: TermGenConfig, rng: &mut impl rand::Rng) -> Result<Self> {
        cfg.validate()?;
        let s = cfg.init_scale;
        Ok(TermGen {
            embedding: Embedding::uniform(cfg.vocab_size, cfg.embed_dim, s, rng),
            proj: Dense::uniform(cfg.proj_dim(), cfg.feature_dim, s, rng),
            gru: GruCell::uniform(cfg.hidden_dim, cfg.embed_dim, s, rng),
            out: Dense::uniform(cfg.vocab_size, cfg.hidden_dim, s, rng),
            cfg,
        })
    }

    /// A same-shape model with all parameters zero, for gradient buffers.
    pub fn zeros_like(&self) -> Self {
        let cfg = self.cfg.clone();
        TermGen {
            embedding: Embedding::zeros(cfg.vocab_size, cfg.embed_dim),
            proj: Dense::zeros(cfg.proj_dim(), cfg.feature_dim),
            gru: GruCell::zeros(cfg.hidden_dim, cfg.embed_dim),
            out: Dense::zeros(cfg.vocab_size, cfg.hidden_dim),
            cfg,
        }
    }

    fn check_inputs(&self, feature: &[F], terms: &[usize]) -> Result<()> {
        if feature.len() != self.cfg.feature_dim {
            return Err(Error::Shape(format!(
                "feature has {} dims, model expects {}",
                feature.len(),
                self.cfg.feature_dim
            )));
        }
        if let Some(&t) = terms.iter().find(|&&t| t >= self.cfg.vocab_size) {
            return Err(Error::Shape(format!(
                "term id {t} outside vocabulary of {}",
                self.cfg.vocab_size
            )));
        }
        Ok(())
    }

    /// Project the feature vector; returns the projection output.
    fn project(&self, feature: &[F]) -> Vec<F> {
        let mut y = self.proj.forward(feature);
        if !self.cfg.linear_projection {
            tanh_vec(&mut y);
        }
        y
    }

    /// Mean cross-entropy of the gold terms followed by EOS. Every scored
    /// position weighs equally; the image step is unscored.
    pub fn loss(&self, feature: &[F], terms: &[usize]) -> Result<F> {
        self.run(feature, terms, None, 0.0, None).map(|(l, _)| l)
    }

    /// Loss plus parameter gradients (accumulated into `grads`). Dropout,
    /// when enabled, masks the token embeddings only.
    pub fn loss_and_grads(
        &self,
        feature: &[F],
        terms: &[usize],
        grads: &mut TermGen<F>,
        dropout: f64,
        rng: Option<&mut dyn RngCore>,
    ) -> Result<F> {
        self.run(feature, terms, Some(grads), dropout, rng)
            .map(|(l, _)| l)
    }

    fn run(
        &self,
        feature: &[F],
        terms: &[usize],
        grads: Option<&mut TermGen<F>>,
        dropout: f64,
        mut rng: Option<&mut dyn RngCore>,
    ) -> Result<(F, usize)> {
        self.check_inputs(feature, terms)?;
        let cfg = &self.cfg;
        let proj_out = self.project(feature);

        // Input ids: BOS then the gold terms; targets: terms then EOS.
        let input_ids: Vec<usize> = std::iter::once(cfg.bos_id)
            .chain(terms.iter().copied())
            .collect();
        let targets: Vec<usize> = terms
            .iter()
            .copied()
            .chain(std::iter::once(cfg.eos_id))
            .collect();
        let scored = targets.len();

        let mut traces: Vec<StepTrace<F>> = Vec::with_capacity(input_ids.len() + 1);
        let mut h = vec![F::ZERO; cfg.hidden_dim];
        if cfg.image_as_h0 {
            h.copy_from_slice(&proj_out);
        } else {
            let (h_next, cache) = self.gru.step(&proj_out, &h);
            traces.push(StepTrace {
                cache,
                h: h_next.clone(),
                input_id: None,
                mask: None,
                scored: None,
            });
            h = h_next;
        }

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
            let (h_next, cache) = self.gru.step(&x, &h);
            let logits = self.out.forward(&h_next);
            let (ce, probs) = softmax_cross_entropy(&logits, targets[k])?;
            total = total + ce;
            traces.push(StepTrace {
                cache,
                h: h_next.clone(),
                input_id: Some(id),
                mask,
                scored: Some((probs, targets[k])),
            });
            h = h_next;
        }

        let denom = F::from_f64(scored as f64);
        let loss = total / denom;
        if !loss.is_finite() {
            return Err(Error::NonFinite("term generator loss".into()));
        }

        let Some(grads) = grads else {
            return Ok((loss, scored));
        };

        // Backward: walk the steps in reverse, chaining dh.
        let inv = F::ONE / denom;
        let mut dh = vec![F::ZERO; cfg.hidden_dim];
        for trace in traces.iter().rev() {
            if let Some((probs, target)) = &trace.scored {
                let mut dlogits = softmax_ce_backward(probs, *target);
                for d in dlogits.iter_mut() {
                    *d = *d * inv;
                }
                let dh_out = self.out.backward(&trace.h, &dlogits, &mut grads.out);
                for (a, b) in dh.iter_mut().zip(dh_out) {
                    *a = *a + b;
                }
            }
            let (mut dx, dh_prev) = self.gru.backward(&trace.cache, &dh, &mut grads.gru);
            match trace.input_id {
                Some(id) => {
                    if let Some(mask) = &trace.mask {
                        apply_mask(&mut dx, mask);
                    }
                    self.embedding.backward(id, &dx, &mut grads.embedding);
                }
                None => {
                    // Image-as-input step: route into the projection.
                    let dpre = if cfg.linear_projection {
                        dx
                    } else {
                        tanh_backward(&proj_out, &dx)
                    };
                    self.proj.backward(feature, &dpre, &mut grads.proj);
                }
            }
            dh = dh_prev;
        }
        if cfg.image_as_h0 {
            // dh now holds d(h0) = d(projection output).
            let dpre = if cfg.linear_projection {
                dh
            } else {
                tanh_backward(&proj_out, &dh)
            };
            self.proj.backward(feature, &dpre, &mut grads.proj);
        }
        Ok((loss, scored))
    }

    /// Greedy decode: argmax at every step until EOS or `max_len` terms.
    /// The returned sequence excludes BOS and EOS.
    pub fn generate(&self, feature: &[F], max_len: usize) -> Result<Vec<usize>> {
        self.check_inputs(feature, &[])?;
        let cfg = &self.cfg;
        let proj_out = self.project(feature);
        let mut h = vec![F::ZERO; cfg.hidden_dim];
        if cfg.image_as_h0 {
            h.copy_from_slice(&proj_out);
        } else {
            h = self.gru.step_nograd(&proj_out, &h);
        }
        let mut prev = cfg.bos_id;
        let mut out = Vec::new();
        while out.len() < max_len {
            let x = self.embedding.lookup(prev);
            h = self.gru.step_nograd(x, &h);
            let logits = self.out.forward(&h);
            let probs = softmax(&logits);
            let mut best = 0;
            for i in 1..probs.len() {
                if probs[i] > probs[best] {
                    best = i;
                }
            }
            if !probs[best].is_finite() {
                return Err(Error::NonFinite("term generator decode".into()));
            }
            if best == cfg.eos_id {
                break;
            }
            out.push(best);
            prev = best;
        }
        Ok(out)
    }
}
