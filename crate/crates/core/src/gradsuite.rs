//! Cross-cutting gradient verification: every backward pass in the
//! workspace, finite-differenced on a batch of randomly drawn small shapes.
//!
//! The per-module unit tests pin each layer on one or two fixed shapes;
//! this suite is the paranoid sweep. It runs in f64 so that central
//! differences have enough headroom to certify the analytic gradients to
//! a 1e-4 relative tolerance, and it is what the `gradcheck` CLI command
//! executes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::langgen::{LangGen, LangGenConfig};
use crate::nncore::{
    check_gradients, softmax_ce_backward, softmax_cross_entropy, Dense, Embedding,
    GradCheckOptions, GradCheckReport, GruCell, Parameterized, Tensor,
};
use crate::styleval::{GruLm, GruLmConfig};
use crate::termgen::{TermGen, TermGenConfig};

/// The layers the suite exercises, in report order.
pub const SUITE_LAYERS: [&str; 6] = [
    "dense",
    "embedding",
    "gru_cell",
    "attention_path",
    "output_head",
    "image_proj",
];

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub layer: &'static str,
    /// Human-readable dimensions of the drawn instance.
    pub shape: String,
    pub report: GradCheckReport,
}

impl SuiteRow {
    pub fn passes(&self, tol: f64) -> bool {
        self.report.passes(tol)
    }
}

/// Run every layer check `shapes_per_layer` times on independently drawn
/// shapes. Deterministic in `seed`.
pub fn gradient_suite(seed: u64, shapes_per_layer: usize) -> Result<Vec<SuiteRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(SUITE_LAYERS.len() * shapes_per_layer);
    for layer in SUITE_LAYERS {
        for _ in 0..shapes_per_layer {
            rows.push(match layer {
                "dense" => dense_case(&mut rng)?,
                "embedding" => embedding_case(&mut rng)?,
                "gru_cell" => gru_cell_case(&mut rng)?,
                "attention_path" => attention_case(&mut rng)?,
                "output_head" => output_head_case(&mut rng)?,
                "image_proj" => image_proj_case(&mut rng)?,
                _ => unreachable!(),
            });
        }
    }
    Ok(rows)
}

fn opts(rng: &mut ChaCha8Rng) -> GradCheckOptions {
    GradCheckOptions {
        seed: rng.gen(),
        ..Default::default()
    }
}

fn prefixed<F: crate::nncore::Real>(prefix: &str, m: &dyn Parameterized<F>) -> Vec<String> {
    m.param_names()
        .into_iter()
        .map(|n| format!("{prefix}.{n}"))
        .collect()
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

fn rand_ids(rng: &mut ChaCha8Rng, len: usize, lo: usize, hi: usize) -> Vec<usize> {
    (0..len).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Two stacked dense layers into a softmax: checks dW, db and the dx that
/// the second layer hands back to the first.
fn dense_case(rng: &mut ChaCha8Rng) -> Result<SuiteRow> {
    let d_in = rng.gen_range(2..=5);
    let d_mid = rng.gen_range(2..=5);
    let d_out = rng.gen_range(2..=6);
    let l1 = Dense::<f64>::uniform(d_mid, d_in, 0.6, rng);
    let l2 = Dense::<f64>::uniform(d_out, d_mid, 0.6, rng);
    let x = rand_vec(rng, d_in);
    let target = rng.gen_range(0..d_out);
    let o = opts(rng);

    let mut g1 = Dense::zeros(d_mid, d_in);
    let mut g2 = Dense::zeros(d_out, d_mid);
    let mid = l1.forward(&x);
    let (_, probs) = softmax_cross_entropy(&l2.forward(&mid), target)?;
    let dl = softmax_ce_backward(&probs, target);
    let dmid = l2.backward(&mid, &dl, &mut g2);
    l1.backward(&x, &dmid, &mut g1);

    let params = [l1.param_vec(), l2.param_vec()].concat();
    let names = [prefixed("l1", &l1), prefixed("l2", &l2)].concat();
    let analytic = [g1.param_vec(), g2.param_vec()].concat();
    let mut loss = |ps: &[Tensor<f64>]| {
        let a = Dense {
            w: ps[0].clone(),
            b: ps[1].clone(),
        };
        let b = Dense {
            w: ps[2].clone(),
            b: ps[3].clone(),
        };
        let (l, _) = softmax_cross_entropy(&b.forward(&a.forward(&x)), target)?;
        Ok(l)
    };
    let report = check_gradients(&mut loss, &params, &names, &analytic, &o)?;
    Ok(SuiteRow {
        layer: "dense",
        shape: format!("in={d_in},mid={d_mid},out={d_out}"),
        report,
    })
}

/// Embedding rows fed through a classifier head; several lookups so that
/// repeated ids accumulate.
fn embedding_case(rng: &mut ChaCha8Rng) -> Result<SuiteRow> {
    let vocab = rng.gen_range(3..=7);
    let dim = rng.gen_range(2..=4);
    let n_cls = rng.gen_range(2..=5);
    let steps = rng.gen_range(1..=3);
    let emb = Embedding::<f64>::uniform(vocab, dim, 0.6, rng);
    let head = Dense::<f64>::uniform(n_cls, dim, 0.6, rng);
    let ids = rand_ids(rng, steps, 0, vocab);
    let targets = rand_ids(rng, steps, 0, n_cls);
    let o = opts(rng);

    let mut ge = Embedding::zeros(vocab, dim);
    let mut gh = Dense::zeros(n_cls, dim);
    for (&id, &t) in ids.iter().zip(&targets) {
        let x = emb.lookup(id).to_vec();
        let (_, probs) = softmax_cross_entropy(&head.forward(&x), t)?;
        let dl = softmax_ce_backward(&probs, t);
        let dx = head.backward(&x, &dl, &mut gh);
        emb.backward(id, &dx, &mut ge);
    }

    let params = [emb.param_vec(), head.param_vec()].concat();
    let names = [prefixed("emb", &emb), prefixed("head", &head)].concat();
    let analytic = [ge.param_vec(), gh.param_vec()].concat();
    let mut loss = |ps: &[Tensor<f64>]| {
        let e = Embedding {
            table: ps[0].clone(),
        };
        let h = Dense {
            w: ps[1].clone(),
            b: ps[2].clone(),
        };
        let mut total = 0.0;
        for (&id, &t) in ids.iter().zip(&targets) {
            let (l, _) = softmax_cross_entropy(&h.forward(e.lookup(id)), t)?;
            total += l;
        }
        Ok(total)
    };
    let report = check_gradients(&mut loss, &params, &names, &analytic, &o)?;
    Ok(SuiteRow {
        layer: "embedding",
        shape: format!("vocab={vocab},dim={dim},classes={n_cls},steps={steps}"),
        report,
    })
}

/// Embedding -> unrolled GRU -> classifier on the final state: checks the
/// recurrent dh chain and the dx handed back to the embedding.
fn gru_cell_case(rng: &mut ChaCha8Rng) -> Result<SuiteRow> {
    let vocab = rng.gen_range(3..=6);
    let dim = rng.gen_range(2..=4);
    let hidden = rng.gen_range(2..=4);
    let n_cls = rng.gen_range(2..=4);
    let steps = rng.gen_range(1..=4);
    let emb = Embedding::<f64>::uniform(vocab, dim, 0.6, rng);
    let cell = GruCell::<f64>::uniform(hidden, dim, 0.6, rng);
    let head = Dense::<f64>::uniform(n_cls, hidden, 0.6, rng);
    let ids = rand_ids(rng, steps, 0, vocab);
    let target = rng.gen_range(0..n_cls);
    let o = opts(rng);

    let mut ge = Embedding::zeros(vocab, dim);
    let mut gc = GruCell::zeros(hidden, dim);
    let mut gh = Dense::zeros(n_cls, hidden);
    let mut h = vec![0.0f64; hidden];
    let mut caches = Vec::with_capacity(steps);
    for &id in &ids {
        let x = emb.lookup(id).to_vec();
        let (h_next, cache) = cell.step(&x, &h);
        caches.push(cache);
        h = h_next;
    }
    let (_, probs) = softmax_cross_entropy(&head.forward(&h), target)?;
    let dl = softmax_ce_backward(&probs, target);
    let mut dh = head.backward(&h, &dl, &mut gh);
    for (t, cache) in caches.iter().enumerate().rev() {
        let (dx, dh_prev) = cell.backward(cache, &dh, &mut gc);
        emb.backward(ids[t], &dx, &mut ge);
        dh = dh_prev;
    }

    let params = [emb.param_vec(), cell.param_vec(), head.param_vec()].concat();
    let names = [
        prefixed("emb", &emb),
        prefixed("cell", &cell),
        prefixed("head", &head),
    ]
    .concat();
    let analytic = [ge.param_vec(), gc.param_vec(), gh.param_vec()].concat();
    let cell_template = cell.clone();
    let mut loss = |ps: &[Tensor<f64>]| {
        let e = Embedding {
            table: ps[0].clone(),
        };
        let mut c = cell_template.clone();
        c.load_param_vec(&ps[1..10])?;
        let hd = Dense {
            w: ps[10].clone(),
            b: ps[11].clone(),
        };
        let mut h = vec![0.0f64; hidden];
        for &id in &ids {
            let (h_next, _) = c.step(e.lookup(id), &h);
            h = h_next;
        }
        let (l, _) = softmax_cross_entropy(&hd.forward(&h), target)?;
        Ok(l)
    };
    let report = check_gradients(&mut loss, &params, &names, &analytic, &o)?;
    Ok(SuiteRow {
        layer: "gru_cell",
        shape: format!("vocab={vocab},dim={dim},hidden={hidden},steps={steps}"),
        report,
    })
}

/// Full styled generator loss: bidirectional term encoder, attention over
/// its states, decoder, output softmax.
fn attention_case(rng: &mut ChaCha8Rng) -> Result<SuiteRow> {
    let vocab = rng.gen_range(8..=12);
    let mut cfg = LangGenConfig::new(vocab);
    cfg.embed_dim = rng.gen_range(2..=4);
    cfg.enc_hidden = rng.gen_range(2..=3);
    cfg.init_scale = 0.5;
    cfg.zero_decoder_init = rng.gen_bool(0.5);
    let n_terms = rng.gen_range(1..=4);
    let n_sent = rng.gen_range(1..=4);
    let terms = rand_ids(rng, n_terms, 4, vocab);
    let style = rng.gen_range(4..vocab);
    let sentence = rand_ids(rng, n_sent, 4, vocab);
    let model = LangGen::<f64>::new(cfg.clone(), rng)?;
    let o = opts(rng);

    let mut grads = model.zeros_like();
    model.loss_and_grads(&terms, style, &sentence, &mut grads, 0.0, None)?;

    let params = model.param_vec();
    let names = model.param_names();
    let analytic = grads.param_vec();
    let template = model.clone();
    let mut loss = |ps: &[Tensor<f64>]| {
        let mut m = template.clone();
        m.load_param_vec(ps)?;
        m.loss(&terms, style, &sentence)
    };
    let report = check_gradients(&mut loss, &params, &names, &analytic, &o)?;
    Ok(SuiteRow {
        layer: "attention_path",
        shape: format!(
            "vocab={vocab},embed={},enc={},terms={n_terms},sent={n_sent},zero_init={}",
            cfg.embed_dim, cfg.enc_hidden, cfg.zero_decoder_init
        ),
        report,
    })
}

/// Recurrent language model: the output projection is checked in situ,
/// fed by real GRU states rather than synthetic inputs.
fn output_head_case(rng: &mut ChaCha8Rng) -> Result<SuiteRow> {
    let vocab = rng.gen_range(6..=10);
    let mut cfg = GruLmConfig::new(vocab);
    cfg.embed_dim = rng.gen_range(2..=4);
    cfg.hidden_dim = rng.gen_range(2..=4);
    cfg.init_scale = 0.5;
    let n_tokens = rng.gen_range(1..=4);
    let tokens = rand_ids(rng, n_tokens, 4, vocab);
    let model = GruLm::<f64>::new(cfg.clone(), rng)?;
    let o = opts(rng);

    let mut grads = model.zeros_like();
    model.loss_and_grads(&tokens, &mut grads, 0.0, None)?;

    let params = model.param_vec();
    let names = model.param_names();
    let analytic = grads.param_vec();
    let template = model.clone();
    let mut loss = |ps: &[Tensor<f64>]| {
        let mut m = template.clone();
        m.load_param_vec(ps)?;
        m.loss(&tokens)
    };
    let report = check_gradients(&mut loss, &params, &names, &analytic, &o)?;
    Ok(SuiteRow {
        layer: "output_head",
        shape: format!(
            "vocab={vocab},embed={},hidden={},tokens={n_tokens}",
            cfg.embed_dim, cfg.hidden_dim
        ),
        report,
    })
}

/// Term generator: the image-feature projection feeding the decoder,
/// under both conditioning variants.
fn image_proj_case(rng: &mut ChaCha8Rng) -> Result<SuiteRow> {
    let vocab = rng.gen_range(6..=9);
    let mut cfg = TermGenConfig::new(vocab);
    cfg.feature_dim = rng.gen_range(3..=5);
    cfg.embed_dim = rng.gen_range(2..=4);
    cfg.hidden_dim = rng.gen_range(2..=4);
    cfg.init_scale = 0.5;
    cfg.image_as_h0 = rng.gen_bool(0.5);
    cfg.linear_projection = rng.gen_bool(0.5);
    let n_terms = rng.gen_range(1..=3);
    let feature = rand_vec(rng, cfg.feature_dim);
    let terms = rand_ids(rng, n_terms, 4, vocab);
    let model = TermGen::<f64>::new(cfg.clone(), rng)?;
    let o = opts(rng);

    let mut grads = model.zeros_like();
    model.loss_and_grads(&feature, &terms, &mut grads, 0.0, None)?;

    let params = model.param_vec();
    let names = model.param_names();
    let analytic = grads.param_vec();
    let template = model.clone();
    let mut loss = |ps: &[Tensor<f64>]| {
        let mut m = template.clone();
        m.load_param_vec(ps)?;
        m.loss(&feature, &terms)
    };
    let report = check_gradients(&mut loss, &params, &names, &analytic, &o)?;
    Ok(SuiteRow {
        layer: "image_proj",
        shape: format!(
            "vocab={vocab},feat={},embed={},hidden={},terms={n_terms},h0={},linear={}",
            cfg.feature_dim, cfg.embed_dim, cfg.hidden_dim, cfg.image_as_h0, cfg.linear_projection
        ),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_layer_passes_on_random_shapes() {
        let rows = gradient_suite(42, 2).unwrap();
        assert_eq!(rows.len(), SUITE_LAYERS.len() * 2);
        for row in &rows {
            assert!(
                row.passes(1e-4),
                "{} [{}]: max rel {:.3e} at {:?}",
                row.layer,
                row.shape,
                row.report.max_rel_error,
                row.report.worst
            );
        }
    }

    #[test]
    fn layer_order_matches_the_declared_list() {
        let rows = gradient_suite(7, 1).unwrap();
        let got: Vec<&str> = rows.iter().map(|r| r.layer).collect();
        assert_eq!(got, SUITE_LAYERS.to_vec());
    }

    #[test]
    fn suite_is_deterministic_in_the_seed() {
        let a = gradient_suite(3, 2).unwrap();
        let b = gradient_suite(3, 2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.shape, y.shape);
            assert_eq!(x.report.checked, y.report.checked);
            assert_eq!(x.report.max_rel_error.to_bits(), y.report.max_rel_error.to_bits());
        }
        let c = gradient_suite(4, 2).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| x.shape != y.shape));
    }
}
