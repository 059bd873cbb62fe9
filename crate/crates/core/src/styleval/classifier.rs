//! Binary style classifier: logistic regression on bag-of-ngrams presence
//! features (unigrams and bigrams), trained by full-batch gradient descent
//! with a backtracking line search. Deterministic given its inputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joins the two words of a bigram feature key.
const BIGRAM_SEP: char = '§';
const UNK: &str = "<unk>";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// L2 penalty weight; the objective is mean loss + l2/(2n) * ||w||^2.
    pub l2: f64,
    /// Stop when the gradient's L2 norm falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Words seen fewer times than this across training become `<unk>`.
    pub min_count: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { l2: 1.0, tol: 1e-6, max_iters: 10_000, min_count: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StyleClassifier {
    cfg: ClassifierConfig,
    /// Words kept as-is; everything else maps to `<unk>`.
    kept: BTreeSet<String>,
    /// Feature key -> weight index. Unigrams are the word itself; bigrams
    /// are the two words joined by `§`.
    features: BTreeMap<String, usize>,
    weights: Vec<f64>,
    bias: f64,
    pub iters: usize,
    pub final_grad_norm: f64,
}

impl StyleClassifier {
    /// Train on styled (label 1) vs descriptive (label 0) token sequences.
    pub fn train(
        styled: &[Vec<String>],
        descriptive: &[Vec<String>],
        cfg: ClassifierConfig,
    ) -> Result<Self> {
        if styled.is_empty() || descriptive.is_empty() {
            return Err(Error::InvalidArg("classifier needs examples of both classes".into()));
        }
        if cfg.l2 < 0.0 || cfg.tol <= 0.0 {
            return Err(Error::InvalidArg("classifier config out of range".into()));
        }

        let mut counts: HashMap<&str, usize> = HashMap::new();
        for doc in styled.iter().chain(descriptive) {
            for w in doc {
                *counts.entry(w.as_str()).or_insert(0) += 1;
            }
        }
        let kept: BTreeSet<String> = counts
            .iter()
            .filter(|(_, &c)| c >= cfg.min_count)
            .map(|(w, _)| w.to_string())
            .collect();

        let mut features: BTreeMap<String, usize> = BTreeMap::new();
        let mut docs: Vec<(Vec<String>, f64)> = Vec::new();
        for (corpus, label) in [(styled, 1.0), (descriptive, 0.0)] {
            for doc in corpus {
                for key in feature_keys(doc, &kept) {
                    let next = features.len();
                    features.entry(key).or_insert(next);
                }
                docs.push((doc.clone(), label));
            }
        }

        let dim = features.len();
        let n = docs.len() as f64;
        let rows: Vec<(Vec<usize>, f64)> = docs
            .iter()
            .map(|(doc, label)| {
                let idx: Vec<usize> = feature_keys(doc, &kept)
                    .into_iter()
                    .map(|k| features[&k])
                    .collect();
                (idx, *label)
            })
            .collect();

        let mut w = vec![0.0f64; dim];
        let mut b = 0.0f64;

        let objective = |w: &[f64], b: f64| -> f64 {
            let mut total = 0.0;
            for (idx, label) in &rows {
                let z: f64 = idx.iter().map(|&i| w[i]).sum::<f64>() + b;
                total += nll(z, *label);
            }
            let reg: f64 = w.iter().map(|v| v * v).sum::<f64>() * cfg.l2 / 2.0;
            (total + reg) / n
        };

        let mut iters = 0;
        let mut grad_norm = f64::INFINITY;
        let mut gw = vec![0.0f64; dim];
        while iters < cfg.max_iters {
            gw.iter_mut().for_each(|g| *g = 0.0);
            let mut gb = 0.0f64;
            for (idx, label) in &rows {
                let z: f64 = idx.iter().map(|&i| w[i]).sum::<f64>() + b;
                let err = sigmoid(z) - label;
                for &i in idx {
                    gw[i] += err;
                }
                gb += err;
            }
            for (g, v) in gw.iter_mut().zip(&w) {
                *g = (*g + cfg.l2 * v) / n;
            }
            gb /= n;

            let sq: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
            grad_norm = sq.sqrt();
            if grad_norm < cfg.tol {
                break;
            }

            // Backtracking line search (Armijo, c = 1e-4, halving).
            let before = objective(&w, b);
            let mut t = 1.0f64;
            loop {
                let cand_w: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| v - t * g).collect();
                let cand_b = b - t * gb;
                if objective(&cand_w, cand_b) <= before - 1e-4 * t * sq || t < 1e-20 {
                    w = cand_w;
                    b = cand_b;
                    break;
                }
                t *= 0.5;
            }
            iters += 1;
        }
        if grad_norm >= cfg.tol {
            return Err(Error::Eval(format!(
                "classifier did not converge: grad norm {grad_norm} after {iters} iters"
            )));
        }

        Ok(StyleClassifier {
            cfg,
            kept,
            features,
            weights: w,
            bias: b,
            iters,
            final_grad_norm: grad_norm,
        })
    }

    /// P(styled) for one token sequence.
    pub fn prob(&self, tokens: &[String]) -> f64 {
        let z: f64 = feature_keys(tokens, &self.kept)
            .into_iter()
            .filter_map(|k| self.features.get(&k))
            .map(|&i| self.weights[i])
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }

    pub fn predict(&self, tokens: &[String]) -> bool {
        self.prob(tokens) > 0.5
    }

    /// Fraction of sequences classified as styled.
    pub fn styled_fraction(&self, corpus: &[Vec<String>]) -> Result<f64> {
        if corpus.is_empty() {
            return Err(Error::Eval("no sequences to classify".into()));
        }
        let hits = corpus.iter().filter(|s| self.predict(s)).count();
        Ok(hits as f64 / corpus.len() as f64)
    }

    pub fn weight_of(&self, key: &str) -> Option<f64> {
        self.features.get(key).map(|&i| self.weights[i])
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }
}

/// Deduplicated unigram + bigram presence keys after `<unk>` mapping.
fn feature_keys(tokens: &[String], kept: &BTreeSet<String>) -> BTreeSet<String> {
    let mapped: Vec<&str> = tokens
        .iter()
        .map(|w| if kept.contains(w) { w.as_str() } else { UNK })
        .collect();
    let mut keys = BTreeSet::new();
    for w in &mapped {
        keys.insert((*w).to_string());
    }
    for pair in mapped.windows(2) {
        keys.insert(format!("{}{BIGRAM_SEP}{}", pair[0], pair[1]));
    }
    keys
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable -log p(label | z).
fn nll(z: f64, label: f64) -> f64 {
    // log(1 + e^m) where m is the margin-flipped logit.
    let m = if label > 0.5 { -z } else { z };
    if m > 0.0 {
        m + (-m).exp().ln_1p()
    } else {
        m.exp().ln_1p()
    }
}
