use rand::Rng;

use super::params::Parameterized;
use super::real::Real;
use super::tensor::{matvec, matvec_t_acc, outer_acc, Tensor};
use crate::error::{Error, Result};

/// Affine layer y = W x + b.
#[derive(Debug, Clone)]
pub struct Dense<F: Real> {
    pub w: Tensor<F>,
    pub b: Tensor<F>,
}

impl<F: Real> Dense<F> {
    pub fn zeros(out_dim: usize, in_dim: usize) -> Self {
        Dense {
            w: Tensor::zeros(&[out_dim, in_dim]),
            b: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn uniform(out_dim: usize, in_dim: usize, scale: f64, rng: &mut impl Rng) -> Self {
        Dense {
            w: Tensor::uniform(&[out_dim, in_dim], scale, rng),
            b: Tensor::zeros(&[out_dim]),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn forward(&self, x: &[F]) -> Vec<F> {
        let mut y = vec![F::ZERO; self.out_dim()];
        matvec(&self.w, x, &mut y);
        for (yi, bi) in y.iter_mut().zip(self.b.data()) {
            *yi += *bi;
        }
        y
    }

    /// Accumulates parameter gradients into `grads` and returns dx.
    pub fn backward(&self, x: &[F], dy: &[F], grads: &mut Dense<F>) -> Vec<F> {
        outer_acc(&mut grads.w, dy, x);
        for (gb, d) in grads.b.data_mut().iter_mut().zip(dy) {
            *gb += *d;
        }
        let mut dx = vec![F::ZERO; self.in_dim()];
        matvec_t_acc(&self.w, dy, &mut dx);
        dx
    }
}

impl<F: Real> Parameterized<F> for Dense<F> {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&str, &'a Tensor<F>)) {
        f("w", &self.w);
        f("b", &self.b);
    }
    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&str, &'a mut Tensor<F>)) {
        f("w", &mut self.w);
        f("b", &mut self.b);
    }
}

/// Token embedding table, one row per vocabulary id.
#[derive(Debug, Clone)]
pub struct Embedding<F: Real> {
    pub table: Tensor<F>,
}

impl<F: Real> Embedding<F> {
    pub fn zeros(vocab: usize, dim: usize) -> Self {
        Embedding {
            table: Tensor::zeros(&[vocab, dim]),
        }
    }

    pub fn uniform(vocab: usize, dim: usize, scale: f64, rng: &mut impl Rng) -> Self {
        Embedding {
            table: Tensor::uniform(&[vocab, dim], scale, rng),
        }
    }

    pub fn vocab(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn lookup(&self, id: usize) -> &[F] {
        self.table.row(id)
    }

    pub fn backward(&self, id: usize, d: &[F], grads: &mut Embedding<F>) {
        let row = grads.table.row_mut(id);
        for (g, v) in row.iter_mut().zip(d) {
            *g += *v;
        }
    }
}

impl<F: Real> Parameterized<F> for Embedding<F> {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&str, &'a Tensor<F>)) {
        f("table", &self.table);
    }
    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&str, &'a mut Tensor<F>)) {
        f("table", &mut self.table);
    }
}

/// Numerically stable softmax (shifts by the max before exponentiating).
pub fn softmax<F: Real>(logits: &[F]) -> Vec<F> {
    let mut max = logits[0];
    for &v in &logits[1..] {
        max = max.maximum(v);
    }
    let mut out: Vec<F> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: F = out.iter().copied().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Cross-entropy of a softmax distribution against one target class.
/// Returns (loss in nats, probabilities). Gradient w.r.t. the logits is
/// `probs - onehot(target)`; see [`softmax_ce_backward`].
pub fn softmax_cross_entropy<F: Real>(logits: &[F], target: usize) -> Result<(F, Vec<F>)> {
    if target >= logits.len() {
        return Err(Error::Shape(format!(
            "target {target} out of range for {} logits",
            logits.len()
        )));
    }
    let probs = softmax(logits);
    let p = probs[target].maximum(F::from_f64(f64::MIN_POSITIVE));
    Ok((-p.ln(), probs))
}

pub fn softmax_ce_backward<F: Real>(probs: &[F], target: usize) -> Vec<F> {
    let mut d = probs.to_vec();
    d[target] -= F::ONE;
    d
}

/// Inverted-dropout mask: each factor is 0 with probability `rate`, otherwise
/// 1/(1-rate), so the expected value of a masked activation is unchanged.
/// Callers skip masking entirely at inference.
pub fn dropout_mask<F: Real>(len: usize, rate: f64, rng: &mut (impl Rng + ?Sized)) -> Result<Vec<F>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArg(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if rate == 0.0 {
        return Ok(vec![F::ONE; len]);
    }
    let keep = F::from_f64(1.0 / (1.0 - rate));
    Ok((0..len)
        .map(|_| {
            if rng.gen::<f64>() < rate {
                F::ZERO
            } else {
                keep
            }
        })
        .collect())
}

pub fn apply_mask<F: Real>(x: &mut [F], mask: &[F]) {
    debug_assert_eq!(x.len(), mask.len());
    for (v, m) in x.iter_mut().zip(mask) {
        *v *= *m;
    }
}

pub fn tanh_vec<F: Real>(x: &mut [F]) {
    for v in x.iter_mut() {
        *v = v.tanh();
    }
}

/// Given y = tanh(u) and dL/dy, returns dL/du = dy ⊙ (1 - y²).
pub fn tanh_backward<F: Real>(y: &[F], dy: &[F]) -> Vec<F> {
    y.iter()
        .zip(dy)
        .map(|(yi, di)| *di * (F::ONE - *yi * *yi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dense_forward_known_values() {
        let mut d = Dense::<f64>::zeros(2, 3);
        d.w.data_mut().copy_from_slice(&[1.0, 0.0, 2.0, -1.0, 1.0, 0.5]);
        d.b.data_mut().copy_from_slice(&[0.5, -0.5]);
        let y = d.forward(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![7.5, 2.0]);
    }

    #[test]
    fn softmax_sums_to_one_and_orders_mass() {
        let p = softmax(&[1.0_f64, 2.0, 3.0]);
        let total: f64 = p.iter().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        assert!(p[2] > p[1] && p[1] > p[0]);
    }

    #[test]
    fn uniform_logits_cost_is_ln_of_class_count() {
        // Equal logits over 4 classes: -ln(1/4) = ln 4.
        let (loss, probs) = softmax_cross_entropy(&[0.3_f64; 4], 2).unwrap();
        assert_relative_eq!(loss, 4.0_f64.ln(), max_relative = 1e-12);
        for p in probs {
            assert_relative_eq!(p, 0.25, max_relative = 1e-12);
        }
    }

    #[test]
    fn softmax_is_shift_invariant_and_stable_at_large_logits() {
        let a = softmax(&[1000.0_f64, 1001.0, 1002.0]);
        let b = softmax(&[0.0_f64, 1.0, 2.0]);
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, max_relative = 1e-12);
        }
        assert!(a.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn ce_gradient_is_probs_minus_onehot() {
        let (_, probs) = softmax_cross_entropy(&[0.1_f64, -0.4, 0.7], 1).unwrap();
        let d = softmax_ce_backward(&probs, 1);
        assert_relative_eq!(d[0], probs[0], max_relative = 1e-12);
        assert_relative_eq!(d[1], probs[1] - 1.0, max_relative = 1e-12);
        let s: f64 = d.iter().sum();
        assert_relative_eq!(s, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dropout_rate_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mask = dropout_mask::<f32>(16, 0.0, &mut rng).unwrap();
        assert!(mask.iter().all(|&m| m == 1.0));
    }

    #[test]
    fn dropout_rejects_rate_one_or_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(dropout_mask::<f32>(4, 1.0, &mut rng).is_err());
        assert!(dropout_mask::<f32>(4, 1.5, &mut rng).is_err());
        assert!(dropout_mask::<f32>(4, -0.1, &mut rng).is_err());
    }

    #[test]
    fn dropout_preserves_expectation() {
        // Inverted scaling: the Monte-Carlo mean of masked ones stays near 1.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rate = 0.5;
        let n = 200_000;
        let mask = dropout_mask::<f64>(n, rate, &mut rng).unwrap();
        let mean: f64 = mask.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean} drifted from 1");
    }

    #[test]
    fn embedding_lookup_and_backward() {
        let mut e = Embedding::<f64>::zeros(3, 2);
        e.table.data_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(e.lookup(1), &[3.0, 4.0]);
        let mut g = Embedding::zeros(3, 2);
        e.backward(1, &[0.5, -0.5], &mut g);
        e.backward(1, &[0.5, -0.5], &mut g);
        assert_eq!(g.table.row(1), &[1.0, -1.0]);
        assert_eq!(g.table.row(0), &[0.0, 0.0]);
    }
}
