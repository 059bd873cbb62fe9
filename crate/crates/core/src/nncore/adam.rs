use serde::{Deserialize, Serialize};

use super::params::Parameterized;
use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Element-wise clamp applied to raw gradients before the moment
    /// updates, so the moments never see values outside this range.
    pub clip: Option<(f64, f64)>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip: Some((-5.0, 5.0)),
        }
    }
}

/// Adam optimizer with bias correction. Slots are allocated once from the
/// model's parameter layout; `update` pairs parameters and gradients by
/// visit order.
#[derive(Debug, Clone)]
pub struct Adam<F: Real> {
    cfg: AdamConfig,
    step: u64,
    m: Vec<Tensor<F>>,
    v: Vec<Tensor<F>>,
}

impl<F: Real> Adam<F> {
    pub fn new<P: Parameterized<F>>(model: &P, cfg: AdamConfig) -> Self {
        let m: Vec<Tensor<F>> = model.param_refs().iter().map(|t| t.zeros_like()).collect();
        let v = m.clone();
        Adam {
            cfg,
            step: 0,
            m,
            v,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.cfg
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn update<P: Parameterized<F>>(&mut self, model: &mut P, grads: &P) -> Result<()> {
        let grad_refs = grads.param_refs();
        if grad_refs.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "optimizer has {} slots, gradients have {} tensors",
                self.m.len(),
                grad_refs.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = F::from_f64(1.0 - self.cfg.beta1.powi(t));
        let bc2 = F::from_f64(1.0 - self.cfg.beta2.powi(t));
        let b1 = F::from_f64(self.cfg.beta1);
        let b2 = F::from_f64(self.cfg.beta2);
        let one_m_b1 = F::ONE - b1;
        let one_m_b2 = F::ONE - b2;
        let lr = F::from_f64(self.cfg.lr);
        let eps = F::from_f64(self.cfg.eps);
        let clip = self
            .cfg
            .clip
            .map(|(lo, hi)| (F::from_f64(lo), F::from_f64(hi)));

        let mut slot = 0;
        let mut err = None;
        let (m_slots, v_slots) = (&mut self.m, &mut self.v);
        model.visit_mut(&mut |name, p| {
            if err.is_some() {
                return;
            }
            let g = grad_refs[slot];
            let m = &mut m_slots[slot];
            let v = &mut v_slots[slot];
            if g.shape() != p.shape() {
                err = Some(Error::Shape(format!(
                    "{name}: parameter {:?} vs gradient {:?}",
                    p.shape(),
                    g.shape()
                )));
                return;
            }
            let pd = p.data_mut();
            let md = m.data_mut();
            let vd = v.data_mut();
            for i in 0..pd.len() {
                let mut gi = g.data()[i];
                if let Some((lo, hi)) = clip {
                    gi = gi.maximum(lo).minimum(hi);
                }
                md[i] = b1 * md[i] + one_m_b1 * gi;
                vd[i] = b2 * vd[i] + one_m_b2 * gi * gi;
                let m_hat = md[i] / bc1;
                let v_hat = vd[i] / bc2;
                pd[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
            slot += 1;
        });
        err.map_or(Ok(()), Err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::layers::Dense;
    use approx::assert_relative_eq;

    fn one_param_model(v: f64) -> Dense<f64> {
        let mut d = Dense::zeros(1, 1);
        d.w.data_mut()[0] = v;
        d
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        // Bias correction makes m̂ = g and v̂ = g², so the first update is
        // -lr · g / (|g| + ε) ≈ -lr · sign(g).
        let mut model = one_param_model(0.0);
        let mut grads = one_param_model(0.0);
        grads.w.data_mut()[0] = 3.0;
        grads.b.data_mut()[0] = -0.2;
        let mut opt = Adam::new(&model, AdamConfig::default());
        opt.update(&mut model, &grads).unwrap();
        assert_relative_eq!(model.w.data()[0], -0.001, max_relative = 1e-5);
        assert_relative_eq!(model.b.data()[0], 0.001, max_relative = 1e-5);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn gradients_are_clipped_before_the_moments() {
        // A raw gradient of 10 must be indistinguishable from one of 5.
        let cfg = AdamConfig::default();
        let mut m1 = one_param_model(1.0);
        let mut g1 = one_param_model(0.0);
        g1.w.data_mut()[0] = 10.0;
        let mut o1 = Adam::new(&m1, cfg);
        o1.update(&mut m1, &g1).unwrap();

        let mut m2 = one_param_model(1.0);
        let mut g2 = one_param_model(0.0);
        g2.w.data_mut()[0] = 5.0;
        let mut o2 = Adam::new(&m2, cfg);
        o2.update(&mut m2, &g2).unwrap();

        assert_eq!(m1.w.data()[0], m2.w.data()[0]);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point_of_a_fresh_optimizer() {
        let mut model = one_param_model(0.75);
        let before = model.param_vec();
        let grads = one_param_model(0.0);
        let mut opt = Adam::new(&model, AdamConfig::default());
        opt.update(&mut model, &grads).unwrap();
        // Bitwise unchanged, but the step counter still advances.
        assert_eq!(model.param_vec(), before);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn constant_gradient_keeps_descending() {
        let mut model = one_param_model(1.0);
        let mut grads = one_param_model(0.0);
        grads.w.data_mut()[0] = 1.0;
        let mut opt = Adam::new(&model, AdamConfig::default());
        let mut prev = model.w.data()[0];
        for _ in 0..10 {
            opt.update(&mut model, &grads).unwrap();
            let cur = model.w.data()[0];
            assert!(cur < prev, "parameter should decrease monotonically");
            prev = cur;
        }
    }

    #[test]
    fn shape_drift_is_rejected() {
        let mut model = one_param_model(0.0);
        let grads = Dense::<f64>::zeros(2, 1);
        let mut opt = Adam::new(&model, AdamConfig::default());
        assert!(opt.update(&mut model, &grads).is_err());
    }
}
