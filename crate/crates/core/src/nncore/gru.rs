use rand::Rng;

use super::params::Parameterized;
use super::real::Real;
use super::tensor::{matvec, matvec_t_acc, outer_acc, Tensor};

#[inline]
fn sigmoid<F: Real>(x: F) -> F {
    F::ONE / (F::ONE + (-x).exp())
}

/// Gated recurrent unit cell.
///
/// z = σ(W_z x + U_z h_prev + b_z)
/// r = σ(W_r x + U_r h_prev + b_r)
/// h̃ = tanh(W_h x + U_h (r ⊙ h_prev) + b_h)
/// h = (1 - z) ⊙ h_prev + z ⊙ h̃
///
/// With all parameters at zero this halves the state each step (z = 0.5,
/// h̃ = 0), which the tests lean on as a fixed point.
#[derive(Debug, Clone)]
pub struct GruCell<F: Real> {
    pub w_z: Tensor<F>,
    pub u_z: Tensor<F>,
    pub b_z: Tensor<F>,
    pub w_r: Tensor<F>,
    pub u_r: Tensor<F>,
    pub b_r: Tensor<F>,
    pub w_h: Tensor<F>,
    pub u_h: Tensor<F>,
    pub b_h: Tensor<F>,
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct GruStepCache<F: Real> {
    pub x: Vec<F>,
    pub h_prev: Vec<F>,
    pub z: Vec<F>,
    pub r: Vec<F>,
    pub cand: Vec<F>,
    pub rh: Vec<F>,
}

impl<F: Real> GruCell<F> {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        GruCell {
            w_z: Tensor::zeros(&[hidden, input]),
            u_z: Tensor::zeros(&[hidden, hidden]),
            b_z: Tensor::zeros(&[hidden]),
            w_r: Tensor::zeros(&[hidden, input]),
            u_r: Tensor::zeros(&[hidden, hidden]),
            b_r: Tensor::zeros(&[hidden]),
            w_h: Tensor::zeros(&[hidden, input]),
            u_h: Tensor::zeros(&[hidden, hidden]),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    pub fn uniform(hidden: usize, input: usize, scale: f64, rng: &mut impl Rng) -> Self {
        GruCell {
            w_z: Tensor::uniform(&[hidden, input], scale, rng),
            u_z: Tensor::uniform(&[hidden, hidden], scale, rng),
            b_z: Tensor::zeros(&[hidden]),
            w_r: Tensor::uniform(&[hidden, input], scale, rng),
            u_r: Tensor::uniform(&[hidden, hidden], scale, rng),
            b_r: Tensor::zeros(&[hidden]),
            w_h: Tensor::uniform(&[hidden, input], scale, rng),
            u_h: Tensor::uniform(&[hidden, hidden], scale, rng),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_z.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_z.cols()
    }

    /// One step, returning the new state and the cache for backward.
    pub fn step(&self, x: &[F], h_prev: &[F]) -> (Vec<F>, GruStepCache<F>) {
        let hd = self.hidden_dim();
        debug_assert_eq!(x.len(), self.input_dim());
        debug_assert_eq!(h_prev.len(), hd);

        let mut z = vec![F::ZERO; hd];
        let mut tmp = vec![F::ZERO; hd];
        matvec(&self.w_z, x, &mut z);
        matvec(&self.u_z, h_prev, &mut tmp);
        for i in 0..hd {
            z[i] = sigmoid(z[i] + tmp[i] + self.b_z.data()[i]);
        }

        let mut r = vec![F::ZERO; hd];
        matvec(&self.w_r, x, &mut r);
        matvec(&self.u_r, h_prev, &mut tmp);
        for i in 0..hd {
            r[i] = sigmoid(r[i] + tmp[i] + self.b_r.data()[i]);
        }

        let rh: Vec<F> = r.iter().zip(h_prev).map(|(ri, hi)| *ri * *hi).collect();
        let mut cand = vec![F::ZERO; hd];
        matvec(&self.w_h, x, &mut cand);
        matvec(&self.u_h, &rh, &mut tmp);
        for i in 0..hd {
            cand[i] = (cand[i] + tmp[i] + self.b_h.data()[i]).tanh();
        }

        let h: Vec<F> = (0..hd)
            .map(|i| (F::ONE - z[i]) * h_prev[i] + z[i] * cand[i])
            .collect();

        let cache = GruStepCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            z,
            r,
            cand,
            rh,
        };
        (h, cache)
    }

    /// One step without recording a cache (decode-time path).
    pub fn step_nograd(&self, x: &[F], h_prev: &[F]) -> Vec<F> {
        self.step(x, h_prev).0
    }

    /// Backpropagate `dh` through one step. Parameter gradients accumulate
    /// into `grads`; returns (dx, dh_prev).
    pub fn backward(
        &self,
        cache: &GruStepCache<F>,
        dh: &[F],
        grads: &mut GruCell<F>,
    ) -> (Vec<F>, Vec<F>) {
        let hd = self.hidden_dim();
        debug_assert_eq!(dh.len(), hd);
        let GruStepCache {
            x,
            h_prev,
            z,
            r,
            cand,
            rh,
        } = cache;

        // h = (1-z) h_prev + z h̃
        let da_h: Vec<F> = (0..hd)
            .map(|i| dh[i] * z[i] * (F::ONE - cand[i] * cand[i]))
            .collect();
        let da_z: Vec<F> = (0..hd)
            .map(|i| dh[i] * (cand[i] - h_prev[i]) * z[i] * (F::ONE - z[i]))
            .collect();

        // Path through U_h into r ⊙ h_prev.
        let mut d_rh = vec![F::ZERO; hd];
        matvec_t_acc(&self.u_h, &da_h, &mut d_rh);
        let da_r: Vec<F> = (0..hd)
            .map(|i| d_rh[i] * h_prev[i] * r[i] * (F::ONE - r[i]))
            .collect();

        outer_acc(&mut grads.w_z, &da_z, x);
        outer_acc(&mut grads.u_z, &da_z, h_prev);
        outer_acc(&mut grads.w_r, &da_r, x);
        outer_acc(&mut grads.u_r, &da_r, h_prev);
        outer_acc(&mut grads.w_h, &da_h, x);
        outer_acc(&mut grads.u_h, &da_h, rh);
        for i in 0..hd {
            grads.b_z.data_mut()[i] += da_z[i];
            grads.b_r.data_mut()[i] += da_r[i];
            grads.b_h.data_mut()[i] += da_h[i];
        }

        let mut dx = vec![F::ZERO; self.input_dim()];
        matvec_t_acc(&self.w_z, &da_z, &mut dx);
        matvec_t_acc(&self.w_r, &da_r, &mut dx);
        matvec_t_acc(&self.w_h, &da_h, &mut dx);

        let mut dh_prev: Vec<F> = (0..hd).map(|i| dh[i] * (F::ONE - z[i])).collect();
        matvec_t_acc(&self.u_z, &da_z, &mut dh_prev);
        matvec_t_acc(&self.u_r, &da_r, &mut dh_prev);
        for i in 0..hd {
            dh_prev[i] += d_rh[i] * r[i];
        }
        (dx, dh_prev)
    }
}

impl<F: Real> Parameterized<F> for GruCell<F> {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&str, &'a Tensor<F>)) {
        f("w_z", &self.w_z);
        f("u_z", &self.u_z);
        f("b_z", &self.b_z);
        f("w_r", &self.w_r);
        f("u_r", &self.u_r);
        f("b_r", &self.b_r);
        f("w_h", &self.w_h);
        f("u_h", &self.u_h);
        f("b_h", &self.b_h);
    }
    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&str, &'a mut Tensor<F>)) {
        f("w_z", &mut self.w_z);
        f("u_z", &mut self.u_z);
        f("b_z", &mut self.b_z);
        f("w_r", &mut self.w_r);
        f("u_r", &mut self.u_r);
        f("b_r", &mut self.b_r);
        f("w_h", &mut self.w_h);
        f("u_h", &mut self.u_h);
        f("b_h", &mut self.b_h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_parameter_cell_halves_the_state() {
        // z = σ(0) = 0.5 and h̃ = tanh(0) = 0, so h = 0.5 · h_prev.
        let cell = GruCell::<f64>::zeros(4, 3);
        let h_prev = [1.0, -2.0, 0.25, 8.0];
        let (h, _) = cell.step(&[0.0; 3], &h_prev);
        for (hi, vi) in h.iter().zip(&h_prev) {
            assert_relative_eq!(*hi, 0.5 * vi, max_relative = 1e-15);
        }
    }

    #[test]
    fn zero_parameter_cell_decays_geometrically() {
        let cell = GruCell::<f64>::zeros(2, 2);
        let mut h = vec![1.0, -1.0];
        for _ in 0..5 {
            h = cell.step_nograd(&[0.3, 0.7], &h);
        }
        assert_relative_eq!(h[0], 1.0 / 32.0, max_relative = 1e-12);
        assert_relative_eq!(h[1], -1.0 / 32.0, max_relative = 1e-12);
    }

    #[test]
    fn saturated_update_gate_tracks_the_candidate() {
        // Large b_z drives z → 1, so h ≈ h̃ = tanh(W_h x).
        let mut cell = GruCell::<f64>::zeros(2, 2);
        cell.b_z.fill(50.0);
        cell.w_h.data_mut().copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
        let (h, _) = cell.step(&[0.5, -0.5], &[0.9, 0.9]);
        assert_relative_eq!(h[0], 0.5_f64.tanh(), max_relative = 1e-9);
        assert_relative_eq!(h[1], (-0.5_f64).tanh(), max_relative = 1e-9);
    }

    #[test]
    fn cache_records_the_gates() {
        let cell = GruCell::<f64>::zeros(3, 2);
        let (_, cache) = cell.step(&[1.0, 2.0], &[0.1, 0.2, 0.3]);
        assert!(cache.z.iter().all(|&z| z == 0.5));
        assert!(cache.r.iter().all(|&r| r == 0.5));
        assert_eq!(cache.rh, vec![0.05, 0.1, 0.15]);
    }
}
