use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct GradCheckOptions {
    /// Central-difference step.
    pub eps: f64,
    /// Denominator floor for the relative error. Coordinates this small are
    /// dominated by cancellation noise in the difference quotient (an O(1)
    /// loss in f64 leaves ~1e-12 of absolute noise at eps 1e-4), so they are
    /// judged on absolute rather than relative error.
    pub floor: f64,
    /// Per-tensor cap on checked coordinates; larger tensors are subsampled.
    pub max_coords: usize,
    /// Seed for the coordinate subsampling.
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            eps: 1e-4,
            floor: 1e-5,
            max_coords: 128,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorstCoord {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    pub worst: Option<WorstCoord>,
}

impl GradCheckReport {
    pub fn passes(&self, threshold: f64) -> bool {
        self.max_rel_error < threshold
    }
}

/// Compare analytic gradients against central finite differences of `loss`.
///
/// `loss` is re-evaluated with single coordinates of `params` nudged by
/// ±eps; the relative error per coordinate is |a - n| / max(|a|, |n|, floor).
pub fn check_gradients<F: Real>(
    loss: &mut dyn FnMut(&[Tensor<F>]) -> Result<F>,
    params: &[Tensor<F>],
    names: &[String],
    analytic: &[Tensor<F>],
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    if params.len() != analytic.len() || params.len() != names.len() {
        return Err(Error::Shape(format!(
            "gradcheck: {} params, {} names, {} analytic tensors",
            params.len(),
            names.len(),
            analytic.len()
        )));
    }
    let mut work: Vec<Tensor<F>> = params.to_vec();
    let eps = F::from_f64(opts.eps);
    let two_eps = opts.eps * 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut checked = 0usize;
    let mut max_rel = 0.0f64;
    let mut sum_rel = 0.0f64;
    let mut worst = None;

    for ti in 0..params.len() {
        if analytic[ti].shape() != params[ti].shape() {
            return Err(Error::Shape(format!(
                "gradcheck: {} has shape {:?} but analytic gradient {:?}",
                names[ti],
                params[ti].shape(),
                analytic[ti].shape()
            )));
        }
        let len = params[ti].len();
        let coords: Vec<usize> = if len <= opts.max_coords {
            (0..len).collect()
        } else {
            sample(&mut rng, len, opts.max_coords).into_vec()
        };
        for k in coords {
            let orig = work[ti].data()[k];
            work[ti].data_mut()[k] = orig + eps;
            let up = loss(&work)?.to_f64();
            work[ti].data_mut()[k] = orig - eps;
            let down = loss(&work)?.to_f64();
            work[ti].data_mut()[k] = orig;

            let numeric = (up - down) / two_eps;
            let a = analytic[ti].data()[k].to_f64();
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(opts.floor);
            checked += 1;
            sum_rel += rel;
            if rel > max_rel {
                max_rel = rel;
                worst = Some(WorstCoord {
                    tensor: names[ti].clone(),
                    index: k,
                    analytic: a,
                    numeric,
                    rel_error: rel,
                });
            }
        }
    }
    Ok(GradCheckReport {
        checked,
        max_rel_error: max_rel,
        mean_rel_error: if checked == 0 {
            0.0
        } else {
            sum_rel / checked as f64
        },
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::gru::GruCell;
    use crate::nncore::layers::{softmax_ce_backward, softmax_cross_entropy, Dense};
    use crate::nncore::params::Parameterized;
    use crate::nncore::tensor::dot;
    use rand::SeedableRng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn quadratic_gradient_matches() {
        let p = Tensor::from_vec(&[3], vec![0.5_f64, -1.2, 2.0]);
        let analytic = Tensor::from_vec(&[3], p.data().iter().map(|x| 2.0 * x).collect());
        let mut loss = |ps: &[Tensor<f64>]| Ok(ps[0].data().iter().map(|x| x * x).sum::<f64>());
        let report = check_gradients(
            &mut loss,
            &[p],
            &names(1),
            &[analytic],
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-7, "{report:?}");
        assert_eq!(report.checked, 3);
    }

    #[test]
    fn corrupted_gradient_is_flagged() {
        // Scale the analytic gradient by 1.02: the checker must notice.
        let p = Tensor::from_vec(&[3], vec![0.5_f64, -1.2, 2.0]);
        let analytic = Tensor::from_vec(&[3], p.data().iter().map(|x| 2.0 * x * 1.02).collect());
        let mut loss = |ps: &[Tensor<f64>]| Ok(ps[0].data().iter().map(|x| x * x).sum::<f64>());
        let report = check_gradients(
            &mut loss,
            &[p],
            &names(1),
            &[analytic],
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.max_rel_error > 1e-2, "{report:?}");
        assert!(report.worst.is_some());
    }

    #[test]
    fn dense_with_softmax_ce_backward_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let layer = Dense::<f64>::uniform(5, 4, 0.5, &mut rng);
        let x = [0.3, -0.7, 1.1, 0.2];
        let target = 2usize;

        let mut grads = Dense::zeros(5, 4);
        let logits = layer.forward(&x);
        let (_, probs) = softmax_cross_entropy(&logits, target).unwrap();
        let dl = softmax_ce_backward(&probs, target);
        layer.backward(&x, &dl, &mut grads);

        let mut loss = |ps: &[Tensor<f64>]| {
            let mut l = Dense::zeros(5, 4);
            l.load_param_vec(ps)?;
            let (loss, _) = softmax_cross_entropy(&l.forward(&x), target)?;
            Ok(loss)
        };
        let report = check_gradients(
            &mut loss,
            &layer.param_vec(),
            &layer.param_names(),
            &grads.param_vec(),
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-6, "{report:?}");
    }

    #[test]
    fn gru_step_backward_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cell = GruCell::<f64>::uniform(4, 3, 0.6, &mut rng);
        let x = [0.4, -0.9, 0.15];
        let h0 = [0.2, -0.1, 0.05, 0.7];
        let probe = [0.9, -1.3, 0.4, 0.8];

        let (h, cache) = cell.step(&x, &h0);
        let _ = h;
        let mut grads = GruCell::zeros(4, 3);
        cell.backward(&cache, &probe, &mut grads);

        // Loss: probe · h(x, h0), linear in the state.
        let mut loss = |ps: &[Tensor<f64>]| {
            let mut c = GruCell::zeros(4, 3);
            c.load_param_vec(ps)?;
            let (h, _) = c.step(&x, &h0);
            Ok(dot(&probe, &h))
        };
        let report = check_gradients(
            &mut loss,
            &cell.param_vec(),
            &cell.param_names(),
            &grads.param_vec(),
            &GradCheckOptions::default(),
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-6, "{report:?}");
    }

    #[test]
    fn subsampling_caps_the_coordinate_count() {
        let p = Tensor::<f64>::zeros(&[100]);
        let a = Tensor::<f64>::zeros(&[100]);
        let mut loss = |_: &[Tensor<f64>]| Ok(0.0);
        let opts = GradCheckOptions {
            max_coords: 10,
            ..Default::default()
        };
        let report = check_gradients(&mut loss, &[p], &names(1), &[a], &opts).unwrap();
        assert_eq!(report.checked, 10);
    }
}
