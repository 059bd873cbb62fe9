use super::real::Real;
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Anything with a fixed, ordered set of named parameter tensors: layers,
/// whole models, and their gradient mirrors. The visit order defines the
/// checkpoint payload order and the optimizer slot order, so it must be
/// deterministic.
pub trait Parameterized<F: Real> {
    fn visit<'a>(&'a self, f: &mut dyn FnMut(&str, &'a Tensor<F>));
    fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(&str, &'a mut Tensor<F>));

    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.visit(&mut |name, _| names.push(name.to_string()));
        names
    }

    fn param_refs(&self) -> Vec<&Tensor<F>> {
        let mut out = Vec::new();
        self.visit(&mut |_, t| out.push(t));
        out
    }

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, t| n += t.len());
        n
    }

    /// Clone every parameter tensor in visit order.
    fn param_vec(&self) -> Vec<Tensor<F>> {
        self.param_refs().into_iter().cloned().collect()
    }

    /// Overwrite parameters from tensors in visit order, checking shapes.
    fn load_param_vec(&mut self, src: &[Tensor<F>]) -> Result<()> {
        let mut idx = 0;
        let mut err = None;
        self.visit_mut(&mut |name, t| {
            if err.is_some() {
                return;
            }
            match src.get(idx) {
                None => err = Some(Error::Shape(format!("missing tensor for {name}"))),
                Some(s) if s.shape() != t.shape() => {
                    err = Some(Error::Shape(format!(
                        "{name}: expected {:?}, got {:?}",
                        t.shape(),
                        s.shape()
                    )))
                }
                Some(s) => {
                    t.data_mut().copy_from_slice(s.data());
                }
            }
            idx += 1;
        });
        if let Some(e) = err {
            return Err(e);
        }
        if idx != src.len() {
            return Err(Error::Shape(format!(
                "expected {idx} tensors, got {}",
                src.len()
            )));
        }
        Ok(())
    }

    fn zero_params(&mut self) {
        self.visit_mut(&mut |_, t| t.fill(F::ZERO));
    }

    /// Multiply every parameter by `s` (e.g. to turn summed batch gradients
    /// into means).
    fn scale_params(&mut self, s: F) {
        self.visit_mut(&mut |_, t| {
            for v in t.data_mut() {
                *v = *v * s;
            }
        });
    }
}
