use rand::Rng;

use super::real::Real;

/// Dense row-major tensor. Parameters are rank-1 or rank-2; activations in
/// the compute paths are plain slices, so this type is mostly a shape-tagged
/// buffer for weights, gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<F: Real> {
    shape: Vec<usize>,
    data: Vec<F>,
}

impl<F: Real> Tensor<F> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![F::ZERO; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<F>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "shape {:?} does not match buffer of length {}",
            shape,
            data.len()
        );
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    /// Uniform init on [-scale, scale]. Samples are drawn in f64 so the same
    /// seed produces the same pattern at every precision.
    pub fn uniform(shape: &[usize], scale: f64, rng: &mut impl Rng) -> Self {
        let len: usize = shape.iter().product();
        let data = (0..len)
            .map(|_| F::from_f64(rng.gen_range(-scale..=scale)))
            .collect();
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Tensor::zeros(&self.shape)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [F] {
        &mut self.data
    }

    /// Rows of a rank-2 tensor; a rank-1 tensor is one row.
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            1 => 1,
            2 => self.shape[0],
            n => panic!("rows() on rank-{n} tensor"),
        }
    }

    pub fn cols(&self) -> usize {
        match self.shape.len() {
            1 => self.shape[0],
            2 => self.shape[1],
            n => panic!("cols() on rank-{n} tensor"),
        }
    }

    pub fn row(&self, i: usize) -> &[F] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn fill(&mut self, v: F) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// Convert precision element-wise (used when checking f32 kernels at f64).
    pub fn cast<G: Real>(&self) -> Tensor<G> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| G::from_f64(v.to_f64())).collect(),
        }
    }
}

/// out = W x  for row-major W of shape [rows, cols], x of length cols.
pub fn matvec<F: Real>(w: &Tensor<F>, x: &[F], out: &mut [F]) {
    let (r, c) = (w.rows(), w.cols());
    debug_assert_eq!(x.len(), c, "matvec: x length {} != cols {}", x.len(), c);
    debug_assert_eq!(out.len(), r);
    for i in 0..r {
        let row = w.row(i);
        let mut acc = F::ZERO;
        for j in 0..c {
            acc += row[j] * x[j];
        }
        out[i] = acc;
    }
}

/// out += Wᵀ y  (propagates a gradient through a matvec back to its input).
pub fn matvec_t_acc<F: Real>(w: &Tensor<F>, y: &[F], out: &mut [F]) {
    let (r, c) = (w.rows(), w.cols());
    debug_assert_eq!(y.len(), r);
    debug_assert_eq!(out.len(), c);
    for i in 0..r {
        let row = w.row(i);
        let yi = y[i];
        for j in 0..c {
            out[j] += row[j] * yi;
        }
    }
}

/// dW += a ⊗ b  (outer product accumulate; a indexes rows, b columns).
pub fn outer_acc<F: Real>(dw: &mut Tensor<F>, a: &[F], b: &[F]) {
    let (r, c) = (dw.rows(), dw.cols());
    debug_assert_eq!(a.len(), r);
    debug_assert_eq!(b.len(), c);
    for i in 0..r {
        let row = dw.row_mut(i);
        let ai = a[i];
        for j in 0..c {
            row[j] += ai * b[j];
        }
    }
}

pub fn add_assign<F: Real>(out: &mut [F], x: &[F]) {
    debug_assert_eq!(out.len(), x.len());
    for (o, v) in out.iter_mut().zip(x) {
        *o += *v;
    }
}

pub fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}
