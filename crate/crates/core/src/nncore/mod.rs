//! Minimal neural kernel: dense tensors, embedding/affine/GRU layers with
//! hand-derived backward passes, Adam, and a finite-difference checker.
//! There is no autodiff; every model wires its own gradients.

pub mod adam;
pub mod gradcheck;
pub mod gru;
pub mod layers;
pub mod params;
pub mod real;
pub mod tensor;

pub use adam::{Adam, AdamConfig};
pub use gradcheck::{check_gradients, GradCheckOptions, GradCheckReport};
pub use gru::{GruCell, GruStepCache};
pub use layers::{
    apply_mask, dropout_mask, softmax, softmax_ce_backward, softmax_cross_entropy, tanh_backward,
    tanh_vec, Dense, Embedding,
};
pub use params::Parameterized;
pub use real::Real;
pub use tensor::{add_assign, dot, matvec, matvec_t_acc, outer_acc, Tensor};
