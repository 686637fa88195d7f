//! Dense, LSTM, 1-D convolution and attention layers with exact
//! backpropagation, ADAM and checkpointed training.

mod adam;
pub mod builders;
mod checkpoint;
mod gradcheck;
mod layers;
mod network;
mod seq;
mod spec;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_HEADER};
pub use gradcheck::{compare_gradients, gradient_check, relative_error, GradCheck, FD_STEP};
pub use network::{mse_loss, Cache, Grads, Network, Param};
pub use seq::Seq;
pub use spec::{ActivationFn, LayerKind, LayerSpec, NetworkSpec, NodeRef};
pub use train::{batch_gradient, evaluate_loss, train, Examples, TrainConfig, TrainReport};
