//! Predicate classifiers and effect-based supervision.

pub mod loss;
pub mod mlp;
pub mod train;

pub use loss::{cross_entropy, js_bernoulli, transition_loss};
pub use mlp::Mlp;
pub use train::{dataset_loss, ground, score, train_candidate, TrainConfig, TrainedCandidate};
