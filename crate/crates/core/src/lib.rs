//! Learning symbolic world models from demonstrations: predicate invention with
//! effect-supervised classifiers, derived-aware predicate selection, operator and
//! sampler learning, and bilevel planning.

pub mod artifact;
pub mod domains;
pub mod error;
pub mod grounding;
pub mod neuro;
pub mod pddl;
pub mod pipeline;
pub mod plan;
pub mod propose;
pub mod select;
pub mod types;

pub use error::{Error, Result};
pub use grounding::*;
pub use types::*;
