//! Symbolic search and bilevel planning.

pub mod abstraction;
pub mod astar;
pub mod bilevel;
pub mod sampler;
pub mod space;

pub use abstraction::{abstract_state, Abstraction, Classifier, PredicateModel, ATOM_THRESHOLD};
pub use astar::{AstarSearch, Skeleton};
pub use bilevel::{bilevel_plan, FailureReason, PlanOutcome, PlannerConfig, SkillFailure, TraceStep};
pub use sampler::{learn_samplers, GaussianSampler};
pub use space::{AtomSet, AtomSpace, GroundOp};
