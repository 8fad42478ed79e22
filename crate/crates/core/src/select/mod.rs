//! Derived-aware predicate selection and operator learning.

pub mod forms;
pub mod hill;
pub mod labels;
pub mod objective;
pub mod operators;

pub use forms::derive_forms;
pub use hill::{hill_climb, SelectionConfig, SelectionState, StepRecord};
pub use labels::{infer_effect_vector, LabelCache};
pub use objective::{evaluate, operators_for, Evaluation, ObjectiveConfig};
pub use operators::{learn_operators, LabeledTransition, LiftedAtom, Operator};

use crate::domains::Domain;
use crate::error::Result;
use crate::plan::abstraction::{Abstraction, Classifier, PredicateModel};
use crate::plan::sampler::learn_samplers;
use crate::types::Demonstration;

/// Static and goal predicates with the domain's classifiers; goal effects read off the demos.
pub fn known_models(domain: &dyn Domain, demos: &[Demonstration], labels: &mut LabelCache) -> Result<Vec<PredicateModel>> {
    let controllers = &domain.signature().controllers;
    let mut out = Vec::new();
    for p in domain.static_predicates() {
        let m = PredicateModel { predicate: p, classifier: Classifier::Oracle, effect: None };
        labels.insert(&m, demos, domain)?;
        out.push(m);
    }
    for p in domain.goal_predicates() {
        let mut m = PredicateModel { predicate: p, classifier: Classifier::Oracle, effect: None };
        labels.insert(&m, demos, domain)?;
        let ev = infer_effect_vector(&m.predicate, controllers, demos, labels.get(&m.predicate.name).unwrap());
        if !ev.is_zero() {
            m.effect = Some(ev);
        }
        out.push(m);
    }
    Ok(out)
}

/// Final abstraction: known plus selected predicates, their operators and the samplers.
pub fn build_abstraction(
    domain: &dyn Domain,
    known: &[PredicateModel],
    selected: &[PredicateModel],
    demos: &[Demonstration],
    labels: &LabelCache,
) -> Result<Abstraction> {
    let controllers = &domain.signature().controllers;
    let models: Vec<&PredicateModel> = known.iter().chain(selected).collect();
    let operators = operators_for(&models, controllers, demos, labels)?;
    let abs = Abstraction {
        domain: domain.name().to_string(),
        predicates: models.into_iter().cloned().collect(),
        operators,
        samplers: learn_samplers(demos, controllers)?,
    };
    abs.validate()?;
    Ok(abs)
}
