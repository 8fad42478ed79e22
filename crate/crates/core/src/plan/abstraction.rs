//! Learned abstractions: predicates with classifiers, operators and samplers.

use std::collections::BTreeSet;

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::grounding::{derived_closure, enumerate_groundings};
use crate::neuro::{ground, Mlp};
use crate::select::operators::Operator;
use crate::types::*;

use super::sampler::GaussianSampler;

/// Atom probabilities are thresholded here everywhere.
pub const ATOM_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub enum Classifier {
    /// The domain's own classifier (static and goal predicates, reference runs).
    Oracle,
    Mlp(Mlp),
    /// Computed by closure from its base predicate.
    Derived,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateModel {
    pub predicate: LiftedPredicate,
    pub classifier: Classifier,
    /// Present for every non-derived predicate that some controller changes.
    pub effect: Option<EffectVector>,
}

impl PredicateModel {
    /// Ground atoms of a basic predicate that hold in `state`.
    pub fn classify(&self, state: &State, objects: &[ObjectInstance], domain: &dyn Domain) -> Result<BTreeSet<GroundAtom>> {
        match &self.classifier {
            Classifier::Oracle => {
                let mut out = BTreeSet::new();
                for g in enumerate_groundings(&self.predicate, objects) {
                    match domain.holds(&g.predicate, state, &g.args) {
                        Some(true) => {
                            out.insert(g);
                        }
                        Some(false) => {}
                        None => {
                            return Err(Error::Config(format!("no oracle classifier for `{}` in {}", self.predicate.name, domain.name())))
                        }
                    }
                }
                Ok(out)
            }
            Classifier::Mlp(m) => {
                let atoms = enumerate_groundings(&self.predicate, objects);
                let probs = ground(state, &self.predicate, m, objects)?;
                Ok(atoms.into_iter().zip(probs).filter(|(_, p)| *p > ATOM_THRESHOLD).map(|(a, _)| a).collect())
            }
            Classifier::Derived => Err(Error::Consistency(format!("`{}` is derived and has no classifier", self.predicate.name))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Abstraction {
    pub domain: String,
    pub predicates: Vec<PredicateModel>,
    pub operators: Vec<Operator>,
    pub samplers: Vec<GaussianSampler>,
}

impl Abstraction {
    pub fn lifted(&self) -> Vec<LiftedPredicate> {
        self.predicates.iter().map(|p| p.predicate.clone()).collect()
    }

    pub fn sampler(&self, controller: &str) -> Option<&GaussianSampler> {
        self.samplers.iter().find(|s| s.controller == controller)
    }

    pub fn validate(&self) -> Result<()> {
        let lifted = self.lifted();
        for op in &self.operators {
            op.validate(&lifted)?;
        }
        for p in &self.predicates {
            if p.predicate.is_derived() != (p.classifier == Classifier::Derived) {
                return Err(Error::Consistency(format!("`{}`: derived predicates and only those use closure", p.predicate.name)));
            }
            if let Some(f) = &p.predicate.derivation {
                if !self.predicates.iter().any(|q| q.predicate.name == f.base.name) {
                    return Err(Error::Consistency(format!("`{}` is derived from absent `{}`", p.predicate.name, f.base.name)));
                }
            }
        }
        Ok(())
    }
}

/// Basic, static and goal atoms by classifier, then derived closure.
pub fn abstract_state(state: &State, objects: &[ObjectInstance], abs: &Abstraction, domain: &dyn Domain) -> Result<BTreeSet<GroundAtom>> {
    let mut atoms = BTreeSet::new();
    for p in abs.predicates.iter().filter(|p| !p.predicate.is_derived()) {
        atoms.extend(p.classify(state, objects, domain)?);
    }
    let derived: Vec<LiftedPredicate> = abs.predicates.iter().filter(|p| p.predicate.is_derived()).map(|p| p.predicate.clone()).collect();
    derived_closure(&atoms, &derived, objects)
}
