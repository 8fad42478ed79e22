//! Per-predicate ground atoms of every demonstration state, computed once per candidate.

use std::collections::{BTreeSet, HashMap};

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::grounding::derived_closure;
use crate::plan::abstraction::{Classifier, PredicateModel};
use crate::select::operators::lifted_atoms;
use crate::types::*;

/// `atoms[d][k]` holds the true atoms of one predicate in state k of demo d
/// (k = 0 is the initial state, k = len is the final one).
pub type StateLabels = Vec<Vec<BTreeSet<GroundAtom>>>;

#[derive(Default)]
pub struct LabelCache {
    by_predicate: HashMap<String, StateLabels>,
}

fn states(d: &Demonstration) -> impl Iterator<Item = &State> {
    std::iter::once(&d.task.init).chain(d.transitions.iter().map(|t| &t.post))
}

impl LabelCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, predicate: &str) -> Option<&StateLabels> {
        self.by_predicate.get(predicate)
    }

    pub fn contains(&self, predicate: &str) -> bool {
        self.by_predicate.contains_key(predicate)
    }

    /// Label with the model's classifier, or by closure over the base for derived models.
    pub fn insert(&mut self, model: &PredicateModel, demos: &[Demonstration], domain: &dyn Domain) -> Result<()> {
        if self.contains(&model.predicate.name) {
            return Ok(());
        }
        let labels = match (&model.classifier, &model.predicate.derivation) {
            (Classifier::Derived, Some(form)) => {
                let base = self
                    .get(&form.base.name)
                    .ok_or_else(|| Error::Consistency(format!("`{}` labelled before its base `{}`", model.predicate.name, form.base.name)))?;
                let derived = [model.predicate.clone()];
                let mut out = Vec::with_capacity(demos.len());
                for (d, base_d) in demos.iter().zip(base) {
                    let mut row = Vec::with_capacity(base_d.len());
                    for b in base_d {
                        let closed = derived_closure(b, &derived, &d.task.objects)?;
                        row.push(closed.into_iter().filter(|a| a.predicate == model.predicate.name).collect());
                    }
                    out.push(row);
                }
                out
            }
            _ => {
                let mut out = Vec::with_capacity(demos.len());
                for d in demos {
                    let row: Result<Vec<_>> = states(d).map(|s| model.classify(s, &d.task.objects, domain)).collect();
                    out.push(row?);
                }
                out
            }
        };
        self.by_predicate.insert(model.predicate.name.clone(), labels);
        Ok(())
    }

    /// Union of the labels of `preds` in state k of demo d.
    pub fn atoms(&self, preds: &[&LiftedPredicate], d: usize, k: usize) -> BTreeSet<GroundAtom> {
        let mut out = BTreeSet::new();
        for p in preds {
            if let Some(l) = self.by_predicate.get(&p.name) {
                out.extend(l[d][k].iter().cloned());
            }
        }
        out
    }
}

/// Effect vector of a classifier-given predicate read off labelled transitions: a controller
/// gets ±1 with binding b when every one of its transitions adds (deletes) exactly the atom
/// over the arguments picked by b and nothing else of this predicate.
pub fn infer_effect_vector(pred: &LiftedPredicate, controllers: &[ControllerSchema], demos: &[Demonstration], labels: &StateLabels) -> EffectVector {
    let mut ev = EffectVector::zeros(&pred.name, controllers);
    for c in controllers {
        let mut changes = Vec::new();
        for (d, rows) in demos.iter().zip(labels) {
            for (k, t) in d.transitions.iter().enumerate() {
                if t.action.controller != c.name {
                    continue;
                }
                let added: Vec<&GroundAtom> = rows[k + 1].difference(&rows[k]).collect();
                let deleted: Vec<&GroundAtom> = rows[k].difference(&rows[k + 1]).collect();
                changes.push((&t.action.args, added, deleted));
            }
        }
        if changes.iter().all(|(_, a, d)| a.is_empty() && d.is_empty()) {
            continue;
        }
        let mut found = None;
        'binding: for b in lifted_atoms(pred, &c.params) {
            for delta in [1i8, -1] {
                let ok = changes.iter().all(|(args, added, deleted)| {
                    let atom = b.ground(args);
                    let (hit, other) = if delta == 1 { (added, deleted) } else { (deleted, added) };
                    other.is_empty() && hit.len() == 1 && *hit[0] == atom
                });
                if ok {
                    found = Some((delta, b.vars.clone()));
                    break 'binding;
                }
            }
        }
        match found {
            Some((delta, binding)) => {
                ev.entries.insert(c.name.clone(), EffectEntry::new(delta, &binding));
            }
            None => log::warn!("`{}` changes under `{}` without a consistent lifted effect; treated as 0", pred.name, c.name),
        }
    }
    ev
}
