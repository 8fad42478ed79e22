//! Greedy forward selection over the candidate pool, expanding accepted basic
//! predicates into their derived forms.

use serde::{Deserialize, Serialize};

use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::plan::abstraction::{Classifier, PredicateModel};
use crate::select::forms::derive_forms;
use crate::select::labels::LabelCache;
use crate::select::objective::{evaluate, Evaluation, ObjectiveConfig};
use crate::types::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub objective: ObjectiveConfig,
    /// Stop once J* falls below this; 0 disables the check.
    pub epsilon: f64,
    /// Add negated and quantified forms of accepted basic predicates to the pool.
    pub derived_forms: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self { objective: ObjectiveConfig::default(), epsilon: 0.0, derived_forms: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub round: usize,
    pub candidate: String,
    pub j: f64,
    pub unreproduced: usize,
    pub expansions: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct SelectionState {
    pub selected: Vec<PredicateModel>,
    pub pool: Vec<PredicateModel>,
    pub best: Evaluation,
    /// J of the known predicates alone, before any acceptance.
    pub initial: Evaluation,
    pub log: Vec<StepRecord>,
}

impl SelectionState {
    /// J* after each accepted step, starting from the initial value.
    pub fn accepted_trace(&self) -> Vec<f64> {
        let mut v = vec![self.initial.j];
        v.extend(self.log.iter().filter(|s| s.accepted).map(|s| s.j));
        v
    }
}

fn derived_model(p: LiftedPredicate) -> PredicateModel {
    PredicateModel { predicate: p, classifier: Classifier::Derived, effect: None }
}

/// `known` holds the goal and static models; `pool` the trained basic candidates in canonical order.
pub fn hill_climb(
    known: &[PredicateModel],
    pool: Vec<PredicateModel>,
    demos: &[Demonstration],
    domain: &dyn Domain,
    cfg: &SelectionConfig,
    labels: &mut LabelCache,
) -> Result<SelectionState> {
    let controllers = &domain.signature().controllers;
    for m in known.iter().chain(&pool) {
        if m.predicate.is_derived() && !labels.contains(&m.predicate.derivation.as_ref().unwrap().base.name) {
            return Err(Error::Config(format!("derived candidate `{}` without its base in the pool", m.predicate.name)));
        }
        labels.insert(m, demos, domain)?;
    }
    let eval = |selected: &[&PredicateModel], labels: &LabelCache| {
        let mut all: Vec<&PredicateModel> = known.iter().collect();
        all.extend_from_slice(selected);
        evaluate(&all, controllers, demos, labels, &cfg.objective)
    };
    let initial = eval(&[], labels);
    log::info!("selection start: J = {} ({} of {} tasks unreproduced)", initial.j, initial.unreproduced, initial.tasks);
    let mut state = SelectionState { selected: Vec::new(), pool, best: initial.clone(), initial, log: Vec::new() };
    let mut round = 0;
    while !state.pool.is_empty() && !(cfg.epsilon > 0.0 && state.best.j < cfg.epsilon) {
        round += 1;
        let mut best: Option<(usize, Evaluation)> = None;
        for (i, c) in state.pool.iter().enumerate() {
            let mut trial: Vec<&PredicateModel> = state.selected.iter().collect();
            trial.push(c);
            let e = eval(&trial, labels);
            log::debug!("round {round}: {} -> J = {}", c.predicate.name, e.j);
            state.log.push(StepRecord {
                round,
                candidate: c.predicate.name.clone(),
                j: e.j,
                unreproduced: e.unreproduced,
                expansions: e.expansions,
                accepted: false,
            });
            if best.as_ref().is_none_or(|(_, b)| e.j < b.j) {
                best = Some((i, e));
            }
        }
        let Some((i, e)) = best else { break };
        if e.j >= state.best.j {
            break;
        }
        let accepted = state.pool.remove(i);
        log::info!("round {round}: accept {} (J {} -> {})", accepted.predicate.name, state.best.j, e.j);
        let round_start = state.log.len() - state.pool.len() - 1;
        state.log[round_start + i].accepted = true;
        state.best = e;
        if cfg.derived_forms && accepted.predicate.kind == PredicateKind::BasicDynamic {
            for f in derive_forms(&accepted.predicate) {
                let taken = state.selected.iter().chain(&state.pool).any(|m| m.predicate.name == f.name);
                if !taken {
                    let m = derived_model(f);
                    labels.insert(&m, demos, domain)?;
                    state.pool.push(m);
                }
            }
        }
        state.selected.push(accepted);
    }
    Ok(state)
}
