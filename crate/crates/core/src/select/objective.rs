//! Planning objective J: unreproduced demonstration skeletons weigh W, plus A* expansions.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::plan::abstraction::PredicateModel;
use crate::plan::astar::AstarSearch;
use crate::plan::space::AtomSpace;
use crate::select::labels::LabelCache;
use crate::select::operators::{learn_operators, LabeledTransition, Operator};
use crate::types::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub mismatch_weight: f64,
    /// Expansion budget per planning task; a failed search counts the budget.
    pub budget: usize,
    /// Also plan from every intermediate demo state towards the demo's goal.
    pub suffix_tasks: bool,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self { mismatch_weight: 1e5, budget: 2_000, suffix_tasks: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub j: f64,
    pub tasks: usize,
    pub unreproduced: usize,
    pub expansions: usize,
}

impl Evaluation {
    fn infeasible() -> Self {
        Self { j: f64::INFINITY, tasks: 0, unreproduced: 0, expansions: 0 }
    }
}

/// Operators learned from the labelled demos for this predicate set.
pub fn operators_for(
    models: &[&PredicateModel],
    controllers: &[ControllerSchema],
    demos: &[Demonstration],
    labels: &LabelCache,
) -> Result<Vec<Operator>> {
    let preds: Vec<&LiftedPredicate> = models.iter().map(|m| &m.predicate).collect();
    let owned: Vec<LiftedPredicate> = preds.iter().map(|p| (*p).clone()).collect();
    let effects: Vec<EffectVector> = models.iter().filter_map(|m| m.effect.clone()).collect();
    let pre_atoms: Vec<Vec<_>> = demos
        .iter()
        .enumerate()
        .map(|(d, demo)| (0..demo.transitions.len()).map(|k| labels.atoms(&preds, d, k)).collect())
        .collect();
    let data: Vec<LabeledTransition> = demos
        .iter()
        .zip(&pre_atoms)
        .flat_map(|(demo, rows)| demo.transitions.iter().zip(rows).map(|(t, atoms)| LabeledTransition { atoms, action: &t.action }))
        .collect();
    learn_operators(&owned, &effects, controllers, &data)
}

/// J of a predicate set (goal and static models included by the caller).
pub fn evaluate(
    models: &[&PredicateModel],
    controllers: &[ControllerSchema],
    demos: &[Demonstration],
    labels: &LabelCache,
    cfg: &ObjectiveConfig,
) -> Evaluation {
    let operators = match operators_for(models, controllers, demos, labels) {
        Ok(ops) => ops,
        Err(e) => {
            log::debug!("operator learning failed: {e}");
            return Evaluation::infeasible();
        }
    };
    let lifted: Vec<LiftedPredicate> = models.iter().map(|m| m.predicate.clone()).collect();
    let preds: Vec<&LiftedPredicate> = lifted.iter().collect();
    let names: Vec<String> = operators.iter().map(|o| o.controller.clone()).collect();
    let mut out = Evaluation { j: 0.0, tasks: 0, unreproduced: 0, expansions: 0 };
    for (d, demo) in demos.iter().enumerate() {
        let Ok(space) = AtomSpace::new(&lifted, &demo.task.objects) else { return Evaluation::infeasible() };
        let ops = space.ground_operators(&operators);
        let goal: Option<Vec<u32>> = demo.task.goal.iter().map(|g| space.id(g)).collect();
        let skeleton = demo.skeleton();
        let starts = if cfg.suffix_tasks { demo.transitions.len() } else { 1 };
        for k in 0..starts {
            let mut init = space.set_from(&labels.atoms(&preds, d, k));
            space.close(&mut init);
            let mut search = AstarSearch::new(&space, &ops, names.clone(), init, goal.clone(), cfg.budget);
            let found = search.next_skeleton();
            out.tasks += 1;
            out.expansions += search.expansions;
            let reproduced = matches!(&found, Some(s) if s.steps[..] == skeleton[k..]);
            if !reproduced {
                out.unreproduced += 1;
            }
        }
    }
    out.j = out.unreproduced as f64 * cfg.mismatch_weight + out.expansions as f64;
    out
}
