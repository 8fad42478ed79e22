//! Built-in simulated domains with oracle dynamics, classifiers and demonstrations.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grounding::{derived_closure, enumerate_groundings};
use crate::select::operators::Operator;
use crate::types::*;

pub mod blocks;
pub mod demos;
pub mod ingest;
pub mod satellites;
pub mod tableclean;

pub use demos::{generate_demos, oracle_plan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(Error::Input(format!("unknown split `{s}` (expected train or test)"))),
        }
    }
}

pub trait Domain: Send + Sync {
    fn signature(&self) -> &DomainSignature;

    fn name(&self) -> &str {
        &self.signature().name
    }

    fn static_predicates(&self) -> Vec<LiftedPredicate>;

    fn goal_predicates(&self) -> Vec<LiftedPredicate>;

    /// Hand-written dynamic predicates (basic, then derived) sufficient for planning.
    fn reference_predicates(&self) -> Vec<LiftedPredicate>;

    /// Hand-written operators over static, goal and reference predicates.
    fn oracle_operators(&self) -> Vec<Operator>;

    /// Oracle truth of a static, goal or reference basic predicate; `None` for unknown names.
    fn holds(&self, predicate: &str, state: &State, args: &[String]) -> Option<bool>;

    /// Deterministic dynamics; `None` when the action is infeasible.
    fn transition(&self, state: &State, action: &GroundedController) -> Option<State>;

    fn sample_task(&self, split: Split, rng: &mut dyn RngCore) -> Task;

    /// Continuous parameters an oracle skill would use for this step.
    fn oracle_omega(&self, state: &State, controller: &str, args: &[String], rng: &mut dyn RngCore) -> Vec<f64>;

    /// Column names of each type's feature vector.
    fn columns(&self, ty: &str) -> Vec<String>;

    fn reference_basic(&self) -> Vec<LiftedPredicate> {
        self.reference_predicates().into_iter().filter(|p| !p.is_derived()).collect()
    }

    fn reference_derived(&self) -> Vec<LiftedPredicate> {
        self.reference_predicates().into_iter().filter(|p| p.is_derived()).collect()
    }

    fn goal_satisfied(&self, state: &State, goal: &BTreeSet<GroundAtom>) -> bool {
        goal.iter().all(|g| self.holds(&g.predicate, state, &g.args) == Some(true))
    }
}

pub fn by_name(name: &str) -> Result<Arc<dyn Domain>> {
    match name {
        "blocks" => Ok(Arc::new(blocks::Blocks::new())),
        "satellites" => Ok(Arc::new(satellites::Satellites::new())),
        "tableclean" => Ok(Arc::new(tableclean::TableClean::new())),
        _ => Err(Error::Input(format!("unknown domain `{name}` (expected blocks, satellites or tableclean)"))),
    }
}

pub fn blocks_domain() -> Arc<dyn Domain> {
    Arc::new(blocks::Blocks::new())
}

pub fn satellites_domain() -> Arc<dyn Domain> {
    Arc::new(satellites::Satellites::new())
}

pub fn tableclean_domain() -> Arc<dyn Domain> {
    Arc::new(tableclean::TableClean::new())
}

/// True atoms of oracle-classified predicates, then derived closure.
pub fn oracle_atoms(domain: &dyn Domain, state: &State, objects: &[ObjectInstance], preds: &[LiftedPredicate]) -> Result<BTreeSet<GroundAtom>> {
    let mut out = BTreeSet::new();
    for p in preds.iter().filter(|p| !p.is_derived()) {
        for g in enumerate_groundings(p, objects) {
            match domain.holds(&p.name, state, &g.args) {
                Some(true) => {
                    out.insert(g);
                }
                Some(false) => {}
                None => return Err(Error::Config(format!("no oracle classifier for `{}` in {}", p.name, domain.name()))),
            }
        }
    }
    let derived: Vec<LiftedPredicate> = preds.iter().filter(|p| p.is_derived()).cloned().collect();
    derived_closure(&out, &derived, objects)
}

/// Static, goal and reference predicates of a domain.
pub fn oracle_predicate_set(domain: &dyn Domain) -> Vec<LiftedPredicate> {
    let mut v = domain.static_predicates();
    v.extend(domain.goal_predicates());
    v.extend(domain.reference_predicates());
    v
}

pub(crate) fn flag(v: f64) -> bool {
    v > 0.5
}

pub(crate) fn dist2(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}

