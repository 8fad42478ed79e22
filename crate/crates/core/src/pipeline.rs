//! The four learning stages glued together, shared by the command line and the tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{Domain, Split};
use crate::error::Result;
use crate::neuro::TrainConfig;
use crate::plan::{bilevel_plan, Abstraction, Classifier, FailureReason, PlannerConfig, PredicateModel};
use crate::propose::{refine_loop, History, LoopConfig, Proposer};
use crate::select::{build_abstraction, hill_climb, known_models, LabelCache, SelectionConfig, SelectionState};
use crate::types::*;

/// Propose and train candidates; the known predicates are the domain's goal and static ones.
pub fn invent(domain: &dyn Domain, demos: &[Demonstration], proposer: &mut dyn Proposer, cfg: &LoopConfig, train: &TrainConfig) -> Result<History> {
    let known: Vec<LiftedPredicate> = domain.goal_predicates().into_iter().chain(domain.static_predicates()).collect();
    refine_loop(domain.signature(), demos, &known, proposer, cfg, train)
}

/// The consistent candidates of a history as selectable models.
pub fn pool_models(history: &History) -> Vec<PredicateModel> {
    history
        .pool()
        .into_iter()
        .filter_map(|r| {
            let mlp = r.mlp?;
            Some(PredicateModel { predicate: r.predicate, classifier: Classifier::Mlp(mlp), effect: Some(r.effect_vector) })
        })
        .collect()
}

/// Hill-climb over `pool` and build the final abstraction.
pub fn select(domain: &dyn Domain, demos: &[Demonstration], pool: Vec<PredicateModel>, cfg: &SelectionConfig) -> Result<(SelectionState, Abstraction)> {
    let mut labels = LabelCache::new();
    let known = known_models(domain, demos, &mut labels)?;
    let state = hill_climb(&known, pool, demos, domain, cfg, &mut labels)?;
    let abs = build_abstraction(domain, &known, &state.selected, demos, &labels)?;
    Ok((state, abs))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub index: usize,
    pub success: bool,
    pub failure: Option<FailureReason>,
    pub replans: usize,
    pub skeleton_len: Option<usize>,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: Split,
    pub seed: u64,
    pub success_rate: f64,
    pub tasks: Vec<TaskOutcome>,
}

/// Seed of the i-th task of a split; planning gets its own stream.
fn task_rng(seed: u64, split: Split, i: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let base = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((split == Split::Test) as u64) << 40 ^ i as u64;
    (ChaCha8Rng::seed_from_u64(base), ChaCha8Rng::seed_from_u64(base ^ 0xdead_beef))
}

/// The task `evaluate_task` plans for the same arguments.
pub fn sample_eval_task(domain: &dyn Domain, split: Split, seed: u64, i: usize) -> Task {
    domain.sample_task(split, &mut task_rng(seed, split, i).0)
}

/// Plan the i-th sampled task of a split in closed loop.
pub fn evaluate_task(domain: &dyn Domain, abs: &Abstraction, split: Split, seed: u64, i: usize, cfg: &PlannerConfig) -> Result<TaskOutcome> {
    let (mut trng, mut prng) = task_rng(seed, split, i);
    let task = domain.sample_task(split, &mut trng);
    let out = bilevel_plan(&task, abs, domain, cfg, &mut prng, None)?;
    Ok(TaskOutcome {
        index: i,
        success: out.success,
        failure: out.failure,
        replans: out.replans,
        skeleton_len: out.initial_skeleton.as_ref().map(|s| s.steps.len()),
        steps: out.trace.iter().filter(|t| t.feasible).count(),
    })
}

pub fn split_report(split: Split, seed: u64, tasks: Vec<TaskOutcome>) -> SplitReport {
    let ok = tasks.iter().filter(|t| t.success).count();
    let success_rate = if tasks.is_empty() { 0.0 } else { ok as f64 / tasks.len() as f64 };
    SplitReport { split, seed, success_rate, tasks }
}

/// Plan `n` sampled tasks of a split in closed loop.
pub fn evaluate_split(domain: &dyn Domain, abs: &Abstraction, split: Split, n: usize, seed: u64, cfg: &PlannerConfig) -> Result<SplitReport> {
    let tasks = (0..n).map(|i| evaluate_task(domain, abs, split, seed, i, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(split_report(split, seed, tasks))
}
