//! Demonstration collection with an oracle bilevel planner.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{oracle_atoms, oracle_predicate_set, Domain, Split};
use crate::error::{Error, Result};
use crate::plan::astar::AstarSearch;
use crate::plan::space::AtomSpace;
use crate::types::*;

const ORACLE_BUDGET: usize = 200_000;
const OMEGA_TRIES: usize = 10;
const TASK_RETRIES: usize = 20;

/// Plan with oracle predicates and operators, refine with oracle continuous parameters.
pub fn oracle_plan(domain: &dyn Domain, task: &Task, rng: &mut dyn RngCore) -> Result<Option<Demonstration>> {
    let preds = oracle_predicate_set(domain);
    let space = AtomSpace::new(&preds, &task.objects)?;
    let operators = domain.oracle_operators();
    let ops = space.ground_operators(&operators);
    let names: Vec<String> = operators.iter().map(|o| o.controller.clone()).collect();
    let init = space.set_from(&oracle_atoms(domain, &task.init, &task.objects, &preds)?);
    let goal: Option<Vec<u32>> = task.goal.iter().map(|g| space.id(g)).collect();
    let mut search = AstarSearch::new(&space, &ops, names, init, goal, ORACLE_BUDGET);
    let Some(skeleton) = search.next_skeleton() else { return Ok(None) };
    let mut state = task.init.clone();
    let mut transitions = Vec::with_capacity(skeleton.len());
    for (controller, args) in &skeleton.steps {
        let mut next = None;
        for _ in 0..OMEGA_TRIES {
            let omega = domain.oracle_omega(&state, controller, args, rng);
            let action = GroundedController { controller: controller.clone(), args: args.clone(), omega };
            if let Some(s) = domain.transition(&state, &action) {
                next = Some((action, s));
                break;
            }
        }
        let Some((action, post)) = next else { return Ok(None) };
        transitions.push(Transition { pre: state.clone(), action, post: post.clone() });
        state = post;
    }
    if !domain.goal_satisfied(&state, &task.goal) {
        return Ok(None);
    }
    Ok(Some(Demonstration { task: task.clone(), transitions }))
}

/// `count` validated demonstrations on training tasks, deterministic in `seed`.
pub fn generate_demos(domain: &dyn Domain, count: usize, seed: u64) -> Result<Vec<Demonstration>> {
    if count == 0 {
        return Err(Error::Input("demo count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut found = None;
        for _ in 0..TASK_RETRIES {
            let task = domain.sample_task(Split::Train, &mut rng);
            if let Some(d) = oracle_plan(domain, &task, &mut rng)? {
                found = Some(d);
                break;
            }
        }
        let demo = found.ok_or_else(|| Error::Consistency(format!("oracle failed on {TASK_RETRIES} sampled tasks for demo {i}")))?;
        demo.check_chaining()?;
        out.push(demo);
    }
    Ok(out)
}
