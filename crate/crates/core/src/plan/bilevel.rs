//! Closed-loop bilevel planning: skeletons from A*, continuous parameters from the
//! samplers, execution in the domain simulator, replanning on surprises.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::abstraction::{abstract_state, Abstraction};
use super::astar::{AstarSearch, Skeleton};
use super::space::AtomSpace;
use crate::domains::Domain;
use crate::error::{Error, Result};
use crate::types::*;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub samples_per_step: usize,
    pub skeletons_per_replan: usize,
    pub max_replans: usize,
    /// Node expansions per A* call.
    pub search_budget: usize,
    pub timeout_secs: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { samples_per_step: 10, skeletons_per_replan: 3, max_replans: 5, search_budget: 100_000, timeout_secs: 60.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    NoSkeleton,
    SamplerExhausted,
    Timeout,
}

/// One executed (or attempted) step of the trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub atoms_before: Vec<GroundAtom>,
    pub action: GroundedController,
    pub atoms_after: Vec<GroundAtom>,
    pub feasible: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub success: bool,
    pub failure: Option<FailureReason>,
    pub replans: usize,
    /// The first skeleton found from the initial state.
    pub initial_skeleton: Option<Skeleton>,
    pub trace: Vec<TraceStep>,
    pub final_state: State,
}

/// Makes the first `times` executions of `controller` leave the state unchanged.
#[derive(Clone, Debug, Default)]
pub struct SkillFailure {
    pub controller: String,
    pub times: usize,
}

enum Attempt {
    Solved,
    /// The state changed before the skeleton broke down.
    Diverged,
    Stuck(FailureReason),
    TimedOut,
}

struct Episode<'a> {
    task: &'a Task,
    abs: &'a Abstraction,
    domain: &'a dyn Domain,
    cfg: &'a PlannerConfig,
    deadline: Instant,
    state: State,
    trace: Vec<TraceStep>,
    injected: Option<SkillFailure>,
}

impl Episode<'_> {
    fn atoms(&self, s: &State) -> Result<BTreeSet<GroundAtom>> {
        abstract_state(s, &self.task.objects, self.abs, self.domain)
    }

    fn execute(&mut self, action: &GroundedController) -> Option<State> {
        if let Some(f) = self.injected.as_mut() {
            if f.controller == action.controller && f.times > 0 {
                f.times -= 1;
                return self.domain.transition(&self.state, action).map(|_| self.state.clone());
            }
        }
        self.domain.transition(&self.state, action)
    }

    fn run_skeleton(&mut self, space: &AtomSpace, sk: &Skeleton, rng: &mut dyn RngCore) -> Result<Attempt> {
        let names: Vec<String> = self.abs.operators.iter().map(|o| o.controller.clone()).collect();
        let ops = space.ground_operators(&self.abs.operators);
        let goal: Vec<u32> = self.task.goal.iter().filter_map(|g| space.id(g)).collect();
        for (i, (controller, args)) in sk.steps.iter().enumerate() {
            if Instant::now() > self.deadline {
                return Ok(Attempt::TimedOut);
            }
            let schema = self
                .domain
                .signature()
                .controller(controller)
                .ok_or_else(|| Error::Consistency(format!("skeleton uses unknown controller `{controller}`")))?;
            let before = self.atoms(&self.state)?;
            let mut next = None;
            for _ in 0..self.cfg.samples_per_step.max(1) {
                let omega = if schema.omega_dim == 0 {
                    Vec::new()
                } else {
                    match self.abs.sampler(controller) {
                        Some(s) => s.sample(&self.state, args, rng)?,
                        None => {
                            log::debug!("no sampler for `{controller}`");
                            break;
                        }
                    }
                };
                let action = GroundedController { controller: controller.clone(), args: args.clone(), omega };
                if let Some(s) = self.execute(&action) {
                    next = Some((action, s));
                    break;
                }
                if schema.omega_dim == 0 {
                    break;
                }
            }
            let before_v: Vec<GroundAtom> = before.iter().cloned().collect();
            let Some((action, post)) = next else {
                let action = GroundedController { controller: controller.clone(), args: args.clone(), omega: Vec::new() };
                self.trace.push(TraceStep { atoms_before: before_v.clone(), action, atoms_after: before_v, feasible: false });
                return Ok(if i == 0 { Attempt::Stuck(FailureReason::SamplerExhausted) } else { Attempt::Diverged });
            };
            let after = self.atoms(&post)?;
            self.trace.push(TraceStep { atoms_before: before_v, action, atoms_after: after.iter().cloned().collect(), feasible: true });
            self.state = post;
            if self.domain.goal_satisfied(&self.state, &self.task.goal) {
                return Ok(Attempt::Solved);
            }
            let mut cur = space.set_from(&after);
            space.close(&mut cur);
            let ok = match sk.steps.get(i + 1) {
                Some((c, a)) => ops.iter().any(|o| &names[o.operator] == c && &o.args == a && space.applicable(&cur, o)),
                None => goal.len() == self.task.goal.len() && goal.iter().all(|&g| cur.contains(g)),
            };
            if !ok {
                log::debug!("abstract state after `{controller}` does not support the rest of the skeleton; replanning");
                return Ok(Attempt::Diverged);
            }
        }
        Ok(Attempt::Diverged)
    }
}

/// Solve `task` in closed loop. The rng drives the samplers only.
pub fn bilevel_plan(
    task: &Task,
    abs: &Abstraction,
    domain: &dyn Domain,
    cfg: &PlannerConfig,
    rng: &mut dyn RngCore,
    skill_failure: Option<SkillFailure>,
) -> Result<PlanOutcome> {
    let lifted = abs.lifted();
    let space = AtomSpace::new(&lifted, &task.objects)?;
    let names: Vec<String> = abs.operators.iter().map(|o| o.controller.clone()).collect();
    let ops = space.ground_operators(&abs.operators);
    let goal: Option<Vec<u32>> = task.goal.iter().map(|g| space.id(g)).collect();
    let mut ep = Episode {
        task,
        abs,
        domain,
        cfg,
        deadline: Instant::now() + Duration::from_secs_f64(cfg.timeout_secs),
        state: task.init.clone(),
        trace: Vec::new(),
        injected: skill_failure,
    };
    let mut initial_skeleton = None;
    let mut last = FailureReason::NoSkeleton;
    let finish = |ep: Episode, success: bool, failure: Option<FailureReason>, replans: usize, initial_skeleton| PlanOutcome {
        success,
        failure,
        replans,
        initial_skeleton,
        trace: ep.trace,
        final_state: ep.state,
    };
    if domain.goal_satisfied(&ep.state, &task.goal) {
        return Ok(finish(ep, true, None, 0, Some(Skeleton { steps: Vec::new() })));
    }
    for replan in 0..=cfg.max_replans {
        let mut init = space.set_from(&ep.atoms(&ep.state)?);
        space.close(&mut init);
        let mut search = AstarSearch::new(&space, &ops, names.clone(), init, goal.clone(), cfg.search_budget).paths();
        let mut moved = false;
        let mut tried = false;
        for _ in 0..cfg.skeletons_per_replan.max(1) {
            if Instant::now() > ep.deadline {
                return Ok(finish(ep, false, Some(FailureReason::Timeout), replan, initial_skeleton));
            }
            let Some(sk) = search.next_skeleton() else {
                if !tried {
                    last = FailureReason::NoSkeleton;
                }
                break;
            };
            tried = true;
            if initial_skeleton.is_none() {
                initial_skeleton = Some(sk.clone());
            }
            match ep.run_skeleton(&space, &sk, rng)? {
                Attempt::Solved => return Ok(finish(ep, true, None, replan, initial_skeleton)),
                Attempt::TimedOut => return Ok(finish(ep, false, Some(FailureReason::Timeout), replan, initial_skeleton)),
                Attempt::Stuck(r) => last = r,
                Attempt::Diverged => {
                    moved = true;
                    break;
                }
            }
        }
        if !moved && (replan > 0 || !tried) {
            // A fresh search from an unchanged state cannot find anything new.
            break;
        }
    }
    Ok(finish(ep, false, Some(last), cfg.max_replans, initial_skeleton))
}
