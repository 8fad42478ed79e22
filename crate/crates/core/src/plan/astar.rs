//! Resumable A* over closed abstract states.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::space::{AtomSet, AtomSpace, GroundOp};

/// Grounded controllers without continuous parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub steps: Vec<(String, Vec<String>)>,
}

impl Skeleton {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

struct Node {
    state: AtomSet,
    parent: Option<usize>,
    op: Option<usize>,
    g: u32,
}

/// Heuristic: number of unsatisfied goal atoms. Ties on f are broken FIFO.
pub struct AstarSearch<'a> {
    space: &'a AtomSpace,
    ops: &'a [GroundOp],
    operator_names: Vec<String>,
    goal: Vec<u32>,
    nodes: Vec<Node>,
    open: BinaryHeap<Reverse<(u32, u64, usize)>>,
    best_g: HashMap<AtomSet, u32>,
    closed: HashSet<AtomSet>,
    seq: u64,
    paths: bool,
    pub expansions: usize,
    pub budget: usize,
}

impl<'a> AstarSearch<'a> {
    /// `init` must already be closed. Goal atoms absent from the space make the goal unreachable.
    pub fn new(
        space: &'a AtomSpace,
        ops: &'a [GroundOp],
        operator_names: Vec<String>,
        init: AtomSet,
        goal: Option<Vec<u32>>,
        budget: usize,
    ) -> Self {
        let mut s = Self {
            space,
            ops,
            operator_names,
            goal: goal.clone().unwrap_or_default(),
            nodes: Vec::new(),
            open: BinaryHeap::new(),
            best_g: HashMap::new(),
            closed: HashSet::new(),
            seq: 0,
            paths: false,
            expansions: 0,
            budget,
        };
        if goal.is_some() {
            let h = s.h(&init);
            s.best_g.insert(init.clone(), 0);
            s.nodes.push(Node { state: init, parent: None, op: None, g: 0 });
            s.open.push(Reverse((h, 0, 0)));
        }
        s
    }

    fn h(&self, s: &AtomSet) -> u32 {
        self.goal.iter().filter(|&&g| !s.contains(g)).count() as u32
    }

    /// Tree search over paths instead of states: successive calls yield every
    /// acyclic skeleton in order of length, not just one per reached goal state.
    pub fn paths(mut self) -> Self {
        self.paths = true;
        self
    }

    fn on_path(&self, mut idx: usize, s: &AtomSet) -> bool {
        loop {
            if &self.nodes[idx].state == s {
                return true;
            }
            match self.nodes[idx].parent {
                Some(p) => idx = p,
                None => return false,
            }
        }
    }

    /// Next goal-reaching skeleton, or `None` when the frontier or budget is exhausted.
    pub fn next_skeleton(&mut self) -> Option<Skeleton> {
        while let Some(Reverse((_, _, idx))) = self.open.pop() {
            let is_goal = self.h(&self.nodes[idx].state) == 0;
            if !self.paths && self.closed.contains(&self.nodes[idx].state) {
                continue;
            }
            if self.expansions >= self.budget {
                return None;
            }
            self.expansions += 1;
            if is_goal {
                if !self.paths {
                    self.closed.insert(self.nodes[idx].state.clone());
                }
                return Some(self.extract(idx));
            }
            let state = self.nodes[idx].state.clone();
            let g = self.nodes[idx].g + 1;
            for (oi, op) in self.ops.iter().enumerate() {
                if !self.space.applicable(&state, op) {
                    continue;
                }
                let next = self.space.apply(&state, op);
                let h = self.h(&next);
                if self.paths {
                    if self.on_path(idx, &next) {
                        continue;
                    }
                } else {
                    if self.closed.contains(&next) || self.best_g.get(&next).is_some_and(|&bg| bg <= g) {
                        continue;
                    }
                    self.best_g.insert(next.clone(), g);
                }
                let f = g + h;
                self.seq += 1;
                self.nodes.push(Node { state: next, parent: Some(idx), op: Some(oi), g });
                self.open.push(Reverse((f, self.seq, self.nodes.len() - 1)));
            }
            if !self.paths {
                self.closed.insert(state);
            }
        }
        None
    }

    fn extract(&self, mut idx: usize) -> Skeleton {
        let mut steps = Vec::new();
        while let (Some(p), Some(o)) = (self.nodes[idx].parent, self.nodes[idx].op) {
            let op = &self.ops[o];
            steps.push((self.operator_names[op.operator].clone(), op.args.clone()));
            idx = p;
        }
        steps.reverse();
        Skeleton { steps }
    }
}

/// Independent validity check: every step's Pre holds and the goal holds at the end.
pub fn validate_skeleton(space: &AtomSpace, ops: &[GroundOp], names: &[String], init: &AtomSet, goal: &[u32], sk: &Skeleton) -> bool {
    let mut s = init.clone();
    for (c, args) in &sk.steps {
        let Some(op) = ops.iter().find(|o| &names[o.operator] == c && &o.args == args) else {
            return false;
        };
        if !space.applicable(&s, op) {
            return false;
        }
        s = space.apply(&s, op);
    }
    goal.iter().all(|&g| s.contains(g))
}
