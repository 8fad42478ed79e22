//! Tabletop blocks: one robot builds two-level towers.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::{dist2, flag, Domain, Split};
use crate::select::operators::Operator;
use crate::types::*;

const BLOCK_H: f64 = 0.05;
const HOLD_Z: f64 = 0.3;
const GRASP_TOL: f64 = 0.02;
const ON_TOL: f64 = 0.03;
const FREE_RADIUS: f64 = 0.1;

// robot columns: x, y, z, hand_empty
const HAND_EMPTY: usize = 3;
// block columns
const BX: usize = 0;
const BY: usize = 1;
const BZ: usize = 2;
const HELD: usize = 3;
const CLEAR: usize = 4;

pub struct Blocks {
    sig: DomainSignature,
}

impl Default for Blocks {
    fn default() -> Self {
        Self::new()
    }
}

impl Blocks {
    pub fn new() -> Self {
        Self {
            sig: DomainSignature {
                name: "blocks".into(),
                types: vec![TypeSignature::new("robot", 4), TypeSignature::new("block", 5)],
                controllers: vec![
                    ControllerSchema::new("pick", &[("robot", "robot"), ("block", "block")], 2),
                    ControllerSchema::new("stack", &[("robot", "robot"), ("top", "block"), ("bottom", "block")], 2),
                    ControllerSchema::new("put_on_table", &[("robot", "robot"), ("block", "block")], 2),
                ],
            },
        }
    }

    fn blocks(state: &State) -> impl Iterator<Item = (&String, &Vec<f64>)> {
        state.features.iter().filter(|(k, _)| k.starts_with("block"))
    }

    fn on(state: &State, a: &str, b: &str) -> bool {
        let (Some(fa), Some(fb)) = (state.get(a), state.get(b)) else { return false };
        !flag(fa[HELD])
            && !flag(fb[HELD])
            && (fa[BX] - fb[BX]).abs() < ON_TOL
            && (fa[BY] - fb[BY]).abs() < ON_TOL
            && (fa[BZ] - fb[BZ] - BLOCK_H).abs() < 0.01
    }

    /// A block-sized free spot on the table for `block`, or false.
    fn spot_free(state: &State, block: &str, x: f64, y: f64) -> bool {
        (0.05..=0.95).contains(&x)
            && (0.05..=0.95).contains(&y)
            && Self::blocks(state).all(|(k, f)| k == block || flag(f[HELD]) || dist2(f[BX], f[BY], x, y) >= FREE_RADIUS)
    }

    /// Each goal tower pairs two distinct blocks, so `towers` may be at most `n_blocks / 2`.
    pub fn make_task(n_blocks: usize, towers: usize, rng: &mut dyn RngCore) -> Task {
        assert!(2 * towers <= n_blocks, "{towers} two-block towers need at least {} blocks", 2 * towers);
        let mut objects = vec![ObjectInstance::new("robot", "robot")];
        let mut features = BTreeMap::new();
        features.insert("robot".to_string(), vec![0.5, 0.5, HOLD_Z, 1.0]);
        let mut cells: Vec<(usize, usize)> = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).collect();
        cells.shuffle(rng);
        let names: Vec<String> = (0..n_blocks).map(|i| format!("block{i}")).collect();
        for (name, &(i, j)) in names.iter().zip(&cells) {
            let x = 0.12 + 0.15 * i as f64 + rng.random_range(-0.015..0.015);
            let y = 0.12 + 0.15 * j as f64 + rng.random_range(-0.015..0.015);
            objects.push(ObjectInstance::new(name, "block"));
            features.insert(name.clone(), vec![x, y, 0.0, 0.0, 1.0]);
        }
        let mut order = names.clone();
        order.shuffle(rng);
        let goal: BTreeSet<GroundAtom> =
            (0..towers).map(|t| GroundAtom::new("on", &[&order[2 * t], &order[2 * t + 1]])).collect();
        Task { objects, init: State { features }, goal }
    }
}

impl Domain for Blocks {
    fn signature(&self) -> &DomainSignature {
        &self.sig
    }

    fn static_predicates(&self) -> Vec<LiftedPredicate> {
        Vec::new()
    }

    fn goal_predicates(&self) -> Vec<LiftedPredicate> {
        vec![LiftedPredicate::new("on", &["block", "block"], PredicateKind::Goal)]
    }

    fn reference_predicates(&self) -> Vec<LiftedPredicate> {
        vec![
            LiftedPredicate::basic("holding", &["robot", "block"]),
            LiftedPredicate::basic("hand_empty", &["robot"]),
            LiftedPredicate::basic("clear", &["block"]),
            LiftedPredicate::basic("on_table", &["block"]),
        ]
    }

    fn oracle_operators(&self) -> Vec<Operator> {
        let c = &self.sig.controllers;
        vec![
            Operator::new(&c[0])
                .with_pre("hand_empty", &[0])
                .with_pre("clear", &[1])
                .with_pre("on_table", &[1])
                .with_add("holding", &[0, 1])
                .with_del("hand_empty", &[0])
                .with_del("clear", &[1])
                .with_del("on_table", &[1]),
            Operator::new(&c[1])
                .with_pre("holding", &[0, 1])
                .with_pre("clear", &[2])
                .with_add("hand_empty", &[0])
                .with_add("clear", &[1])
                .with_add("on", &[1, 2])
                .with_del("holding", &[0, 1])
                .with_del("clear", &[2]),
            Operator::new(&c[2])
                .with_pre("holding", &[0, 1])
                .with_add("hand_empty", &[0])
                .with_add("clear", &[1])
                .with_add("on_table", &[1])
                .with_del("holding", &[0, 1]),
        ]
    }

    fn holds(&self, predicate: &str, state: &State, args: &[String]) -> Option<bool> {
        let f = |i: usize| state.get(&args[i]);
        Some(match predicate {
            "on" => Self::on(state, &args[0], &args[1]),
            "holding" => f(1).is_some_and(|b| flag(b[HELD])),
            "hand_empty" => f(0).is_some_and(|r| flag(r[HAND_EMPTY])),
            "clear" => f(0).is_some_and(|b| flag(b[CLEAR])),
            "on_table" => f(0).is_some_and(|b| !flag(b[HELD]) && b[BZ] < 0.01),
            _ => return None,
        })
    }

    fn transition(&self, state: &State, a: &GroundedController) -> Option<State> {
        let sch = self.sig.controller(&a.controller)?;
        if a.args.len() != sch.arity() || a.omega.len() != sch.omega_dim {
            return None;
        }
        let (wx, wy) = (a.omega[0], a.omega[1]);
        let r = &a.args[0];
        let robot = state.get(r)?;
        let mut s = state.clone();
        match a.controller.as_str() {
            "pick" => {
                let b = &a.args[1];
                let fb = state.get(b)?;
                if !flag(robot[HAND_EMPTY]) || !flag(fb[CLEAR]) || flag(fb[HELD]) || dist2(wx, wy, fb[BX], fb[BY]) > GRASP_TOL {
                    return None;
                }
                let below: Option<String> = Self::blocks(state).map(|(k, _)| k.clone()).find(|k| Self::on(state, b, k));
                if let Some(below) = below {
                    s.set(&below, CLEAR, 1.0);
                }
                s.features.insert(b.clone(), vec![wx, wy, HOLD_Z, 1.0, 0.0]);
                s.features.insert(r.clone(), vec![wx, wy, HOLD_Z, 0.0]);
            }
            "stack" => {
                let (top, bottom) = (&a.args[1], &a.args[2]);
                let (ft, fb) = (state.get(top)?, state.get(bottom)?);
                if top == bottom || !flag(ft[HELD]) || flag(fb[HELD]) || !flag(fb[CLEAR]) || dist2(wx, wy, fb[BX], fb[BY]) > GRASP_TOL {
                    return None;
                }
                s.features.insert(top.clone(), vec![wx, wy, fb[BZ] + BLOCK_H, 0.0, 1.0]);
                s.set(bottom, CLEAR, 0.0);
                s.features.insert(r.clone(), vec![wx, wy, HOLD_Z, 1.0]);
            }
            "put_on_table" => {
                let b = &a.args[1];
                let fb = state.get(b)?;
                if !flag(fb[HELD]) || !Self::spot_free(state, b, wx, wy) {
                    return None;
                }
                s.features.insert(b.clone(), vec![wx, wy, 0.0, 0.0, 1.0]);
                s.features.insert(r.clone(), vec![wx, wy, HOLD_Z, 1.0]);
            }
            _ => return None,
        }
        Some(s)
    }

    fn sample_task(&self, split: Split, rng: &mut dyn RngCore) -> Task {
        let (n, towers) = match split {
            Split::Train => (rng.random_range(4..=5), 2),
            Split::Test => (rng.random_range(6..=7), 3),
        };
        Self::make_task(n, towers, rng)
    }

    fn oracle_omega(&self, state: &State, controller: &str, args: &[String], rng: &mut dyn RngCore) -> Vec<f64> {
        let jitter = |rng: &mut dyn RngCore| rng.random_range(-0.01..0.01);
        match controller {
            "pick" => {
                let b = state.get(&args[1]).unwrap_or(&[0.0; 5]);
                vec![b[BX] + jitter(rng), b[BY] + jitter(rng)]
            }
            "stack" => {
                let b = state.get(&args[2]).unwrap_or(&[0.0; 5]);
                vec![b[BX] + jitter(rng), b[BY] + jitter(rng)]
            }
            "put_on_table" => {
                for _ in 0..200 {
                    let (x, y) = (rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
                    if Self::spot_free(state, &args[1], x, y) {
                        return vec![x, y];
                    }
                }
                vec![0.5, 0.5]
            }
            _ => Vec::new(),
        }
    }

    fn columns(&self, ty: &str) -> Vec<String> {
        let cols: &[&str] = match ty {
            "robot" => &["x", "y", "z", "hand_empty"],
            "block" => &["x", "y", "z", "held", "clear"],
            _ => &[],
        };
        cols.iter().map(|s| s.to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pick_requires_clear_block() {
        let d = Blocks::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let task = Blocks::make_task(4, 2, &mut rng);
        let s = &task.init;
        let b0 = s.get("block0").unwrap().to_vec();
        let pick = GroundedController::new("pick", &["robot", "block0"], vec![b0[0], b0[1]]);
        let s1 = d.transition(s, &pick).unwrap();
        let b1 = s1.get("block1").unwrap().to_vec();
        let stack = GroundedController::new("stack", &["robot", "block0", "block1"], vec![b1[0], b1[1]]);
        let s2 = d.transition(&s1, &stack).unwrap();
        assert_eq!(d.holds("on", &s2, &["block0".into(), "block1".into()]), Some(true));
        let pick_bottom = GroundedController::new("pick", &["robot", "block1"], vec![b1[0], b1[1]]);
        assert!(d.transition(&s2, &pick_bottom).is_none());
        let far = GroundedController::new("pick", &["robot", "block2"], vec![5.0, 5.0]);
        assert!(d.transition(&s2, &far).is_none());
    }
}
