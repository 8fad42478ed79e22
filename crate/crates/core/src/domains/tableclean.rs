//! Table cleaning: put the toys in the box, then wipe the table.
//!
//! Wiping is blocked while any toy is on the table or while the box sits on the
//! near side, so a correct plan needs a precondition over "no toy on the table",
//! which no basic predicate with local effects can express. The wiper goes into a
//! tool mount, reachable only while the box is far, leaving the gripper free for toys; with the box starting far, wiping
//! first looks one step shorter to an abstraction that cannot state that precondition.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore};

use super::{dist2, flag, Domain, Split};
use crate::select::operators::Operator;
use crate::types::*;

const TABLE: (f64, f64) = (0.5, 0.5);
const TABLE_HALF: f64 = 0.25;
const BOX_NEAR: (f64, f64) = (0.5, 0.12);
const BOX_FAR: (f64, f64) = (0.5, 0.92);
const HAND: (f64, f64) = (0.5, 0.05);
const MOUNT: (f64, f64) = (0.42, 0.02);
const GRASP_TOL: f64 = 0.02;
const DROP_TOL: f64 = 0.05;

// shared pose columns
const X: usize = 0;
const Y: usize = 1;
// robot
const HAND_EMPTY: usize = 3;
// toy and wiper
const HELD: usize = 3;
const IN_BOX: usize = 4;
// table
const DIRTY: usize = 3;
// box
const NEAR: usize = 3;

pub struct TableClean {
    sig: DomainSignature,
}

impl Default for TableClean {
    fn default() -> Self {
        Self::new()
    }
}

fn is_toy(name: &str) -> bool {
    name.starts_with("toy")
}

impl TableClean {
    pub fn new() -> Self {
        Self {
            sig: DomainSignature {
                name: "tableclean".into(),
                types: vec![
                    TypeSignature::new("robot", 4),
                    TypeSignature::new("toy", 5),
                    TypeSignature::new("table", 4),
                    TypeSignature::new("box", 4),
                    TypeSignature::new("wiper", 5),
                ],
                controllers: vec![
                    ControllerSchema::new("pick_toy", &[("robot", "robot"), ("toy", "toy"), ("table", "table")], 2),
                    ControllerSchema::new("place_toy_in_box", &[("robot", "robot"), ("toy", "toy"), ("box", "box")], 2),
                    ControllerSchema::new("pick_wiper", &[("robot", "robot"), ("wiper", "wiper"), ("box", "box")], 2),
                    ControllerSchema::new("place_wiper_in_box", &[("robot", "robot"), ("wiper", "wiper"), ("box", "box")], 2),
                    ControllerSchema::new("push_box", &[("robot", "robot"), ("box", "box")], 0),
                    ControllerSchema::new("pull_box", &[("robot", "robot"), ("box", "box")], 0),
                    ControllerSchema::new(
                        "wipe_table",
                        &[("robot", "robot"), ("wiper", "wiper"), ("table", "table"), ("box", "box")],
                        0,
                    ),
                ],
            },
        }
    }

    fn on_table(state: &State, toy: &str, table: &str) -> bool {
        let (Some(t), Some(tb)) = (state.get(toy), state.get(table)) else { return false };
        !flag(t[HELD]) && !flag(t[IN_BOX]) && (t[X] - tb[X]).abs() < TABLE_HALF && (t[Y] - tb[Y]).abs() < TABLE_HALF
    }

    fn any_toy_on_table(state: &State, table: &str) -> bool {
        state.features.keys().any(|k| is_toy(k) && Self::on_table(state, k, table))
    }

    fn move_box(s: &mut State, b: &str, to: (f64, f64), near: bool) {
        let from = (s.value(b, X), s.value(b, Y));
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let inside: Vec<String> = s
            .features
            .iter()
            .filter(|(k, f)| (is_toy(k) || k.starts_with("wiper")) && flag(f[IN_BOX]))
            .map(|(k, _)| k.clone())
            .collect();
        for k in inside {
            let (x, y) = (s.value(&k, X), s.value(&k, Y));
            s.set(&k, X, x + dx);
            s.set(&k, Y, y + dy);
        }
        s.set(b, X, to.0);
        s.set(b, Y, to.1);
        s.set(b, NEAR, if near { 1.0 } else { 0.0 });
    }

    /// Random spots on the table at least 0.08 apart.
    fn table_spots(n: usize, rng: &mut dyn RngCore) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        while out.len() < n {
            let p = (TABLE.0 + rng.random_range(-0.2..0.2), TABLE.1 + rng.random_range(-0.2..0.2));
            if out.iter().all(|q| dist2(p.0, p.1, q.0, q.1) > 0.08) {
                out.push(p);
            }
        }
        out
    }

    fn box_slot(b: (f64, f64), i: usize) -> (f64, f64) {
        (b.0 - 0.06 + 0.03 * i as f64, b.1)
    }

    /// `toy_in_box[i]`; `toy_held` puts the first toy not in the box in the gripper.
    pub fn make_task(n_toys: usize, toy_in_box: &[bool], toy_held: bool, wiper_mounted: bool, box_near: bool, rng: &mut dyn RngCore) -> Task {
        let mut objects = vec![
            ObjectInstance::new("robot", "robot"),
            ObjectInstance::new("table", "table"),
            ObjectInstance::new("box", "box"),
            ObjectInstance::new("wiper", "wiper"),
        ];
        let bpos = if box_near { BOX_NEAR } else { BOX_FAR };
        let mut f = BTreeMap::new();
        f.insert("table".to_string(), vec![TABLE.0, TABLE.1, 0.0, 1.0]);
        f.insert("box".to_string(), vec![bpos.0, bpos.1, 0.0, if box_near { 1.0 } else { 0.0 }]);
        let spots = Self::table_spots(n_toys, rng);
        let mut held_toy = false;
        for i in 0..n_toys {
            let name = format!("toy{i}");
            objects.push(ObjectInstance::new(&name, "toy"));
            let v = if toy_in_box[i] {
                let (x, y) = Self::box_slot(bpos, i);
                vec![x, y, 0.0, 0.0, 1.0]
            } else if toy_held && !held_toy {
                held_toy = true;
                vec![HAND.0, HAND.1, 0.0, 1.0, 0.0]
            } else {
                vec![spots[i].0, spots[i].1, rng.random_range(-1.0..1.0), 0.0, 0.0]
            };
            f.insert(name, v);
        }
        let wiper = if wiper_mounted {
            vec![MOUNT.0, MOUNT.1, 0.0, 1.0, 0.0]
        } else {
            let (x, y) = Self::box_slot(bpos, 4);
            vec![x, y, 0.0, 0.0, 1.0]
        };
        f.insert("wiper".to_string(), wiper);
        f.insert("robot".to_string(), vec![0.5, 0.0, std::f64::consts::FRAC_PI_2, if held_toy { 0.0 } else { 1.0 }]);
        let mut goal = BTreeSet::new();
        for i in 0..n_toys {
            goal.insert(GroundAtom::new("in_box", &[&format!("toy{i}"), "box"]));
        }
        goal.insert(GroundAtom::new("clean", &["table"]));
        Task { objects, init: State { features: f }, goal }
    }
}

impl Domain for TableClean {
    fn signature(&self) -> &DomainSignature {
        &self.sig
    }

    fn static_predicates(&self) -> Vec<LiftedPredicate> {
        Vec::new()
    }

    fn goal_predicates(&self) -> Vec<LiftedPredicate> {
        vec![
            LiftedPredicate::new("in_box", &["toy", "box"], PredicateKind::Goal),
            LiftedPredicate::new("clean", &["table"], PredicateKind::Goal),
        ]
    }

    fn reference_predicates(&self) -> Vec<LiftedPredicate> {
        let on_table = LiftedPredicate::basic("on_table", &["toy", "table"]);
        let box_far = LiftedPredicate::basic("box_far", &["box"]);
        let all_off = LiftedPredicate::derived(&on_table, Quantifier::Forall, Some(0), true).unwrap();
        vec![
            LiftedPredicate::basic("hand_empty", &["robot"]),
            LiftedPredicate::basic("holding_toy", &["robot", "toy"]),
            on_table,
            LiftedPredicate::basic("holding_wiper", &["robot", "wiper"]),
            LiftedPredicate::basic("wiper_in_box", &["wiper", "box"]),
            box_far,
            LiftedPredicate::basic("box_near", &["box"]),
            all_off,
        ]
    }

    fn oracle_operators(&self) -> Vec<Operator> {
        let c = &self.sig.controllers;
        vec![
            Operator::new(&c[2])
                .with_pre("wiper_in_box", &[1, 2])
                .with_pre("box_far", &[2])
                .with_add("holding_wiper", &[0, 1])
                .with_del("wiper_in_box", &[1, 2]),
            Operator::new(&c[0])
                .with_pre("hand_empty", &[0])
                .with_pre("on_table", &[1, 2])
                .with_add("holding_toy", &[0, 1])
                .with_del("hand_empty", &[0])
                .with_del("on_table", &[1, 2]),
            Operator::new(&c[1])
                .with_pre("holding_toy", &[0, 1])
                .with_pre("box_near", &[2])
                .with_add("hand_empty", &[0])
                .with_add("in_box", &[1, 2])
                .with_del("holding_toy", &[0, 1]),
            Operator::new(&c[3])
                .with_pre("holding_wiper", &[0, 1])
                .with_pre("box_near", &[2])
                .with_add("wiper_in_box", &[1, 2])
                .with_del("holding_wiper", &[0, 1]),
            Operator::new(&c[4]).with_pre("box_near", &[1]).with_add("box_far", &[1]).with_del("box_near", &[1]),
            Operator::new(&c[5]).with_pre("box_far", &[1]).with_add("box_near", &[1]).with_del("box_far", &[1]),
            Operator::new(&c[6])
                .with_pre("holding_wiper", &[0, 1])
                .with_pre("forall0_not_on_table", &[2])
                .with_pre("box_far", &[3])
                .with_add("clean", &[2]),
        ]
    }

    fn holds(&self, predicate: &str, state: &State, args: &[String]) -> Option<bool> {
        let f = |i: usize| state.get(&args[i]);
        Some(match predicate {
            "in_box" => f(0).is_some_and(|t| flag(t[IN_BOX])),
            "clean" => f(0).is_some_and(|t| !flag(t[DIRTY])),
            "wiper_in_box" => f(0).is_some_and(|w| flag(w[IN_BOX])),
            "hand_empty" => f(0).is_some_and(|r| flag(r[HAND_EMPTY])),
            "holding_toy" => f(1).is_some_and(|t| flag(t[HELD])),
            "on_table" => Self::on_table(state, &args[0], &args[1]),
            "holding_wiper" => f(1).is_some_and(|w| flag(w[HELD])),
            "box_near" => f(0).is_some_and(|b| flag(b[NEAR])),
            "box_far" => f(0).is_some_and(|b| !flag(b[NEAR])),
            _ => return None,
        })
    }

    fn transition(&self, state: &State, a: &GroundedController) -> Option<State> {
        let sch = self.sig.controller(&a.controller)?;
        if a.args.len() != sch.arity() || a.omega.len() != sch.omega_dim {
            return None;
        }
        let args = &a.args;
        let robot = state.get(&args[0])?;
        let hand_empty = flag(robot[HAND_EMPTY]);
        let mut s = state.clone();
        match a.controller.as_str() {
            "pick_toy" => {
                let t = state.get(&args[1])?;
                if !hand_empty || !Self::on_table(state, &args[1], &args[2]) || dist2(a.omega[0], a.omega[1], t[X], t[Y]) > GRASP_TOL {
                    return None;
                }
                s.features.insert(args[1].clone(), vec![HAND.0, HAND.1, t[2], 1.0, 0.0]);
                s.set(&args[0], HAND_EMPTY, 0.0);
            }
            "place_toy_in_box" => {
                let (t, b) = (state.get(&args[1])?, state.get(&args[2])?);
                if !flag(t[HELD]) || !flag(b[NEAR]) || dist2(a.omega[0], a.omega[1], b[X], b[Y]) > DROP_TOL {
                    return None;
                }
                s.features.insert(args[1].clone(), vec![a.omega[0], a.omega[1], t[2], 0.0, 1.0]);
                s.set(&args[0], HAND_EMPTY, 1.0);
            }
            "pick_wiper" => {
                let (w, b) = (state.get(&args[1])?, state.get(&args[2])?);
                if flag(w[HELD]) || flag(b[NEAR]) || dist2(a.omega[0], a.omega[1], w[X], w[Y]) > GRASP_TOL {
                    return None;
                }
                s.features.insert(args[1].clone(), vec![MOUNT.0, MOUNT.1, 0.0, 1.0, 0.0]);
            }
            "place_wiper_in_box" => {
                let (w, b) = (state.get(&args[1])?, state.get(&args[2])?);
                if !flag(w[HELD]) || !flag(b[NEAR]) || dist2(a.omega[0], a.omega[1], b[X], b[Y]) > DROP_TOL {
                    return None;
                }
                s.features.insert(args[1].clone(), vec![a.omega[0], a.omega[1], 0.0, 0.0, 1.0]);
            }
            "push_box" => {
                if !flag(state.get(&args[1])?[NEAR]) {
                    return None;
                }
                Self::move_box(&mut s, &args[1], BOX_FAR, false);
            }
            "pull_box" => {
                if flag(state.get(&args[1])?[NEAR]) {
                    return None;
                }
                Self::move_box(&mut s, &args[1], BOX_NEAR, true);
            }
            "wipe_table" => {
                let w = state.get(&args[1])?;
                state.get(&args[2])?;
                let b = state.get(&args[3])?;
                if !flag(w[HELD]) || flag(b[NEAR]) || Self::any_toy_on_table(state, &args[2]) {
                    return None;
                }
                s.set(&args[2], DIRTY, 0.0);
            }
            _ => return None,
        }
        Some(s)
    }

    fn sample_task(&self, split: Split, rng: &mut dyn RngCore) -> Task {
        match split {
            Split::Train => Self::make_task(2, &[false, false], false, false, false, rng),
            Split::Test => {
                // Two toys stay on the table; the third starts there, in the box or in the gripper.
                let third = rng.random_range(0..3u8);
                Self::make_task(3, &[third == 1, false, false], third == 2, false, false, rng)
            }
        }
    }

    fn oracle_omega(&self, state: &State, controller: &str, args: &[String], rng: &mut dyn RngCore) -> Vec<f64> {
        let mut near = |obj: &str, tol: f64| {
            let f = state.get(obj).unwrap_or(&[0.0, 0.0]);
            vec![f[X] + rng.random_range(-tol..tol), f[Y] + rng.random_range(-tol..tol)]
        };
        match controller {
            "pick_toy" | "pick_wiper" => near(&args[1], 0.01),
            "place_toy_in_box" | "place_wiper_in_box" => near(&args[2], 0.02),
            _ => Vec::new(),
        }
    }

    fn columns(&self, ty: &str) -> Vec<String> {
        let cols: &[&str] = match ty {
            "robot" => &["x", "y", "theta", "hand_empty"],
            "toy" | "wiper" => &["x", "y", "theta", "held", "in_box"],
            "table" => &["x", "y", "theta", "dirty"],
            "box" => &["x", "y", "theta", "near"],
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
    fn wiping_with_toy_on_table_is_infeasible() {
        let d = TableClean::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let task = TableClean::make_task(2, &[false, false], false, true, false, &mut rng);
        let wipe = GroundedController::new("wipe_table", &["robot", "wiper", "table", "box"], vec![]);
        assert!(d.transition(&task.init, &wipe).is_none());
        let cleared = TableClean::make_task(2, &[true, true], false, true, false, &mut rng);
        let s = d.transition(&cleared.init, &wipe).unwrap();
        assert_eq!(d.holds("clean", &s, &["table".into()]), Some(true));
        let near = TableClean::make_task(2, &[true, true], false, true, true, &mut rng);
        assert!(d.transition(&near.init, &wipe).is_none());
    }

    #[test]
    fn box_carries_its_contents() {
        let d = TableClean::new();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let task = TableClean::make_task(2, &[true, false], false, false, true, &mut rng);
        let push = GroundedController::new("push_box", &["robot", "box"], vec![]);
        let s = d.transition(&task.init, &push).unwrap();
        assert!((s.value("toy0", Y) - s.value("box", Y)).abs() < 1e-9);
        assert!(d.transition(&s, &push).is_none());
    }
}
