//! Satellites: move into view of a target, calibrate, take a reading.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use super::{dist2, flag, Domain, Split};
use crate::select::operators::Operator;
use crate::types::*;

const VIEW_RADIUS: f64 = 0.15;
const VIEW_OFFSET: f64 = 0.1;
const MOVE_TOL: f64 = 0.03;

// satellite: x, y, theta, calibrated, instrument
const SX: usize = 0;
const SY: usize = 1;
const THETA: usize = 2;
const CALIBRATED: usize = 3;
const INSTRUMENT: usize = 4;
// target: x, y, required_instrument, read
const TX: usize = 0;
const TY: usize = 1;
const REQUIRED: usize = 2;
const READ: usize = 3;

pub struct Satellites {
    sig: DomainSignature,
}

impl Default for Satellites {
    fn default() -> Self {
        Self::new()
    }
}

impl Satellites {
    pub fn new() -> Self {
        Self {
            sig: DomainSignature {
                name: "satellites".into(),
                types: vec![TypeSignature::new("satellite", 5), TypeSignature::new("target", 4)],
                controllers: vec![
                    ControllerSchema::new("calibrate", &[("sat", "satellite")], 0),
                    ControllerSchema::new("move_to", &[("sat", "satellite"), ("target", "target")], 2),
                    ControllerSchema::new("shoot", &[("sat", "satellite"), ("target", "target")], 1),
                ],
            },
        }
    }

    fn sees(state: &State, s: &str, t: &str) -> bool {
        let (Some(fs), Some(ft)) = (state.get(s), state.get(t)) else { return false };
        dist2(fs[SX], fs[SY], ft[TX], ft[TY]) <= VIEW_RADIUS
    }

    fn supports(state: &State, s: &str, t: &str) -> bool {
        let (Some(fs), Some(ft)) = (state.get(s), state.get(t)) else { return false };
        (fs[INSTRUMENT] - ft[REQUIRED]).abs() < 0.5
    }

    pub fn make_task(n: usize, rng: &mut dyn RngCore) -> Task {
        let mut objects = Vec::new();
        let mut f = BTreeMap::new();
        let mut instruments: Vec<usize> = (0..n).collect();
        instruments.shuffle(rng);
        let mut targets: Vec<(f64, f64)> = Vec::new();
        while targets.len() < n {
            let p = (rng.random_range(0.15..0.85), rng.random_range(0.35..0.9));
            if targets.iter().all(|q| dist2(p.0, p.1, q.0, q.1) > 0.35) {
                targets.push(p);
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut goal = BTreeSet::new();
        for i in 0..n {
            let s = format!("sat{i}");
            objects.push(ObjectInstance::new(&s, "satellite"));
            f.insert(s, vec![0.15 + 0.3 * i as f64, 0.0, 0.0, 0.0, instruments[i] as f64]);
            let t = format!("target{i}");
            objects.push(ObjectInstance::new(&t, "target"));
            f.insert(t.clone(), vec![targets[i].0, targets[i].1, instruments[order[i]] as f64, 0.0]);
            goal.insert(GroundAtom::new("read", &[&t]));
        }
        Task { objects, init: State { features: f }, goal }
    }
}

impl Domain for Satellites {
    fn signature(&self) -> &DomainSignature {
        &self.sig
    }

    fn static_predicates(&self) -> Vec<LiftedPredicate> {
        vec![LiftedPredicate::new("supports", &["satellite", "target"], PredicateKind::Static)]
    }

    fn goal_predicates(&self) -> Vec<LiftedPredicate> {
        vec![LiftedPredicate::new("read", &["target"], PredicateKind::Goal)]
    }

    fn reference_predicates(&self) -> Vec<LiftedPredicate> {
        vec![LiftedPredicate::basic("calibrated", &["satellite"]), LiftedPredicate::basic("sees", &["satellite", "target"])]
    }

    fn oracle_operators(&self) -> Vec<Operator> {
        let c = &self.sig.controllers;
        vec![
            Operator::new(&c[0]).with_add("calibrated", &[0]),
            Operator::new(&c[1]).with_add("sees", &[0, 1]),
            Operator::new(&c[2])
                .with_pre("calibrated", &[0])
                .with_pre("sees", &[0, 1])
                .with_pre("supports", &[0, 1])
                .with_add("read", &[1])
                .with_del("calibrated", &[0]),
        ]
    }

    fn holds(&self, predicate: &str, state: &State, args: &[String]) -> Option<bool> {
        Some(match predicate {
            "supports" => Self::supports(state, &args[0], &args[1]),
            "read" => state.get(&args[0]).is_some_and(|t| flag(t[READ])),
            "calibrated" => state.get(&args[0]).is_some_and(|s| flag(s[CALIBRATED])),
            "sees" => Self::sees(state, &args[0], &args[1]),
            _ => return None,
        })
    }

    fn transition(&self, state: &State, a: &GroundedController) -> Option<State> {
        let sch = self.sig.controller(&a.controller)?;
        if a.args.len() != sch.arity() || a.omega.len() != sch.omega_dim {
            return None;
        }
        let sat = &a.args[0];
        let fs = state.get(sat)?;
        let mut s = state.clone();
        match a.controller.as_str() {
            "calibrate" => s.set(sat, CALIBRATED, 1.0),
            "move_to" => {
                let ft = state.get(&a.args[1])?;
                let (vx, vy) = (ft[TX], ft[TY] - VIEW_OFFSET);
                if dist2(a.omega[0], a.omega[1], vx, vy) > MOVE_TOL {
                    return None;
                }
                s.set(sat, SX, a.omega[0]);
                s.set(sat, SY, a.omega[1]);
                s.set(sat, THETA, (ft[TY] - a.omega[1]).atan2(ft[TX] - a.omega[0]));
            }
            "shoot" => {
                let t = &a.args[1];
                if !flag(fs[CALIBRATED]) || !Self::sees(state, sat, t) || !Self::supports(state, sat, t) || (a.omega[0] - 0.5).abs() > 0.1 {
                    return None;
                }
                s.set(t, READ, 1.0);
                s.set(sat, CALIBRATED, 0.0);
            }
            _ => return None,
        }
        Some(s)
    }

    fn sample_task(&self, split: Split, rng: &mut dyn RngCore) -> Task {
        Self::make_task(if split == Split::Train { 2 } else { 3 }, rng)
    }

    fn oracle_omega(&self, state: &State, controller: &str, args: &[String], rng: &mut dyn RngCore) -> Vec<f64> {
        match controller {
            "move_to" => {
                let t = state.get(&args[1]).unwrap_or(&[0.0; 4]);
                vec![t[TX] + rng.random_range(-0.01..0.01), t[TY] - VIEW_OFFSET + rng.random_range(-0.01..0.01)]
            }
            "shoot" => vec![0.5 + rng.random_range(-0.03..0.03)],
            _ => Vec::new(),
        }
    }

    fn columns(&self, ty: &str) -> Vec<String> {
        let cols: &[&str] = match ty {
            "satellite" => &["x", "y", "theta", "calibrated", "instrument"],
            "target" => &["x", "y", "required_instrument", "read"],
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
    fn move_only_changes_acting_satellite() {
        let d = Satellites::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let task = d.sample_task(Split::Test, &mut rng);
        assert_eq!(task.objects.len(), 6);
        let w = d.oracle_omega(&task.init, "move_to", &["sat1".into(), "target0".into()], &mut rng);
        let mv = GroundedController { controller: "move_to".into(), args: vec!["sat1".into(), "target0".into()], omega: w };
        let s = d.transition(&task.init, &mv).unwrap();
        for (k, v) in &s.features {
            if k != "sat1" {
                assert_eq!(v, &task.init.features[k]);
            }
        }
        assert!(d.holds("sees", &s, &["sat1".into(), "target0".into()]).unwrap());
    }
}
