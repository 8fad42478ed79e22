//! Grounding of predicates and effect vectors over an object set.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::types::*;

/// All ordered tuples of pairwise-distinct, type-matching objects, lexicographic by name per position.
pub fn enumerate_groundings(predicate: &LiftedPredicate, objects: &[ObjectInstance]) -> Vec<GroundAtom> {
    let per_pos: Vec<Vec<&str>> = predicate
        .arg_types
        .iter()
        .map(|t| {
            let mut v: Vec<&str> = objects.iter().filter(|o| &o.ty == t).map(|o| o.name.as_str()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<&str> = Vec::with_capacity(per_pos.len());
    fn rec<'a>(pos: usize, per_pos: &[Vec<&'a str>], cur: &mut Vec<&'a str>, name: &str, out: &mut Vec<GroundAtom>) {
        if pos == per_pos.len() {
            out.push(GroundAtom::new(name, cur));
            return;
        }
        for &o in &per_pos[pos] {
            if cur.contains(&o) {
                continue;
            }
            cur.push(o);
            rec(pos + 1, per_pos, cur, name, out);
            cur.pop();
        }
    }
    rec(0, &per_pos, &mut cur, &predicate.name, &mut out);
    out
}

/// Ground effect vector t over `enumerate_groundings(predicate, objects)`.
pub fn ground_effect_vector(
    predicate: &LiftedPredicate,
    ev: &EffectVector,
    action: &GroundedController,
    objects: &[ObjectInstance],
) -> Result<Vec<i8>> {
    let atoms = enumerate_groundings(predicate, objects);
    let mut t = vec![0i8; atoms.len()];
    let entry = ev.entry(&action.controller).ok_or_else(|| {
        Error::Config(format!("effect vector for `{}` does not cover `{}`", ev.predicate, action.controller))
    })?;
    if entry.delta == 0 {
        return Ok(t);
    }
    let target = bound_args(entry, action)?;
    for (p, atom) in atoms.iter().enumerate() {
        if atom.args == target {
            t[p] = entry.delta;
        }
    }
    Ok(t)
}

/// The argument tuple an effect entry selects from a grounded controller.
pub fn bound_args(entry: &EffectEntry, action: &GroundedController) -> Result<Vec<String>> {
    entry
        .binding
        .iter()
        .map(|&j| {
            action.args.get(j).cloned().ok_or_else(|| {
                Error::Config(format!("binding references parameter {j} but `{}` has {} args", action.controller, action.args.len()))
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Masks {
    pub zero: Vec<bool>,
    pub one: Vec<bool>,
    pub affected: Vec<usize>,
}

pub fn masks(t: &[i8]) -> Masks {
    let zero: Vec<bool> = t.iter().map(|&v| v == 0).collect();
    let one: Vec<bool> = t.iter().map(|&v| v.abs() == 1).collect();
    let affected = (0..t.len()).filter(|&i| one[i]).collect();
    Masks { zero, one, affected }
}

/// Source of basic atom truth values.
pub trait TruthSource {
    fn truth(&self, atom: &GroundAtom) -> Option<bool>;
}

impl TruthSource for BTreeMap<GroundAtom, bool> {
    fn truth(&self, atom: &GroundAtom) -> Option<bool> {
        self.get(atom).copied()
    }
}

impl TruthSource for HashMap<GroundAtom, bool> {
    fn truth(&self, atom: &GroundAtom) -> Option<bool> {
        self.get(atom).copied()
    }
}

/// Closed-world view: atoms in the set are true, everything else false.
pub struct ClosedWorld<'a>(pub &'a BTreeSet<GroundAtom>);

impl TruthSource for ClosedWorld<'_> {
    fn truth(&self, atom: &GroundAtom) -> Option<bool> {
        Some(self.0.contains(atom))
    }
}

pub fn evaluate_derived(
    form: &DerivedForm,
    basic_truth: &dyn TruthSource,
    args: &[String],
    objects: &[ObjectInstance],
) -> Result<bool> {
    let base = &form.base;
    let lookup = |a: &GroundAtom| {
        basic_truth
            .truth(a)
            .ok_or_else(|| Error::Consistency(format!("no truth value for basic atom {a}")))
    };
    match (form.quantifier, form.quantified_arg) {
        (Quantifier::None, _) => {
            let atom = GroundAtom { predicate: base.name.clone(), args: args.to_vec() };
            Ok(form.negated ^ lookup(&atom)?)
        }
        (q, Some(qi)) => {
            let ty = &base.arg_types[qi];
            let mut any = false;
            let mut all = true;
            for o in objects.iter().filter(|o| &o.ty == ty && !args.contains(&o.name)) {
                let mut full = args.to_vec();
                full.insert(qi, o.name.clone());
                let v = form.negated ^ lookup(&GroundAtom { predicate: base.name.clone(), args: full })?;
                any |= v;
                all &= v;
            }
            Ok(if q == Quantifier::Forall { all } else { any })
        }
        (_, None) => Err(Error::Config(format!("quantified form over `{}` lacks an argument index", base.name))),
    }
}

/// Add every true derived atom to a set of basic/static/goal atoms.
pub fn derived_closure(
    atoms: &BTreeSet<GroundAtom>,
    derived: &[LiftedPredicate],
    objects: &[ObjectInstance],
) -> Result<BTreeSet<GroundAtom>> {
    let mut out = atoms.clone();
    let truth = ClosedWorld(atoms);
    for d in derived {
        let form = d
            .derivation
            .as_ref()
            .ok_or_else(|| Error::Config(format!("`{}` has no derivation", d.name)))?;
        for g in enumerate_groundings(d, objects) {
            if evaluate_derived(form, &truth, &g.args, objects)? {
                out.insert(g);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn objs() -> Vec<ObjectInstance> {
        vec![ObjectInstance::new("r1", "robot"), ObjectInstance::new("b2", "block"), ObjectInstance::new("b1", "block")]
    }

    fn controllers() -> Vec<ControllerSchema> {
        vec![
            ControllerSchema::new("pick", &[("r", "robot"), ("b", "block")], 2),
            ControllerSchema::new("place", &[("r", "robot"), ("b", "block")], 0),
            ControllerSchema::new("stack", &[("r", "robot"), ("top", "block"), ("bottom", "block")], 2),
        ]
    }

    #[test]
    fn groundings_follow_type_product() {
        let holding = LiftedPredicate::basic("holding", &["robot", "block"]);
        let g = enumerate_groundings(&holding, &objs());
        assert_eq!(g, vec![GroundAtom::new("holding", &["r1", "b1"]), GroundAtom::new("holding", &["r1", "b2"])]);
    }

    #[test]
    fn groundings_skip_repeated_objects() {
        let on = LiftedPredicate::new("on", &["block", "block"], PredicateKind::Goal);
        let g = enumerate_groundings(&on, &objs());
        assert_eq!(g, vec![GroundAtom::new("on", &["b1", "b2"]), GroundAtom::new("on", &["b2", "b1"])]);
    }

    #[test]
    fn nullary_predicate_has_one_grounding() {
        let p = LiftedPredicate::basic("ready", &[]);
        assert_eq!(enumerate_groundings(&p, &objs()), vec![GroundAtom::new("ready", &[])]);
        let q = LiftedPredicate::basic("q", &["toy"]);
        assert!(enumerate_groundings(&q, &objs()).is_empty());
    }

    /// Independent oracle: an atom is affected iff, for each argument i, it equals action arg binding[i].
    fn oracle_vector(pred: &LiftedPredicate, ev: &EffectVector, action: &GroundedController, objects: &[ObjectInstance]) -> Vec<i8> {
        let e = ev.entry(&action.controller).unwrap();
        enumerate_groundings(pred, objects)
            .iter()
            .map(|a| {
                if e.delta != 0 && a.args.iter().enumerate().all(|(i, x)| *x == action.args[e.binding[i]]) {
                    e.delta
                } else {
                    0
                }
            })
            .collect()
    }

    #[test]
    fn effect_vector_examples() {
        let holding = LiftedPredicate::basic("holding", &["robot", "block"]);
        let cs = controllers();
        let ev = EffectVector::zeros("holding", &cs).with("pick", 1, &[0, 1]).with("place", -1, &[0, 1]);
        ev.validate(&holding, &cs).unwrap();
        let pick = GroundedController::new("pick", &["r1", "b2"], vec![0.0, 0.0]);
        let t = ground_effect_vector(&holding, &ev, &pick, &objs()).unwrap();
        assert_eq!(t, vec![0, 1]);
        assert_eq!(t, oracle_vector(&holding, &ev, &pick, &objs()));
        let stack = GroundedController::new("stack", &["r1", "b1", "b2"], vec![0.0, 0.0]);
        assert_eq!(ground_effect_vector(&holding, &ev, &stack, &objs()).unwrap(), vec![0, 0]);
        let place = GroundedController::new("place", &["r1", "b1"], vec![]);
        assert_eq!(ground_effect_vector(&holding, &ev, &place, &objs()).unwrap(), vec![-1, 0]);
    }

    #[test]
    fn out_of_range_binding_is_config_error() {
        let holding = LiftedPredicate::basic("holding", &["robot", "block"]);
        let cs = controllers();
        let ev = EffectVector::zeros("holding", &cs).with("pick", 1, &[0, 5]);
        assert!(matches!(ev.validate(&holding, &cs), Err(Error::Config(_))));
        let pick = GroundedController::new("pick", &["r1", "b2"], vec![]);
        assert!(matches!(ground_effect_vector(&holding, &ev, &pick, &objs()), Err(Error::Config(_))));
    }

    #[test]
    fn validation_rejects_bad_bindings() {
        let on = LiftedPredicate::new("on", &["block", "block"], PredicateKind::Goal);
        let cs = controllers();
        let not_injective = EffectVector::zeros("on", &cs).with("stack", 1, &[1, 1]);
        assert!(not_injective.validate(&on, &cs).is_err());
        let wrong_type = EffectVector::zeros("on", &cs).with("stack", 1, &[0, 1]);
        assert!(wrong_type.validate(&on, &cs).is_err());
        let ok = EffectVector::zeros("on", &cs).with("stack", 1, &[1, 2]);
        ok.validate(&on, &cs).unwrap();
    }

    #[test]
    fn masks_partition() {
        let m = masks(&[0, 1, -1]);
        assert_eq!(m.zero, vec![true, false, false]);
        assert_eq!(m.one, vec![false, true, true]);
        assert_eq!(m.affected, vec![1, 2]);
        assert!(masks(&[0, 0]).affected.is_empty());
        assert_eq!(masks(&[-1]).affected, vec![0]);
    }

    #[test]
    fn derived_examples() {
        let objects = vec![ObjectInstance::new("t1", "table"), ObjectInstance::new("k1", "toy"), ObjectInstance::new("k2", "toy")];
        let on_table = LiftedPredicate::basic("on_table", &["toy", "table"]);
        let mut truth = BTreeMap::new();
        for g in enumerate_groundings(&on_table, &objects) {
            truth.insert(g, false);
        }
        let all_off = LiftedPredicate::derived(&on_table, Quantifier::Forall, Some(0), true).unwrap();
        assert_eq!(all_off.name, "forall0_not_on_table");
        assert_eq!(all_off.arg_types, vec!["table"]);
        let form = all_off.derivation.as_ref().unwrap();
        assert!(evaluate_derived(form, &truth, &["t1".into()], &objects).unwrap());
        truth.insert(GroundAtom::new("on_table", &["k2", "t1"]), true);
        assert!(!evaluate_derived(form, &truth, &["t1".into()], &objects).unwrap());

        let no_toys = vec![ObjectInstance::new("t1", "table")];
        let some = LiftedPredicate::derived(&on_table, Quantifier::Exists, Some(0), false).unwrap();
        let empty = BTreeMap::new();
        assert!(!evaluate_derived(some.derivation.as_ref().unwrap(), &empty, &["t1".into()], &no_toys).unwrap());
        assert!(evaluate_derived(form, &empty, &["t1".into()], &no_toys).unwrap());

        let holding = LiftedPredicate::basic("holding", &["robot", "block"]);
        let not_holding = LiftedPredicate::derived(&holding, Quantifier::None, None, true).unwrap();
        let mut t2 = BTreeMap::new();
        t2.insert(GroundAtom::new("holding", &["r1", "b1"]), true);
        assert!(!evaluate_derived(not_holding.derivation.as_ref().unwrap(), &t2, &["r1".into(), "b1".into()], &objs()).unwrap());
    }

    #[test]
    fn missing_basic_value_is_consistency_error() {
        let holding = LiftedPredicate::basic("holding", &["robot", "block"]);
        let not_holding = LiftedPredicate::derived(&holding, Quantifier::None, None, true).unwrap();
        let r = evaluate_derived(not_holding.derivation.as_ref().unwrap(), &BTreeMap::new(), &["r1".into(), "b1".into()], &objs());
        assert!(matches!(r, Err(Error::Consistency(_))));
    }

    #[test]
    fn derived_requires_basic_base() {
        let on = LiftedPredicate::new("on", &["block", "block"], PredicateKind::Goal);
        assert!(LiftedPredicate::derived(&on, Quantifier::None, None, true).is_err());
        let h = LiftedPredicate::basic("h", &["block"]);
        assert!(LiftedPredicate::derived(&h, Quantifier::Forall, Some(1), true).is_err());
    }
}
