//! STRIPS operators: one per controller schema, effects read from effect vectors,
//! preconditions by intersection over demonstration pre-states.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::*;

/// Atom over operator variables; `vars[i]` indexes the controller's parameters.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LiftedAtom {
    pub predicate: String,
    pub vars: Vec<usize>,
}

impl LiftedAtom {
    pub fn new(predicate: &str, vars: &[usize]) -> Self {
        Self { predicate: predicate.to_string(), vars: vars.to_vec() }
    }

    pub fn ground(&self, args: &[String]) -> GroundAtom {
        GroundAtom { predicate: self.predicate.clone(), args: self.vars.iter().map(|&v| args[v].clone()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operator {
    pub controller: String,
    pub params: Vec<Param>,
    pub pre: BTreeSet<LiftedAtom>,
    pub add: BTreeSet<LiftedAtom>,
    pub del: BTreeSet<LiftedAtom>,
}

impl Operator {
    pub fn new(schema: &ControllerSchema) -> Self {
        Self {
            controller: schema.name.clone(),
            params: schema.params.clone(),
            pre: BTreeSet::new(),
            add: BTreeSet::new(),
            del: BTreeSet::new(),
        }
    }

    pub fn with_pre(mut self, p: &str, vars: &[usize]) -> Self {
        self.pre.insert(LiftedAtom::new(p, vars));
        self
    }

    pub fn with_add(mut self, p: &str, vars: &[usize]) -> Self {
        self.add.insert(LiftedAtom::new(p, vars));
        self
    }

    pub fn with_del(mut self, p: &str, vars: &[usize]) -> Self {
        self.del.insert(LiftedAtom::new(p, vars));
        self
    }

    pub fn validate(&self, predicates: &[LiftedPredicate]) -> Result<()> {
        if let Some(a) = self.add.intersection(&self.del).next() {
            return Err(Error::Consistency(format!("`{}` both adds and deletes {}", self.controller, a.predicate)));
        }
        let by_name: BTreeMap<&str, &LiftedPredicate> = predicates.iter().map(|p| (p.name.as_str(), p)).collect();
        for (set, is_effect) in [(&self.pre, false), (&self.add, true), (&self.del, true)] {
            for a in set {
                let p = by_name
                    .get(a.predicate.as_str())
                    .ok_or_else(|| Error::Consistency(format!("`{}` mentions unknown predicate `{}`", self.controller, a.predicate)))?;
                if is_effect && p.is_derived() {
                    return Err(Error::Consistency(format!("`{}` has derived predicate `{}` as an effect", self.controller, p.name)));
                }
                if a.vars.len() != p.arity() || a.vars.iter().any(|&v| v >= self.params.len()) {
                    return Err(Error::Consistency(format!("`{}`: malformed atom over `{}`", self.controller, p.name)));
                }
                for (i, &v) in a.vars.iter().enumerate() {
                    if self.params[v].ty != p.arg_types[i] {
                        return Err(Error::Consistency(format!("`{}`: type mismatch in `{}`", self.controller, p.name)));
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &BTreeSet<LiftedAtom>| {
            s.iter()
                .map(|a| {
                    let vs: Vec<String> = a.vars.iter().map(|&v| format!("?{}", self.params[v].name)).collect();
                    format!("{}({})", a.predicate, vs.join(","))
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let ps: Vec<String> = self.params.iter().map(|p| format!("?{}:{}", p.name, p.ty)).collect();
        write!(f, "{}({}) pre[{}] add[{}] del[{}]", self.controller, ps.join(","), show(&self.pre), show(&self.add), show(&self.del))
    }
}

/// All lifted atoms of `pred` over pairwise-distinct, type-matching variables of `params`.
pub fn lifted_atoms(pred: &LiftedPredicate, params: &[Param]) -> Vec<LiftedAtom> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(pred.arity());
    fn rec(i: usize, pred: &LiftedPredicate, params: &[Param], cur: &mut Vec<usize>, out: &mut Vec<LiftedAtom>) {
        if i == pred.arity() {
            out.push(LiftedAtom { predicate: pred.name.clone(), vars: cur.clone() });
            return;
        }
        for (j, p) in params.iter().enumerate() {
            if p.ty == pred.arg_types[i] && !cur.contains(&j) {
                cur.push(j);
                rec(i + 1, pred, params, cur, out);
                cur.pop();
            }
        }
    }
    rec(0, pred, params, &mut cur, &mut out);
    out
}

/// A demo transition's action together with its closed abstract pre-state.
pub struct LabeledTransition<'a> {
    pub atoms: &'a BTreeSet<GroundAtom>,
    pub action: &'a GroundedController,
}

/// Effects of one operator from effect vectors of non-derived predicates.
pub fn operator_effects(schema: &ControllerSchema, effects: &[EffectVector]) -> Result<Operator> {
    let mut op = Operator::new(schema);
    for ev in effects {
        let e = ev
            .entry(&schema.name)
            .ok_or_else(|| Error::Consistency(format!("effect vector of `{}` lacks `{}`", ev.predicate, schema.name)))?;
        match e.delta {
            0 => {}
            1 => {
                op.add.insert(LiftedAtom { predicate: ev.predicate.clone(), vars: e.binding.clone() });
            }
            -1 => {
                op.del.insert(LiftedAtom { predicate: ev.predicate.clone(), vars: e.binding.clone() });
            }
            d => return Err(Error::Consistency(format!("delta {d} out of range"))),
        }
    }
    if let Some(a) = op.add.intersection(&op.del).next() {
        return Err(Error::Consistency(format!("`{}` both adds and deletes {}", schema.name, a.predicate)));
    }
    Ok(op)
}

/// One operator per controller. Every non-derived predicate with dynamics must have an
/// effect vector; predicates without one are treated as unaffected (static/goal).
pub fn learn_operators(
    preds: &[LiftedPredicate],
    effects: &[EffectVector],
    controllers: &[ControllerSchema],
    data: &[LabeledTransition],
) -> Result<Vec<Operator>> {
    for p in preds {
        if p.kind == PredicateKind::BasicDynamic && !effects.iter().any(|e| e.predicate == p.name) {
            return Err(Error::Consistency(format!("basic predicate `{}` has no effect vector", p.name)));
        }
    }
    let relevant: Vec<EffectVector> =
        effects.iter().filter(|e| preds.iter().any(|p| p.name == e.predicate && !p.is_derived())).cloned().collect();
    let mut ops = Vec::with_capacity(controllers.len());
    for schema in controllers {
        let mut op = operator_effects(schema, &relevant)?;
        let mine: Vec<&LabeledTransition> = data.iter().filter(|t| t.action.controller == schema.name).collect();
        if mine.is_empty() {
            log::warn!("controller `{}` has no demonstration transitions; operator gets an empty precondition", schema.name);
        } else {
            let mut candidates: Vec<LiftedAtom> = preds.iter().flat_map(|p| lifted_atoms(p, &schema.params)).collect();
            for t in &mine {
                candidates.retain(|a| t.atoms.contains(&a.ground(&t.action.args)));
                if candidates.is_empty() {
                    break;
                }
            }
            op.pre = candidates.into_iter().collect();
        }
        ops.push(op);
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifted_atoms_respect_types_and_distinctness() {
        let params = vec![
            Param { name: "r".into(), ty: "robot".into() },
            Param { name: "a".into(), ty: "block".into() },
            Param { name: "b".into(), ty: "block".into() },
        ];
        let on = LiftedPredicate::basic("on", &["block", "block"]);
        let atoms = lifted_atoms(&on, &params);
        assert_eq!(atoms, vec![LiftedAtom::new("on", &[1, 2]), LiftedAtom::new("on", &[2, 1])]);
        let he = LiftedPredicate::basic("hand_empty", &["robot"]);
        assert_eq!(lifted_atoms(&he, &params).len(), 1);
    }

    #[test]
    fn zero_delta_predicate_is_in_no_effect_set() {
        let schema = ControllerSchema::new("pick", &[("r", "robot"), ("b", "block")], 0);
        let ev = EffectVector::zeros("clear", std::slice::from_ref(&schema));
        let op = operator_effects(&schema, &[ev]).unwrap();
        assert!(op.add.is_empty() && op.del.is_empty());
    }

    #[test]
    fn no_transitions_gives_empty_pre() {
        let schema = ControllerSchema::new("pick", &[("r", "robot"), ("b", "block")], 0);
        let p = LiftedPredicate::basic("holding", &["robot", "block"]);
        let ev = EffectVector::zeros("holding", std::slice::from_ref(&schema)).with("pick", 1, &[0, 1]);
        let ops = learn_operators(&[p], &[ev], &[schema], &[]).unwrap();
        assert!(ops[0].pre.is_empty());
        assert_eq!(ops[0].add.len(), 1);
    }
}
