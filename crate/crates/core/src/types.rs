//! Object-centric data model shared by every stage.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSignature {
    pub name: String,
    pub feature_dim: usize,
}

impl TypeSignature {
    pub fn new(name: &str, feature_dim: usize) -> Self {
        Self { name: name.to_string(), feature_dim }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

impl ObjectInstance {
    pub fn new(name: &str, ty: &str) -> Self {
        Self { name: name.to_string(), ty: ty.to_string() }
    }
}

/// Sort objects by name and reject duplicates.
pub fn canonical_objects(objects: &[ObjectInstance]) -> Result<Vec<ObjectInstance>> {
    let mut out = objects.to_vec();
    out.sort();
    for w in out.windows(2) {
        if w[0].name == w[1].name {
            return Err(Error::Config(format!("duplicate object name `{}`", w[0].name)));
        }
    }
    Ok(out)
}

/// Per-object feature vectors, keyed by object name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub features: BTreeMap<String, Vec<f64>>,
}

impl State {
    pub fn get(&self, object: &str) -> Option<&[f64]> {
        self.features.get(object).map(|v| v.as_slice())
    }

    pub fn value(&self, object: &str, col: usize) -> f64 {
        self.features[object][col]
    }

    pub fn set(&mut self, object: &str, col: usize, v: f64) {
        self.features.get_mut(object).expect("unknown object")[col] = v;
    }

    pub fn validate(&self, objects: &[ObjectInstance], types: &[TypeSignature]) -> Result<()> {
        if self.features.len() != objects.len() {
            return Err(Error::Consistency(format!(
                "state has {} objects, task has {}",
                self.features.len(),
                objects.len()
            )));
        }
        for o in objects {
            let ty = types
                .iter()
                .find(|t| t.name == o.ty)
                .ok_or_else(|| Error::Config(format!("unknown type `{}`", o.ty)))?;
            match self.features.get(&o.name) {
                Some(v) if v.len() == ty.feature_dim => {}
                Some(v) => {
                    return Err(Error::Consistency(format!(
                        "object `{}` has {} features, type `{}` needs {}",
                        o.name,
                        v.len(),
                        ty.name,
                        ty.feature_dim
                    )))
                }
                None => return Err(Error::Consistency(format!("state misses object `{}`", o.name))),
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControllerSchema {
    pub name: String,
    pub params: Vec<Param>,
    pub omega_dim: usize,
}

impl ControllerSchema {
    /// `params` as `(name, type)` pairs, names without the leading `?`.
    pub fn new(name: &str, params: &[(&str, &str)], omega_dim: usize) -> Self {
        Self {
            name: name.to_string(),
            params: params
                .iter()
                .map(|(n, t)| Param { name: n.to_string(), ty: t.to_string() })
                .collect(),
            omega_dim,
        }
    }

    pub fn param_types(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.ty.as_str()).collect()
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundedController {
    pub controller: String,
    pub args: Vec<String>,
    pub omega: Vec<f64>,
}

impl GroundedController {
    pub fn new(controller: &str, args: &[&str], omega: Vec<f64>) -> Self {
        Self {
            controller: controller.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
            omega,
        }
    }

    /// The discrete part, used for skeleton comparison.
    pub fn skeleton_step(&self) -> (String, Vec<String>) {
        (self.controller.clone(), self.args.clone())
    }
}

impl fmt::Display for GroundedController {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.controller, self.args.join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateKind {
    Static,
    Goal,
    BasicDynamic,
    DerivedDynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    None,
    Forall,
    Exists,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivedForm {
    pub base: Box<LiftedPredicate>,
    pub quantifier: Quantifier,
    pub quantified_arg: Option<usize>,
    pub negated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftedPredicate {
    pub name: String,
    pub arg_types: Vec<String>,
    pub kind: PredicateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<DerivedForm>,
}

impl LiftedPredicate {
    pub fn new(name: &str, arg_types: &[&str], kind: PredicateKind) -> Self {
        assert!(kind != PredicateKind::DerivedDynamic, "use LiftedPredicate::derived");
        Self {
            name: name.to_string(),
            arg_types: arg_types.iter().map(|s| s.to_string()).collect(),
            kind,
            derivation: None,
        }
    }

    pub fn basic(name: &str, arg_types: &[&str]) -> Self {
        Self::new(name, arg_types, PredicateKind::BasicDynamic)
    }

    /// Build a derived predicate; the name is generated from the form.
    pub fn derived(base: &LiftedPredicate, quantifier: Quantifier, quantified_arg: Option<usize>, negated: bool) -> Result<Self> {
        if base.kind != PredicateKind::BasicDynamic {
            return Err(Error::Config(format!("derived base `{}` must be basic dynamic", base.name)));
        }
        let arg_types = match (quantifier, quantified_arg) {
            (Quantifier::None, None) => base.arg_types.clone(),
            (Quantifier::Forall | Quantifier::Exists, Some(i)) if i < base.arity() => {
                let mut a = base.arg_types.clone();
                a.remove(i);
                a
            }
            _ => {
                return Err(Error::Config(format!(
                    "bad quantifier/argument combination for `{}`",
                    base.name
                )))
            }
        };
        let neg = if negated { "not_" } else { "" };
        let name = match (quantifier, quantified_arg) {
            (Quantifier::None, _) => format!("{neg}{}", base.name),
            (Quantifier::Forall, Some(i)) => format!("forall{i}_{neg}{}", base.name),
            (Quantifier::Exists, Some(i)) => format!("exists{i}_{neg}{}", base.name),
            _ => unreachable!(),
        };
        Ok(Self {
            name,
            arg_types,
            kind: PredicateKind::DerivedDynamic,
            derivation: Some(DerivedForm { base: Box::new(base.clone()), quantifier, quantified_arg, negated }),
        })
    }

    pub fn arity(&self) -> usize {
        self.arg_types.len()
    }

    pub fn is_derived(&self) -> bool {
        self.kind == PredicateKind::DerivedDynamic
    }
}

impl fmt::Display for LiftedPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.arg_types.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        Self { predicate: predicate.to_string(), args: args.iter().map(|s| s.to_string()).collect() }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub pre: State,
    pub action: GroundedController,
    pub post: State,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub objects: Vec<ObjectInstance>,
    pub init: State,
    pub goal: BTreeSet<GroundAtom>,
}

impl Task {
    pub fn validate(&self) -> Result<()> {
        let names: BTreeSet<&str> = self.objects.iter().map(|o| o.name.as_str()).collect();
        if names.len() != self.objects.len() {
            return Err(Error::Consistency("duplicate object names in task".into()));
        }
        for g in &self.goal {
            if let Some(a) = g.args.iter().find(|a| !names.contains(a.as_str())) {
                return Err(Error::Consistency(format!("goal atom {g} references unknown object `{a}`")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub task: Task,
    pub transitions: Vec<Transition>,
}

impl Demonstration {
    /// Post-state of step i must equal pre-state of step i+1 exactly.
    pub fn check_chaining(&self) -> Result<()> {
        if let Some(first) = self.transitions.first() {
            if first.pre != self.task.init {
                return Err(Error::Consistency("first transition does not start at the task's initial state".into()));
            }
        }
        for (i, w) in self.transitions.windows(2).enumerate() {
            if w[0].post != w[1].pre {
                return Err(Error::Consistency(format!("transitions {i} and {} do not chain", i + 1)));
            }
        }
        Ok(())
    }

    pub fn final_state(&self) -> &State {
        self.transitions.last().map(|t| &t.post).unwrap_or(&self.task.init)
    }

    pub fn skeleton(&self) -> Vec<(String, Vec<String>)> {
        self.transitions.iter().map(|t| t.action.skeleton_step()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EffectEntry {
    pub delta: i8,
    /// `binding[i]` is the controller parameter bound to predicate argument i.
    /// Empty when `delta == 0`.
    #[serde(default)]
    pub binding: Vec<usize>,
}

impl EffectEntry {
    pub fn zero() -> Self {
        Self { delta: 0, binding: Vec::new() }
    }

    pub fn new(delta: i8, binding: &[usize]) -> Self {
        Self { delta, binding: binding.to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EffectVector {
    pub predicate: String,
    pub entries: BTreeMap<String, EffectEntry>,
}

impl EffectVector {
    /// All-zero vector over the given controllers.
    pub fn zeros(predicate: &str, controllers: &[ControllerSchema]) -> Self {
        Self {
            predicate: predicate.to_string(),
            entries: controllers.iter().map(|c| (c.name.clone(), EffectEntry::zero())).collect(),
        }
    }

    pub fn with(mut self, controller: &str, delta: i8, binding: &[usize]) -> Self {
        self.entries.insert(controller.to_string(), EffectEntry::new(delta, binding));
        self
    }

    pub fn entry(&self, controller: &str) -> Option<&EffectEntry> {
        self.entries.get(controller)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|e| e.delta == 0)
    }

    /// Key used to deduplicate proposals: deltas and bindings per controller.
    pub fn signature(&self) -> Vec<(String, i8, Vec<usize>)> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.delta, e.binding.clone())).collect()
    }

    pub fn validate(&self, predicate: &LiftedPredicate, controllers: &[ControllerSchema]) -> Result<()> {
        for c in controllers {
            if !self.entries.contains_key(&c.name) {
                return Err(Error::Config(format!("effect vector for `{}` misses controller `{}`", self.predicate, c.name)));
            }
        }
        for (name, e) in &self.entries {
            let c = controllers
                .iter()
                .find(|c| &c.name == name)
                .ok_or_else(|| Error::Config(format!("effect vector names unknown controller `{name}`")))?;
            if !(-1..=1).contains(&e.delta) {
                return Err(Error::Config(format!("delta {} out of range", e.delta)));
            }
            if e.delta == 0 {
                if !e.binding.is_empty() {
                    return Err(Error::Config(format!("zero delta for `{name}` carries a binding")));
                }
                continue;
            }
            if e.binding.len() != predicate.arity() {
                return Err(Error::Config(format!(
                    "binding for `{}` under `{name}` has {} entries, predicate arity is {}",
                    self.predicate,
                    e.binding.len(),
                    predicate.arity()
                )));
            }
            let mut seen = BTreeSet::new();
            for (i, &j) in e.binding.iter().enumerate() {
                if j >= c.arity() {
                    return Err(Error::Config(format!("binding references parameter {j} of `{name}` (arity {})", c.arity())));
                }
                if !seen.insert(j) {
                    return Err(Error::Config(format!("binding for `{}` under `{name}` is not injective", self.predicate)));
                }
                if c.params[j].ty != predicate.arg_types[i] {
                    return Err(Error::Config(format!(
                        "binding for `{}` under `{name}` maps a `{}` argument to a `{}` parameter",
                        self.predicate, predicate.arg_types[i], c.params[j].ty
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Types and controllers of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSignature {
    pub name: String,
    pub types: Vec<TypeSignature>,
    pub controllers: Vec<ControllerSchema>,
}

impl DomainSignature {
    pub fn type_dim(&self, ty: &str) -> Option<usize> {
        self.types.iter().find(|t| t.name == ty).map(|t| t.feature_dim)
    }

    pub fn controller(&self, name: &str) -> Option<&ControllerSchema> {
        self.controllers.iter().find(|c| c.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for t in &self.types {
            if t.feature_dim == 0 {
                return Err(Error::Config(format!("type `{}` has feature_dim 0", t.name)));
            }
            if !names.insert(&t.name) {
                return Err(Error::Config(format!("duplicate type `{}`", t.name)));
            }
        }
        let mut cnames = BTreeSet::new();
        for c in &self.controllers {
            if !cnames.insert(&c.name) {
                return Err(Error::Config(format!("duplicate controller `{}`", c.name)));
            }
            for p in &c.params {
                if !names.contains(&p.ty) {
                    return Err(Error::Config(format!("controller `{}` uses unknown type `{}`", c.name, p.ty)));
                }
            }
        }
        Ok(())
    }
}
