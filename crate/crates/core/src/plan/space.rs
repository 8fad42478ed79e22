//! Interned ground atoms, bitset states, compiled derived rules and ground operators.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::grounding::enumerate_groundings;
use crate::select::operators::Operator;
use crate::types::*;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct AtomSet {
    words: Vec<u64>,
}

impl AtomSet {
    pub fn with_capacity(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)] }
    }

    #[inline]
    pub fn contains(&self, i: u32) -> bool {
        let i = i as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: u32) {
        let i = i as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: u32) {
        let i = i as usize;
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| (w * 64 + b) as u32)
        })
    }
}

#[derive(Clone, Debug)]
struct DerivedRule {
    target: u32,
    quantifier: Quantifier,
    negated: bool,
    bases: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct GroundOp {
    pub operator: usize,
    pub args: Vec<String>,
    pub pre: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

/// All ground atoms of a predicate set over one object set.
#[derive(Clone, Debug)]
pub struct AtomSpace {
    pub atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, u32>,
    derived: Vec<DerivedRule>,
    derived_ids: Vec<u32>,
    pub objects: Vec<ObjectInstance>,
}

impl AtomSpace {
    /// Base predicates of derived ones are added if missing from `predicates`.
    pub fn new(predicates: &[LiftedPredicate], objects: &[ObjectInstance]) -> Result<Self> {
        let mut objects = objects.to_vec();
        objects.sort();
        let mut all: Vec<&LiftedPredicate> = Vec::new();
        for p in predicates {
            if let Some(f) = &p.derivation {
                if !all.iter().any(|q| q.name == f.base.name) && !predicates.iter().any(|q| q.name == f.base.name) {
                    all.push(&f.base);
                }
            }
        }
        all.extend(predicates.iter());
        let mut atoms = Vec::new();
        let mut index = HashMap::new();
        for p in &all {
            for g in enumerate_groundings(p, &objects) {
                if index.insert(g.clone(), atoms.len() as u32).is_some() {
                    return Err(Error::Config(format!("predicate `{}` declared twice", p.name)));
                }
                atoms.push(g);
            }
        }
        let mut derived = Vec::new();
        for p in all.iter().filter(|p| p.is_derived()) {
            let f = p.derivation.as_ref().unwrap();
            for g in enumerate_groundings(p, &objects) {
                let target = index[&g];
                let bases = match (f.quantifier, f.quantified_arg) {
                    (Quantifier::None, _) => vec![index[&GroundAtom { predicate: f.base.name.clone(), args: g.args.clone() }]],
                    (_, Some(qi)) => objects
                        .iter()
                        .filter(|o| o.ty == f.base.arg_types[qi] && !g.args.contains(&o.name))
                        .map(|o| {
                            let mut full = g.args.clone();
                            full.insert(qi, o.name.clone());
                            index[&GroundAtom { predicate: f.base.name.clone(), args: full }]
                        })
                        .collect(),
                    (_, None) => return Err(Error::Config(format!("`{}` lacks a quantified argument", p.name))),
                };
                derived.push(DerivedRule { target, quantifier: f.quantifier, negated: f.negated, bases });
            }
        }
        let derived_ids = derived.iter().map(|r| r.target).collect();
        Ok(Self { atoms, index, derived, derived_ids, objects })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn id(&self, atom: &GroundAtom) -> Option<u32> {
        self.index.get(atom).copied()
    }

    pub fn empty_set(&self) -> AtomSet {
        AtomSet::with_capacity(self.atoms.len())
    }

    /// Atoms not in the space are ignored.
    pub fn set_from(&self, atoms: &BTreeSet<GroundAtom>) -> AtomSet {
        let mut s = self.empty_set();
        for a in atoms {
            if let Some(i) = self.id(a) {
                s.insert(i);
            }
        }
        s
    }

    pub fn to_atoms(&self, s: &AtomSet) -> BTreeSet<GroundAtom> {
        s.iter().map(|i| self.atoms[i as usize].clone()).collect()
    }

    /// Recompute every derived atom from the basic atoms in `s`.
    pub fn close(&self, s: &mut AtomSet) {
        for &t in &self.derived_ids {
            s.remove(t);
        }
        for r in &self.derived {
            let v = match r.quantifier {
                Quantifier::None => r.negated ^ s.contains(r.bases[0]),
                Quantifier::Forall => r.bases.iter().all(|&b| r.negated ^ s.contains(b)),
                Quantifier::Exists => r.bases.iter().any(|&b| r.negated ^ s.contains(b)),
            };
            if v {
                s.insert(r.target);
            }
        }
    }

    /// Ground every operator over all distinct type-matching argument tuples.
    /// Precondition atoms outside the space make the grounding inapplicable.
    pub fn ground_operators(&self, operators: &[Operator]) -> Vec<GroundOp> {
        let mut out = Vec::new();
        for (oi, op) in operators.iter().enumerate() {
            let candidates: Vec<Vec<&str>> = op
                .params
                .iter()
                .map(|p| self.objects.iter().filter(|o| o.ty == p.ty).map(|o| o.name.as_str()).collect())
                .collect();
            let mut cur: Vec<&str> = Vec::new();
            let mut tuples: Vec<Vec<String>> = Vec::new();
            fn rec<'a>(i: usize, c: &[Vec<&'a str>], cur: &mut Vec<&'a str>, out: &mut Vec<Vec<String>>) {
                if i == c.len() {
                    out.push(cur.iter().map(|s| s.to_string()).collect());
                    return;
                }
                for &o in &c[i] {
                    if !cur.contains(&o) {
                        cur.push(o);
                        rec(i + 1, c, cur, out);
                        cur.pop();
                    }
                }
            }
            rec(0, &candidates, &mut cur, &mut tuples);
            'tuple: for args in tuples {
                let mut pre = Vec::with_capacity(op.pre.len());
                for a in &op.pre {
                    match self.id(&a.ground(&args)) {
                        Some(i) => pre.push(i),
                        None => continue 'tuple,
                    }
                }
                let ids = |set: &BTreeSet<crate::select::operators::LiftedAtom>| -> Vec<u32> {
                    set.iter().filter_map(|a| self.id(&a.ground(&args))).collect()
                };
                let add = ids(&op.add);
                let del = ids(&op.del);
                out.push(GroundOp { operator: oi, args, pre, add, del });
            }
        }
        out
    }

    pub fn applicable(&self, s: &AtomSet, op: &GroundOp) -> bool {
        op.pre.iter().all(|&i| s.contains(i))
    }

    /// Delete, then add, then close.
    pub fn apply(&self, s: &AtomSet, op: &GroundOp) -> AtomSet {
        let mut n = s.clone();
        for &i in &op.del {
            n.remove(i);
        }
        for &i in &op.add {
            n.insert(i);
        }
        self.close(&mut n);
        n
    }
}
