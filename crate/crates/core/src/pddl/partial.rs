//! Partial domains for the proposer and candidate extraction from its completions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::domain::PddlDomain;
use crate::error::{Error, Result};
use crate::types::{ControllerSchema, DomainSignature, EffectEntry, EffectVector, LiftedPredicate, PredicateKind};

/// Marker placed in every body the proposer is expected to fill.
pub const TODO_SENTINEL: &str = "; TODO";

/// Known predicates declared, actions with full parameter lists and empty bodies.
pub fn serialize_partial(sig: &DomainSignature, known: &[LiftedPredicate]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (domain {})", sig.name);
    let _ = writeln!(s, "  (:requirements :strips :typing)");
    let types: Vec<&str> = sig.types.iter().map(|t| t.name.as_str()).collect();
    let _ = writeln!(s, "  (:types {})", types.join(" "));
    let _ = writeln!(s, "  (:predicates");
    let mut known: Vec<&LiftedPredicate> = known.iter().filter(|p| !p.is_derived()).collect();
    known.sort_by(|a, b| a.name.cmp(&b.name));
    for p in known {
        let args: Vec<String> = p.arg_types.iter().enumerate().map(|(i, t)| format!(" ?x{i} - {t}")).collect();
        let _ = writeln!(s, "    ({}{})", p.name, args.concat());
    }
    let _ = writeln!(s, "    {TODO_SENTINEL}");
    let _ = writeln!(s, "  )");
    for c in &sig.controllers {
        let params: Vec<String> = c.params.iter().map(|p| format!("?{} - {}", p.name, p.ty)).collect();
        let _ = writeln!(s, "  (:action {}", c.name);
        let _ = writeln!(s, "    :parameters ({})", params.join(" "));
        let _ = writeln!(s, "    :precondition (and\n      {TODO_SENTINEL}\n    )");
        let _ = writeln!(s, "    :effect (and\n      {TODO_SENTINEL}\n    )");
        let _ = writeln!(s, "  )");
    }
    s.push_str(")\n");
    s
}

#[derive(Clone, Debug, Default)]
pub struct Extraction {
    pub candidates: Vec<(LiftedPredicate, EffectVector)>,
    /// One line per dropped candidate or ignored action.
    pub diagnostics: Vec<String>,
}

/// Read a Δ for every newly declared predicate from the add/delete lists of `pd`.
pub fn extract_candidates(pd: &PddlDomain, known: &[LiftedPredicate], schemas: &[ControllerSchema]) -> Result<Extraction> {
    let mut out = Extraction::default();
    let mut by_action = BTreeMap::new();
    for a in &pd.actions {
        let schema = schemas
            .iter()
            .find(|c| c.name == a.name)
            .ok_or_else(|| Error::Input(format!("completed domain has action `{}` with no matching controller", a.name)))?;
        let types: Vec<&str> = a.params.iter().map(|p| p.ty.as_str()).collect();
        if types != schema.param_types() {
            return Err(Error::Input(format!("action `{}` parameter types {:?} do not match the controller {:?}", a.name, types, schema.param_types())));
        }
        by_action.insert(a.name.as_str(), a);
    }
    for c in schemas {
        if !by_action.contains_key(c.name.as_str()) {
            out.diagnostics.push(format!("action `{}` missing from completion; its effects read as 0", c.name));
        }
    }
    let known: BTreeSet<&str> = known.iter().map(|p| p.name.as_str()).collect();
    'pred: for decl in &pd.predicates {
        if known.contains(decl.name.as_str()) {
            continue;
        }
        let arg_types: Vec<&str> = decl.params.iter().map(|p| p.ty.as_str()).collect();
        let pred = LiftedPredicate::new(&decl.name, &arg_types, PredicateKind::BasicDynamic);
        let mut ev = EffectVector::zeros(&decl.name, schemas);
        for c in schemas {
            let Some(a) = by_action.get(c.name.as_str()) else { continue };
            let uses: Vec<(i8, &Vec<String>)> = a
                .add
                .iter()
                .filter(|x| x.predicate == decl.name)
                .map(|x| (1, &x.args))
                .chain(a.delete.iter().filter(|x| x.predicate == decl.name).map(|x| (-1, &x.args)))
                .collect();
            match uses.as_slice() {
                [] => {}
                [(delta, args)] => {
                    let mut binding = Vec::with_capacity(args.len());
                    for v in args.iter() {
                        match a.params.iter().position(|p| &p.name == v) {
                            Some(j) => binding.push(j),
                            None => {
                                out.diagnostics.push(format!("`{}` dropped: `?{v}` is not a parameter of `{}`", decl.name, a.name));
                                continue 'pred;
                            }
                        }
                    }
                    ev.entries.insert(c.name.clone(), EffectEntry::new(*delta, &binding));
                }
                _ => {
                    out.diagnostics.push(format!("`{}` dropped: changed more than once by `{}`", decl.name, a.name));
                    continue 'pred;
                }
            }
        }
        if ev.is_zero() {
            out.diagnostics.push(format!("`{}` dropped: no action changes it", decl.name));
            continue;
        }
        if let Err(e) = ev.validate(&pred, schemas) {
            out.diagnostics.push(format!("`{}` dropped: {e}", decl.name));
            continue;
        }
        out.candidates.push((pred, ev));
    }
    Ok(out)
}
