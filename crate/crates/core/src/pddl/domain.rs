//! STRIPS subset of PDDL domains: types, predicates, actions with conjunctive
//! preconditions and add/delete effects.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::sexpr::{parse_all, Sexpr};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedVar {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedVar>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PddlAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub positive: bool,
    pub atom: PddlAtom,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDecl {
    pub name: String,
    pub params: Vec<TypedVar>,
    pub precondition: Vec<Literal>,
    pub add: Vec<PddlAtom>,
    pub delete: Vec<PddlAtom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PddlDomain {
    pub name: String,
    pub types: Vec<String>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl From<Error> for Diagnostic {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { line, col, msg } => Diagnostic { line, col, message: msg },
            other => Diagnostic { line: 0, col: 0, message: other.to_string() },
        }
    }
}

impl PddlDomain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionDecl> {
        self.actions.iter().find(|a| a.name == name)
    }
}

/// `?a ?b - t1 ?c - t2` style lists. Untyped trailing names are an error.
pub(crate) fn typed_list(items: &[Sexpr], vars: bool) -> Result<Vec<TypedVar>> {
    let mut out = Vec::new();
    let mut pending: Vec<&Sexpr> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let s = items[i].atom().ok_or_else(|| items[i].error("expected a symbol"))?;
        if s == "-" {
            let ty = items.get(i + 1).and_then(|t| t.atom()).ok_or_else(|| items[i].error("`-` must be followed by a type"))?;
            if pending.is_empty() {
                return Err(items[i].error("type annotation without names"));
            }
            for p in pending.drain(..) {
                out.push(TypedVar { name: p.atom().unwrap().trim_start_matches('?').to_string(), ty: ty.to_string() });
            }
            i += 2;
            continue;
        }
        if vars && !s.starts_with('?') {
            return Err(items[i].error(format!("expected a variable, found `{s}`")));
        }
        pending.push(&items[i]);
        i += 1;
    }
    if let Some(p) = pending.first() {
        if vars {
            return Err(p.error("parameter without a type"));
        }
        for p in pending {
            out.push(TypedVar { name: p.atom().unwrap().to_string(), ty: "object".into() });
        }
    }
    Ok(out)
}

fn atom_of(e: &Sexpr) -> Result<PddlAtom> {
    let items = e.list().ok_or_else(|| e.error("expected an atom"))?;
    let head = items.first().and_then(|h| h.atom()).ok_or_else(|| e.error("atom without a predicate name"))?;
    let mut args = Vec::new();
    for a in &items[1..] {
        let s = a.atom().ok_or_else(|| a.error("nested expression in atom arguments"))?;
        args.push(s.trim_start_matches('?').to_string());
    }
    Ok(PddlAtom { predicate: head.to_string(), args })
}

fn literals(e: &Sexpr, what: &str) -> Result<Vec<(Literal, (usize, usize))>> {
    let items = e.list().ok_or_else(|| e.error(format!("{what} must be a list")))?;
    let parts: Vec<&Sexpr> = match e.head() {
        Some("and") => items[1..].iter().collect(),
        _ if items.is_empty() => Vec::new(),
        _ => vec![e],
    };
    let mut out = Vec::new();
    for p in parts {
        match p.head() {
            Some("not") => {
                let inner = p.list().unwrap();
                if inner.len() != 2 {
                    return Err(p.error("`not` takes exactly one atom"));
                }
                out.push((Literal { positive: false, atom: atom_of(&inner[1])? }, p.pos()));
            }
            Some(h @ ("or" | "when" | "forall" | "exists" | "imply" | "increase" | "decrease" | "assign" | "and")) => {
                return Err(p.error(format!("unsupported construct `{h}` in {what}")));
            }
            _ => out.push((Literal { positive: true, atom: atom_of(p)? }, p.pos())),
        }
    }
    Ok(out)
}

fn check_atom(atom: &PddlAtom, pos: (usize, usize), preds: &[PredicateDecl], params: &[TypedVar]) -> Result<()> {
    let err = |msg: String| Error::Parse { line: pos.0, col: pos.1, msg };
    let decl = preds.iter().find(|p| p.name == atom.predicate).ok_or_else(|| err(format!("undeclared predicate `{}`", atom.predicate)))?;
    if decl.params.len() != atom.args.len() {
        return Err(err(format!("`{}` expects {} arguments, got {}", atom.predicate, decl.params.len(), atom.args.len())));
    }
    for (a, d) in atom.args.iter().zip(&decl.params) {
        if let Some(p) = params.iter().find(|p| &p.name == a) {
            if p.ty != d.ty {
                return Err(err(format!("argument `?{a}` of type `{}` used where `{}` expects `{}`", p.ty, atom.predicate, d.ty)));
            }
        }
    }
    Ok(())
}

fn parse_action(e: &Sexpr, preds: &[PredicateDecl], types: &[String]) -> Result<ActionDecl> {
    let items = e.list().unwrap();
    let name = items.get(1).and_then(|n| n.atom()).ok_or_else(|| e.error("action without a name"))?.to_string();
    let mut params = Vec::new();
    let mut pre = Vec::new();
    let mut eff = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = items[i].atom().ok_or_else(|| items[i].error("expected an action keyword"))?;
        let val = items.get(i + 1).ok_or_else(|| items[i].error(format!("`{key}` without a value")))?;
        match key {
            ":parameters" => params = typed_list(val.list().ok_or_else(|| val.error("parameters must be a list"))?, true)?,
            ":precondition" => pre = literals(val, "precondition")?,
            ":effect" => eff = literals(val, "effect")?,
            _ => return Err(items[i].error(format!("unknown action keyword `{key}`"))),
        }
        i += 2;
    }
    for p in &params {
        if !types.is_empty() && !types.contains(&p.ty) && p.ty != "object" {
            return Err(e.error(format!("parameter `?{}` has undeclared type `{}`", p.name, p.ty)));
        }
    }
    let names: BTreeSet<&str> = params.iter().map(|p| p.name.as_str()).collect();
    if names.len() != params.len() {
        return Err(e.error(format!("action `{name}` repeats a parameter name")));
    }
    for (l, pos) in pre.iter().chain(eff.iter()) {
        check_atom(&l.atom, *pos, preds, &params)?;
    }
    let add: Vec<PddlAtom> = eff.iter().filter(|(l, _)| l.positive).map(|(l, _)| l.atom.clone()).collect();
    let delete: Vec<PddlAtom> = eff.iter().filter(|(l, _)| !l.positive).map(|(l, _)| l.atom.clone()).collect();
    if let Some(d) = delete.iter().find(|d| add.contains(d)) {
        return Err(e.error(format!("action `{name}` both adds and deletes `{}`", d.predicate)));
    }
    Ok(ActionDecl { name, params, precondition: pre.into_iter().map(|(l, _)| l).collect(), add, delete })
}

/// Strict parse: any malformed action is an error.
pub fn parse_domain(text: &str) -> Result<PddlDomain> {
    let (d, diags) = parse_domain_lenient(text)?;
    match diags.into_iter().next() {
        Some(d) => Err(Error::Parse { line: d.line, col: d.col, msg: d.message }),
        None => Ok(d),
    }
}

/// Lenient parse: malformed actions are dropped and reported; structural errors still fail.
pub fn parse_domain_lenient(text: &str) -> Result<(PddlDomain, Vec<Diagnostic>)> {
    let top = parse_all(text)?;
    let def = top
        .iter()
        .find(|e| e.head() == Some("define"))
        .ok_or_else(|| Error::Parse { line: 1, col: 1, msg: "no `(define ...)` form".into() })?;
    let items = def.list().unwrap();
    let mut name = String::new();
    let mut types = Vec::new();
    let mut preds = Vec::new();
    let mut action_forms = Vec::new();
    let mut diags = Vec::new();
    for it in &items[1..] {
        match it.head() {
            Some("domain") => {
                name = it.list().unwrap().get(1).and_then(|n| n.atom()).ok_or_else(|| it.error("domain without a name"))?.to_string();
            }
            Some(":requirements") => {
                for r in &it.list().unwrap()[1..] {
                    match r.atom() {
                        Some(":strips" | ":typing" | ":negative-preconditions") => {}
                        other => log::warn!("ignoring requirement {:?}", other.unwrap_or("?")),
                    }
                }
            }
            Some(":types") => {
                for t in typed_list(&it.list().unwrap()[1..], false)? {
                    if !types.contains(&t.name) {
                        types.push(t.name);
                    }
                }
            }
            Some(":predicates") => {
                for p in &it.list().unwrap()[1..] {
                    let l = p.list().ok_or_else(|| p.error("predicate declaration must be a list"))?;
                    let pname = l.first().and_then(|h| h.atom()).ok_or_else(|| p.error("predicate without a name"))?;
                    let params = typed_list(&l[1..], true)?;
                    if preds.iter().any(|q: &PredicateDecl| q.name == pname) {
                        diags.push(Diagnostic::from(p.error(format!("predicate `{pname}` declared twice; keeping the first"))));
                        continue;
                    }
                    if let Some(bad) = params.iter().find(|v| !types.is_empty() && !types.contains(&v.ty) && v.ty != "object") {
                        return Err(p.error(format!("predicate `{pname}` uses undeclared type `{}`", bad.ty)));
                    }
                    preds.push(PredicateDecl { name: pname.to_string(), params });
                }
            }
            Some(":action") => action_forms.push(it),
            Some(other) => log::warn!("ignoring section `{other}`"),
            None => return Err(it.error("unexpected symbol in domain body")),
        }
    }
    let mut actions = Vec::new();
    for a in action_forms {
        match parse_action(a, &preds, &types) {
            Ok(act) => {
                if actions.iter().any(|x: &ActionDecl| x.name == act.name) {
                    diags.push(Diagnostic::from(a.error(format!("action `{}` defined twice; keeping the first", act.name))));
                } else {
                    actions.push(act);
                }
            }
            Err(e) => diags.push(Diagnostic::from(e)),
        }
    }
    Ok((PddlDomain { name, types, predicates: preds, actions }, diags))
}

fn typed(vars: &[TypedVar]) -> String {
    vars.iter().map(|v| format!("?{} - {}", v.name, v.ty)).collect::<Vec<_>>().join(" ")
}

fn atom_text(a: &PddlAtom) -> String {
    let mut s = format!("({}", a.predicate);
    for x in &a.args {
        let _ = write!(s, " ?{x}");
    }
    s.push(')');
    s
}

/// Canonical text of a parsed domain.
pub fn serialize_domain(d: &PddlDomain) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (domain {})", d.name);
    let _ = writeln!(s, "  (:requirements :strips :typing)");
    let _ = writeln!(s, "  (:types {})", d.types.join(" "));
    let _ = writeln!(s, "  (:predicates");
    for p in &d.predicates {
        let _ = writeln!(s, "    ({}{}{})", p.name, if p.params.is_empty() { "" } else { " " }, typed(&p.params));
    }
    let _ = writeln!(s, "  )");
    for a in &d.actions {
        let _ = writeln!(s, "  (:action {}", a.name);
        let _ = writeln!(s, "    :parameters ({})", typed(&a.params));
        let pre: Vec<String> = a
            .precondition
            .iter()
            .map(|l| if l.positive { atom_text(&l.atom) } else { format!("(not {})", atom_text(&l.atom)) })
            .collect();
        let _ = writeln!(s, "    :precondition (and {})", pre.join(" "));
        let mut eff: Vec<String> = a.add.iter().map(atom_text).collect();
        eff.extend(a.delete.iter().map(|x| format!("(not {})", atom_text(x))));
        let _ = writeln!(s, "    :effect (and {})", eff.join(" "));
        let _ = writeln!(s, "  )");
    }
    s.push_str(")\n");
    s
}
