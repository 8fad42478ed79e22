//! The text channel to and from proposers: effect blocks, history tables, demo
//! digests and name redaction.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::pddl::domain::typed_list;
use crate::pddl::sexpr::{parse_all, Sexpr};
use crate::types::*;

use super::History;

/// Parsed effect proposals plus one diagnostic per dropped block.
#[derive(Clone, Debug, Default)]
pub struct ParsedEffects {
    pub proposals: Vec<(LiftedPredicate, EffectVector)>,
    pub diagnostics: Vec<String>,
}

fn parse_block(e: &Sexpr, controllers: &[ControllerSchema]) -> crate::Result<(LiftedPredicate, EffectVector)> {
    let items = e.list().ok_or_else(|| e.error("expected a `(predicate ...)` block"))?;
    if e.head() != Some("predicate") {
        return Err(e.error("block must start with `predicate`"));
    }
    let name = items.get(1).and_then(|n| n.atom()).ok_or_else(|| e.error("missing predicate name"))?;
    let args = items.get(2).and_then(|a| a.list()).ok_or_else(|| e.error("missing argument list"))?;
    let args = typed_list(args, true)?;
    let types: Vec<&str> = args.iter().map(|a| a.ty.as_str()).collect();
    let pred = LiftedPredicate::basic(name, &types);
    let mut ev = EffectVector::zeros(name, controllers);
    for eff in &items[3..] {
        let parts = eff.list().ok_or_else(|| eff.error("expected `(skill sign ?param ...)`"))?;
        let skill = parts.first().and_then(|s| s.atom()).ok_or_else(|| eff.error("missing skill name"))?;
        let c = controllers.iter().find(|c| c.name == skill).ok_or_else(|| eff.error(format!("unknown skill `{skill}`")))?;
        let delta: i8 = match parts.get(1).and_then(|s| s.atom()) {
            Some("+1" | "1") => 1,
            Some("-1") => -1,
            Some("0") => 0,
            _ => return Err(eff.error("sign must be +1, -1 or 0")),
        };
        let mut binding = Vec::new();
        for p in &parts[2..] {
            let v = p.atom().filter(|v| v.starts_with('?')).ok_or_else(|| p.error("expected a skill parameter"))?;
            let i = c
                .params
                .iter()
                .position(|q| q.name == v[1..])
                .ok_or_else(|| p.error(format!("`{skill}` has no parameter `{v}`")))?;
            binding.push(i);
        }
        if ev.entry(skill).is_some_and(|x| x.delta != 0) {
            return Err(eff.error(format!("`{skill}` listed twice")));
        }
        ev.entries.insert(skill.to_string(), EffectEntry::new(delta, if delta == 0 { &[] } else { &binding }));
    }
    ev.validate(&pred, controllers)?;
    Ok((pred, ev))
}

/// Read every `(predicate ...)` block; malformed blocks are dropped, not fatal.
pub fn parse_effect_blocks(text: &str, controllers: &[ControllerSchema]) -> ParsedEffects {
    let mut out = ParsedEffects::default();
    let exprs = match parse_all(&strip_fences(text)) {
        Ok(x) => x,
        Err(e) => {
            out.diagnostics.push(e.to_string());
            return out;
        }
    };
    for e in &exprs {
        match parse_block(e, controllers) {
            Ok(p) if p.1.is_zero() => out.diagnostics.push(format!("`{}` changes under no skill; dropped", p.0.name)),
            Ok(p) => out.proposals.push(p),
            Err(err) => out.diagnostics.push(err.to_string()),
        }
    }
    out
}

/// Chat models like to wrap answers in markdown fences.
pub fn strip_fences(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("```")).collect::<Vec<_>>().join("\n")
}

/// The block a proposer would write for this proposal.
pub fn format_effect_block(pred: &LiftedPredicate, ev: &EffectVector, controllers: &[ControllerSchema]) -> String {
    let args: Vec<String> = pred.arg_types.iter().enumerate().map(|(i, t)| format!("?x{i} - {t}")).collect();
    let mut s = format!("(predicate {} ({})", pred.name, args.join(" "));
    for c in controllers {
        let Some(e) = ev.entry(&c.name).filter(|e| e.delta != 0) else { continue };
        let params: Vec<String> = e.binding.iter().map(|&j| format!("?{}", c.params[j].name)).collect();
        let _ = write!(s, "\n  ({} {} {})", c.name, if e.delta > 0 { "+1" } else { "-1" }, params.join(" "));
    }
    s.push(')');
    s
}

pub fn format_controllers(controllers: &[ControllerSchema]) -> String {
    let mut s = String::new();
    for c in controllers {
        let params: Vec<String> = c.params.iter().map(|p| format!("?{} - {}", p.name, p.ty)).collect();
        let _ = writeln!(s, "- {} ({})", c.name, params.join(" "));
    }
    s
}

/// First `n` demo skeletons, one line each.
pub fn demo_digest(demos: &[Demonstration], n: usize) -> String {
    let mut s = String::new();
    for (i, d) in demos.iter().take(n).enumerate() {
        let steps: Vec<String> = d.skeleton().iter().map(|(c, a)| format!("{c}({})", a.join(", "))).collect();
        let _ = writeln!(s, "{}. {}", i + 1, steps.join(" -> "));
    }
    s
}

/// Every trained pattern with its loss and its score within the round.
pub fn format_history(history: &History, controllers: &[ControllerSchema]) -> String {
    if history.records.is_empty() {
        return "(none yet)\n".into();
    }
    let mut s = String::new();
    for r in &history.records {
        let _ = writeln!(
            s,
            "round {}: loss {:.4}, score {:.0}{}\n{}",
            r.round,
            r.val_loss,
            r.score,
            if r.consistent { ", accepted" } else { "" },
            format_effect_block(&r.predicate, &r.effect_vector, controllers)
        );
    }
    s
}

/// Bidirectional renaming of skill and predicate names for the semantic ablation.
#[derive(Clone, Debug, Default)]
pub struct Redactor {
    forward: BTreeMap<String, String>,
    backward: BTreeMap<String, String>,
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn replace_tokens(text: &str, map: &BTreeMap<String, String>) -> String {
    if map.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut token = String::new();
    let flush = |token: &mut String, out: &mut String| {
        match map.get(token.as_str()) {
            Some(r) => out.push_str(r),
            None => out.push_str(token),
        }
        token.clear();
    };
    for c in text.chars() {
        if is_ident(c) {
            token.push(c);
        } else {
            flush(&mut token, &mut out);
            out.push(c);
        }
    }
    flush(&mut token, &mut out);
    out
}

impl Redactor {
    /// No renaming at all.
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(controllers: &[ControllerSchema], predicates: &[&str]) -> Self {
        let mut r = Self::default();
        for (i, c) in controllers.iter().enumerate() {
            r.add(&c.name, format!("a{i}"));
        }
        for (i, p) in predicates.iter().enumerate() {
            r.add(p, format!("p{i}"));
        }
        r
    }

    fn add(&mut self, name: &str, alias: String) {
        if self.forward.contains_key(name) {
            return;
        }
        self.backward.insert(alias.clone(), name.to_string());
        self.forward.insert(name.to_string(), alias);
    }

    pub fn hide(&self, text: &str) -> String {
        replace_tokens(text, &self.forward)
    }

    pub fn reveal(&self, text: &str) -> String {
        replace_tokens(text, &self.backward)
    }
}
