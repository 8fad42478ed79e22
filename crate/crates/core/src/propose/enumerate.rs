//! Bottom-up proposer: every predicate template of arity one or two over the
//! domain types, with every effect pattern, fewest changing skills first.

use std::collections::VecDeque;

use super::format::format_effect_block;
use super::{EffectRequest, Proposer};
use crate::error::Result;
use crate::pddl::serialize_partial;
use crate::types::*;

pub struct EnumerateProposer {
    controllers: Vec<ControllerSchema>,
    templates: Vec<Vec<String>>,
    partial: String,
    batch: usize,
    /// Number of skills with a nonzero entry in the patterns queued next.
    k: usize,
    queue: VecDeque<(LiftedPredicate, EffectVector)>,
    emitted: usize,
}

/// Injective, type-respecting maps from predicate arguments to skill parameters.
fn bindings(arg_types: &[String], c: &ControllerSchema) -> Vec<Vec<usize>> {
    fn go(i: usize, arg_types: &[String], c: &ControllerSchema, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == arg_types.len() {
            out.push(cur.clone());
            return;
        }
        for (j, p) in c.params.iter().enumerate() {
            if p.ty == arg_types[i] && !cur.contains(&j) {
                cur.push(j);
                go(i + 1, arg_types, c, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, arg_types, c, &mut Vec::new(), &mut out);
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl EnumerateProposer {
    pub fn new(sig: &DomainSignature, known: &[LiftedPredicate], batch: usize) -> Self {
        let types: Vec<String> = sig.types.iter().map(|t| t.name.clone()).collect();
        let mut templates: Vec<Vec<String>> = types.iter().map(|t| vec![t.clone()]).collect();
        for a in &types {
            for b in &types {
                templates.push(vec![a.clone(), b.clone()]);
            }
        }
        templates.retain(|t| sig.controllers.iter().any(|c| !bindings(t, c).is_empty()));
        Self {
            controllers: sig.controllers.clone(),
            templates,
            partial: serialize_partial(sig, known),
            batch: batch.max(1),
            k: 0,
            queue: VecDeque::new(),
            emitted: 0,
        }
    }

    /// Queue every pattern with exactly `k` changing skills.
    fn fill(&mut self, k: usize) {
        for t in &self.templates {
            let options: Vec<(usize, Vec<Vec<usize>>)> = self
                .controllers
                .iter()
                .enumerate()
                .map(|(i, c)| (i, bindings(t, c)))
                .filter(|(_, b)| !b.is_empty())
                .collect();
            for subset in subsets(options.len(), k) {
                // Mixed-radix counter over (sign, binding) per chosen skill.
                let radix: Vec<usize> = subset.iter().map(|&s| 2 * options[s].1.len()).collect();
                let mut digits = vec![0usize; k];
                loop {
                    let types: Vec<&str> = t.iter().map(String::as_str).collect();
                    let name = format!("e{}_{}", self.queue.len() + self.emitted, types.join("_"));
                    let pred = LiftedPredicate::basic(&name, &types);
                    let mut ev = EffectVector::zeros(&name, &self.controllers);
                    for (d, &s) in digits.iter().zip(&subset) {
                        let (ci, ref b) = options[s];
                        let delta = if d % 2 == 0 { 1 } else { -1 };
                        ev.entries.insert(self.controllers[ci].name.clone(), EffectEntry::new(delta, &b[d / 2]));
                    }
                    self.queue.push_back((pred, ev));
                    let mut i = k;
                    loop {
                        if i == 0 {
                            break;
                        }
                        i -= 1;
                        digits[i] += 1;
                        if digits[i] < radix[i] {
                            break;
                        }
                        digits[i] = 0;
                        if i == 0 {
                            digits.clear();
                        }
                    }
                    if digits.is_empty() || k == 0 {
                        break;
                    }
                }
            }
        }
    }
}

impl Proposer for EnumerateProposer {
    /// Adds nothing: the enumerator has no prior, so there are no seeds.
    fn complete_partial_domain(&mut self, _prompt: &str) -> Result<String> {
        Ok(self.partial.clone())
    }

    fn propose_effects(&mut self, req: &EffectRequest) -> Result<String> {
        let mut blocks = Vec::new();
        while blocks.len() < self.batch {
            let Some((p, ev)) = self.queue.pop_front() else {
                if self.k >= self.controllers.len() {
                    break;
                }
                self.k += 1;
                self.fill(self.k);
                continue;
            };
            self.emitted += 1;
            if !req.history.tried(&p, &ev) {
                blocks.push(format_effect_block(&p, &ev, &self.controllers));
            }
        }
        Ok(blocks.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propose::{parse_effect_blocks, History};

    fn sig() -> DomainSignature {
        DomainSignature {
            name: "t".into(),
            types: vec![TypeSignature::new("robot", 1), TypeSignature::new("block", 1)],
            controllers: vec![
                ControllerSchema::new("pick", &[("robot", "robot"), ("block", "block")], 0),
                ControllerSchema::new("drop", &[("robot", "robot"), ("block", "block")], 0),
            ],
        }
    }

    fn drain(p: &mut EnumerateProposer) -> Vec<(LiftedPredicate, EffectVector)> {
        let h = History::default();
        let mut all = Vec::new();
        loop {
            let text = p.propose_effects(&EffectRequest { focus: None, history: &h, prompt: "" }).unwrap();
            if text.is_empty() {
                return all;
            }
            all.extend(parse_effect_blocks(&text, &sig().controllers).proposals);
        }
    }

    #[test]
    fn enumerates_every_pattern_once_in_order() {
        let all = drain(&mut EnumerateProposer::new(&sig(), &[], 3));
        // Templates robot, block, (robot, block), (block, robot); each has one binding per skill.
        // k = 1: 2 skills x 2 signs; k = 2: 2 x 2 sign pairs.
        assert_eq!(all.len(), 32);
        assert!(all[..16].iter().all(|(_, ev)| ev.entries.values().filter(|e| e.delta != 0).count() == 1));
        let keys: std::collections::BTreeSet<_> = all.iter().map(|(p, ev)| (p.arg_types.clone(), ev.signature())).collect();
        assert_eq!(keys.len(), 32);
        let again = drain(&mut EnumerateProposer::new(&sig(), &[], 5));
        assert_eq!(all, again);
    }
}
