use std::collections::BTreeMap;

use predinv::domains::{blocks_domain, generate_demos, Domain};
use predinv::neuro::TrainConfig;
use predinv::propose::*;
use predinv::*;

fn small_train() -> TrainConfig {
    TrainConfig { hidden: vec![64, 64], epochs: 60, ..Default::default() }
}

fn blocks() -> (std::sync::Arc<dyn Domain>, Vec<Demonstration>, Vec<LiftedPredicate>) {
    let d = blocks_domain();
    let demos = generate_demos(d.as_ref(), 20, 0).unwrap();
    let known = d.goal_predicates();
    (d, demos, known)
}

fn blocks_replay() -> Replay {
    serde_json::from_str(include_str!("../assets/replays/blocks.json")).unwrap()
}

fn names(h: &History, round: usize) -> Vec<String> {
    h.rounds[round].records.iter().map(|&i| h.records[i].predicate.name.clone()).collect()
}

#[test]
fn oracle_completion_seeds_every_single_effect_predicate() {
    let (d, demos, known) = blocks();
    let mut p = ScriptedProposer::new(blocks_replay());
    let cfg = LoopConfig { max_iterations: 0, ..Default::default() };
    let h = refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
    assert_eq!(names(&h, 0), ["holding", "hand_empty", "on_table"]);
    assert!(h.records.iter().all(|r| r.consistent && r.origin == Origin::Seed));
    // stack both clears and un-clears a block, which one entry per skill cannot express
    assert!(h.diagnostics.iter().any(|m| m.contains("`clear` dropped")));
    assert_eq!(h.fits, 3);
}

#[test]
fn malformed_action_leaves_other_seeds() {
    let (d, demos, known) = blocks();
    let mut r = blocks_replay();
    r.completion = r.completion.replace("(and (on_table ?block)", "(and (on_tabel ?block)");
    let mut p = ScriptedProposer::new(r);
    let cfg = LoopConfig { max_iterations: 0, ..Default::default() };
    let h = refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
    assert!(names(&h, 0).contains(&"holding".to_string()));
    assert!(h.diagnostics.iter().any(|m| m.contains("put_on_table")));
}

#[test]
fn unusable_completion_falls_back_to_no_seeds() {
    let (d, demos, known) = blocks();
    let mut p = ScriptedProposer::new(Replay { completion: "I cannot help with that.".into(), rounds: BTreeMap::new() });
    let cfg = LoopConfig { max_iterations: 1, ..Default::default() };
    let h = refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
    assert!(h.records.is_empty());
    assert!(h.diagnostics.iter().any(|m| m.contains("without seeds")));
}

const INVERTED: &str = "(define (domain blocks)
  (:types robot block)
  (:predicates (on ?x0 - block ?x1 - block) (holding ?r - robot ?b - block))
  (:action pick :parameters (?robot - robot ?block - block)
    :precondition (and) :effect (and (not (holding ?robot ?block))))
  (:action stack :parameters (?robot - robot ?top - block ?bottom - block)
    :precondition (and) :effect (and (not (holding ?robot ?top))))
  (:action put_on_table :parameters (?robot - robot ?block - block)
    :precondition (and) :effect (and (not (holding ?robot ?block)))))";

#[test]
fn second_round_fixes_an_inverted_effect() {
    let (d, demos, known) = blocks();
    let wrong = "(predicate holding (?r - robot ?b - block) (pick +1 ?robot ?block) (stack +1 ?robot ?top))";
    let fixed = "(predicate holding (?r - robot ?b - block)
      (pick +1 ?robot ?block) (stack -1 ?robot ?top) (put_on_table -1 ?robot ?block))
      (predicate grip (?r - robot) (pick +1 ?robot))";
    let rounds = BTreeMap::from([("holding".to_string(), vec![wrong.to_string(), fixed.to_string()])]);
    let mut p = ScriptedProposer::new(Replay { completion: INVERTED.into(), rounds });
    let cfg = LoopConfig { max_iterations: 2, ..Default::default() };
    let h = refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
    assert_eq!(h.rounds.len(), 3);
    let seed = &h.records[h.rounds[0].records[0]];
    let first = &h.records[h.rounds[1].records[0]];
    let second = &h.records[h.rounds[2].records[0]];
    assert!(!seed.consistent && !first.consistent && second.consistent);
    assert!(second.val_loss * 10.0 < first.val_loss.min(seed.val_loss));
    assert_eq!(second.score, 100.0);
    let pool = h.pool();
    assert_eq!(pool.len(), 1);
    assert_eq!(pool[0].predicate.name, "holding");
}

#[test]
fn tried_patterns_are_never_retrained() {
    let (d, demos, known) = blocks();
    let again = "(predicate holding2 (?r - robot ?b - block)
      (pick +1 ?robot ?block) (stack -1 ?robot ?top) (put_on_table -1 ?robot ?block))
      (predicate twice (?r - robot) (pick -1 ?robot) (stack +1 ?robot))
      (predicate twice_again (?r - robot) (pick -1 ?robot) (stack +1 ?robot))";
    let rounds = BTreeMap::from([("holding".to_string(), vec![again.to_string()])]);
    let mut p = ScriptedProposer::new(Replay { completion: blocks_replay().completion, rounds });
    let cfg = LoopConfig { max_iterations: 1, ..Default::default() };
    let h = refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
    // holding2 repeats the seed and twice_again repeats twice within the round
    assert_eq!(h.fits, 4);
    assert_eq!(names(&h, 1), ["twice"]);
    assert_eq!(h.diagnostics.iter().filter(|m| m.contains("repeats a tried pattern")).count(), 2);
}

#[test]
fn enumerator_reaches_the_holding_pattern_deterministically() {
    let (d, _, known) = blocks();
    let want = EffectVector::zeros("holding", &d.signature().controllers)
        .with("pick", 1, &[0, 1])
        .with("stack", -1, &[0, 1])
        .with("put_on_table", -1, &[0, 1]);
    let run = || {
        let mut p = EnumerateProposer::new(d.signature(), &known, 8);
        let h = History::default();
        let mut seen = Vec::new();
        loop {
            let text = p.propose_effects(&EffectRequest { focus: None, history: &h, prompt: "" }).unwrap();
            if text.is_empty() {
                return seen;
            }
            seen.extend(parse_effect_blocks(&text, &d.signature().controllers).proposals);
        }
    };
    let a = run();
    assert!(a.iter().any(|(p, ev)| p.arg_types == ["robot", "block"] && ev.entries == want.entries));
    assert_eq!(a, run());
}

struct Flaky {
    left: usize,
    calls: usize,
}

impl Proposer for Flaky {
    fn complete_partial_domain(&mut self, _: &str) -> Result<String> {
        self.calls += 1;
        if self.left > 0 {
            self.left -= 1;
            return Err(Error::Transport("429".into()));
        }
        Ok(include_str!("../assets/replays/blocks.json").to_string())
    }

    fn propose_effects(&mut self, _: &EffectRequest) -> Result<String> {
        self.calls += 1;
        Err(Error::Transport("connection reset".into()))
    }
}

#[test]
fn transport_failures_back_off_then_end_gracefully() {
    let (d, demos, known) = blocks();
    let cfg = LoopConfig { backoff_ms: 1, transport_retries: 2, max_iterations: 3, ..Default::default() };
    let mut p = Flaky { left: 5, calls: 0 };
    let h = refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
    assert!(h.records.is_empty());
    // three completion attempts, then three refinement attempts
    assert_eq!(p.calls, 6);
    assert!(h.diagnostics.iter().any(|m| m.contains("transport")));
}

struct Recorder(Vec<String>);

impl Proposer for Recorder {
    fn complete_partial_domain(&mut self, prompt: &str) -> Result<String> {
        self.0.push(prompt.to_string());
        Ok(String::new())
    }

    fn propose_effects(&mut self, req: &EffectRequest) -> Result<String> {
        self.0.push(req.prompt.to_string());
        Ok(String::new())
    }
}

#[test]
fn prompts_carry_no_hidden_hints_and_redaction_hides_names() {
    let (d, demos, known) = blocks();
    for redact in [false, true] {
        let cfg = LoopConfig { max_iterations: 1, completion_retries: 0, redact_names: redact, ..Default::default() };
        let mut p = Recorder(Vec::new());
        refine_loop(d.signature(), &demos, &known, &mut p, &cfg, &small_train()).unwrap();
        assert_eq!(p.0.len(), 2);
        for prompt in &p.0 {
            let tokens: Vec<&str> = prompt.split(|c: char| !(c.is_alphanumeric() || c == '_')).collect();
            for hidden in ["holding", "hand_empty", "clear", "on_table"] {
                assert!(!tokens.contains(&hidden), "prompt leaks `{hidden}`");
            }
            assert_eq!(tokens.contains(&"put_on_table"), !redact);
        }
    }
}

