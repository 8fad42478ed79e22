//! Seeding from a completed partial domain and the proposal/refinement loop.

use std::time::Duration;

use super::format::{demo_digest, format_controllers, format_effect_block, format_history, parse_effect_blocks, Redactor};
use super::prompts::{render, COMPLETE_DOMAIN, PROPOSE_EFFECTS};
use super::{CandidateRecord, EffectRequest, History, LoopConfig, Origin, ProposalRound, Proposer};
use crate::error::{Error, Result};
use crate::neuro::{score, train_candidate, TrainConfig};
use crate::pddl::{extract_candidates, parse_domain_lenient, serialize_partial};
use crate::types::*;

/// Call `f`, retrying transport failures with doubling delays.
fn with_backoff(cfg: &LoopConfig, mut f: impl FnMut() -> Result<String>) -> Result<String> {
    let mut delay = cfg.backoff_ms;
    for attempt in 0.. {
        match f() {
            Err(Error::Transport(e)) if attempt < cfg.transport_retries => {
                log::warn!("proposer transport failure ({e}); retrying in {delay} ms");
                std::thread::sleep(Duration::from_millis(delay));
                delay = delay.saturating_mul(2);
            }
            other => return other,
        }
    }
    unreachable!()
}

fn redactor(cfg: &LoopConfig, sig: &DomainSignature, known: &[LiftedPredicate]) -> Redactor {
    if cfg.redact_names {
        let names: Vec<&str> = known.iter().map(|p| p.name.as_str()).collect();
        Redactor::new(&sig.controllers, &names)
    } else {
        Redactor::identity()
    }
}

/// Train one group of proposals and record it as a round. Returns the new record indices.
fn train_group(
    proposals: Vec<(LiftedPredicate, EffectVector)>,
    demos: &[Demonstration],
    train: &TrainConfig,
    origin: Origin,
    focus: Option<&str>,
    history: &mut History,
) -> Result<Vec<usize>> {
    let round = history.rounds.len();
    let mut trained = Vec::new();
    for (p, ev) in proposals {
        history.fits += 1;
        match train_candidate(&p, &ev, demos, train) {
            Ok(t) => trained.push(t),
            Err(Error::Train(e)) => history.diagnostics.push(format!("`{}` not trained: {e}", p.name)),
            Err(e) => return Err(e),
        }
    }
    if trained.is_empty() {
        return Ok(Vec::new());
    }
    let losses: Vec<f64> = trained.iter().map(|t| t.val_loss).collect();
    let scores = score(&losses);
    let start = history.records.len();
    for (t, s) in trained.into_iter().zip(&scores) {
        log::info!("round {round}: `{}` val loss {:.5}{}", t.predicate.name, t.val_loss, if t.consistent { " (consistent)" } else { "" });
        history.records.push(CandidateRecord {
            predicate: t.predicate,
            effect_vector: t.effect_vector,
            val_loss: t.val_loss,
            score: *s,
            consistent: t.consistent,
            round,
            origin,
            mlp: Some(t.mlp),
        });
    }
    let records: Vec<usize> = (start..history.records.len()).collect();
    history.rounds.push(ProposalRound { index: round, focus: focus.map(str::to_owned), records: records.clone(), val_loss: losses, score: scores });
    Ok(records)
}

/// Drop proposals clashing with known names or repeating a tried pattern.
fn filter_new(proposals: Vec<(LiftedPredicate, EffectVector)>, known: &[LiftedPredicate], history: &mut History) -> Vec<(LiftedPredicate, EffectVector)> {
    let mut out: Vec<(LiftedPredicate, EffectVector)> = Vec::new();
    for (p, ev) in proposals {
        if known.iter().any(|k| k.name == p.name) {
            history.diagnostics.push(format!("`{}` shadows a known predicate; dropped", p.name));
        } else if history.tried(&p, &ev) || out.iter().any(|(q, e)| q.arg_types == p.arg_types && e.entries == ev.entries) {
            history.diagnostics.push(format!("`{}` repeats a tried pattern; dropped", p.name));
        } else {
            out.push((p, ev));
        }
    }
    out
}

/// Ask for a completed domain, read candidates off it and train them as round 0.
/// Returns the indices of the seed records. An unusable completion leaves no seeds.
pub fn seed_candidates(
    sig: &DomainSignature,
    demos: &[Demonstration],
    known: &[LiftedPredicate],
    proposer: &mut dyn Proposer,
    cfg: &LoopConfig,
    train: &TrainConfig,
    history: &mut History,
) -> Result<Vec<usize>> {
    let red = redactor(cfg, sig, known);
    let prompt = render(
        COMPLETE_DOMAIN,
        &[("partial_domain", &serialize_partial(sig, known)), ("demo_digest", &demo_digest(demos, cfg.digest_demos))],
    )?;
    let prompt = red.hide(&prompt);
    for attempt in 0..=cfg.completion_retries {
        let text = match with_backoff(cfg, || proposer.complete_partial_domain(&prompt)) {
            Ok(t) => red.reveal(&t),
            Err(Error::Transport(e)) => {
                history.diagnostics.push(format!("completion abandoned after transport failures: {e}"));
                return Ok(Vec::new());
            }
            Err(e) => return Err(e),
        };
        let extracted = parse_domain_lenient(&super::format::strip_fences(&text)).and_then(|(pd, diags)| {
            history.diagnostics.extend(diags.iter().map(|d| format!("completion: {d}")));
            extract_candidates(&pd, known, &sig.controllers)
        });
        match extracted {
            Ok(x) => {
                history.diagnostics.extend(x.diagnostics);
                let seeds = filter_new(x.candidates, known, history);
                return train_group(seeds, demos, train, Origin::Seed, None, history);
            }
            Err(e) => history.diagnostics.push(format!("completion attempt {} unusable: {e}", attempt + 1)),
        }
    }
    history.diagnostics.push("no usable completion; continuing without seeds".into());
    Ok(Vec::new())
}

fn focus_text(focus: Option<&CandidateRecord>, controllers: &[ControllerSchema]) -> String {
    match focus {
        None => "Propose patterns for predicates that are still missing.".into(),
        Some(r) => format!(
            "Improve on this pattern (loss {:.4}); keep what looks right and change what does not:\n{}",
            r.val_loss,
            format_effect_block(&r.predicate, &r.effect_vector, controllers)
        ),
    }
}

/// Seed, then refine until the pool holds enough consistent candidates.
pub fn refine_loop(
    sig: &DomainSignature,
    demos: &[Demonstration],
    known: &[LiftedPredicate],
    proposer: &mut dyn Proposer,
    cfg: &LoopConfig,
    train: &TrainConfig,
) -> Result<History> {
    refine_loop_until(sig, demos, known, proposer, cfg, train, &mut |_| false)
}

/// As `refine_loop`, also stopping as soon as `stop` holds after a round.
pub fn refine_loop_until(
    sig: &DomainSignature,
    demos: &[Demonstration],
    known: &[LiftedPredicate],
    proposer: &mut dyn Proposer,
    cfg: &LoopConfig,
    train: &TrainConfig,
    stop: &mut dyn FnMut(&History) -> bool,
) -> Result<History> {
    cfg.validate()?;
    let train = TrainConfig { threshold: cfg.threshold, ..train.clone() };
    let target = cfg.target(sig.controllers.len());
    let mut history = History::default();
    let seeds = seed_candidates(sig, demos, known, proposer, cfg, &train, &mut history)?;
    let done = |h: &History, stop: &mut dyn FnMut(&History) -> bool| h.consistent_count() >= target || stop(h);
    if done(&history, stop) {
        return Ok(history);
    }
    let red = redactor(cfg, sig, known);
    let controllers = format_controllers(&sig.controllers);
    let digest = demo_digest(demos, cfg.digest_demos);
    let focuses: Vec<Option<usize>> = if seeds.is_empty() { vec![None] } else { seeds.into_iter().map(Some).collect() };
    for focus in focuses {
        let focus_rec = focus.map(|i| history.records[i].clone());
        for _ in 0..cfg.max_iterations {
            let prompt = render(
                PROPOSE_EFFECTS,
                &[
                    ("controllers", &controllers),
                    ("demo_digest", &digest),
                    ("history", &format_history(&history, &sig.controllers)),
                    ("focus", &focus_text(focus_rec.as_ref(), &sig.controllers)),
                    ("max_proposals", &cfg.max_proposals.to_string()),
                ],
            )?;
            let prompt = red.hide(&prompt);
            let req = EffectRequest { focus: focus_rec.as_ref().map(|r| &r.predicate), history: &history, prompt: &prompt };
            let text = match with_backoff(cfg, || proposer.propose_effects(&req)) {
                Ok(t) => red.reveal(&t),
                Err(Error::Transport(e)) => {
                    history.diagnostics.push(format!("refinement stopped after transport failures: {e}"));
                    return Ok(history);
                }
                Err(e) => return Err(e),
            };
            let parsed = parse_effect_blocks(&text, &sig.controllers);
            history.diagnostics.extend(parsed.diagnostics);
            let mut fresh = filter_new(parsed.proposals, known, &mut history);
            fresh.truncate(cfg.max_proposals);
            let name = focus_rec.as_ref().map(|r| r.predicate.name.as_str());
            train_group(fresh, demos, &train, Origin::Refined, name, &mut history)?;
            if done(&history, stop) {
                return Ok(history);
            }
        }
    }
    Ok(history)
}
