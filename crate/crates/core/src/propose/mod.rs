//! Candidate-pool construction: seeds from a completed partial domain, then
//! rounds of effect-pattern proposals scored by classifier validation loss.

pub mod enumerate;
pub mod format;
pub mod http;
pub mod prompts;
pub mod refine;
pub mod scripted;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::neuro::Mlp;
use crate::types::*;

pub use enumerate::EnumerateProposer;
pub use format::{parse_effect_blocks, Redactor};
pub use http::{HttpConfig, HttpProposer};
pub use refine::{refine_loop, refine_loop_until, seed_candidates};
pub use scripted::{Replay, ScriptedProposer};

/// A proposer turns prompts into text; parsing is done by the caller, so every
/// backend goes through the same leniency rules.
pub trait Proposer {
    fn complete_partial_domain(&mut self, prompt: &str) -> Result<String>;
    fn propose_effects(&mut self, req: &EffectRequest) -> Result<String>;
}

pub struct EffectRequest<'a> {
    /// Seed predicate this round refines, if any.
    pub focus: Option<&'a LiftedPredicate>,
    pub history: &'a History,
    pub prompt: &'a str,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Seed,
    Refined,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub predicate: LiftedPredicate,
    pub effect_vector: EffectVector,
    pub val_loss: f64,
    /// Score within the record's round.
    pub score: f64,
    pub consistent: bool,
    pub round: usize,
    pub origin: Origin,
    #[serde(skip)]
    pub mlp: Option<Mlp>,
}

impl CandidateRecord {
    /// Same arguments and effects: training would give the same classifier.
    pub fn same_pattern(&self, pred: &LiftedPredicate, ev: &EffectVector) -> bool {
        self.predicate.arg_types == pred.arg_types && self.effect_vector.entries == ev.entries
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProposalRound {
    pub index: usize,
    pub focus: Option<String>,
    /// Indices into `History::records`.
    pub records: Vec<usize>,
    pub val_loss: Vec<f64>,
    pub score: Vec<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct History {
    pub records: Vec<CandidateRecord>,
    pub rounds: Vec<ProposalRound>,
    /// Classifier trainings so far.
    pub fits: usize,
    pub diagnostics: Vec<String>,
}

impl History {
    pub fn tried(&self, pred: &LiftedPredicate, ev: &EffectVector) -> bool {
        self.records.iter().any(|r| r.same_pattern(pred, ev))
    }

    pub fn consistent_count(&self) -> usize {
        self.records.iter().filter(|r| r.consistent).count()
    }

    /// Consistent records; later records sharing a name get a numeric suffix.
    pub fn pool(&self) -> Vec<CandidateRecord> {
        let mut out: Vec<CandidateRecord> = Vec::new();
        for r in self.records.iter().filter(|r| r.consistent) {
            let mut r = r.clone();
            let base = r.predicate.name.clone();
            let mut k = 2;
            while out.iter().any(|o| o.predicate.name == r.predicate.name) {
                r.predicate.name = format!("{base}_{k}");
                k += 1;
            }
            r.effect_vector.predicate = r.predicate.name.clone();
            out.push(r);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Backend {
    Scripted { replay: std::path::PathBuf },
    Enumerate,
    Http(HttpConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    /// Refinement calls per seed predicate.
    pub max_iterations: usize,
    /// Consistent candidates to collect; `None` means twice the controller count.
    pub pool_target: Option<usize>,
    pub threshold: f64,
    pub max_proposals: usize,
    pub digest_demos: usize,
    /// Extra attempts when a completion cannot be parsed.
    pub completion_retries: usize,
    /// Extra attempts after a transport failure, with doubling delays.
    pub transport_retries: usize,
    pub backoff_ms: u64,
    /// Replace skill and predicate names in prompts with opaque aliases.
    pub redact_names: bool,
    pub backend: Backend,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            pool_target: None,
            threshold: 0.005,
            max_proposals: 4,
            digest_demos: 3,
            completion_retries: 2,
            transport_retries: 4,
            backoff_ms: 500,
            redact_names: false,
            backend: Backend::Enumerate,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_proposals == 0 || self.pool_target == Some(0) || self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(crate::Error::Config("proposal count, pool target and threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn target(&self, controllers: usize) -> usize {
        self.pool_target.unwrap_or(2 * controllers)
    }
}

/// Backend named by the config. `known` are the goal and static predicates.
pub fn make_proposer(cfg: &LoopConfig, sig: &DomainSignature, known: &[LiftedPredicate], run_dir: Option<&std::path::Path>) -> Result<Box<dyn Proposer>> {
    Ok(match &cfg.backend {
        Backend::Scripted { replay } => Box::new(ScriptedProposer::from_file(replay)?),
        Backend::Enumerate => Box::new(EnumerateProposer::new(sig, known, cfg.max_proposals)),
        Backend::Http(h) => Box::new(HttpProposer::new(h, run_dir.map(|d| d.join("transcript.jsonl")))?),
    })
}
