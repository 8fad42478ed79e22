//! Offline proposer replaying recorded answers.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EffectRequest, Proposer};
use crate::error::{Error, Result};

/// Key used for calls without a focus predicate.
pub const ANY_FOCUS: &str = "*";

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Replay {
    pub completion: String,
    #[serde(default)]
    pub rounds: BTreeMap<String, Vec<String>>,
}

pub struct ScriptedProposer {
    completion: String,
    rounds: BTreeMap<String, VecDeque<String>>,
}

impl ScriptedProposer {
    pub fn new(replay: Replay) -> Self {
        Self { completion: replay.completion, rounds: replay.rounds.into_iter().map(|(k, v)| (k, v.into())).collect() }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read replay file {}: {e}", path.display())))?;
        Ok(Self::new(serde_json::from_str(&text)?))
    }
}

impl Proposer for ScriptedProposer {
    fn complete_partial_domain(&mut self, _prompt: &str) -> Result<String> {
        Ok(self.completion.clone())
    }

    fn propose_effects(&mut self, req: &EffectRequest) -> Result<String> {
        let key = req.focus.map_or(ANY_FOCUS, |p| p.name.as_str());
        Ok(self.rounds.get_mut(key).and_then(|q| q.pop_front()).unwrap_or_default())
    }
}
