//! Run configuration, read from TOML. Every section is optional.

use std::path::Path;

use anyhow::Result;
use predinv::neuro::TrainConfig;
use predinv::plan::PlannerConfig;
use predinv::propose::{Backend, LoopConfig};
use predinv::select::SelectionConfig;
use predinv::Error;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub propose: LoopConfig,
    pub selection: SelectionConfig,
    pub planner: PlannerConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.train.validate()?;
        cfg.propose.validate()?;
        Ok(cfg)
    }

    /// Files named by the config must exist before any work starts.
    pub fn check_files(&self) -> Result<()> {
        if let Backend::Scripted { replay } = &self.propose.backend {
            if !replay.is_file() {
                return Err(Error::Input(format!("replay file {} does not exist", replay.display())).into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[train]\nepochs = 5\nlearning_rat = 0.1\n").unwrap();
        assert!(RunConfig::load(Some(&p)).is_err());
        std::fs::write(&p, "[train]\nepochs = 5\n[propose.backend]\nkind = \"enumerate\"\n").unwrap();
        let c = RunConfig::load(Some(&p)).unwrap();
        assert_eq!(c.train.epochs, 5);
        assert_eq!(c.propose.backend, Backend::Enumerate);
    }

    #[test]
    fn readme_example_parses() {
        let readme = include_str!("../../../README.md");
        let toml_block = readme.split("```toml\n").nth(1).and_then(|r| r.split("```").next()).unwrap();
        let c: RunConfig = toml::from_str(toml_block).unwrap();
        assert!(matches!(c.propose.backend, Backend::Http(ref h) if h.model == "default"));
        assert_eq!(c.planner.max_replans, 5);
    }
}
