//! On-disk artifacts. Structured files are JSON (or JSON lines) carrying a schema
//! version; classifier weights are the only binary payloads. Output directories
//! are staged next to their final location and renamed into place when complete.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::neuro::Mlp;
use crate::plan::{Abstraction, Classifier, GaussianSampler, PredicateModel};
use crate::propose::History;
use crate::select::Operator;
use crate::types::*;

pub const SCHEMA_VERSION: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(|e| io_err(path, e))?))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        Error::Input(format!("{} does not exist", path.display()))
    } else {
        Error::Io(e)
    }
}

/// Write to a sibling temp file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: u32,
    kind: String,
    data: T,
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, data: &T) -> Result<()> {
    let env = Envelope { schema_version: SCHEMA_VERSION, kind: kind.to_string(), data };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn check_header(path: &Path, version: u32, kind: &str, want: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Input(format!("{}: schema version {version}, expected {SCHEMA_VERSION}", path.display())));
    }
    if kind != want {
        return Err(Error::Input(format!("{}: holds `{kind}`, expected `{want}`", path.display())));
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let env: Envelope<serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: not a versioned artifact: {e}", path.display())))?;
    check_header(path, env.schema_version, &env.kind, kind)?;
    serde_json::from_value(env.data).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

#[derive(Serialize, Deserialize)]
struct DemoHeader {
    schema_version: u32,
    kind: String,
    domain: String,
    count: usize,
}

/// Header line, then one demonstration per line.
pub fn write_demos(path: &Path, domain: &str, demos: &[Demonstration]) -> Result<()> {
    let header = DemoHeader { schema_version: SCHEMA_VERSION, kind: "demos".into(), domain: domain.into(), count: demos.len() };
    let mut text = serde_json::to_string(&header)?;
    text.push('\n');
    for d in demos {
        text.push_str(&serde_json::to_string(d)?);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// Returns the domain name and the demonstrations.
pub fn read_demos(path: &Path) -> Result<(String, Vec<Demonstration>)> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let first = lines.next().ok_or_else(|| Error::Input(format!("{} is empty", path.display())))??;
    let h: DemoHeader = serde_json::from_str(&first).map_err(|e| Error::Input(format!("{}: bad header: {e}", path.display())))?;
    check_header(path, h.schema_version, &h.kind, "demos")?;
    let mut demos = Vec::with_capacity(h.count);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Demonstration = serde_json::from_str(&line).map_err(|e| Error::Input(format!("{}:{}: {e}", path.display(), i + 2)))?;
        d.check_chaining()?;
        demos.push(d);
    }
    if demos.len() != h.count {
        return Err(Error::Input(format!("{}: header promises {} demos, found {}", path.display(), h.count, demos.len())));
    }
    Ok((h.domain, demos))
}

/// Reference to a weight blob inside an artifact directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobRef {
    pub file: String,
    pub sha256: String,
}

fn write_blob(dir: &Path, name: &str, mlp: &Mlp) -> Result<BlobRef> {
    std::fs::create_dir_all(dir.join("weights"))?;
    let file = format!("weights/{name}.bin");
    let bytes = mlp.to_bytes();
    write_atomic(&dir.join(&file), &bytes)?;
    Ok(BlobRef { file, sha256: sha256_hex(&bytes) })
}

fn read_blob(dir: &Path, r: &BlobRef) -> Result<Mlp> {
    let path = dir.join(&r.file);
    let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
    if sha256_hex(&bytes) != r.sha256 {
        return Err(Error::Input(format!("{}: checksum mismatch", path.display())));
    }
    Mlp::from_bytes(&bytes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassifierRef {
    Oracle,
    Derived,
    Mlp { weights: BlobRef },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub predicate: LiftedPredicate,
    pub classifier: ClassifierRef,
    pub effect: Option<EffectVector>,
}

fn save_models(dir: &Path, models: &[PredicateModel]) -> Result<Vec<ModelEntry>> {
    models
        .iter()
        .map(|m| {
            let classifier = match &m.classifier {
                Classifier::Oracle => ClassifierRef::Oracle,
                Classifier::Derived => ClassifierRef::Derived,
                Classifier::Mlp(mlp) => ClassifierRef::Mlp { weights: write_blob(dir, &m.predicate.name, mlp)? },
            };
            Ok(ModelEntry { predicate: m.predicate.clone(), classifier, effect: m.effect.clone() })
        })
        .collect()
}

fn load_models(dir: &Path, entries: Vec<ModelEntry>) -> Result<Vec<PredicateModel>> {
    entries
        .into_iter()
        .map(|e| {
            let classifier = match &e.classifier {
                ClassifierRef::Oracle => Classifier::Oracle,
                ClassifierRef::Derived => Classifier::Derived,
                ClassifierRef::Mlp { weights } => Classifier::Mlp(read_blob(dir, weights)?),
            };
            Ok(PredicateModel { predicate: e.predicate, classifier, effect: e.effect })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct PoolFile {
    domain: String,
    models: Vec<ModelEntry>,
}

/// `pool.json` with the consistent candidates and their weights, `history.json` with every round.
pub fn save_pool(dir: &Path, domain: &str, history: &History, pool: &[PredicateModel]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let models = save_models(dir, pool)?;
    write_json(&dir.join("pool.json"), "candidate-pool", &PoolFile { domain: domain.into(), models })?;
    write_json(&dir.join("history.json"), "proposal-history", history)
}

pub fn load_pool(dir: &Path) -> Result<(String, Vec<PredicateModel>)> {
    let f: PoolFile = read_json(&dir.join("pool.json"), "candidate-pool")?;
    Ok((f.domain, load_models(dir, f.models)?))
}

#[derive(Serialize, Deserialize)]
struct AbstractionFile {
    domain: String,
    predicates: Vec<ModelEntry>,
    operators: Vec<Operator>,
    samplers: Vec<GaussianSampler>,
}

pub fn save_abstraction(dir: &Path, abs: &Abstraction) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let predicates = save_models(dir, &abs.predicates)?;
    let file = AbstractionFile { domain: abs.domain.clone(), predicates, operators: abs.operators.clone(), samplers: abs.samplers.clone() };
    write_json(&dir.join("abstraction.json"), "abstraction", &file)
}

pub fn load_abstraction(dir: &Path) -> Result<Abstraction> {
    let f: AbstractionFile = read_json(&dir.join("abstraction.json"), "abstraction")?;
    let abs = Abstraction { domain: f.domain, predicates: load_models(dir, f.predicates)?, operators: f.operators, samplers: f.samplers };
    abs.validate()?;
    Ok(abs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub inputs: Vec<FileHash>,
}

impl Manifest {
    /// Inputs may be files or artifact directories; directories hash their files in name order,
    /// skipping manifest and timing files.
    /// Paths are recorded relative to each input's parent so reruns elsewhere match.
    pub fn new(command: &str, config: &impl Serialize, inputs: &[&Path]) -> Result<Self> {
        let mut hashed = Vec::new();
        for p in inputs {
            let root = p.parent().unwrap_or(Path::new(""));
            for f in files_under(p)? {
                let rel = f.strip_prefix(root).unwrap_or(&f);
                hashed.push(FileHash { path: rel.to_string_lossy().replace('\\', "/"), sha256: sha256_file(&f)? });
            }
        }
        Ok(Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: sha256_hex(serde_json::to_string(config)?.as_bytes()),
            inputs: hashed,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join("manifest.json"), "manifest", self)
    }
}

fn files_under(p: &Path) -> Result<Vec<PathBuf>> {
    if !p.is_dir() {
        return Ok(vec![p.to_path_buf()]);
    }
    let mut out = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    entries.sort();
    for e in entries {
        // Provenance and wall-clock files are not inputs.
        if e.file_name().is_some_and(|n| n == "manifest.json" || n == "timing.json") {
            continue;
        }
        out.extend(files_under(&e)?);
    }
    Ok(out)
}

/// A directory built under a temporary sibling name and moved into place by `commit`.
/// Dropping it uncommitted removes everything written so far.
pub struct StagedDir {
    target: PathBuf,
    staging: PathBuf,
    committed: bool,
}

impl StagedDir {
    pub fn new(target: &Path) -> Result<Self> {
        let name = target.file_name().ok_or_else(|| Error::Input(format!("{} is not a directory name", target.display())))?;
        let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        std::fs::create_dir_all(parent)?;
        let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
        if staging.exists() {
            std::fs::remove_dir_all(&staging)?;
        }
        std::fs::create_dir_all(&staging)?;
        Ok(Self { target: target.to_path_buf(), staging, committed: false })
    }

    pub fn path(&self) -> &Path {
        &self.staging
    }

    /// Replace any previous output with the staged one.
    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            std::fs::remove_dir_all(&self.target)?;
        }
        std::fs::rename(&self.staging, &self.target)?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for StagedDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = std::fs::remove_dir_all(&self.staging);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{generate_demos, tableclean_domain};

    #[test]
    fn demos_round_trip_and_reject_wrong_kind() {
        let d = tableclean_domain();
        let demos = generate_demos(d.as_ref(), 3, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("demos.jsonl");
        write_demos(&p, "tableclean", &demos).unwrap();
        let (name, back) = read_demos(&p).unwrap();
        assert_eq!(name, "tableclean");
        assert_eq!(back, demos);
        assert!(matches!(read_json::<serde_json::Value>(&p, "abstraction"), Err(Error::Input(_))));
    }

    #[test]
    fn blob_checksum_is_verified() {
        let dir = tempfile::tempdir().unwrap();
        let mlp = Mlp::zeros(vec![2, 3, 1]);
        let r = write_blob(dir.path(), "p", &mlp).unwrap();
        assert_eq!(read_blob(dir.path(), &r).unwrap(), mlp);
        std::fs::write(dir.path().join(&r.file), b"junk").unwrap();
        assert!(read_blob(dir.path(), &r).is_err());
    }

    #[test]
    fn uncommitted_stage_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out");
        {
            let s = StagedDir::new(&target).unwrap();
            std::fs::write(s.path().join("x"), b"1").unwrap();
        }
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        let s = StagedDir::new(&target).unwrap();
        std::fs::write(s.path().join("x"), b"1").unwrap();
        s.commit().unwrap();
        assert!(target.join("x").exists());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
