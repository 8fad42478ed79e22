//! Command-line front end: demo generation, invention, selection, planning and evaluation.

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use predinv::artifact::{self, Manifest, StagedDir};
use predinv::domains::{by_name, generate_demos, Domain, Split};
use predinv::pipeline::{self, sample_eval_task};
use predinv::plan::bilevel_plan;
use predinv::propose::{make_proposer, Backend};
use predinv::select::{build_abstraction, hill_climb, known_models, LabelCache};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use config::RunConfig;
use report::{MetricsReport, SelectionSummary, Timing};

#[derive(Parser)]
#[command(name = "predinv", version, about = "Learn symbolic world models from demonstrations and plan with them")]
struct Cli {
    /// More log output; repeat for debug messages.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProposerKind {
    Scripted,
    Enumerate,
    Http,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate oracle demonstrations.
    GenDemos {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 50)]
        num: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propose and train candidate predicates.
    Invent {
        #[arg(long)]
        demos: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the backend named in the config.
        #[arg(long, value_enum)]
        proposer: Option<ProposerKind>,
        /// Replay file for the scripted backend.
        #[arg(long)]
        replay: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select predicates and build the abstraction.
    Select {
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        demos: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Skip negated and quantified forms.
        #[arg(long)]
        no_derived: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one sampled task and write its execution trace.
    Plan {
        #[arg(long)]
        abstraction: PathBuf,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long, default_value_t = 0)]
        task_seed: u64,
        /// Index of the task within the seed's sequence.
        #[arg(long, default_value_t = 0)]
        task_index: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Success rates over sampled tasks.
    Eval {
        #[arg(long)]
        abstraction: PathBuf,
        #[arg(long)]
        domain: Option<String>,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long, default_value_t = 50)]
        num: usize,
        /// Comma-separated task seeds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory for report.json and timing.json.
        #[arg(long)]
        report: PathBuf,
    },
}

fn domain_for(abs_domain: &str, flag: Option<&str>) -> Result<std::sync::Arc<dyn Domain>> {
    if let Some(f) = flag {
        if f != abs_domain {
            return Err(predinv::Error::Input(format!("abstraction was learned on `{abs_domain}`, not `{f}`")).into());
        }
    }
    Ok(by_name(abs_domain)?)
}

fn gen_demos(domain: &str, num: usize, seed: u64, out: &Path) -> Result<()> {
    let d = by_name(domain)?;
    let demos = generate_demos(d.as_ref(), num, seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    artifact::write_demos(out, domain, &demos)?;
    log::info!("wrote {num} {domain} demonstrations to {}", out.display());
    Ok(())
}

fn invent(demos_path: &Path, config: Option<&Path>, proposer: Option<ProposerKind>, replay: Option<PathBuf>, out: &Path) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    match (proposer, replay) {
        (Some(ProposerKind::Scripted), Some(r)) | (None, Some(r)) => cfg.propose.backend = Backend::Scripted { replay: r },
        (Some(ProposerKind::Scripted), None) if !matches!(cfg.propose.backend, Backend::Scripted { .. }) => {
            bail!(predinv::Error::Input("the scripted proposer needs --replay".into()))
        }
        (Some(ProposerKind::Enumerate), _) => cfg.propose.backend = Backend::Enumerate,
        (Some(ProposerKind::Http), _) if !matches!(cfg.propose.backend, Backend::Http(_)) => {
            cfg.propose.backend = Backend::Http(Default::default())
        }
        _ => {}
    }
    cfg.check_files()?;
    let (domain_name, demos) = artifact::read_demos(demos_path)?;
    let domain = by_name(&domain_name)?;
    let stage = StagedDir::new(out)?;
    let known: Vec<_> = domain.goal_predicates().into_iter().chain(domain.static_predicates()).collect();
    let mut p = make_proposer(&cfg.propose, domain.signature(), &known, Some(stage.path()))?;
    let t = Instant::now();
    let history = pipeline::invent(domain.as_ref(), &demos, p.as_mut(), &cfg.propose, &cfg.train)?;
    let elapsed = t.elapsed().as_secs_f64();
    let pool = pipeline::pool_models(&history);
    log::info!("{} consistent candidates after {} fits", pool.len(), history.fits);
    artifact::save_pool(stage.path(), &domain_name, &history, &pool)?;
    Manifest::new("invent", &cfg, &[demos_path])?.write(stage.path())?;
    artifact::write_json(&stage.path().join("timing.json"), "timing", &Timing { predinv: elapsed, ..Default::default() })?;
    stage.commit()?;
    Ok(())
}

fn select(candidates: &Path, demos_path: &Path, config: Option<&Path>, no_derived: bool, out: &Path) -> Result<()> {
    let mut cfg = RunConfig::load(config)?;
    if no_derived {
        cfg.selection.derived_forms = false;
    }
    let (pool_domain, pool) = artifact::load_pool(candidates)?;
    let (domain_name, demos) = artifact::read_demos(demos_path)?;
    if pool_domain != domain_name {
        bail!(predinv::Error::Input(format!("candidates are for `{pool_domain}` but the demos are `{domain_name}`")));
    }
    let history: predinv::propose::History = artifact::read_json(&candidates.join("history.json"), "proposal-history")?;
    let invent_timing: Timing = artifact::read_json(&candidates.join("timing.json"), "timing").unwrap_or_default();
    let domain = by_name(&domain_name)?;
    let stage = StagedDir::new(out)?;
    let t = Instant::now();
    let mut labels = LabelCache::new();
    let known = known_models(domain.as_ref(), &demos, &mut labels)?;
    let state = hill_climb(&known, pool, &demos, domain.as_ref(), &cfg.selection, &mut labels)?;
    let predsel = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let abs = build_abstraction(domain.as_ref(), &known, &state.selected, &demos, &labels)?;
    let skill = t.elapsed().as_secs_f64();
    artifact::save_abstraction(stage.path(), &abs)?;
    let summary = SelectionSummary {
        selected: state.selected.iter().map(|m| m.predicate.name.clone()).collect(),
        initial: state.initial.clone(),
        best: state.best.clone(),
        accepted_trace: state.accepted_trace(),
        log: state.log.clone(),
        fits: history.fits,
    };
    artifact::write_json(&stage.path().join("selection.json"), "selection", &summary)?;
    Manifest::new("select", &cfg, &[candidates, demos_path])?.write(stage.path())?;
    let timing = Timing { predinv: invent_timing.predinv, predsel, skill, total: 0.0 }.summed();
    artifact::write_json(&stage.path().join("timing.json"), "timing", &timing)?;
    stage.commit()?;
    log::info!("selected {:?}", summary.selected);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn plan(abstraction: &Path, domain: Option<&str>, split: Split, seed: u64, index: usize, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let abs = artifact::load_abstraction(abstraction)?;
    let d = domain_for(&abs.domain, domain)?;
    let task = sample_eval_task(d.as_ref(), split, seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index as u64 ^ 0xdead_beef);
    let outcome = bilevel_plan(&task, &abs, d.as_ref(), &cfg.planner, &mut rng, None)?;
    let header = serde_json::json!({
        "schema_version": artifact::SCHEMA_VERSION,
        "kind": "plan-trace",
        "domain": abs.domain,
        "success": outcome.success,
        "failure": outcome.failure,
        "replans": outcome.replans,
        "skeleton": outcome.initial_skeleton,
    });
    let mut text = header.to_string();
    text.push('\n');
    for step in &outcome.trace {
        text.push_str(&serde_json::to_string(step)?);
        text.push('\n');
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    artifact::write_atomic(out, text.as_bytes())?;
    println!("{}", if outcome.success { "solved".to_string() } else { format!("failed: {:?}", outcome.failure.unwrap()) });
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn eval(abstraction: &Path, domain: Option<&str>, split: Split, num: usize, seeds: &[u64], config: Option<&Path>, jobs: usize, out: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let abs = artifact::load_abstraction(abstraction)?;
    let d = domain_for(&abs.domain, domain)?;
    let summary: SelectionSummary = artifact::read_json(&abstraction.join("selection.json"), "selection")?;
    let timing: Timing = artifact::read_json(&abstraction.join("timing.json"), "timing").unwrap_or_default();
    let stage = StagedDir::new(out)?;
    let mut splits = Vec::new();
    for &seed in seeds {
        let tasks = report::run_parallel(num, jobs.max(1), |i| pipeline::evaluate_task(d.as_ref(), &abs, split, seed, i, &cfg.planner))?;
        let r = pipeline::split_report(split, seed, tasks);
        println!("{} {:?} seed {seed}: {:.1}% solved", abs.domain, split, 100.0 * r.success_rate);
        splits.push(r);
    }
    let report = MetricsReport::new(&abs.domain, split, splits, &summary);
    artifact::write_json(&stage.path().join("report.json"), "metrics-report", &report)?;
    artifact::write_json(&stage.path().join("timing.json"), "timing", &timing.summed())?;
    Manifest::new("eval", &cfg, &[abstraction])?.write(stage.path())?;
    stage.commit()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::GenDemos { domain, num, seed, out } => gen_demos(&domain, num, seed, &out),
        Cmd::Invent { demos, config, proposer, replay, out } => invent(&demos, config.as_deref(), proposer, replay, &out),
        Cmd::Select { candidates, demos, config, no_derived, out } => select(&candidates, &demos, config.as_deref(), no_derived, &out),
        Cmd::Plan { abstraction, domain, split, task_seed, task_index, config, out } => {
            plan(&abstraction, domain.as_deref(), split, task_seed, task_index, config.as_deref(), &out)
        }
        Cmd::Eval { abstraction, domain, split, num, seeds, config, jobs, report } => {
            eval(&abstraction, domain.as_deref(), split, num, &seeds, config.as_deref(), jobs, &report)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli).context("predinv") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let user = e.chain().any(|c| c.downcast_ref::<predinv::Error>().is_some_and(|pe| pe.is_user_error()));
            eprintln!("error: {:#}", e);
            ExitCode::from(if user { 1 } else { 2 })
        }
    }
}
