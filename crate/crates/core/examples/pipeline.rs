//! Library walk-through: invent, select and evaluate on one domain.
//!
//!     cargo run --release --example pipeline -- tableclean 50

use predinv::domains::{by_name, generate_demos, Split};
use predinv::neuro::TrainConfig;
use predinv::pipeline::{evaluate_split, invent, pool_models, select};
use predinv::plan::PlannerConfig;
use predinv::propose::{LoopConfig, ScriptedProposer};
use predinv::select::SelectionConfig;

fn main() -> predinv::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "blocks".into());
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);
    let domain = by_name(&name)?;
    let demos = generate_demos(domain.as_ref(), n, 0)?;

    let replay = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("assets/replays/{name}.json"));
    let mut proposer = ScriptedProposer::from_file(&replay)?;
    let history = invent(domain.as_ref(), &demos, &mut proposer, &LoopConfig::default(), &TrainConfig::default())?;
    println!("{} fits, {} consistent candidates", history.fits, history.consistent_count());

    let (state, abs) = select(domain.as_ref(), &demos, pool_models(&history), &SelectionConfig::default())?;
    for step in state.log.iter().filter(|s| s.accepted) {
        println!("accepted {:<28} J = {}", step.candidate, step.j);
    }
    for op in &abs.operators {
        println!("{op}");
    }
    for split in [Split::Train, Split::Test] {
        let r = evaluate_split(domain.as_ref(), &abs, split, 20, 0, &PlannerConfig::default())?;
        println!("{split:?}: {:.0}% solved", 100.0 * r.success_rate);
    }
    Ok(())
}
