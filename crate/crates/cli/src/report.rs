//! Evaluation report and timing records.

use anyhow::Result;
use predinv::domains::Split;
use predinv::pipeline::{SplitReport, TaskOutcome};
use predinv::select::{Evaluation, StepRecord};
use serde::{Deserialize, Serialize};

/// Wall-clock seconds per stage. Kept out of the report so reports stay reproducible.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub predinv: f64,
    pub predsel: f64,
    pub skill: f64,
    pub total: f64,
}

impl Timing {
    pub fn summed(mut self) -> Self {
        self.total = self.predinv + self.predsel + self.skill;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub selected: Vec<String>,
    pub initial: Evaluation,
    pub best: Evaluation,
    pub accepted_trace: Vec<f64>,
    pub log: Vec<StepRecord>,
    /// Classifier trainings during invention.
    pub fits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub domain: String,
    pub split: Split,
    /// Mean over seeds.
    pub success_rate: f64,
    pub per_seed: Vec<SplitReport>,
    pub fits: usize,
    pub selected: Vec<String>,
    pub selection_log: Vec<StepRecord>,
}

impl MetricsReport {
    pub fn new(domain: &str, split: Split, per_seed: Vec<SplitReport>, sel: &SelectionSummary) -> Self {
        let success_rate = if per_seed.is_empty() { 0.0 } else { per_seed.iter().map(|r| r.success_rate).sum::<f64>() / per_seed.len() as f64 };
        Self {
            domain: domain.into(),
            split,
            success_rate,
            per_seed,
            fits: sel.fits,
            selected: sel.selected.clone(),
            selection_log: sel.log.clone(),
        }
    }
}

/// Run `f(0..n)` on `jobs` threads; results come back in index order.
pub fn run_parallel<F>(n: usize, jobs: usize, f: F) -> Result<Vec<TaskOutcome>>
where
    F: Fn(usize) -> predinv::Result<TaskOutcome> + Sync,
{
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut results: Vec<Option<predinv::Result<TaskOutcome>>> = (0..n).map(|_| None).collect();
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|s| {
        for _ in 0..jobs.min(n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    Ok(results.into_iter().map(|r| r.expect("every index is visited")).collect::<predinv::Result<Vec<_>>>()?)
}
