//! Sweep rows and the reference solution on a pool of worker threads.
//!
//! Every job is an independent, single-threaded computation. Workers take
//! the next job index from a shared counter and results are stored by
//! index, so the assembled table does not depend on scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use kslab_core::limit::{
    assemble_table, reference_solution, run_sweep_row, ConvergenceTable, RowOutcome, SweepConfig,
};
use kslab_core::solver::Trajectory;
use kslab_core::Result;

/// Everything a sweep produced.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub outcomes: Vec<RowOutcome>,
    pub reference: Option<Trajectory>,
    /// Wall-clock seconds per row.
    pub runtimes: Vec<f64>,
    pub table: ConvergenceTable,
}

enum JobResult {
    Row(Result<RowOutcome>, f64),
    Reference(Result<Option<Trajectory>>),
}

/// Runs the sweep with `jobs` workers (at least one).
pub fn run_parallel(cfg: &SweepConfig, jobs: usize) -> Result<SweepRun> {
    cfg.validate()?;
    let rows = cfg.eps_sequence.len();
    // the reference goes last: with few workers the long KS rows start first
    let total = rows + 1;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<JobResult>>> = Mutex::new((0..total).map(|_| None).collect());
    let workers = jobs.clamp(1, total);
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let job = next.fetch_add(1, Ordering::Relaxed);
                if job >= total {
                    break;
                }
                let result = if job < rows {
                    let start = Instant::now();
                    let out = run_sweep_row(cfg, job);
                    JobResult::Row(out, start.elapsed().as_secs_f64())
                } else {
                    JobResult::Reference(reference_solution(cfg))
                };
                slots.lock().unwrap_or_else(|e| e.into_inner())[job] = Some(result);
            });
        }
    });
    let slots = slots.into_inner().unwrap_or_else(|e| e.into_inner());
    let mut outcomes = Vec::with_capacity(rows);
    let mut runtimes = Vec::with_capacity(rows);
    let mut reference = None;
    for slot in slots.into_iter().flatten() {
        match slot {
            JobResult::Row(out, secs) => {
                outcomes.push(out?);
                runtimes.push(secs);
            }
            JobResult::Reference(r) => reference = r?,
        }
    }
    let table = assemble_table(cfg, outcomes.clone(), reference.as_ref(), Some(&runtimes));
    Ok(SweepRun {
        outcomes,
        reference,
        runtimes,
        table,
    })
}
