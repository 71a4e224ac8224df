//! Batch evaluation over a bounded worker pool.

use std::collections::{BTreeMap, HashMap};
use std::thread;

use crossbeam_channel::bounded;

use crate::attribution::{CompletionSample, ContextAnalysis, SampleVerdict};
use crate::dataset::Problem;
use crate::pyast::SourceText;

#[derive(Debug, Default)]
pub struct EvalRun {
    /// Sorted by (problem_id, sample_index).
    pub verdicts: Vec<SampleVerdict>,
    /// Completions whose problem id is unknown.
    pub orphans: Vec<(String, u32)>,
}

/// Evaluates every sample against its problem's context with `jobs`
/// workers. The result does not depend on `jobs`.
pub fn evaluate_all(problems: &[Problem], samples: Vec<CompletionSample>, jobs: usize) -> EvalRun {
    let by_id: HashMap<&str, &Problem> = problems.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut groups: BTreeMap<String, Vec<CompletionSample>> = BTreeMap::new();
    let mut orphans = Vec::new();
    for s in samples {
        if by_id.contains_key(s.problem_id.as_str()) {
            groups.entry(s.problem_id.clone()).or_default().push(s);
        } else {
            log::warn!(
                "completion for unknown problem {:?} (sample {}) skipped",
                s.problem_id,
                s.sample_index
            );
            orphans.push((s.problem_id, s.sample_index));
        }
    }

    let jobs = jobs.max(1);
    let mut verdicts = if jobs == 1 {
        groups
            .into_iter()
            .flat_map(|(id, samples)| evaluate_group(by_id[id.as_str()], samples))
            .collect()
    } else {
        let (work_tx, work_rx) = bounded::<(&Problem, Vec<CompletionSample>)>(jobs * 4);
        let (out_tx, out_rx) = bounded::<Vec<SampleVerdict>>(jobs * 4);
        thread::scope(|scope| {
            for _ in 0..jobs {
                let work_rx = work_rx.clone();
                let out_tx = out_tx.clone();
                scope.spawn(move || {
                    for (problem, samples) in work_rx {
                        if out_tx.send(evaluate_group(problem, samples)).is_err() {
                            break;
                        }
                    }
                });
            }
            drop(out_tx);
            scope.spawn(move || {
                for (id, samples) in groups {
                    if work_tx.send((by_id[id.as_str()], samples)).is_err() {
                        break;
                    }
                }
            });
            out_rx.iter().flatten().collect::<Vec<_>>()
        })
    };
    verdicts.sort_by(|a, b| {
        (a.problem_id.as_str(), a.sample_index).cmp(&(b.problem_id.as_str(), b.sample_index))
    });
    EvalRun { verdicts, orphans }
}

fn evaluate_group(problem: &Problem, samples: Vec<CompletionSample>) -> Vec<SampleVerdict> {
    let ctx = ContextAnalysis::new(&SourceText::new(problem.context.clone()));
    samples
        .into_iter()
        .map(|s| SampleVerdict {
            outcome: ctx.evaluate(&s.completion),
            problem_id: s.problem_id,
            sample_index: s.sample_index,
        })
        .collect()
}
