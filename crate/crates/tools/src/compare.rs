//! Lasso comparison split over worker threads.

use treedet_core::automata::{compare_on, enumerate_lassos, sample_lassos, check_same_alphabet, CompareReport};
use treedet_core::{Lasso, StreamAutomaton};

use crate::ToolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompareOptions {
    pub max_stem: usize,
    pub max_loop: usize,
    /// Number of sampled lassos; exhaustive enumeration when absent.
    pub sample: Option<usize>,
    pub seed: u64,
    pub jobs: usize,
}

const BATCH: usize = 256;

fn lassos(n_letters: usize, opts: &CompareOptions) -> Vec<Lasso> {
    match opts.sample {
        None => enumerate_lassos(n_letters, opts.max_stem, opts.max_loop),
        Some(count) => {
            let mut seen = std::collections::BTreeSet::new();
            (0..count.div_ceil(BATCH))
                .flat_map(|b| {
                    let k = BATCH.min(count - b * BATCH);
                    sample_lassos(n_letters, opts.max_stem, opts.max_loop, k, opts.seed, b as u64)
                })
                .filter(|w| seen.insert(w.clone()))
                .collect()
        }
    }
}

/// The report does not depend on `jobs`: workers take contiguous slices and
/// the disagreement with the least index wins.
pub fn compare(a: &StreamAutomaton, b: &StreamAutomaton, opts: &CompareOptions) -> Result<CompareReport, ToolError> {
    check_same_alphabet(a, b)?;
    let all = lassos(a.num_letters(), opts);
    let jobs = opts.jobs.max(1);
    let chunk = all.len().div_ceil(jobs).max(1);
    let results: Vec<Result<CompareReport, _>> = std::thread::scope(|scope| {
        let handles: Vec<_> = all.chunks(chunk).map(|part| scope.spawn(move || compare_on(a, b, part))).collect();
        handles.into_iter().map(|h| h.join().expect("compare worker panicked")).collect()
    });
    let mut offset = 0;
    for (r, part) in results.into_iter().zip(all.chunks(chunk)) {
        if let CompareReport::Disagree { lasso, left, right, tested } = r? {
            return Ok(CompareReport::Disagree {
                lasso,
                left,
                right,
                tested: offset + tested,
            });
        }
        offset += part.len();
    }
    Ok(CompareReport::Agree { tested: all.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use treedet_core::determinize::det_buchi;
    use treedet_core::testkit::{random_nba, rng};

    #[test]
    fn jobs_do_not_change_reports() {
        let mut r = rng(7);
        for _ in 0..30 {
            let a = random_nba(&mut r, 3, 2, 2);
            let other = random_nba(&mut r, 3, 2, 2);
            let d = det_buchi(&a).unwrap().automaton;
            for b in [&d, &other] {
                if b.num_letters() != a.num_letters() {
                    continue;
                }
                for sample in [None, Some(300)] {
                    let opts = |jobs| CompareOptions {
                        max_stem: 2,
                        max_loop: 3,
                        sample,
                        seed: 3,
                        jobs,
                    };
                    let one = compare(&a, b, &opts(1)).unwrap();
                    assert_eq!(compare(&a, b, &opts(4)).unwrap(), one);
                    assert_eq!(compare(&a, b, &opts(13)).unwrap(), one);
                }
            }
            assert!(compare(&a, &d, &CompareOptions { max_stem: 2, max_loop: 3, sample: None, seed: 0, jobs: 3 })
                .unwrap()
                .agrees());
        }
    }
}
