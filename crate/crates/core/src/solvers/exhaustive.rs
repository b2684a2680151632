use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ParetoFront, ReleaseProblem};
use crate::objectives::Evaluator;
use crate::pareto::PointArchive;
use crate::selection::Selection;

pub const DEFAULT_CAP: usize = 25;

/// Enumerates every subset and keeps the feasible non-dominated ones.
pub fn solve_exhaustive(problem: &ReleaseProblem, cap: usize) -> Result<ParetoFront> {
    let n = problem.len();
    let cap = cap.min(63);
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    let ev = Evaluator::new(problem)?;

    // The top bits pick a chunk; each chunk scans the low bits with a private archive.
    let high_bits = n.min(10);
    let low_bits = n - high_bits;
    let archive = (0u64..1 << high_bits)
        .into_par_iter()
        .map(|high| {
            let mut archive = PointArchive::new();
            for low in 0u64..1 << low_bits {
                let mask = high << low_bits | low;
                if !ev.implications_hold_mask(mask) {
                    continue;
                }
                let values = ev.evaluate_mask(mask);
                if ev.bounds_hold(&values) {
                    archive.insert(Selection::from_mask(n, mask), ev.point(&values), values);
                }
            }
            archive
        })
        .reduce(PointArchive::new, |mut a, b| {
            a.absorb(b);
            a
        });
    Ok(archive.into_front(&ev))
}
