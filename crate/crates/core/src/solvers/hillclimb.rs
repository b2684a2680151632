use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParetoFront, ReleaseProblem};
use crate::objectives::Evaluator;
use crate::pareto::{dominates_min, PointArchive};
use crate::selection::Selection;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HillClimbConfig {
    /// Random starts in addition to the empty start.
    pub restarts: usize,
    /// Moves per start.
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for HillClimbConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 1_000,
            seed: 42,
        }
    }
}

/// Random start: requirements added in shuffled order (with their closures)
/// while the upper bounds still hold.
fn random_start(ev: &Evaluator<'_>, rng: &mut ChaCha8Rng) -> Selection {
    let mut order: Vec<usize> = (0..ev.len()).collect();
    order.shuffle(rng);
    let mut current = Selection::empty(ev.len());
    for i in order {
        if current.contains(i) {
            continue;
        }
        let next = ev.add_with_closure(&current, i);
        if ev.upper_bounds_hold(&ev.evaluate(&next)) {
            current = next;
        }
    }
    current
}

fn climb(ev: &Evaluator<'_>, start: Selection, max_iters: usize, rng: &mut ChaCha8Rng) -> PointArchive {
    let mut archive = PointArchive::new();
    let mut visited: HashSet<Selection> = HashSet::new();
    let mut current = start;
    let mut values = ev.evaluate(&current);
    let mut feasible = ev.bounds_hold(&values);
    visited.insert(current.clone());
    if feasible {
        archive.insert(current.clone(), ev.point(&values), values.clone());
    }

    let mut order: Vec<usize> = (0..ev.len()).collect();
    for _ in 0..max_iters {
        order.shuffle(rng);
        let here = ev.point(&values);
        let mut moved = None;
        for &i in &order {
            let next = if current.contains(i) {
                ev.remove_with_cascade(&current, i)
            } else {
                ev.add_with_closure(&current, i)
            };
            if visited.contains(&next) {
                continue;
            }
            let next_values = ev.evaluate(&next);
            if !ev.bounds_hold(&next_values) {
                continue;
            }
            let point = ev.point(&next_values);
            archive.insert(next.clone(), point.clone(), next_values.clone());
            if !feasible || !dominates_min(&here, &point) {
                moved = Some((next, next_values));
                break;
            }
        }
        let Some((next, next_values)) = moved else { break };
        visited.insert(next.clone());
        current = next;
        values = next_values;
        feasible = true;
    }
    archive
}

/// Multi-start local search over add-with-closure / remove-with-cascade moves.
/// Start 0 is the empty set; start `k` draws from its own RNG stream, so the
/// front only depends on the seed.
pub fn solve_hillclimb(problem: &ReleaseProblem, config: &HillClimbConfig) -> Result<ParetoFront> {
    if config.max_iters == 0 {
        return Err(Error::SolverConfig {
            solver: "hillclimb",
            what: "max_iters of at least 1".into(),
        });
    }
    let ev = Evaluator::new(problem)?;
    let archive = (0..=config.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let start = if k == 0 {
                Selection::empty(ev.len())
            } else {
                random_start(&ev, &mut rng)
            };
            climb(&ev, start, config.max_iters, &mut rng)
        })
        .reduce(PointArchive::new, |mut a, b| {
            a.absorb(b);
            a
        });
    Ok(archive.into_front(&ev))
}
