use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AttributeKey, BoundKind, Direction, ParetoFront, ReleaseProblem};
use crate::objectives::Evaluator;
use crate::pareto::PointArchive;
use crate::selection::Selection;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyConfig {
    /// Attribute whose gain is the ratio numerator. Defaults to the first
    /// maximize objective.
    pub gain: Option<AttributeKey>,
    /// Attribute whose increase is the ratio denominator. Defaults to the
    /// first upper-bounded attribute, else the first minimize objective.
    pub cost: Option<AttributeKey>,
    /// Also run one construction seeded with each requirement's closure.
    pub seeded: bool,
}

fn pick(problem: &ReleaseProblem, config: &GreedyConfig) -> Result<(AttributeKey, AttributeKey)> {
    let gain = config.gain.clone().or_else(|| {
        problem
            .objectives
            .iter()
            .find(|o| o.direction == Direction::Maximize)
            .map(|o| o.attribute.clone())
    });
    let cost = config.cost.clone().or_else(|| {
        problem
            .bounds
            .iter()
            .find(|b| b.kind == BoundKind::Upper)
            .map(|b| b.attribute.clone())
            .or_else(|| {
                problem
                    .objectives
                    .iter()
                    .find(|o| o.direction == Direction::Minimize)
                    .map(|o| o.attribute.clone())
            })
    });
    match (gain, cost) {
        (Some(g), Some(c)) => Ok((g, c)),
        _ => Err(Error::SolverConfig {
            solver: "greedy",
            what: "a maximize objective and a minimize objective or upper bound for its ratio".into(),
        }),
    }
}

/// Ranks a step: steps that gain without costing come first, then by ratio.
fn score(gain: f64, cost: f64) -> (u8, f64) {
    if cost <= 0.0 {
        (1, gain - cost)
    } else {
        (0, gain / cost)
    }
}

fn construct(ev: &Evaluator<'_>, start: Selection, gi: usize, ci: usize, archive: &mut PointArchive) {
    let mut current = start;
    let mut values = ev.evaluate(&current);
    if !ev.upper_bounds_hold(&values) {
        return;
    }
    loop {
        if ev.bounds_hold(&values) {
            archive.insert(current.clone(), ev.point(&values), values.clone());
        }
        let mut best: Option<((u8, f64), Selection, Vec<f64>)> = None;
        for i in 0..ev.len() {
            if current.contains(i) {
                continue;
            }
            let next = ev.add_with_closure(&current, i);
            let next_values = ev.evaluate(&next);
            if !ev.upper_bounds_hold(&next_values) {
                continue;
            }
            let s = score(next_values[gi] - values[gi], next_values[ci] - values[ci]);
            // Strictly better only, so ties keep the earliest requirement.
            if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
                best = Some((s, next, next_values));
            }
        }
        match best {
            Some((_, next, next_values)) => {
                current = next;
                values = next_values;
            }
            None => return,
        }
    }
}

/// Marginal-ratio construction: repeatedly adds the requirement (with its
/// missing prerequisites) that buys the most gain per unit of cost while the
/// upper bounds hold, archiving every intermediate feasible set.
pub fn solve_greedy(problem: &ReleaseProblem, config: &GreedyConfig) -> Result<ParetoFront> {
    let ev = Evaluator::new(problem)?;
    let (gain, cost) = pick(problem, config)?;
    let gi = ev.attribute_index(&gain).ok_or_else(|| Error::UnknownAttribute(gain.to_string()))?;
    let ci = ev.attribute_index(&cost).ok_or_else(|| Error::UnknownAttribute(cost.to_string()))?;

    let mut archive = PointArchive::new();
    let empty = Selection::empty(ev.len());
    construct(&ev, empty.clone(), gi, ci, &mut archive);
    if config.seeded {
        for i in 0..ev.len() {
            construct(&ev, ev.add_with_closure(&empty, i), gi, ci, &mut archive);
        }
    }
    Ok(archive.into_front(&ev))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundSpec, InteractionSet, ObjectiveSpec, ProblemConfig, RequirementCatalog, RequirementRecord};
    use crate::preprocess::build_problem;

    #[test]
    fn path_follows_ratio_order() {
        // ratios: a 4, b 1, c 2 -> path {}, {a}, {a,c}, {a,b,c}
        let catalog = RequirementCatalog {
            requirements: vec![
                RequirementRecord::new("a").scalar("value", 4.0).scalar("effort", 1.0),
                RequirementRecord::new("b").scalar("value", 1.0).scalar("effort", 1.0),
                RequirementRecord::new("c").scalar("value", 4.0).scalar("effort", 2.0),
            ],
            interactions: InteractionSet::default(),
            ..Default::default()
        };
        let config = ProblemConfig::new(
            vec![ObjectiveSpec::maximize("value"), ObjectiveSpec::minimize("effort")],
            vec![BoundSpec::upper("effort", 10.0)],
        );
        let p = &build_problem(&catalog, &config).unwrap()[0];
        let front = solve_greedy(p, &GreedyConfig::default()).unwrap();
        let sets: Vec<Vec<&str>> = front
            .iter()
            .map(|s| s.requirements.iter().map(|r| r.as_str()).collect())
            .collect();
        assert_eq!(sets, vec![vec![], vec!["a"], vec!["a", "c"], vec!["a", "b", "c"]]);
    }
}
