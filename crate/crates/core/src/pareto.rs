//! Dominance, feasibility and the non-dominated archive.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::model::{
    BoundKind, Direction, ObjectiveSpec, ObjectiveVector, ParetoFront, ReleaseProblem, RequirementId,
    Solution,
};
use crate::objectives::Evaluator;
use crate::selection::Selection;

/// Minimize-space dominance: `a <= b` everywhere and `a < b` somewhere.
pub fn dominates_min(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Dominance over objective vectors, honoring each objective's direction.
/// Objectives missing from either vector count as 0.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector, objectives: &[ObjectiveSpec]) -> bool {
    let point = |v: &ObjectiveVector| -> Vec<f64> {
        objectives
            .iter()
            .map(|o| {
                let x = v.get(&o.attribute).copied().unwrap_or(0.0);
                match o.direction {
                    Direction::Maximize => -x,
                    Direction::Minimize => x,
                }
            })
            .collect()
    };
    dominates_min(&point(a), &point(b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundViolation {
    pub attribute: String,
    pub kind: BoundKind,
    pub bound: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// (prerequisite, dependent) pairs whose dependent is selected alone.
    pub missing_prerequisites: Vec<(RequirementId, RequirementId)>,
    pub bound_violations: Vec<BoundViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.missing_prerequisites.is_empty() && self.bound_violations.is_empty()
    }
}

/// Checks implications among selected members (mandatory requirements are
/// outside the problem and always present) and every bound on adjusted totals.
pub fn is_feasible(problem: &ReleaseProblem, selection: &Selection) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    for &(p, d) in &problem.implies {
        if selection.contains(d) && !selection.contains(p) {
            report
                .missing_prerequisites
                .push((problem.requirements[p].id.clone(), problem.requirements[d].id.clone()));
        }
    }
    let ev = Evaluator::new(problem).expect("prepared problems carry every tracked attribute");
    let values = ev.evaluate(selection);
    for b in &problem.bounds {
        let i = ev.attribute_index(&b.attribute).expect("bound attributes are tracked");
        if !b.holds(values[i]) {
            report.bound_violations.push(BoundViolation {
                attribute: b.attribute.to_string(),
                kind: b.kind,
                bound: b.value,
                value: values[i],
            });
        }
    }
    report
}

/// Inserts `s` into `front` unless some member dominates it or has the same
/// requirement set. Members dominated by `s` are evicted. Returns whether `s`
/// was accepted.
pub fn archive_insert(front: &mut ParetoFront, s: Solution, objectives: &[ObjectiveSpec]) -> bool {
    let key = s.key();
    for m in &front.solutions {
        if m.key() == key || dominates(&m.values, &s.values, objectives) {
            return false;
        }
    }
    front
        .solutions
        .retain(|m| !dominates(&s.values, &m.values, objectives));
    front.solutions.push(s);
    true
}

/// Non-dominated union of `fronts`, canonically ordered.
pub fn merge_fronts(fronts: impl IntoIterator<Item = ParetoFront>, objectives: &[ObjectiveSpec]) -> ParetoFront {
    let mut out = ParetoFront::new();
    for f in fronts {
        for s in f {
            archive_insert(&mut out, s, objectives);
        }
    }
    out.canonicalize();
    out
}

/// Archive used inside solvers: minimize-space points keyed by selection.
#[derive(Clone, Debug, Default)]
pub struct PointArchive {
    entries: Vec<(Selection, Vec<f64>, Vec<f64>)>,
    keys: HashSet<Selection>,
}

impl PointArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `point` is the minimize-space objective vector, `values` the full
    /// attribute vector carried along for output.
    pub fn insert(&mut self, selection: Selection, point: Vec<f64>, values: Vec<f64>) -> bool {
        if self.keys.contains(&selection) || self.entries.iter().any(|(_, p, _)| dominates_min(p, &point)) {
            return false;
        }
        let keys = &mut self.keys;
        self.entries.retain(|(s, p, _)| {
            let keep = !dominates_min(&point, p);
            if !keep {
                keys.remove(s);
            }
            keep
        });
        self.keys.insert(selection.clone());
        self.entries.push((selection, point, values));
        true
    }

    pub fn absorb(&mut self, other: PointArchive) {
        for (s, p, v) in other.entries {
            self.insert(s, p, v);
        }
    }

    pub fn into_front(self, ev: &Evaluator<'_>) -> ParetoFront {
        let mut front = ParetoFront {
            solutions: self
                .entries
                .iter()
                .map(|(s, _, v)| ev.solution(s, v))
                .collect(),
        };
        front.canonicalize();
        front
    }

    pub fn selections(&self) -> BTreeSet<&Selection> {
        self.entries.iter().map(|(s, _, _)| s).collect()
    }
}
