//! Set-level attribute totals with value-interaction adjustment.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    AttributeKey, BoundKind, Direction, ObjectiveVector, ReleaseProblem, ResolvedBound, Solution,
};
use crate::selection::Selection;

fn column(problem: &ReleaseProblem, attribute: &AttributeKey) -> Result<Vec<f64>> {
    if attribute.is_count() {
        return Ok(vec![1.0; problem.len()]);
    }
    problem
        .requirements
        .iter()
        .map(|r| r.scalars.get(attribute).copied())
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::UnknownAttribute(attribute.to_string()))
}

/// Plain sum of `attribute` over the selected requirements.
pub fn raw_total(problem: &ReleaseProblem, selection: &Selection, attribute: &AttributeKey) -> Result<f64> {
    let col = column(problem, attribute)?;
    Ok(selection.iter().map(|i| col[i]).sum())
}

/// Total change to `attribute` from value interactions fully inside `selection`.
pub fn adjust(problem: &ReleaseProblem, selection: &Selection, attribute: &AttributeKey) -> f64 {
    problem
        .value_interactions
        .iter()
        .filter(|vi| &vi.attribute == attribute && vi.members.iter().all(|&m| selection.contains(m)))
        .map(|vi| vi.delta())
        .sum()
}

/// Adjusted totals for every tracked attribute of `problem`.
pub fn evaluate(problem: &ReleaseProblem, selection: &Selection) -> Result<ObjectiveVector> {
    problem
        .tracked_attributes()
        .into_iter()
        .map(|a| {
            let v = raw_total(problem, selection, &a)? + adjust(problem, selection, &a);
            Ok((a, v))
        })
        .collect()
}

struct Trigger {
    attribute: usize,
    members: Selection,
    mask: u64,
    delta: f64,
}

/// Dense, precomputed view of a problem for repeated evaluation.
///
/// Totals are always summed from scratch in requirement order, so the same
/// selection yields bit-identical values whichever solver produced it.
pub struct Evaluator<'p> {
    pub problem: &'p ReleaseProblem,
    pub attributes: Vec<AttributeKey>,
    columns: Vec<Vec<f64>>,
    triggers: Vec<Trigger>,
    objectives: Vec<(usize, Direction)>,
    bounds: Vec<(usize, ResolvedBound)>,
    prerequisites: Vec<Vec<usize>>,
    dependents: Vec<Vec<usize>>,
    prerequisite_masks: Vec<u64>,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p ReleaseProblem) -> Result<Self> {
        let attributes = problem.tracked_attributes();
        let columns = attributes
            .iter()
            .map(|a| column(problem, a))
            .collect::<Result<Vec<_>>>()?;
        let position = |a: &AttributeKey| attributes.iter().position(|x| x == a);
        let triggers = problem
            .value_interactions
            .iter()
            .filter_map(|vi| {
                let attribute = position(&vi.attribute)?;
                let members = Selection::from_indices(problem.len(), vi.members.iter().copied());
                let mask = vi.members.iter().filter(|&&m| m < 64).fold(0u64, |m, &i| m | 1 << i);
                Some(Trigger {
                    attribute,
                    members,
                    mask,
                    delta: vi.delta(),
                })
            })
            .collect();
        let objectives = problem
            .objectives
            .iter()
            .map(|o| (position(&o.attribute).expect("objective attributes are tracked"), o.direction))
            .collect();
        let bounds = problem
            .bounds
            .iter()
            .map(|b| (position(&b.attribute).expect("bound attributes are tracked"), b.clone()))
            .collect();
        let prerequisites = problem.prerequisites();
        let prerequisite_masks = prerequisites
            .iter()
            .map(|ps| ps.iter().filter(|&&p| p < 64).fold(0u64, |m, &p| m | 1 << p))
            .collect();
        Ok(Self {
            problem,
            attributes,
            columns,
            triggers,
            objectives,
            bounds,
            dependents: problem.dependents(),
            prerequisites,
            prerequisite_masks,
        })
    }

    pub fn len(&self) -> usize {
        self.problem.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problem.is_empty()
    }

    pub fn attribute_index(&self, attribute: &AttributeKey) -> Option<usize> {
        self.attributes.iter().position(|a| a == attribute)
    }

    pub fn prerequisites(&self, i: usize) -> &[usize] {
        &self.prerequisites[i]
    }

    pub fn dependents(&self, i: usize) -> &[usize] {
        &self.dependents[i]
    }

    pub fn evaluate(&self, selection: &Selection) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .columns
            .iter()
            .map(|col| selection.iter().map(|i| col[i]).sum())
            .collect();
        for t in &self.triggers {
            if t.members.is_subset(selection) {
                values[t.attribute] += t.delta;
            }
        }
        values
    }

    /// Same as [`Evaluator::evaluate`] for problems of at most 64 requirements.
    pub fn evaluate_mask(&self, mask: u64) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let mut sum = 0.0;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                sum += col[i];
                bits &= bits - 1;
            }
            values.push(sum);
        }
        for t in &self.triggers {
            if t.mask & mask == t.mask {
                values[t.attribute] += t.delta;
            }
        }
        values
    }

    pub fn implications_hold(&self, selection: &Selection) -> bool {
        selection
            .iter()
            .all(|d| self.prerequisites[d].iter().all(|&p| selection.contains(p)))
    }

    pub fn implications_hold_mask(&self, mask: u64) -> bool {
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            if self.prerequisite_masks[i] & !mask != 0 {
                return false;
            }
            bits &= bits - 1;
        }
        true
    }

    pub fn bounds_hold(&self, values: &[f64]) -> bool {
        self.bounds.iter().all(|(i, b)| b.holds(values[*i]))
    }

    pub fn upper_bounds_hold(&self, values: &[f64]) -> bool {
        self.bounds
            .iter()
            .filter(|(_, b)| b.kind == BoundKind::Upper)
            .all(|(i, b)| b.holds(values[*i]))
    }

    /// Objective values mapped into minimize space (maximize objectives negated).
    pub fn point(&self, values: &[f64]) -> Vec<f64> {
        self.objectives
            .iter()
            .map(|&(i, d)| match d {
                Direction::Maximize => -values[i],
                Direction::Minimize => values[i],
            })
            .collect()
    }

    /// Adds `i` together with every missing transitive prerequisite.
    pub fn add_with_closure(&self, selection: &Selection, i: usize) -> Selection {
        let mut out = selection.clone();
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(self.prerequisites[v].iter().copied());
            }
        }
        out
    }

    /// Removes `i` together with every selected transitive dependent.
    pub fn remove_with_cascade(&self, selection: &Selection, i: usize) -> Selection {
        let mut out = selection.clone();
        let mut stack = vec![i];
        while let Some(v) = stack.pop() {
            if out.remove(v) {
                stack.extend(self.dependents[v].iter().copied());
            }
        }
        out
    }

    pub fn solution(&self, selection: &Selection, values: &[f64]) -> Solution {
        let problem = self.problem;
        let mut solution = Solution::new(
            problem.selected_ids(selection),
            self.attributes.iter().cloned().zip(values.iter().copied()).collect(),
        );
        solution.branch = problem.branch;
        for i in selection.iter() {
            let r = &problem.requirements[i];
            for (attribute, sources) in &r.sources {
                let slot = solution.source_sums.entry(attribute.clone()).or_default();
                for (s, v) in sources {
                    *slot.entry(s.clone()).or_insert(0.0) += v;
                }
            }
            for (attribute, categories) in &r.categories {
                let slot = solution.category_sums.entry(attribute.clone()).or_default();
                for (c, v) in categories {
                    *slot.entry(c.clone()).or_insert(0.0) += v;
                }
            }
        }
        solution
    }
}

/// Solution for an explicit selection, evaluated from scratch.
pub fn solution_for(problem: &ReleaseProblem, selection: &Selection) -> Result<Solution> {
    let ev = Evaluator::new(problem)?;
    let values = ev.evaluate(selection);
    Ok(ev.solution(selection, &values))
}

/// Adjusted totals keyed by attribute, convenience for callers outside solvers.
pub fn values_map(ev: &Evaluator<'_>, values: &[f64]) -> BTreeMap<AttributeKey, f64> {
    ev.attributes.iter().cloned().zip(values.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObjectiveSpec, PreparedInteraction, PreparedRequirement, RequirementId, ValueMode};
    use proptest::prelude::*;

    fn problem(efforts: &[f64], interactions: Vec<PreparedInteraction>) -> ReleaseProblem {
        ReleaseProblem {
            name: "t".into(),
            branch: 0,
            requirements: efforts
                .iter()
                .enumerate()
                .map(|(i, e)| PreparedRequirement {
                    id: RequirementId::new(format!("r{i}")),
                    provenance: vec![],
                    scalars: [(AttributeKey::effort(), *e), (AttributeKey::value(), 1.0)].into_iter().collect(),
                    sources: BTreeMap::new(),
                    categories: BTreeMap::new(),
                })
                .collect(),
            implies: vec![],
            value_interactions: interactions,
            objectives: vec![ObjectiveSpec::maximize("value"), ObjectiveSpec::minimize("effort")],
            bounds: vec![],
            mandatory: vec![],
            mandatory_baseline: BTreeMap::new(),
            coverage_basis: Default::default(),
        }
    }

    fn factor(members: Vec<usize>, amount: f64, base: f64) -> PreparedInteraction {
        PreparedInteraction {
            attribute: AttributeKey::effort(),
            members,
            mode: ValueMode::Multiplicative,
            amount,
            base,
        }
    }

    #[test]
    fn multiplicative_adjust() {
        let p = problem(&[3.0, 5.0, 1.0], vec![factor(vec![0, 1], 0.9, 8.0)]);
        let both = Selection::from_indices(3, [0, 1]);
        assert!((adjust(&p, &both, &AttributeKey::effort()) + 0.8).abs() < 1e-12);
        assert_eq!(adjust(&p, &Selection::from_indices(3, [0, 2]), &AttributeKey::effort()), 0.0);
        let v = evaluate(&p, &both).unwrap();
        assert!((v[&AttributeKey::effort()] - 7.2).abs() < 1e-12);
        assert_eq!(v[&AttributeKey::n_req()], 2.0);
    }

    #[test]
    fn additive_adjust_and_empty() {
        let mut vi = factor(vec![0, 1], 5.0, 0.0);
        vi.mode = ValueMode::Additive;
        let p = problem(&[1.0, 1.0], vec![vi]);
        assert_eq!(adjust(&p, &Selection::full(2), &AttributeKey::effort()), 5.0);
        let empty = evaluate(&p, &Selection::empty(2)).unwrap();
        assert!(empty.values().all(|v| *v == 0.0));
        assert!(raw_total(&p, &Selection::empty(2), &AttributeKey::risk()).is_err());
    }

    #[test]
    fn mask_and_bitset_paths_agree() {
        let p = problem(&[1.5, 2.25, 3.0, 0.5], vec![factor(vec![1, 3], 1.2, 2.75)]);
        let ev = Evaluator::new(&p).unwrap();
        for mask in 0..16u64 {
            assert_eq!(ev.evaluate_mask(mask), ev.evaluate(&Selection::from_mask(4, mask)));
        }
    }

    proptest! {
        #[test]
        fn adjust_is_local(efforts in prop::collection::vec(0.0f64..10.0, 4), mask in 0u64..16, drop in 0usize..2) {
            let members = vec![0, 2];
            let base = efforts[0] + efforts[2];
            let p = problem(&efforts, vec![factor(members.clone(), 0.7, base)]);
            let mut s = Selection::from_mask(4, mask | 0b101);
            s.remove(members[drop]);
            prop_assert_eq!(adjust(&p, &s, &AttributeKey::effort()), 0.0);
        }

        #[test]
        fn totals_monotone_without_interactions(efforts in prop::collection::vec(0.0f64..10.0, 5), mask in 0u64..32, add in 0usize..5) {
            let p = problem(&efforts, vec![]);
            let s = Selection::from_mask(5, mask);
            let mut t = s.clone();
            t.insert(add);
            let (a, b) = (evaluate(&p, &s).unwrap(), evaluate(&p, &t).unwrap());
            for (k, v) in &a {
                prop_assert!(b[k] >= *v);
            }
        }
    }
}
