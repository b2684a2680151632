//! End-to-end composition used by the CLI, the service and the C ABI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::indicators::{FrontContext, Indicator};
use crate::io::FrontDocument;
use crate::model::{ProblemConfig, RequirementCatalog, RequirementId, Solution};
use crate::preprocess::build_problem;
use crate::solvers::{solve, Algorithm, SolverParams};

/// Preprocesses `catalog` under `config` and solves every branch.
pub fn run(catalog: &RequirementCatalog, config: &ProblemConfig, algorithm: Algorithm, params: &SolverParams) -> Result<FrontDocument> {
    let problems = build_problem(catalog, config)?;
    let front = solve(&problems, algorithm, params)?;
    let first = &problems[0];
    Ok(FrontDocument {
        name: catalog.name.clone(),
        algorithm: algorithm.name().to_string(),
        seed: algorithm.is_stochastic().then_some(params.hillclimb.seed),
        branches: problems.len(),
        objectives: first.objectives.clone(),
        bounds: first.bounds.clone(),
        coverage_basis: first.coverage_basis.clone(),
        mandatory: first.mandatory.clone(),
        mandatory_baseline: first.mandatory_baseline.clone(),
        solutions: front.solutions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `a - b` per attribute and indicator column.
    pub deltas: BTreeMap<String, Option<f64>>,
    pub only_in_a: Vec<RequirementId>,
    pub only_in_b: Vec<RequirementId>,
}

/// Pairwise difference of two solutions over every shared attribute and the
/// given indicators.
pub fn compare_solutions(a: &Solution, b: &Solution, ctx: &FrontContext, indicators: &[Indicator]) -> Result<Comparison> {
    let report = crate::indicators::score_solutions(&[a.clone(), b.clone()], indicators, ctx, ctx.bounded_attribute().as_ref())?;
    // score_solutions sorts by score; find each row again by its set.
    let find = |s: &Solution| {
        report
            .rows
            .iter()
            .find(|r| {
                let mut x: Vec<&str> = r.requirements.iter().map(|i| i.as_str()).collect();
                x.sort_unstable();
                x == s.key()
            })
            .expect("both solutions are in the report")
    };
    let (ra, rb) = (find(a), find(b));
    let deltas = report
        .columns
        .iter()
        .enumerate()
        .map(|(c, col)| {
            let d = match (ra.values[c], rb.values[c]) {
                (Some(x), Some(y)) => Some(x - y),
                _ => None,
            };
            (col.name.clone(), d)
        })
        .collect();
    let only = |x: &Solution, y: &Solution| -> Vec<RequirementId> {
        x.requirements.iter().filter(|r| !y.requirements.contains(r)).cloned().collect()
    };
    Ok(Comparison {
        deltas,
        only_in_a: only(a, b),
        only_in_b: only(b, a),
    })
}
