//! Exact and heuristic front construction.

pub mod exhaustive;
pub mod greedy;
pub mod hillclimb;

pub use exhaustive::{solve_exhaustive, DEFAULT_CAP};
pub use greedy::{solve_greedy, GreedyConfig};
pub use hillclimb::{solve_hillclimb, HillClimbConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{ParetoFront, ReleaseProblem};
use crate::pareto::merge_fronts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exhaustive,
    Greedy,
    #[serde(alias = "hill_climb", alias = "hill-climb")]
    HillClimb,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exhaustive => "exhaustive",
            Algorithm::Greedy => "greedy",
            Algorithm::HillClimb => "hillclimb",
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == Algorithm::HillClimb
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(Algorithm::Exhaustive),
            "greedy" => Ok(Algorithm::Greedy),
            "hillclimb" | "hill_climb" | "hill-climb" => Ok(Algorithm::HillClimb),
            other => Err(format!("unknown algorithm `{other}` (expected exhaustive, greedy or hillclimb)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub exhaustive_cap: usize,
    pub greedy: GreedyConfig,
    pub hillclimb: HillClimbConfig,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            exhaustive_cap: DEFAULT_CAP,
            greedy: GreedyConfig::default(),
            hillclimb: HillClimbConfig::default(),
        }
    }
}

pub fn solve_branch(problem: &ReleaseProblem, algo: Algorithm, params: &SolverParams) -> Result<ParetoFront> {
    match algo {
        Algorithm::Exhaustive => solve_exhaustive(problem, params.exhaustive_cap),
        Algorithm::Greedy => solve_greedy(problem, &params.greedy),
        Algorithm::HillClimb => solve_hillclimb(problem, &params.hillclimb),
    }
}

/// Solves every branch and merges the results into one front.
pub fn solve(problems: &[ReleaseProblem], algo: Algorithm, params: &SolverParams) -> Result<ParetoFront> {
    let Some(first) = problems.first() else {
        return Ok(ParetoFront::new());
    };
    let fronts = problems
        .par_iter()
        .map(|p| solve_branch(p, algo, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_fronts(fronts, &first.objectives))
}
