//! Per-solution decision indicators, near-bound handpicking and scoring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AttributeKey, BoundKind, CoverageBasis, Direction, ObjectiveSpec, ParetoFront, RequirementId,
    ResolvedBound, Solution,
};

/// Quotient of two solution totals; `None` when the denominator is zero or an
/// attribute is missing.
pub fn ratio(sol: &Solution, numerator: &AttributeKey, denominator: &AttributeKey) -> Option<f64> {
    let n = sol.value(numerator)?;
    let d = sol.value(denominator)?;
    (d != 0.0).then(|| n / d)
}

/// Satisfaction per unit of effort.
pub fn productivity(sol: &Solution) -> Option<f64> {
    ratio(sol, &AttributeKey::value(), &AttributeKey::effort())
}

/// Dissatisfaction per unit of satisfaction. Zero dissatisfaction is clean
/// regardless of satisfaction.
pub fn dirtiness(sol: &Solution) -> Option<f64> {
    zero_numerator(sol, &AttributeKey::penalty()).or_else(|| ratio(sol, &AttributeKey::penalty(), &AttributeKey::value()))
}

/// Dissatisfaction per unit of effort.
pub fn annoyance(sol: &Solution) -> Option<f64> {
    zero_numerator(sol, &AttributeKey::penalty()).or_else(|| ratio(sol, &AttributeKey::penalty(), &AttributeKey::effort()))
}

fn zero_numerator(sol: &Solution, attribute: &AttributeKey) -> Option<f64> {
    (sol.value(attribute)? == 0.0).then_some(0.0)
}

/// Share of one stakeholder's raw `attribute` estimates captured by `sol`.
pub fn stakeholder_coverage(
    sol: &Solution,
    stakeholder: &str,
    attribute: &AttributeKey,
    basis: &CoverageBasis,
) -> Option<f64> {
    let total = *basis.sources.get(attribute)?.get(stakeholder)?;
    if total == 0.0 {
        return None;
    }
    let selected = sol
        .source_sums
        .get(attribute)
        .and_then(|m| m.get(stakeholder))
        .copied()
        .unwrap_or(0.0);
    Some(selected / total)
}

/// Share of one effort category's total covered by `sol`.
pub fn effort_coverage(sol: &Solution, category: &str, basis: &CoverageBasis) -> Result<Option<f64>> {
    let effort = AttributeKey::effort();
    let total = basis
        .categories
        .get(&effort)
        .and_then(|m| m.get(category))
        .copied()
        .ok_or_else(|| Error::UnknownCoverageKey {
            kind: "effort category",
            attribute: effort.to_string(),
            name: category.to_string(),
        })?;
    if total == 0.0 {
        return Ok(None);
    }
    let selected = sol
        .category_sums
        .get(&effort)
        .and_then(|m| m.get(category))
        .copied()
        .unwrap_or(0.0);
    Ok(Some(selected / total))
}

/// Fraction of the effort bound left unused.
pub fn squandering(sol: &Solution, bound: f64) -> Option<f64> {
    let eff = sol.value(&AttributeKey::effort())?;
    (bound > 0.0).then(|| (bound - eff) / bound)
}

/// Unused fraction of the price bound and satisfaction per unit of price.
pub fn waste_and_efficiency(sol: &Solution, price_bound: f64) -> (Option<f64>, Option<f64>) {
    let price = sol.value(&AttributeKey::price());
    let waste = price.filter(|_| price_bound > 0.0).map(|p| (price_bound - p) / price_bound);
    (waste, ratio(sol, &AttributeKey::value(), &AttributeKey::price()))
}

/// A requested indicator column (or family of columns).
#[derive(Clone, Debug, PartialEq)]
pub enum Indicator {
    Ratio { gain: AttributeKey, cost: AttributeKey },
    Dirtiness,
    Annoyance,
    /// One column per stakeholder when none is named.
    StakeholderCoverage { stakeholder: Option<String> },
    /// One column per category when none is named.
    EffortCoverage { category: Option<String> },
    Squandering { bound: Option<f64> },
    Waste { bound: Option<f64> },
    Efficiency,
}

pub const INDICATOR_NAMES: &str =
    "productivity[:gain[/cost]], dirtiness, annoyance, stcov[:stakeholder], efcov[:category], squandering[:bound], waste[:bound], efficiency";

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.trim())),
            None => (s, None),
        };
        let unknown = || Error::UnknownIndicator {
            name: s.to_string(),
            available: INDICATOR_NAMES.to_string(),
        };
        let number = |a: Option<&str>| -> Result<Option<f64>> {
            a.map(|v| v.parse::<f64>().map_err(|_| unknown())).transpose()
        };
        Ok(match head.to_ascii_lowercase().as_str() {
            "productivity" | "prod" => match arg {
                None => Indicator::Ratio {
                    gain: AttributeKey::value(),
                    cost: AttributeKey::effort(),
                },
                Some(a) => {
                    let (g, c) = a.split_once('/').unwrap_or((a, AttributeKey::EFFORT));
                    if g.is_empty() || c.is_empty() {
                        return Err(unknown());
                    }
                    Indicator::Ratio {
                        gain: AttributeKey::parse(g),
                        cost: AttributeKey::parse(c),
                    }
                }
            },
            "dirtiness" | "dirt" if arg.is_none() => Indicator::Dirtiness,
            "annoyance" | "ann" if arg.is_none() => Indicator::Annoyance,
            "efficiency" if arg.is_none() => Indicator::Efficiency,
            "stcov" => Indicator::StakeholderCoverage {
                stakeholder: arg.map(str::to_string),
            },
            "efcov" => Indicator::EffortCoverage {
                category: arg.map(str::to_string),
            },
            "squandering" | "squ" => Indicator::Squandering { bound: number(arg)? },
            "waste" => Indicator::Waste { bound: number(arg)? },
            _ => return Err(unknown()),
        })
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Indicator::Ratio { gain, cost } => write!(f, "productivity:{gain}/{cost}"),
            Indicator::Dirtiness => f.write_str("dirtiness"),
            Indicator::Annoyance => f.write_str("annoyance"),
            Indicator::StakeholderCoverage { stakeholder: None } => f.write_str("stcov"),
            Indicator::StakeholderCoverage { stakeholder: Some(s) } => write!(f, "stcov:{s}"),
            Indicator::EffortCoverage { category: None } => f.write_str("efcov"),
            Indicator::EffortCoverage { category: Some(c) } => write!(f, "efcov:{c}"),
            Indicator::Squandering { bound: None } => f.write_str("squandering"),
            Indicator::Squandering { bound: Some(b) } => write!(f, "squandering:{b}"),
            Indicator::Waste { bound: None } => f.write_str("waste"),
            Indicator::Waste { bound: Some(b) } => write!(f, "waste:{b}"),
            Indicator::Efficiency => f.write_str("efficiency"),
        }
    }
}

/// Parses a comma-separated indicator list; empty input gives an empty list.
pub fn parse_indicators(list: &str) -> Result<Vec<Indicator>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// What indicators need beyond the solutions themselves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontContext {
    pub objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub bounds: Vec<ResolvedBound>,
    #[serde(default)]
    pub coverage_basis: CoverageBasis,
}

impl FrontContext {
    pub fn upper_bound(&self, attribute: &AttributeKey) -> Option<f64> {
        self.bounds
            .iter()
            .filter(|b| b.kind == BoundKind::Upper && &b.attribute == attribute)
            .map(|b| b.value)
            .reduce(f64::min)
    }

    /// First upper-bounded attribute, the default for handpicking.
    pub fn bounded_attribute(&self) -> Option<AttributeKey> {
        self.bounds
            .iter()
            .find(|b| b.kind == BoundKind::Upper)
            .map(|b| b.attribute.clone())
    }

    /// Indicators shown when none are requested.
    pub fn default_indicators(&self) -> Vec<Indicator> {
        let mut out = vec![
            Indicator::Ratio {
                gain: AttributeKey::value(),
                cost: AttributeKey::effort(),
            },
            Indicator::Dirtiness,
        ];
        if self.coverage_basis.sources.contains_key(&AttributeKey::value()) {
            out.push(Indicator::StakeholderCoverage { stakeholder: None });
        }
        out
    }
}

/// The `k` front members closest to the bound on `attribute` from below:
/// largest value first, ties to the higher first maximize objective, then to
/// the lexicographically smaller requirement set.
pub fn handpick_near_bound(
    front: &ParetoFront,
    attribute: &AttributeKey,
    bound: Option<f64>,
    objectives: &[ObjectiveSpec],
    k: usize,
) -> Vec<Solution> {
    let tie = objectives
        .iter()
        .find(|o| o.direction == Direction::Maximize)
        .map(|o| o.attribute.clone());
    let mut candidates: Vec<&Solution> = front
        .iter()
        .filter(|s| {
            let b = ResolvedBound {
                attribute: attribute.clone(),
                kind: BoundKind::Upper,
                value: bound.unwrap_or(f64::INFINITY),
            };
            s.value(attribute).is_some_and(|v| bound.is_none() || b.holds(v))
        })
        .collect();
    let get = |s: &Solution, a: &AttributeKey| s.value(a).unwrap_or(f64::NEG_INFINITY);
    candidates.sort_by(|a, b| {
        get(b, attribute)
            .total_cmp(&get(a, attribute))
            .then_with(|| match &tie {
                Some(t) => get(b, t).total_cmp(&get(a, t)),
                None => std::cmp::Ordering::Equal,
            })
            .then_with(|| a.key().cmp(&b.key()))
    });
    candidates.into_iter().take(k).cloned().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Attribute,
    Ratio,
    /// Rendered as a percentage.
    Fraction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub label: String,
    pub direction: Direction,
    pub kind: ColumnKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub requirements: Vec<RequirementId>,
    pub branch: usize,
    /// One entry per column; `None` marks an undefined value (zero denominator).
    pub values: Vec<Option<f64>>,
    pub best: Vec<bool>,
    pub score: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub bounded_attribute: Option<AttributeKey>,
    pub columns: Vec<Column>,
    pub rows: Vec<ReportRow>,
}

impl IndicatorReport {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn row(&self, ids: &[&str]) -> Option<&ReportRow> {
        let mut want: Vec<&str> = ids.to_vec();
        want.sort_unstable();
        self.rows.iter().find(|r| {
            let mut have: Vec<&str> = r.requirements.iter().map(|x| x.as_str()).collect();
            have.sort_unstable();
            have == want
        })
    }
}

type Extractor = Box<dyn Fn(&Solution) -> Option<f64>>;

fn attribute_columns(solutions: &[Solution], ctx: &FrontContext, bounded: Option<&AttributeKey>) -> Vec<AttributeKey> {
    let mut order: Vec<AttributeKey> = Vec::new();
    let mut push = |a: &AttributeKey| {
        if !order.contains(a) && solutions.iter().all(|s| s.values.contains_key(a)) {
            order.push(a.clone());
        }
    };
    if let Some(b) = bounded {
        push(b);
    }
    for o in &ctx.objectives {
        if !o.attribute.is_count() {
            push(&o.attribute);
        }
    }
    if let Some(first) = solutions.first() {
        for a in first.values.keys().filter(|a| !a.is_count()) {
            push(a);
        }
    }
    push(&AttributeKey::n_req());
    order
}

fn indicator_columns(ind: &Indicator, ctx: &FrontContext, bounded: Option<&AttributeKey>) -> Result<Vec<(Column, Extractor)>> {
    let col = |name: String, label: String, direction, kind| Column {
        name,
        label,
        direction,
        kind,
    };
    Ok(match ind {
        Indicator::Ratio { gain, cost } => {
            let label = if gain == &AttributeKey::value() && cost == &AttributeKey::effort() {
                "prod".to_string()
            } else if cost == &AttributeKey::effort() {
                format!("prod_{}", gain.label())
            } else {
                format!("prod_{}_{}", gain.label(), cost.label())
            };
            let (g, c) = (gain.clone(), cost.clone());
            vec![(
                col(ind.to_string(), label, Direction::Maximize, ColumnKind::Ratio),
                Box::new(move |s: &Solution| ratio(s, &g, &c)) as Extractor,
            )]
        }
        Indicator::Dirtiness => vec![(
            col(ind.to_string(), "dirt".into(), Direction::Minimize, ColumnKind::Ratio),
            Box::new(dirtiness),
        )],
        Indicator::Annoyance => vec![(
            col(ind.to_string(), "ann".into(), Direction::Minimize, ColumnKind::Ratio),
            Box::new(annoyance),
        )],
        Indicator::Efficiency => vec![(
            col(ind.to_string(), "effic".into(), Direction::Maximize, ColumnKind::Ratio),
            Box::new(|s: &Solution| ratio(s, &AttributeKey::value(), &AttributeKey::price())),
        )],
        Indicator::StakeholderCoverage { stakeholder } => {
            let value = AttributeKey::value();
            let known = ctx.coverage_basis.sources.get(&value);
            let names: Vec<String> = match stakeholder {
                Some(s) => {
                    if !known.is_some_and(|m| m.contains_key(s)) {
                        return Err(Error::UnknownCoverageKey {
                            kind: "stakeholder",
                            attribute: value.to_string(),
                            name: s.clone(),
                        });
                    }
                    vec![s.clone()]
                }
                None => known.map(|m| m.keys().cloned().collect()).unwrap_or_default(),
            };
            names
                .into_iter()
                .map(|s| {
                    let basis = ctx.coverage_basis.clone();
                    let key = value.clone();
                    let name = s.clone();
                    (
                        col(format!("stcov:{s}"), format!("stcov_{s}"), Direction::Maximize, ColumnKind::Fraction),
                        Box::new(move |sol: &Solution| stakeholder_coverage(sol, &name, &key, &basis)) as Extractor,
                    )
                })
                .collect()
        }
        Indicator::EffortCoverage { category } => {
            let known = ctx.coverage_basis.categories.get(&AttributeKey::effort());
            let names: Vec<String> = match category {
                Some(c) => vec![c.clone()],
                None => known.map(|m| m.keys().cloned().collect()).unwrap_or_default(),
            };
            let mut out = Vec::new();
            for c in names {
                let basis = ctx.coverage_basis.clone();
                // Surface unknown categories now rather than per row.
                effort_coverage(&Solution::new(vec![], Default::default()), &c, &basis)?;
                let name = c.clone();
                out.push((
                    col(format!("efcov:{c}"), format!("efcov_{c}"), Direction::Maximize, ColumnKind::Fraction),
                    Box::new(move |sol: &Solution| effort_coverage(sol, &name, &basis).ok().flatten()) as Extractor,
                ));
            }
            out
        }
        Indicator::Squandering { bound } => {
            let effort = AttributeKey::effort();
            let b = bound
                .or_else(|| ctx.upper_bound(&effort))
                .or_else(|| bounded.and_then(|a| ctx.upper_bound(a)))
                .ok_or_else(|| Error::InvalidBound {
                    attribute: effort.to_string(),
                    reason: "squandering needs an effort bound; pass squandering:<bound>".into(),
                })?;
            vec![(
                col(ind.to_string(), "squ".into(), Direction::Minimize, ColumnKind::Fraction),
                Box::new(move |s: &Solution| squandering(s, b)),
            )]
        }
        Indicator::Waste { bound } => {
            let price = AttributeKey::price();
            let b = bound.or_else(|| ctx.upper_bound(&price)).ok_or_else(|| Error::InvalidBound {
                attribute: price.to_string(),
                reason: "waste needs a price bound; pass waste:<bound>".into(),
            })?;
            vec![(
                col(ind.to_string(), "waste".into(), Direction::Minimize, ColumnKind::Fraction),
                Box::new(move |s: &Solution| waste_and_efficiency(s, b).0),
            )]
        }
    })
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Builds the report: attribute columns first, then the requested
/// indicators. Every row achieving a column's best value gets a mark; a row's
/// score is its mark count. Rows come back sorted by score, highest first,
/// keeping input order among equals.
pub fn score_solutions(
    handpicked: &[Solution],
    indicators: &[Indicator],
    ctx: &FrontContext,
    bounded: Option<&AttributeKey>,
) -> Result<IndicatorReport> {
    let mut columns: Vec<(Column, Extractor)> = Vec::new();
    for a in attribute_columns(handpicked, ctx, bounded) {
        let direction = ctx
            .objectives
            .iter()
            .find(|o| o.attribute == a)
            .map(|o| o.direction)
            .unwrap_or_else(|| a.polarity());
        let key = a.clone();
        columns.push((
            Column {
                name: a.to_string(),
                label: a.label().to_string(),
                direction,
                kind: ColumnKind::Attribute,
            },
            Box::new(move |s: &Solution| s.value(&key)),
        ));
    }
    for ind in indicators {
        columns.extend(indicator_columns(ind, ctx, bounded)?);
    }

    let values: Vec<Vec<Option<f64>>> = handpicked
        .iter()
        .map(|s| columns.iter().map(|(_, f)| f(s)).collect())
        .collect();
    let best_per_column: Vec<Option<f64>> = columns
        .iter()
        .enumerate()
        .map(|(c, (col, _))| {
            values
                .iter()
                .filter_map(|row| row[c])
                .reduce(|a, b| if col.direction.better(b, a) { b } else { a })
        })
        .collect();

    let mut rows: Vec<ReportRow> = handpicked
        .iter()
        .zip(values)
        .map(|(s, vals)| {
            let best: Vec<bool> = vals
                .iter()
                .zip(&best_per_column)
                .map(|(v, b)| matches!((v, b), (Some(v), Some(b)) if same(*v, *b)))
                .collect();
            ReportRow {
                requirements: s.requirements.clone(),
                branch: s.branch,
                score: best.iter().filter(|b| **b).count(),
                values: vals,
                best,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.score.cmp(&a.score));
    Ok(IndicatorReport {
        bounded_attribute: bounded.cloned(),
        columns: columns.into_iter().map(|(c, _)| c).collect(),
        rows,
    })
}

/// Handpick then score. `bounded` defaults to the first upper-bounded attribute.
pub fn analyze(
    front: &ParetoFront,
    ctx: &FrontContext,
    k: usize,
    indicators: &[Indicator],
    bounded: Option<&AttributeKey>,
) -> Result<IndicatorReport> {
    let attribute = bounded.cloned().or_else(|| ctx.bounded_attribute());
    let picked = match &attribute {
        Some(a) => handpick_near_bound(front, a, ctx.upper_bound(a), &ctx.objectives, k),
        None => front.iter().take(k).cloned().collect(),
    };
    score_solutions(&picked, indicators, ctx, attribute.as_ref())
}
