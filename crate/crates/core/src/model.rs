//! Domain types shared by every stage of the pipeline.
//!
//! A [`RequirementCatalog`] is the raw elicitation output: requirements with
//! per-source attribute estimates plus the interactions between them. Running
//! it through [`crate::preprocess`] yields one [`ReleaseProblem`] per exclusion
//! branch, which the solvers turn into a [`ParetoFront`] of [`Solution`]s.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::selection::Selection;

/// Opaque requirement identifier, unique within a catalog.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequirementId(String);

impl RequirementId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RequirementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RequirementId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for RequirementId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl Borrow<str> for RequirementId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    pub weight: f64,
}

/// Optimization direction of an objective or indicator column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// Returns true when `a` is strictly better than `b` in this direction.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }
}

/// Name of a requirement attribute.
///
/// Well-known attributes carry a default polarity; anything else is a
/// user-defined extension and defaults to maximize. Common aliases
/// (`sat`, `dis`, `eff`, ...) are canonicalized by [`AttributeKey::parse`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeKey(String);

impl AttributeKey {
    pub const VALUE: &'static str = "value";
    pub const PENALTY: &'static str = "penalty";
    pub const EFFORT: &'static str = "effort";
    pub const PRICE: &'static str = "price";
    pub const RISK: &'static str = "risk";
    pub const URGENCY: &'static str = "urgency";
    pub const VOLATILITY: &'static str = "volatility";
    pub const FREQUENCY_OF_USE: &'static str = "frequency_of_use";
    /// Number of selected (prepared) requirements. Needs no per-requirement data.
    pub const N_REQ: &'static str = "n_req";

    /// Canonicalizes `name`, resolving the usual set-function aliases.
    pub fn parse(name: &str) -> Self {
        let lower = name.trim().to_ascii_lowercase();
        let canonical = match lower.as_str() {
            "sat" | "satisfaction" | "benefit" | "revenue" => Self::VALUE,
            "dis" | "dissat" | "dissatisfaction" => Self::PENALTY,
            "eff" | "cost" => Self::EFFORT,
            "pri" => Self::PRICE,
            "rk" => Self::RISK,
            "tim" | "time_sensitivity" => Self::URGENCY,
            "ins" | "instability" => Self::VOLATILITY,
            "pre" | "prevalence" | "frequency" => Self::FREQUENCY_OF_USE,
            "nreq" | "n.req" | "count" | "cardinality" => Self::N_REQ,
            _ => return Self(lower),
        };
        Self(canonical.to_owned())
    }

    pub fn value() -> Self {
        Self(Self::VALUE.to_owned())
    }

    pub fn penalty() -> Self {
        Self(Self::PENALTY.to_owned())
    }

    pub fn effort() -> Self {
        Self(Self::EFFORT.to_owned())
    }

    pub fn price() -> Self {
        Self(Self::PRICE.to_owned())
    }

    pub fn risk() -> Self {
        Self(Self::RISK.to_owned())
    }

    pub fn urgency() -> Self {
        Self(Self::URGENCY.to_owned())
    }

    pub fn n_req() -> Self {
        Self(Self::N_REQ.to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_count(&self) -> bool {
        self.0 == Self::N_REQ
    }

    /// Default objective direction registered for this attribute.
    pub fn polarity(&self) -> Direction {
        match self.0.as_str() {
            Self::PENALTY | Self::EFFORT | Self::PRICE | Self::RISK | Self::VOLATILITY => {
                Direction::Minimize
            }
            _ => Direction::Maximize,
        }
    }

    /// Column label used in reports (`sat`, `dis`, `eff`, ...).
    pub fn label(&self) -> &str {
        match self.0.as_str() {
            Self::VALUE => "sat",
            Self::PENALTY => "dis",
            Self::EFFORT => "eff",
            Self::PRICE => "pri",
            Self::RISK => "risk",
            Self::URGENCY => "tim",
            Self::VOLATILITY => "ins",
            Self::FREQUENCY_OF_USE => "pre",
            Self::N_REQ => "N.req",
            other => other,
        }
    }
}

impl fmt::Display for AttributeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AttributeKey {
    fn from(s: &str) -> Self {
        Self::parse(s)
    }
}

/// Raw estimate(s) for one attribute of one requirement.
#[derive(Clone, Debug, PartialEq)]
pub enum AttributeValues {
    /// Directly estimated scalar.
    Scalar(f64),
    /// One estimate per stakeholder. `stated_total`, when present, is the
    /// aggregated value recorded by the data source and takes precedence over
    /// the computed aggregate (the per-source values still drive coverage).
    Sources {
        values: BTreeMap<String, f64>,
        stated_total: Option<f64>,
    },
    /// Unweighted components, e.g. effort broken down by development task.
    Categories(BTreeMap<String, f64>),
}

impl AttributeValues {
    pub fn sources(values: impl IntoIterator<Item = (impl Into<String>, f64)>) -> Self {
        AttributeValues::Sources {
            values: values.into_iter().map(|(k, v)| (k.into(), v)).collect(),
            stated_total: None,
        }
    }

    pub fn categories(values: impl IntoIterator<Item = (impl Into<String>, f64)>) -> Self {
        AttributeValues::Categories(values.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub(crate) fn all_finite(&self) -> bool {
        match self {
            AttributeValues::Scalar(v) => v.is_finite(),
            AttributeValues::Sources {
                values,
                stated_total,
            } => values.values().all(|v| v.is_finite()) && stated_total.is_none_or(f64::is_finite),
            AttributeValues::Categories(values) => values.values().all(|v| v.is_finite()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RequirementRecord {
    pub id: RequirementId,
    pub mandatory: bool,
    /// Refinement parent, if this requirement refines another one.
    pub parent: Option<RequirementId>,
    pub attributes: BTreeMap<AttributeKey, AttributeValues>,
}

impl RequirementRecord {
    pub fn new(id: impl Into<RequirementId>) -> Self {
        Self {
            id: id.into(),
            mandatory: false,
            parent: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, attribute: &str, values: AttributeValues) -> Self {
        self.attributes.insert(AttributeKey::parse(attribute), values);
        self
    }

    pub fn scalar(self, attribute: &str, value: f64) -> Self {
        self.with(attribute, AttributeValues::Scalar(value))
    }

    pub fn mandatory(mut self) -> Self {
        self.mandatory = true;
        self
    }

    pub fn child_of(mut self, parent: impl Into<RequirementId>) -> Self {
        self.parent = Some(parent.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    /// `amount` is added to the attribute total.
    Additive,
    /// `amount` multiplies each member's attribute value.
    Multiplicative,
}

/// Joint selection of `members` alters the total of `attribute`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueInteraction {
    pub attribute: AttributeKey,
    pub members: Vec<RequirementId>,
    pub mode: ValueMode,
    pub amount: f64,
}

pub type IdPair = (RequirementId, RequirementId);

/// Relations between requirements.
///
/// `refines` is (parent, child); `implies` is (prerequisite, dependent), i.e.
/// selecting the dependent requires the prerequisite. `combines` and
/// `excludes` are unordered.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InteractionSet {
    pub refines: Vec<IdPair>,
    pub implies: Vec<IdPair>,
    pub combines: Vec<IdPair>,
    pub excludes: Vec<IdPair>,
    pub value: Vec<ValueInteraction>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationOp {
    #[default]
    WeightedSum,
    Max,
    Min,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RequirementCatalog {
    pub name: String,
    pub stakeholders: Vec<Stakeholder>,
    pub requirements: Vec<RequirementRecord>,
    pub interactions: InteractionSet,
    pub aggregation: BTreeMap<AttributeKey, AggregationOp>,
}

impl RequirementCatalog {
    pub fn requirement(&self, id: &str) -> Option<&RequirementRecord> {
        self.requirements.iter().find(|r| r.id.as_str() == id)
    }

    pub fn aggregation_for(&self, attribute: &AttributeKey) -> AggregationOp {
        self.aggregation.get(attribute).copied().unwrap_or_default()
    }

    pub fn weights(&self) -> BTreeMap<String, f64> {
        self.stakeholders
            .iter()
            .map(|s| (s.id.clone(), s.weight))
            .collect()
    }

    /// Refinement edges from both `parent` fields and the `refines` set, deduplicated.
    pub fn refinement_edges(&self) -> Vec<IdPair> {
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        let from_parents = self
            .requirements
            .iter()
            .filter_map(|r| r.parent.clone().map(|p| (p, r.id.clone())));
        for edge in from_parents.chain(self.interactions.refines.iter().cloned()) {
            if seen.insert(edge.clone()) {
                edges.push(edge);
            }
        }
        edges
    }

    /// Attribute names present on at least one requirement.
    pub fn attribute_names(&self) -> BTreeSet<AttributeKey> {
        self.requirements
            .iter()
            .flat_map(|r| r.attributes.keys().cloned())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub attribute: AttributeKey,
    pub direction: Direction,
}

impl ObjectiveSpec {
    pub fn maximize(attribute: &str) -> Self {
        Self {
            attribute: AttributeKey::parse(attribute),
            direction: Direction::Maximize,
        }
    }

    pub fn minimize(attribute: &str) -> Self {
        Self {
            attribute: AttributeKey::parse(attribute),
            direction: Direction::Minimize,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundValue {
    Absolute(f64),
    /// Fraction in (0, 1] of the attribute total over the decision set.
    Fraction(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub attribute: AttributeKey,
    pub kind: BoundKind,
    pub value: BoundValue,
}

impl BoundSpec {
    pub fn upper(attribute: &str, value: f64) -> Self {
        Self {
            attribute: AttributeKey::parse(attribute),
            kind: BoundKind::Upper,
            value: BoundValue::Absolute(value),
        }
    }

    pub fn upper_fraction(attribute: &str, fraction: f64) -> Self {
        Self {
            attribute: AttributeKey::parse(attribute),
            kind: BoundKind::Upper,
            value: BoundValue::Fraction(fraction),
        }
    }

    pub fn lower(attribute: &str, value: f64) -> Self {
        Self {
            attribute: AttributeKey::parse(attribute),
            kind: BoundKind::Lower,
            value: BoundValue::Absolute(value),
        }
    }
}

/// Which level of the refinement hierarchy becomes the decision set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelPolicy {
    /// Every refined requirement is replaced by its leaves.
    #[default]
    Leaf,
    /// Only the top of each refinement tree is kept.
    Root,
    /// Named requirements are kept whole; other refined requirements expand.
    Custom { keep: BTreeSet<RequirementId> },
}

/// Objectives, bounds and hierarchy level for one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub bounds: Vec<BoundSpec>,
    #[serde(default)]
    pub level: LevelPolicy,
}

impl ProblemConfig {
    pub fn new(objectives: Vec<ObjectiveSpec>, bounds: Vec<BoundSpec>) -> Self {
        Self {
            objectives,
            bounds,
            level: LevelPolicy::Leaf,
        }
    }

    pub fn with_level(mut self, level: LevelPolicy) -> Self {
        self.level = level;
        self
    }

    /// Attributes that must carry a value on every decision requirement.
    pub fn required_attributes(&self) -> BTreeSet<AttributeKey> {
        self.objectives
            .iter()
            .map(|o| o.attribute.clone())
            .chain(self.bounds.iter().map(|b| b.attribute.clone()))
            .filter(|a| !a.is_count())
            .collect()
    }
}

/// A decision requirement after preprocessing; possibly several merged originals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedRequirement {
    pub id: RequirementId,
    pub provenance: Vec<RequirementId>,
    pub scalars: BTreeMap<AttributeKey, f64>,
    /// Per-stakeholder raw values, kept for coverage indicators.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub sources: BTreeMap<AttributeKey, BTreeMap<String, f64>>,
    /// Per-category raw values, kept for effort coverage.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub categories: BTreeMap<AttributeKey, BTreeMap<String, f64>>,
}

/// Value interaction rewritten against prepared requirement indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedInteraction {
    pub attribute: AttributeKey,
    pub members: Vec<usize>,
    pub mode: ValueMode,
    pub amount: f64,
    /// Sum of the attribute over the original members, the base a
    /// multiplicative factor applies to.
    pub base: f64,
}

impl PreparedInteraction {
    /// Change in the attribute total once every member is selected.
    pub fn delta(&self) -> f64 {
        match self.mode {
            ValueMode::Additive => self.amount,
            ValueMode::Multiplicative => (self.amount - 1.0) * self.base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedBound {
    pub attribute: AttributeKey,
    pub kind: BoundKind,
    pub value: f64,
}

impl ResolvedBound {
    pub fn holds(&self, value: f64) -> bool {
        let slack = 1e-9 * self.value.abs().max(1.0);
        match self.kind {
            BoundKind::Upper => value <= self.value + slack,
            BoundKind::Lower => value >= self.value - slack,
        }
    }
}

/// Totals of raw per-source and per-category values over the whole decision
/// set (before exclusion branching), the denominators of coverage indicators.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageBasis {
    #[serde(default)]
    pub sources: BTreeMap<AttributeKey, BTreeMap<String, f64>>,
    #[serde(default)]
    pub categories: BTreeMap<AttributeKey, BTreeMap<String, f64>>,
}

/// Preprocessed selection problem for one exclusion branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReleaseProblem {
    pub name: String,
    pub branch: usize,
    pub requirements: Vec<PreparedRequirement>,
    /// (prerequisite, dependent) index pairs.
    pub implies: Vec<(usize, usize)>,
    pub value_interactions: Vec<PreparedInteraction>,
    pub objectives: Vec<ObjectiveSpec>,
    pub bounds: Vec<ResolvedBound>,
    pub mandatory: Vec<RequirementId>,
    pub mandatory_baseline: BTreeMap<AttributeKey, f64>,
    pub coverage_basis: CoverageBasis,
}

impl ReleaseProblem {
    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.requirements.iter().position(|r| r.id.as_str() == id)
    }

    pub fn ids(&self) -> Vec<RequirementId> {
        self.requirements.iter().map(|r| r.id.clone()).collect()
    }

    /// Attributes with a scalar on every requirement, plus the objective and
    /// bound attributes, plus `n_req`. These make up every solution's vector.
    pub fn tracked_attributes(&self) -> Vec<AttributeKey> {
        let mut tracked: BTreeSet<AttributeKey> = match self.requirements.split_first() {
            Some((first, rest)) => first
                .scalars
                .keys()
                .filter(|k| rest.iter().all(|r| r.scalars.contains_key(*k)))
                .cloned()
                .collect(),
            None => BTreeSet::new(),
        };
        tracked.extend(self.objectives.iter().map(|o| o.attribute.clone()));
        tracked.extend(self.bounds.iter().map(|b| b.attribute.clone()));
        tracked.insert(AttributeKey::n_req());
        tracked.into_iter().collect()
    }

    pub fn upper_bound(&self, attribute: &AttributeKey) -> Option<f64> {
        self.bounds
            .iter()
            .filter(|b| b.kind == BoundKind::Upper && &b.attribute == attribute)
            .map(|b| b.value)
            .reduce(f64::min)
    }

    /// prerequisites[d] lists every p with (p, d) in `implies`.
    pub fn prerequisites(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for &(p, d) in &self.implies {
            out[d].push(p);
        }
        out
    }

    pub fn dependents(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.len()];
        for &(p, d) in &self.implies {
            out[p].push(d);
        }
        out
    }

    /// Ids of the selected requirements, in problem order.
    pub fn selected_ids(&self, selection: &Selection) -> Vec<RequirementId> {
        selection
            .iter()
            .map(|i| self.requirements[i].id.clone())
            .collect()
    }

    pub fn selection_of<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Option<Selection> {
        let index: HashMap<&str, usize> = self
            .requirements
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.as_str(), i))
            .collect();
        let mut selection = Selection::empty(self.len());
        for id in ids {
            selection.insert(*index.get(id)?);
        }
        Some(selection)
    }
}

/// Objective vector keyed by attribute.
pub type ObjectiveVector = BTreeMap<AttributeKey, f64>;

/// A selected requirement set with its evaluated vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Selected ids, in problem order.
    pub requirements: Vec<RequirementId>,
    pub values: ObjectiveVector,
    #[serde(default)]
    pub branch: usize,
    /// Sums of raw per-source values over the selection, attribute -> source -> sum.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub source_sums: BTreeMap<AttributeKey, BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub category_sums: BTreeMap<AttributeKey, BTreeMap<String, f64>>,
}

impl Solution {
    pub fn new(requirements: Vec<RequirementId>, values: ObjectiveVector) -> Self {
        Self {
            requirements,
            values,
            branch: 0,
            source_sums: BTreeMap::new(),
            category_sums: BTreeMap::new(),
        }
    }

    pub fn value(&self, attribute: &AttributeKey) -> Option<f64> {
        self.values.get(attribute).copied()
    }

    /// Selected ids as a sorted set, the identity used for deduplication.
    pub fn key(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.requirements.iter().map(|r| r.as_str()).collect();
        ids.sort_unstable();
        ids
    }
}

/// Mutually non-dominated solutions with distinct requirement sets.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub solutions: Vec<Solution>,
}

impl ParetoFront {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Solution> {
        self.solutions.iter()
    }

    /// Sorts members by their requirement sets so equal fronts compare equal.
    pub fn canonicalize(&mut self) {
        self.solutions.sort_by(|a, b| {
            a.requirements
                .len()
                .cmp(&b.requirements.len())
                .then_with(|| a.key().cmp(&b.key()))
        });
    }
}

impl IntoIterator for ParetoFront {
    type Item = Solution;
    type IntoIter = std::vec::IntoIter<Solution>;

    fn into_iter(self) -> Self::IntoIter {
        self.solutions.into_iter()
    }
}

/// A single invariant violation found by [`validate_catalog`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    EmptyId { context: String },
    DuplicateRequirement { id: String },
    DuplicateStakeholder { id: String },
    InvalidWeight { stakeholder: String },
    DanglingReference { context: String, id: String },
    UnknownSource { requirement: String, attribute: String, source: String },
    NonFiniteValue { requirement: String, attribute: String },
    RefinementCycle { ids: Vec<String> },
    MultipleParents { child: String, parents: Vec<String> },
    SelfPair { relation: String, id: String },
    ConflictingInteraction { a: String, b: String },
    InvalidValueInteraction { attribute: String, reason: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyId { context } => write!(f, "empty id in {context}"),
            Diagnostic::DuplicateRequirement { id } => write!(f, "duplicate requirement id `{id}`"),
            Diagnostic::DuplicateStakeholder { id } => write!(f, "duplicate stakeholder id `{id}`"),
            Diagnostic::InvalidWeight { stakeholder } => {
                write!(f, "stakeholder `{stakeholder}` has a negative or non-finite weight")
            }
            Diagnostic::DanglingReference { context, id } => {
                write!(f, "{context} references unknown requirement `{id}`")
            }
            Diagnostic::UnknownSource {
                requirement,
                attribute,
                source,
            } => write!(
                f,
                "requirement `{requirement}` attribute `{attribute}` names unknown stakeholder `{source}`"
            ),
            Diagnostic::NonFiniteValue {
                requirement,
                attribute,
            } => write!(f, "requirement `{requirement}` attribute `{attribute}` is not finite"),
            Diagnostic::RefinementCycle { ids } => {
                write!(f, "refinement cycle through {}", ids.join(" -> "))
            }
            Diagnostic::MultipleParents { child, parents } => write!(
                f,
                "requirement `{child}` refines several parents: {}",
                parents.join(", ")
            ),
            Diagnostic::SelfPair { relation, id } => {
                write!(f, "{relation} pair relates `{id}` to itself")
            }
            Diagnostic::ConflictingInteraction { a, b } => {
                write!(f, "conflicting interaction: `{a}` and `{b}` are both combined and excluded")
            }
            Diagnostic::InvalidValueInteraction { attribute, reason } => {
                write!(f, "value interaction on `{attribute}`: {reason}")
            }
        }
    }
}

fn unordered(a: &RequirementId, b: &RequirementId) -> (RequirementId, RequirementId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

/// Checks every catalog invariant; an empty result means the catalog is valid.
pub fn validate_catalog(catalog: &RequirementCatalog) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut stakeholder_ids = HashSet::new();
    for s in &catalog.stakeholders {
        if s.id.is_empty() {
            out.push(Diagnostic::EmptyId {
                context: "stakeholders".into(),
            });
        } else if !stakeholder_ids.insert(s.id.as_str()) {
            out.push(Diagnostic::DuplicateStakeholder { id: s.id.clone() });
        }
        if !(s.weight.is_finite() && s.weight >= 0.0) {
            out.push(Diagnostic::InvalidWeight {
                stakeholder: s.id.clone(),
            });
        }
    }

    let mut ids = HashSet::new();
    for r in &catalog.requirements {
        if r.id.as_str().is_empty() {
            out.push(Diagnostic::EmptyId {
                context: "requirements".into(),
            });
        } else if !ids.insert(r.id.as_str()) {
            out.push(Diagnostic::DuplicateRequirement {
                id: r.id.to_string(),
            });
        }
    }

    for r in &catalog.requirements {
        for (attribute, values) in &r.attributes {
            if !values.all_finite() {
                out.push(Diagnostic::NonFiniteValue {
                    requirement: r.id.to_string(),
                    attribute: attribute.to_string(),
                });
            }
            if let AttributeValues::Sources { values, .. } = values {
                for source in values.keys() {
                    if !stakeholder_ids.contains(source.as_str()) {
                        out.push(Diagnostic::UnknownSource {
                            requirement: r.id.to_string(),
                            attribute: attribute.to_string(),
                            source: source.clone(),
                        });
                    }
                }
            }
        }
        if let Some(parent) = &r.parent {
            if !ids.contains(parent.as_str()) {
                out.push(Diagnostic::DanglingReference {
                    context: format!("parent of `{}`", r.id),
                    id: parent.to_string(),
                });
            }
        }
    }

    let interactions = &catalog.interactions;
    let relations: [(&str, &Vec<IdPair>); 4] = [
        ("refines", &interactions.refines),
        ("implies", &interactions.implies),
        ("combines", &interactions.combines),
        ("excludes", &interactions.excludes),
    ];
    for (relation, pairs) in relations {
        for (a, b) in pairs {
            for id in [a, b] {
                if !ids.contains(id.as_str()) {
                    out.push(Diagnostic::DanglingReference {
                        context: relation.to_string(),
                        id: id.to_string(),
                    });
                }
            }
            if a == b {
                out.push(Diagnostic::SelfPair {
                    relation: relation.to_string(),
                    id: a.to_string(),
                });
            }
        }
    }

    for vi in &interactions.value {
        for id in &vi.members {
            if !ids.contains(id.as_str()) {
                out.push(Diagnostic::DanglingReference {
                    context: format!("value interaction on `{}`", vi.attribute),
                    id: id.to_string(),
                });
            }
        }
        let distinct: HashSet<&RequirementId> = vi.members.iter().collect();
        if distinct.len() != vi.members.len() {
            out.push(Diagnostic::InvalidValueInteraction {
                attribute: vi.attribute.to_string(),
                reason: "members are not distinct".into(),
            });
        }
        if vi.members.len() < 2 {
            out.push(Diagnostic::InvalidValueInteraction {
                attribute: vi.attribute.to_string(),
                reason: "needs at least two members".into(),
            });
        }
        if !vi.amount.is_finite() || (vi.mode == ValueMode::Multiplicative && vi.amount <= 0.0) {
            out.push(Diagnostic::InvalidValueInteraction {
                attribute: vi.attribute.to_string(),
                reason: format!("invalid amount {}", vi.amount),
            });
        }
    }

    let combined: HashSet<_> = interactions
        .combines
        .iter()
        .map(|(a, b)| unordered(a, b))
        .collect();
    let mut reported = HashSet::new();
    for (a, b) in &interactions.excludes {
        let key = unordered(a, b);
        if combined.contains(&key) && reported.insert(key.clone()) {
            out.push(Diagnostic::ConflictingInteraction {
                a: key.0.to_string(),
                b: key.1.to_string(),
            });
        }
    }

    out.extend(refinement_diagnostics(catalog, &ids));
    out
}

fn refinement_diagnostics(catalog: &RequirementCatalog, ids: &HashSet<&str>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let edges = catalog.refinement_edges();
    for (parent, child) in &edges {
        if ids.contains(parent.as_str()) && ids.contains(child.as_str()) && parent != child {
            parents.entry(child.as_str()).or_default().push(parent.as_str());
        }
    }
    for (child, ps) in &parents {
        if ps.len() > 1 {
            out.push(Diagnostic::MultipleParents {
                child: child.to_string(),
                parents: ps.iter().map(|p| p.to_string()).collect(),
            });
        }
    }

    // Walk up from every node; revisiting a node on the current path is a cycle.
    let mut reported: HashSet<BTreeSet<&str>> = HashSet::new();
    for start in parents.keys() {
        let mut path = vec![*start];
        let mut current = *start;
        while let Some(ps) = parents.get(current) {
            let next = ps[0];
            if let Some(pos) = path.iter().position(|p| *p == next) {
                let cycle: Vec<&str> = path[pos..].to_vec();
                let members: BTreeSet<&str> = cycle.iter().copied().collect();
                if reported.insert(members) {
                    let mut ids: Vec<String> = cycle.iter().rev().map(|s| s.to_string()).collect();
                    ids.push(ids[0].clone());
                    out.push(Diagnostic::RefinementCycle { ids });
                }
                break;
            }
            path.push(next);
            current = next;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str) -> IdPair {
        (a.into(), b.into())
    }

    fn small() -> RequirementCatalog {
        RequirementCatalog {
            name: "small".into(),
            stakeholders: vec![Stakeholder {
                id: "c1".into(),
                weight: 1.0,
            }],
            requirements: vec![
                RequirementRecord::new("a").scalar("effort", 1.0),
                RequirementRecord::new("b").scalar("effort", 2.0),
                RequirementRecord::new("c").scalar("effort", 3.0),
            ],
            ..Default::default()
        }
    }

    #[test]
    fn valid_catalog_has_no_diagnostics() {
        assert!(validate_catalog(&small()).is_empty());
    }

    #[test]
    fn refinement_cycle_is_reported_once() {
        let mut c = small();
        c.interactions.refines = vec![pair("a", "b"), pair("b", "a")];
        let d = validate_catalog(&c);
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(matches!(d[0], Diagnostic::RefinementCycle { .. }));
    }

    #[test]
    fn combined_and_excluded_pair_conflicts() {
        let mut c = small();
        c.interactions.combines = vec![pair("a", "b")];
        c.interactions.excludes = vec![pair("b", "a")];
        let d = validate_catalog(&c);
        assert_eq!(
            d,
            vec![Diagnostic::ConflictingInteraction {
                a: "a".into(),
                b: "b".into()
            }]
        );
    }

    #[test]
    fn child_with_two_parents() {
        let mut c = small();
        c.interactions.refines = vec![pair("a", "c"), pair("b", "c")];
        let d = validate_catalog(&c);
        assert!(matches!(&d[..], [Diagnostic::MultipleParents { child, .. }] if child == "c"));
    }

    #[test]
    fn dangling_ids_and_bad_values() {
        let mut c = small();
        c.interactions.implies = vec![pair("a", "zz")];
        c.requirements[0]
            .attributes
            .insert(AttributeKey::value(), AttributeValues::sources([("ghost", 1.0)]));
        c.requirements[1]
            .attributes
            .insert(AttributeKey::risk(), AttributeValues::Scalar(f64::NAN));
        c.interactions.value.push(ValueInteraction {
            attribute: AttributeKey::effort(),
            members: vec!["a".into(), "b".into()],
            mode: ValueMode::Multiplicative,
            amount: 0.0,
        });
        let d = validate_catalog(&c);
        assert!(d.contains(&Diagnostic::DanglingReference {
            context: "implies".into(),
            id: "zz".into()
        }));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::UnknownSource { source, .. } if source == "ghost")));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::NonFiniteValue { .. })));
        assert!(d.iter().any(|x| matches!(x, Diagnostic::InvalidValueInteraction { .. })));
    }

    #[test]
    fn attribute_aliases_and_polarity() {
        assert_eq!(AttributeKey::parse("Sat"), AttributeKey::value());
        assert_eq!(AttributeKey::parse("eff"), AttributeKey::effort());
        assert_eq!(AttributeKey::parse("prevalence").as_str(), "frequency_of_use");
        assert_eq!(AttributeKey::effort().polarity(), Direction::Minimize);
        assert_eq!(AttributeKey::urgency().polarity(), Direction::Maximize);
        assert_eq!(AttributeKey::parse("my_metric").polarity(), Direction::Maximize);
    }
}
