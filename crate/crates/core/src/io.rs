//! JSON problem documents, front files and report rendering.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::aggregate::stakeholder_weights_from_influence;
use crate::error::{Error, Result};
use crate::indicators::{ColumnKind, FrontContext, IndicatorReport};
use crate::model::{
    validate_catalog, AggregationOp, AttributeKey, AttributeValues, BoundKind, BoundSpec, BoundValue,
    CoverageBasis, Diagnostic, Direction, IdPair, InteractionSet, LevelPolicy, ObjectiveSpec, ParetoFront,
    ProblemConfig, RequirementCatalog, RequirementId, RequirementRecord, ResolvedBound, Solution, Stakeholder,
    ValueInteraction, ValueMode,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStakeholder {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInfluence {
    rater: String,
    ratee: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRequirement {
    id: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    mandatory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    #[serde(default)]
    attributes: BTreeMap<String, Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValueInteraction {
    attribute: String,
    requirements: Vec<String>,
    mode: ValueMode,
    amount: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteractions {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    refines: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    implies: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    combines: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    excludes: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    value: Vec<RawValueInteraction>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObjectives {
    #[serde(default)]
    maximize: Vec<String>,
    #[serde(default)]
    minimize: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBound {
    kind: BoundKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fraction: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawBounds {
    One(RawBound),
    Many(Vec<RawBound>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawLevel {
    Named(String),
    Custom { keep: Vec<String> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    name: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    metadata: Value,
    #[serde(default)]
    stakeholders: Vec<RawStakeholder>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    influence: Vec<RawInfluence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default_weight: Option<f64>,
    requirements: Vec<RawRequirement>,
    #[serde(default)]
    interactions: RawInteractions,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    aggregation: BTreeMap<String, AggregationOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    objectives: Option<RawObjectives>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    bounds: BTreeMap<String, RawBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<RawLevel>,
}

/// A catalog with its run configuration and free-form metadata, as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemDocument {
    pub catalog: RequirementCatalog,
    /// `None` when the document names no objectives.
    pub config: Option<ProblemConfig>,
    pub metadata: Value,
    pub diagnostics: Vec<Diagnostic>,
}

fn json_error(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => Error::schema("document", strip_position(&e)),
        _ => Error::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e),
        },
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let s = e.to_string();
    match s.rfind(" at line ") {
        Some(i) => s[..i].to_string(),
        None => s,
    }
}

fn parse_attribute(
    requirement: &str,
    name: &str,
    value: &Value,
    stakeholders: &BTreeSet<&str>,
) -> Result<AttributeValues> {
    let field = || format!("requirements.{requirement}.attributes.{name}");
    let numbers = |m: &Map<String, Value>, what: &str| -> Result<BTreeMap<String, f64>> {
        m.iter()
            .map(|(k, v)| {
                v.as_f64()
                    .map(|x| (k.clone(), x))
                    .ok_or_else(|| Error::schema(format!("{}.{k}", field()), format!("{what} must be numbers")))
            })
            .collect()
    };
    match value {
        Value::Number(n) => Ok(AttributeValues::Scalar(n.as_f64().unwrap_or(f64::NAN))),
        Value::Object(m) if m.get("sources").is_some_and(Value::is_object) => {
            if let Some(extra) = m.keys().find(|k| *k != "sources" && *k != "total") {
                return Err(Error::schema(field(), format!("unexpected key `{extra}` in sources form")));
            }
            let total = match m.get("total") {
                None => None,
                Some(v) => Some(v.as_f64().ok_or_else(|| Error::schema(field(), "total must be a number"))?),
            };
            Ok(AttributeValues::Sources {
                values: numbers(m["sources"].as_object().expect("checked above"), "source values")?,
                stated_total: total,
            })
        }
        Value::Object(m) if m.get("categories").is_some_and(Value::is_object) => {
            if m.len() != 1 {
                return Err(Error::schema(field(), "categories form takes no other keys"));
            }
            Ok(AttributeValues::Categories(numbers(
                m["categories"].as_object().expect("checked above"),
                "category values",
            )?))
        }
        Value::Object(m) => {
            let values = numbers(m, "attribute values")?;
            if !values.is_empty() && values.keys().all(|k| stakeholders.contains(k.as_str())) {
                Ok(AttributeValues::Sources {
                    values,
                    stated_total: None,
                })
            } else {
                Ok(AttributeValues::Categories(values))
            }
        }
        _ => Err(Error::schema(field(), "expected a number or an object")),
    }
}

fn pairs(raw: Vec<(String, String)>) -> Vec<IdPair> {
    raw.into_iter().map(|(a, b)| (a.into(), b.into())).collect()
}

/// Parses a problem document from JSON text.
pub fn parse_document(text: &str) -> Result<ProblemDocument> {
    let raw: RawDocument = serde_json::from_str(text).map_err(json_error)?;

    let mut stakeholders: Vec<Stakeholder> = Vec::new();
    let default_weight = raw.default_weight.unwrap_or(1.0);
    let derived = if raw.influence.is_empty() {
        None
    } else {
        let influence = raw
            .influence
            .iter()
            .map(|i| ((i.rater.clone(), i.ratee.clone()), i.value))
            .collect();
        let names: Vec<String> = raw.stakeholders.iter().map(|s| s.id.clone()).collect();
        Some(stakeholder_weights_from_influence(&influence, &names, default_weight)?)
    };
    for s in &raw.stakeholders {
        let weight = match (s.weight, &derived) {
            (Some(w), _) => w,
            (None, Some(d)) => d.get(&s.id).copied().unwrap_or(default_weight),
            (None, None) => default_weight,
        };
        stakeholders.push(Stakeholder {
            id: s.id.clone(),
            weight,
        });
    }
    let stakeholder_ids: BTreeSet<&str> = raw.stakeholders.iter().map(|s| s.id.as_str()).collect();

    let mut requirements = Vec::with_capacity(raw.requirements.len());
    for r in &raw.requirements {
        let mut record = RequirementRecord::new(r.id.as_str());
        record.mandatory = r.mandatory;
        record.parent = r.parent.as_deref().map(RequirementId::from);
        for (name, value) in &r.attributes {
            let values = parse_attribute(&r.id, name, value, &stakeholder_ids)?;
            record.attributes.insert(AttributeKey::parse(name), values);
        }
        requirements.push(record);
    }

    let interactions = InteractionSet {
        refines: pairs(raw.interactions.refines),
        implies: pairs(raw.interactions.implies),
        combines: pairs(raw.interactions.combines),
        excludes: pairs(raw.interactions.excludes),
        value: raw
            .interactions
            .value
            .into_iter()
            .map(|v| ValueInteraction {
                attribute: AttributeKey::parse(&v.attribute),
                members: v.requirements.into_iter().map(RequirementId::from).collect(),
                mode: v.mode,
                amount: v.amount,
            })
            .collect(),
    };

    let catalog = RequirementCatalog {
        name: raw.name,
        stakeholders,
        requirements,
        interactions,
        aggregation: raw
            .aggregation
            .into_iter()
            .map(|(k, v)| (AttributeKey::parse(&k), v))
            .collect(),
    };

    let mut bounds = Vec::new();
    for (name, spec) in raw.bounds {
        let list = match spec {
            RawBounds::One(b) => vec![b],
            RawBounds::Many(bs) => bs,
        };
        for b in list {
            let value = match (b.value, b.fraction) {
                (Some(v), None) => BoundValue::Absolute(v),
                (None, Some(f)) => BoundValue::Fraction(f),
                _ => {
                    return Err(Error::schema(
                        format!("bounds.{name}"),
                        "give exactly one of `value` or `fraction`",
                    ))
                }
            };
            bounds.push(BoundSpec {
                attribute: AttributeKey::parse(&name),
                kind: b.kind,
                value,
            });
        }
    }
    let level = match raw.level {
        None => LevelPolicy::Leaf,
        Some(RawLevel::Named(n)) => match n.as_str() {
            "leaf" => LevelPolicy::Leaf,
            "root" => LevelPolicy::Root,
            other => return Err(Error::schema("level", format!("unknown level `{other}`"))),
        },
        Some(RawLevel::Custom { keep }) => LevelPolicy::Custom {
            keep: keep.into_iter().map(RequirementId::from).collect(),
        },
    };
    let config = raw.objectives.map(|o| ProblemConfig {
        objectives: o
            .maximize
            .iter()
            .map(|a| ObjectiveSpec::maximize(a))
            .chain(o.minimize.iter().map(|a| ObjectiveSpec::minimize(a)))
            .collect(),
        bounds,
        level,
    });

    let diagnostics = validate_catalog(&catalog);
    Ok(ProblemDocument {
        catalog,
        config,
        metadata: raw.metadata,
        diagnostics,
    })
}

pub fn load_document(path: impl AsRef<Path>) -> Result<ProblemDocument> {
    parse_document(&std::fs::read_to_string(path)?)
}

/// Loads just the catalog with its validation diagnostics.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<(RequirementCatalog, Vec<Diagnostic>)> {
    let doc = load_document(path)?;
    Ok((doc.catalog, doc.diagnostics))
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn number_map(m: &BTreeMap<String, f64>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), number(*v))).collect())
}

fn attribute_json(values: &AttributeValues) -> Value {
    match values {
        AttributeValues::Scalar(v) => number(*v),
        AttributeValues::Sources {
            values,
            stated_total: None,
        } if !values.is_empty() => number_map(values),
        AttributeValues::Sources { values, stated_total } => {
            let mut m = Map::new();
            m.insert("sources".into(), number_map(values));
            if let Some(t) = stated_total {
                m.insert("total".into(), number(*t));
            }
            Value::Object(m)
        }
        AttributeValues::Categories(values) => {
            let mut m = Map::new();
            m.insert("categories".into(), number_map(values));
            Value::Object(m)
        }
    }
}

fn id_pairs(p: &[IdPair]) -> Vec<(String, String)> {
    p.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Serializes a catalog (and optional configuration) as a problem document.
pub fn document_to_json(catalog: &RequirementCatalog, config: Option<&ProblemConfig>, metadata: &Value) -> Result<String> {
    let raw = RawDocument {
        name: catalog.name.clone(),
        metadata: metadata.clone(),
        stakeholders: catalog
            .stakeholders
            .iter()
            .map(|s| RawStakeholder {
                id: s.id.clone(),
                weight: Some(s.weight),
            })
            .collect(),
        influence: Vec::new(),
        default_weight: None,
        requirements: catalog
            .requirements
            .iter()
            .map(|r| RawRequirement {
                id: r.id.to_string(),
                mandatory: r.mandatory,
                parent: r.parent.as_ref().map(ToString::to_string),
                attributes: r
                    .attributes
                    .iter()
                    .map(|(k, v)| (k.to_string(), attribute_json(v)))
                    .collect(),
            })
            .collect(),
        interactions: RawInteractions {
            refines: id_pairs(&catalog.interactions.refines),
            implies: id_pairs(&catalog.interactions.implies),
            combines: id_pairs(&catalog.interactions.combines),
            excludes: id_pairs(&catalog.interactions.excludes),
            value: catalog
                .interactions
                .value
                .iter()
                .map(|v| RawValueInteraction {
                    attribute: v.attribute.to_string(),
                    requirements: v.members.iter().map(ToString::to_string).collect(),
                    mode: v.mode,
                    amount: v.amount,
                })
                .collect(),
        },
        aggregation: catalog
            .aggregation
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        objectives: config.map(|c| RawObjectives {
            maximize: c
                .objectives
                .iter()
                .filter(|o| o.direction == Direction::Maximize)
                .map(|o| o.attribute.to_string())
                .collect(),
            minimize: c
                .objectives
                .iter()
                .filter(|o| o.direction == Direction::Minimize)
                .map(|o| o.attribute.to_string())
                .collect(),
        }),
        bounds: config
            .map(|c| {
                let mut out: BTreeMap<String, Vec<RawBound>> = BTreeMap::new();
                for b in &c.bounds {
                    let (value, fraction) = match b.value {
                        BoundValue::Absolute(v) => (Some(v), None),
                        BoundValue::Fraction(f) => (None, Some(f)),
                    };
                    out.entry(b.attribute.to_string()).or_default().push(RawBound {
                        kind: b.kind,
                        value,
                        fraction,
                    });
                }
                out.into_iter()
                    .map(|(k, mut v)| {
                        let one = if v.len() == 1 { RawBounds::One(v.remove(0)) } else { RawBounds::Many(v) };
                        (k, one)
                    })
                    .collect()
            })
            .unwrap_or_default(),
        level: config.map(|c| match &c.level {
            LevelPolicy::Leaf => RawLevel::Named("leaf".into()),
            LevelPolicy::Root => RawLevel::Named("root".into()),
            LevelPolicy::Custom { keep } => RawLevel::Custom {
                keep: keep.iter().map(ToString::to_string).collect(),
            },
        }),
    };
    serde_json::to_string_pretty(&raw).map_err(json_error)
}

pub fn save_document(
    path: impl AsRef<Path>,
    catalog: &RequirementCatalog,
    config: Option<&ProblemConfig>,
    metadata: &Value,
) -> Result<()> {
    let mut text = document_to_json(catalog, config, metadata)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// A solved front plus what analysis needs later, as written by `nrp solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontDocument {
    pub name: String,
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub branches: usize,
    pub objectives: Vec<ObjectiveSpec>,
    #[serde(default)]
    pub bounds: Vec<ResolvedBound>,
    #[serde(default)]
    pub coverage_basis: CoverageBasis,
    #[serde(default)]
    pub mandatory: Vec<RequirementId>,
    #[serde(default)]
    pub mandatory_baseline: BTreeMap<AttributeKey, f64>,
    pub solutions: Vec<Solution>,
}

impl FrontDocument {
    pub fn context(&self) -> FrontContext {
        FrontContext {
            objectives: self.objectives.clone(),
            bounds: self.bounds.clone(),
            coverage_basis: self.coverage_basis.clone(),
        }
    }

    pub fn front(&self) -> ParetoFront {
        ParetoFront {
            solutions: self.solutions.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(json_error)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(json_error)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Table,
    Delimited,
}

/// Display precision; values are never rounded before this point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub ratio: usize,
    pub percent: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Self { ratio: 2, percent: 0 }
    }
}

fn format_value(v: Option<f64>, kind: ColumnKind, precision: Precision) -> String {
    let Some(v) = v else { return "-".into() };
    match kind {
        ColumnKind::Attribute => {
            let s = format!("{v:.2}");
            let s = s.trim_end_matches('0').trim_end_matches('.');
            if s == "-0" { "0".into() } else { s.to_string() }
        }
        ColumnKind::Ratio => format!("{v:.*}", precision.ratio),
        ColumnKind::Fraction => format!("{:.*}%", precision.percent, v * 100.0),
    }
}

/// Renders a report as an aligned text table (best values starred) or as CSV
/// with full-precision numbers plus `best` and `score` columns.
pub fn render_report(report: &IndicatorReport, format: ExportFormat, precision: Precision) -> Result<String> {
    match format {
        ExportFormat::Table => Ok(render_table(report, precision)),
        ExportFormat::Delimited => render_csv(report),
    }
}

fn render_table(report: &IndicatorReport, precision: Precision) -> String {
    let mut header = vec!["id".to_string(), "requirements".to_string()];
    header.extend(report.columns.iter().map(|c| c.label.clone()));
    header.push("score".into());
    let mut rows: Vec<Vec<String>> = vec![header];
    for (i, r) in report.rows.iter().enumerate() {
        let mut row = vec![
            format!("sol_{}", i + 1),
            format!("{{{}}}", r.requirements.iter().map(|x| x.as_str()).collect::<Vec<_>>().join(",")),
        ];
        for (c, col) in report.columns.iter().enumerate() {
            let mut cell = format_value(r.values[c], col.kind, precision);
            if r.best[c] {
                cell.push('*');
            }
            row.push(cell);
        }
        row.push(r.score.to_string());
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c < 2 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn render_csv(report: &IndicatorReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "requirements".to_string()];
    header.extend(report.columns.iter().map(|c| c.label.clone()));
    header.push("best".into());
    header.push("score".into());
    w.write_record(&header)?;
    for (i, r) in report.rows.iter().enumerate() {
        let mut row = vec![
            format!("sol_{}", i + 1),
            r.requirements.iter().map(|x| x.as_str()).collect::<Vec<_>>().join(" "),
        ];
        row.extend(r.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
        row.push(
            report
                .columns
                .iter()
                .zip(&r.best)
                .filter(|(_, b)| **b)
                .map(|(c, _)| c.label.as_str())
                .collect::<Vec<_>>()
                .join(" "),
        );
        row.push(r.score.to_string());
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Renders every front member (no handpicking) with the given indicators.
pub fn export_front(
    front: &ParetoFront,
    ctx: &FrontContext,
    indicators: &[crate::indicators::Indicator],
    format: ExportFormat,
) -> Result<String> {
    let report = crate::indicators::score_solutions(&front.solutions, indicators, ctx, ctx.bounded_attribute().as_ref())?;
    render_report(&report, format, Precision::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "name": "small",
        "stakeholders": [{"id": "c1", "weight": 2}, {"id": "c2"}],
        "requirements": [
            {"id": "a", "attributes": {"value": {"c1": 1, "c2": 3}, "effort": {"dev": 2, "test": 1}}},
            {"id": "b", "mandatory": true, "attributes": {"value": {"sources": {"c1": 1}, "total": 9}, "effort": 4}}
        ],
        "interactions": {"implies": [["a", "b"]]},
        "objectives": {"maximize": ["sat"], "minimize": ["eff"]},
        "bounds": {"effort": {"kind": "upper", "fraction": 0.5}}
    }"#;

    #[test]
    fn parses_attribute_forms() {
        let doc = parse_document(SMALL).unwrap();
        assert!(doc.diagnostics.is_empty());
        let a = &doc.catalog.requirements[0];
        assert!(matches!(a.attributes[&AttributeKey::value()], AttributeValues::Sources { stated_total: None, .. }));
        assert!(matches!(a.attributes[&AttributeKey::effort()], AttributeValues::Categories(_)));
        let b = &doc.catalog.requirements[1];
        assert!(matches!(b.attributes[&AttributeKey::value()], AttributeValues::Sources { stated_total: Some(9.0), .. }));
        assert_eq!(doc.catalog.stakeholders[1].weight, 1.0);
        let cfg = doc.config.unwrap();
        assert_eq!(cfg.objectives[0], ObjectiveSpec::maximize("value"));
        assert_eq!(cfg.bounds[0].value, BoundValue::Fraction(0.5));
    }

    #[test]
    fn document_round_trip() {
        let doc = parse_document(SMALL).unwrap();
        let text = document_to_json(&doc.catalog, doc.config.as_ref(), &doc.metadata).unwrap();
        let back = parse_document(&text).unwrap();
        assert_eq!(back.catalog, doc.catalog);
        assert_eq!(back.config, doc.config);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_document("").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = parse_document("{\n  \"name\": \"x\",\n  \"requirements\": [,]\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn unknown_interaction_kind_is_a_schema_error() {
        let text = r#"{"name": "x", "requirements": [], "interactions": {"satisfies": []}}"#;
        let err = parse_document(text).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
        assert!(err.to_string().contains("satisfies"), "{err}");
    }

    #[test]
    fn bad_bound_forms() {
        let text = r#"{"name": "x", "requirements": [], "objectives": {"maximize": ["sat"]},
            "bounds": {"effort": {"kind": "upper", "value": 1, "fraction": 0.5}}}"#;
        assert!(matches!(parse_document(text), Err(Error::Schema { .. })));
    }

    #[test]
    fn influence_derives_weights() {
        let text = r#"{"name": "x", "stakeholders": [{"id": "c1"}, {"id": "c2"}, {"id": "c3"}],
            "influence": [{"rater": "c1", "ratee": "c2", "value": 3}, {"rater": "c1", "ratee": "c3", "value": 5}],
            "requirements": []}"#;
        let doc = parse_document(text).unwrap();
        let w: Vec<f64> = doc.catalog.stakeholders.iter().map(|s| s.weight).collect();
        assert_eq!(w, vec![8.0, 1.0, 1.0]);
    }
}
