//! Collapsing multivalued estimates into one scalar per requirement.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::AggregationOp;

/// Weighted sum of per-source values. Sources with no value contribute nothing.
pub fn aggregate_weighted(
    values: &BTreeMap<String, f64>,
    weights: &BTreeMap<String, f64>,
) -> Result<f64> {
    values.iter().try_fold(0.0, |acc, (source, v)| {
        let w = weights.get(source).ok_or_else(|| Error::MissingWeight {
            source_id: source.clone(),
        })?;
        Ok(acc + w * v)
    })
}

/// Plain sum over categories.
pub fn aggregate_categories(values: &BTreeMap<String, f64>) -> f64 {
    values.values().sum()
}

pub fn aggregate_extremum(values: &BTreeMap<String, f64>, op: AggregationOp) -> Result<f64> {
    let mut it = values.values().copied();
    let first = it.next().ok_or(Error::EmptyExtremum)?;
    Ok(match op {
        AggregationOp::Min => it.fold(first, f64::min),
        _ => it.fold(first, f64::max),
    })
}

/// Applies `op` to per-source values.
pub fn aggregate_sources(
    values: &BTreeMap<String, f64>,
    weights: &BTreeMap<String, f64>,
    op: AggregationOp,
) -> Result<f64> {
    match op {
        AggregationOp::WeightedSum => aggregate_weighted(values, weights),
        AggregationOp::Max | AggregationOp::Min => aggregate_extremum(values, op),
    }
}

/// Weight of each rater = sum of the influence it has over others.
///
/// `stakeholders` lists everyone who needs a weight; those without ratings get
/// `default_weight`.
pub fn stakeholder_weights_from_influence(
    influence: &BTreeMap<(String, String), f64>,
    stakeholders: &[String],
    default_weight: f64,
) -> Result<BTreeMap<String, f64>> {
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for ((rater, ratee), value) in influence {
        if *value < 0.0 || !value.is_finite() {
            return Err(Error::NegativeInfluence {
                rater: rater.clone(),
                ratee: ratee.clone(),
                value: *value,
            });
        }
        *sums.entry(rater.clone()).or_insert(0.0) += value;
    }
    for s in stakeholders {
        sums.entry(s.clone()).or_insert(default_weight);
    }
    Ok(sums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn weighted_sum_of_two_clients() {
        let w = map(&[("c1", 1.0), ("c2", 1.0)]);
        assert_eq!(aggregate_weighted(&map(&[("c1", 1.0), ("c2", 5.0)]), &w).unwrap(), 6.0);
        assert_eq!(aggregate_weighted(&map(&[("c1", 0.0), ("c2", 1.0)]), &w).unwrap(), 1.0);
        assert_eq!(aggregate_weighted(&BTreeMap::new(), &w).unwrap(), 0.0);
    }

    #[test]
    fn missing_weight_names_the_source() {
        let err = aggregate_weighted(&map(&[("c9", 1.0)]), &map(&[("c1", 1.0)])).unwrap_err();
        assert!(err.to_string().contains("c9"));
    }

    #[test]
    fn categories_and_extrema() {
        assert_eq!(aggregate_categories(&map(&[("backend", 3.0), ("testing", 2.0)])), 5.0);
        assert_eq!(aggregate_categories(&map(&[("story_points", 8.0)])), 8.0);
        let v = map(&[("c1", 2.0), ("c2", 7.0)]);
        assert_eq!(aggregate_extremum(&v, AggregationOp::Max).unwrap(), 7.0);
        assert_eq!(aggregate_extremum(&v, AggregationOp::Min).unwrap(), 2.0);
        let one = map(&[("c1", 4.0)]);
        assert_eq!(aggregate_extremum(&one, AggregationOp::Min).unwrap(), 4.0);
        assert_eq!(aggregate_extremum(&one, AggregationOp::Max).unwrap(), 4.0);
        assert!(matches!(
            aggregate_extremum(&BTreeMap::new(), AggregationOp::Max),
            Err(Error::EmptyExtremum)
        ));
    }

    #[test]
    fn influence_weights() {
        let mut inf = BTreeMap::new();
        inf.insert(("c1".to_string(), "c2".to_string()), 3.0);
        inf.insert(("c1".to_string(), "c3".to_string()), 5.0);
        let names: Vec<String> = ["c1", "c2"].iter().map(|s| s.to_string()).collect();
        let w = stakeholder_weights_from_influence(&inf, &names, 1.0).unwrap();
        assert_eq!(w["c1"], 8.0);
        assert_eq!(w["c2"], 1.0);

        inf.insert(("c2".to_string(), "c1".to_string()), -1.0);
        assert!(stakeholder_weights_from_influence(&inf, &names, 1.0).is_err());
    }

    fn value_map() -> impl Strategy<Value = BTreeMap<String, f64>> {
        prop::collection::btree_map("[a-e]", -100.0f64..100.0, 0..5)
    }

    proptest! {
        #[test]
        fn weighted_sum_is_linear(values in value_map(), alpha in -10.0f64..10.0) {
            let weights: BTreeMap<String, f64> =
                ["a", "b", "c", "d", "e"].iter().enumerate().map(|(i, s)| (s.to_string(), i as f64 + 0.5)).collect();
            let scaled: BTreeMap<String, f64> = values.iter().map(|(k, v)| (k.clone(), alpha * v)).collect();
            let lhs = aggregate_weighted(&scaled, &weights).unwrap();
            let rhs = alpha * aggregate_weighted(&values, &weights).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn weight_scaling_is_covariant(values in value_map(), alpha in 0.0f64..10.0) {
            let weights: BTreeMap<String, f64> =
                ["a", "b", "c", "d", "e"].iter().map(|s| (s.to_string(), 2.0)).collect();
            let scaled: BTreeMap<String, f64> = weights.iter().map(|(k, w)| (k.clone(), alpha * w)).collect();
            let lhs = aggregate_weighted(&values, &scaled).unwrap();
            let rhs = alpha * aggregate_weighted(&values, &weights).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn categories_equal_unit_weights(values in value_map()) {
            let ones: BTreeMap<String, f64> = values.keys().map(|k| (k.clone(), 1.0)).collect();
            let a = aggregate_categories(&values);
            let b = aggregate_weighted(&values, &ones).unwrap();
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
