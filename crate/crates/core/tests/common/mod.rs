//! Shared fixtures and independent oracles for the integration tests and the
//! acceptance harness. Nothing here calls into the solver or dominance code it
//! is used to check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use nrp_core::model::{
    AttributeValues, BoundSpec, InteractionSet, ObjectiveSpec, ProblemConfig, RequirementCatalog, RequirementRecord,
    Stakeholder, ValueInteraction, ValueMode,
};
use nrp_core::{AttributeKey, Direction, RequirementId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn datasets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("datasets")
}

pub fn dataset(name: &str) -> PathBuf {
    datasets_dir().join(format!("{name}.json"))
}

pub fn golden(name: &str) -> Value {
    let path = datasets_dir().join("golden").join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ids(v: &[&str]) -> Vec<RequirementId> {
    v.iter().map(|s| RequirementId::from(*s)).collect()
}

/// A small instance with scalar attributes only: no hierarchy, mandatory
/// requirements, combinations or exclusions, so preprocessing is the identity
/// and the oracle can work on the raw records.
#[derive(Clone, Debug)]
pub struct Instance {
    pub catalog: RequirementCatalog,
    pub config: ProblemConfig,
}

pub fn random_instance(seed: u64, max_n: usize) -> Instance {
    let mut r = rng(seed);
    let n = r.gen_range(1..=max_n);
    let mut requirements = Vec::new();
    for i in 0..n {
        requirements.push(
            RequirementRecord::new(format!("q{i}"))
                .scalar("value", r.gen_range(0..=9) as f64)
                .scalar("effort", r.gen_range(1..=9) as f64)
                .scalar("risk", r.gen_range(0..=5) as f64),
        );
    }
    // Acyclic by construction: prerequisites come earlier in a random order.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut implies = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.gen_bool(0.15) {
                implies.push((RequirementId::new(format!("q{}", order[a])), RequirementId::new(format!("q{}", order[b]))));
            }
        }
    }
    let mut value = Vec::new();
    if n >= 2 && r.gen_bool(0.4) {
        let k = r.gen_range(2..=n.min(3));
        let members: Vec<RequirementId> = (0..n)
            .collect::<Vec<_>>()
            .choose_multiple(&mut r, k)
            .map(|i| RequirementId::new(format!("q{i}")))
            .collect();
        let (mode, amount) = match r.gen_range(0..4) {
            0 => (ValueMode::Multiplicative, 0.8),
            1 => (ValueMode::Multiplicative, 1.25),
            2 => (ValueMode::Additive, -1.0),
            _ => (ValueMode::Additive, 2.0),
        };
        value.push(ValueInteraction {
            attribute: AttributeKey::effort(),
            members,
            mode,
            amount,
        });
    }
    let total_effort: f64 = requirements.iter().map(|q| scalar(q, "effort")).sum();
    let mut bounds = vec![BoundSpec::upper("effort", (total_effort * r.gen_range(0.2..0.9)).round())];
    if r.gen_bool(0.3) {
        let total_risk: f64 = requirements.iter().map(|q| scalar(q, "risk")).sum();
        bounds.push(BoundSpec::upper("risk", (total_risk * r.gen_range(0.3..0.9)).round()));
    }
    if r.gen_bool(0.2) {
        bounds.push(BoundSpec::lower("value", r.gen_range(0..=4) as f64));
    }
    let mut objectives = vec![ObjectiveSpec::maximize("value"), ObjectiveSpec::minimize("effort")];
    if r.gen_bool(0.5) {
        objectives.push(ObjectiveSpec::minimize("risk"));
    }
    Instance {
        catalog: RequirementCatalog {
            name: format!("random-{seed}"),
            requirements,
            interactions: InteractionSet {
                implies,
                value,
                ..Default::default()
            },
            ..Default::default()
        },
        config: ProblemConfig::new(objectives, bounds),
    }
}

fn scalar(r: &RequirementRecord, attribute: &str) -> f64 {
    match &r.attributes[&AttributeKey::parse(attribute)] {
        AttributeValues::Scalar(v) => *v,
        other => panic!("fixture attributes are scalar, got {other:?}"),
    }
}

/// One enumerated subset as the oracle sees it.
#[derive(Clone, Debug)]
pub struct OraclePoint {
    pub key: Vec<String>,
    pub values: BTreeMap<String, f64>,
}

fn within(v: f64, b: f64, upper: bool) -> bool {
    let slack = 1e-9 * b.abs().max(1.0);
    if upper {
        v <= b + slack
    } else {
        v >= b - slack
    }
}

/// Brute-force Pareto front: every subset, filtered for feasibility, then
/// pairwise non-domination. Written against the raw records only.
pub fn naive_front(inst: &Instance) -> Vec<OraclePoint> {
    let reqs = &inst.catalog.requirements;
    let n = reqs.len();
    let index: BTreeMap<&str, usize> = reqs.iter().enumerate().map(|(i, q)| (q.id.as_str(), i)).collect();
    let attrs = ["value", "effort", "risk"];
    let mut feasible = Vec::new();
    for mask in 0u32..(1 << n) {
        let on = |i: usize| mask & (1 << i) != 0;
        let ok = inst
            .catalog
            .interactions
            .implies
            .iter()
            .all(|(p, d)| !on(index[d.as_str()]) || on(index[p.as_str()]));
        if !ok {
            continue;
        }
        let mut values: BTreeMap<String, f64> = BTreeMap::new();
        for a in attrs {
            let mut total: f64 = (0..n).filter(|&i| on(i)).map(|i| scalar(&reqs[i], a)).sum();
            for vi in &inst.catalog.interactions.value {
                if vi.attribute.as_str() != a {
                    continue;
                }
                let members: Vec<usize> = vi.members.iter().map(|m| index[m.as_str()]).collect();
                if members.iter().all(|&m| on(m)) {
                    let base: f64 = members.iter().map(|&m| scalar(&reqs[m], a)).sum();
                    total += match vi.mode {
                        ValueMode::Additive => vi.amount,
                        ValueMode::Multiplicative => (vi.amount - 1.0) * base,
                    };
                }
            }
            values.insert(a.to_string(), total);
        }
        values.insert("n_req".into(), mask.count_ones() as f64);
        let bounds_ok = inst.config.bounds.iter().all(|b| {
            let v = values[b.attribute.as_str()];
            let bound = match b.value {
                nrp_core::model::BoundValue::Absolute(x) => x,
                nrp_core::model::BoundValue::Fraction(_) => unreachable!("fixtures use absolute bounds"),
            };
            within(v, bound, b.kind == nrp_core::model::BoundKind::Upper)
        });
        if !bounds_ok {
            continue;
        }
        let mut key: Vec<String> = (0..n).filter(|&i| on(i)).map(|i| reqs[i].id.to_string()).collect();
        key.sort();
        feasible.push(OraclePoint { key, values });
    }
    let objectives = &inst.config.objectives;
    feasible
        .iter()
        .filter(|p| !feasible.iter().any(|q| oracle_dominates(&q.values, &p.values, objectives)))
        .cloned()
        .collect()
}

/// `a` is at least as good everywhere and strictly better somewhere.
pub fn oracle_dominates(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>, objectives: &[ObjectiveSpec]) -> bool {
    let mut strictly = false;
    for o in objectives {
        let (x, y) = (a[o.attribute.as_str()], b[o.attribute.as_str()]);
        let (better, worse) = match o.direction {
            Direction::Maximize => (x > y, x < y),
            Direction::Minimize => (x < y, x > y),
        };
        if worse {
            return false;
        }
        strictly |= better;
    }
    strictly
}

/// Plain-vector dominance in minimize space, written out independently.
pub fn oracle_dominates_min(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

pub fn solution_values(s: &nrp_core::Solution) -> BTreeMap<String, f64> {
    s.values.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn key_of(s: &nrp_core::Solution) -> Vec<String> {
    s.key().into_iter().map(str::to_string).collect()
}

/// Compares a solver front with the oracle front; `Err` explains the first mismatch.
pub fn same_front(front: &nrp_core::ParetoFront, oracle: &[OraclePoint]) -> Result<(), String> {
    let got: BTreeMap<Vec<String>, BTreeMap<String, f64>> =
        front.iter().map(|s| (key_of(s), solution_values(s))).collect();
    let want: BTreeMap<Vec<String>, BTreeMap<String, f64>> =
        oracle.iter().map(|p| (p.key.clone(), p.values.clone())).collect();
    let gk: BTreeSet<_> = got.keys().collect();
    let wk: BTreeSet<_> = want.keys().collect();
    if gk != wk {
        return Err(format!(
            "sets differ: solver-only {:?}, oracle-only {:?}",
            gk.difference(&wk).collect::<Vec<_>>(),
            wk.difference(&gk).collect::<Vec<_>>()
        ));
    }
    for (k, w) in &want {
        for (a, v) in w {
            let g = got[k].get(a).copied();
            if !g.is_some_and(|g| (g - v).abs() <= 1e-9) {
                return Err(format!("{k:?}: {a} is {g:?}, oracle {v}"));
            }
        }
    }
    Ok(())
}

/// Connected components of an undirected graph by repeated relabelling.
pub fn component_sizes(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for &(a, b) in edges {
            let m = label[a].min(label[b]);
            if label[a] != m || label[b] != m {
                label[a] = m;
                label[b] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for l in label {
        *sizes.entry(l).or_default() += 1;
    }
    sizes.into_values().collect()
}

/// A catalog exercising every attribute form and interaction kind, for
/// serialization round trips.
pub fn random_catalog(seed: u64) -> RequirementCatalog {
    let mut r = rng(seed);
    let stakeholders: Vec<Stakeholder> = (0..r.gen_range(1..=4))
        .map(|i| Stakeholder {
            id: format!("s{i}"),
            weight: r.gen_range(1..=9) as f64,
        })
        .collect();
    let n = r.gen_range(1..=10);
    let mut requirements = Vec::new();
    for i in 0..n {
        let mut q = RequirementRecord::new(format!("x{i}")).scalar("effort", r.gen_range(1..=20) as f64 / 2.0);
        let mut picked: Vec<(String, f64)> = Vec::new();
        for s in &stakeholders {
            if r.gen_bool(0.7) {
                picked.push((s.id.clone(), r.gen_range(0..=5) as f64));
            }
        }
        if !picked.is_empty() {
            let mut v = AttributeValues::sources(picked);
            if r.gen_bool(0.2) {
                if let AttributeValues::Sources { stated_total, .. } = &mut v {
                    *stated_total = Some(r.gen_range(0..=30) as f64);
                }
            }
            q = q.with("value", v);
        }
        if r.gen_bool(0.4) {
            q = q.with(
                "price",
                AttributeValues::categories([("dev", r.gen_range(0..=9) as f64), ("qa", r.gen_range(0..=9) as f64)]),
            );
        }
        if r.gen_bool(0.15) {
            q = q.mandatory();
        }
        if i > 0 && r.gen_bool(0.3) {
            q = q.child_of(format!("x{}", r.gen_range(0..i)));
        }
        requirements.push(q);
    }
    let id = |i: usize| RequirementId::new(format!("x{i}"));
    let mut interactions = InteractionSet::default();
    for a in 0..n {
        for b in a + 1..n {
            match r.gen_range(0..20) {
                0 => interactions.implies.push((id(a), id(b))),
                1 => interactions.combines.push((id(a), id(b))),
                2 => interactions.excludes.push((id(a), id(b))),
                _ => {}
            }
        }
    }
    if n >= 2 && r.gen_bool(0.5) {
        interactions.value.push(ValueInteraction {
            attribute: AttributeKey::effort(),
            members: vec![id(0), id(1)],
            mode: if r.gen_bool(0.5) { ValueMode::Additive } else { ValueMode::Multiplicative },
            amount: r.gen_range(1..=15) as f64 / 10.0,
        });
    }
    RequirementCatalog {
        name: format!("catalog-{seed}"),
        stakeholders,
        requirements,
        interactions,
        ..Default::default()
    }
}
