mod common;

use nrp_core::indicators::{squandering, stakeholder_coverage};
use nrp_core::io::{document_to_json, load_document, parse_document};
use nrp_core::model::{validate_catalog, Diagnostic, RequirementRecord};
use nrp_core::objectives::solution_for;
use nrp_core::preprocess::{build_problem, merge_combinations, scalarize, to_catalog};
use nrp_core::solvers::{solve_exhaustive, solve_greedy, solve_hillclimb, GreedyConfig, HillClimbConfig};
use nrp_core::{AttributeKey, RequirementCatalog, RequirementId, Selection, Solution};
use proptest::prelude::*;
use serde_json::Value;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exhaustive_matches_brute_force(seed in any::<u64>()) {
        let inst = random_instance(seed, 10);
        let problem = build_problem(&inst.catalog, &inst.config).unwrap().remove(0);
        let front = solve_exhaustive(&problem, 25).unwrap();
        prop_assert_eq!(same_front(&front, &naive_front(&inst)), Ok(()));
    }

    #[test]
    fn heuristics_never_beat_the_exact_front(seed in any::<u64>()) {
        let inst = random_instance(seed, 10);
        let problem = build_problem(&inst.catalog, &inst.config).unwrap().remove(0);
        let exact = solve_exhaustive(&problem, 25).unwrap();
        let greedy = solve_greedy(&problem, &GreedyConfig { seeded: true, ..Default::default() }).unwrap();
        let climb = solve_hillclimb(&problem, &HillClimbConfig { restarts: 3, max_iters: 50, seed }).unwrap();
        for h in greedy.iter().chain(climb.iter()) {
            let hv = solution_values(h);
            for e in exact.iter() {
                prop_assert!(!oracle_dominates(&hv, &solution_values(e), &inst.config.objectives));
            }
        }
    }

    #[test]
    fn merge_count_law_and_conservation(
        n in 2usize..16,
        raw_edges in prop::collection::vec((0usize..16, 0usize..16), 0..12),
        values in prop::collection::vec(0u8..10, 16),
    ) {
        let edges: Vec<(usize, usize)> =
            raw_edges.into_iter().filter(|(a, b)| a < &n && b < &n && a != b).collect();
        let catalog = RequirementCatalog {
            requirements: (0..n)
                .map(|i| RequirementRecord::new(format!("m{i}")).scalar("effort", values[i] as f64))
                .collect(),
            ..Default::default()
        };
        let prepared: Vec<_> = catalog.requirements.iter().map(|q| scalarize(&catalog, q).unwrap()).collect();
        let combines: Vec<_> = edges.iter().map(|&(a, b)| (prepared[a].id.clone(), prepared[b].id.clone())).collect();
        let merged = merge_combinations(&prepared, &combines, &[], &[], &[]).unwrap();
        let expected = n - component_sizes(n, &edges).iter().map(|s| s - 1).sum::<usize>();
        prop_assert_eq!(merged.requirements.len(), expected);
        let sum = |xs: &[nrp_core::model::PreparedRequirement]| xs.iter().map(|p| p.scalars[&AttributeKey::effort()]).sum::<f64>();
        prop_assert!((sum(&prepared) - sum(&merged.requirements)).abs() < 1e-9);
        let provenance: usize = merged.requirements.iter().map(|r| r.provenance.len()).sum();
        prop_assert_eq!(provenance, n);
    }

    #[test]
    fn catalogs_survive_a_round_trip(seed in any::<u64>()) {
        let catalog = random_catalog(seed);
        let text = document_to_json(&catalog, None, &Value::Null).unwrap();
        let back = parse_document(&text).unwrap();
        prop_assert_eq!(back.catalog, catalog);
    }

    #[test]
    fn dangling_ids_are_reported(seed in any::<u64>(), kind in 0usize..3) {
        let mut catalog = random_catalog(seed);
        let ghost = RequirementId::new("ghost");
        let first = catalog.requirements[0].id.clone();
        match kind {
            0 => catalog.interactions.implies.push((first, ghost)),
            1 => catalog.interactions.excludes.push((ghost, first)),
            _ => catalog.requirements[0].parent = Some(ghost),
        }
        let found = validate_catalog(&catalog)
            .iter()
            .any(|d| matches!(d, Diagnostic::DanglingReference { id, .. } if id == "ghost"));
        prop_assert!(found);
    }

    #[test]
    fn coverage_is_monotone_and_bounded(a in any::<u16>(), b in any::<u16>()) {
        let doc = load_document(dataset("concise")).unwrap();
        let problem = build_problem(&doc.catalog, doc.config.as_ref().unwrap()).unwrap().remove(0);
        let n = problem.len();
        let small = Selection::from_mask(n, a as u64 & ((1 << n) - 1));
        let large = Selection::from_mask(n, (a | b) as u64 & ((1 << n) - 1));
        let (s, l) = (solution_for(&problem, &small).unwrap(), solution_for(&problem, &large).unwrap());
        for who in ["client1", "client2"] {
            let cs = stakeholder_coverage(&s, who, &AttributeKey::value(), &problem.coverage_basis).unwrap();
            let cl = stakeholder_coverage(&l, who, &AttributeKey::value(), &problem.coverage_basis).unwrap();
            prop_assert!((0.0..=1.0).contains(&cs) && (0.0..=1.0).contains(&cl));
            prop_assert!(cs <= cl + 1e-12);
        }
    }

    #[test]
    fn squandering_complements_effort_share(effort in 0.0f64..1e4, bound in 1.0f64..1e4) {
        let mut values = std::collections::BTreeMap::new();
        values.insert(AttributeKey::effort(), effort);
        let s = Solution::new(Vec::new(), values);
        let squ = squandering(&s, bound).unwrap();
        prop_assert!((squ + effort / bound - 1.0).abs() < 1e-9);
    }
}

#[test]
fn preprocessing_a_prepared_problem_changes_nothing() {
    for name in ["concise", "classic", "wordproc"] {
        let doc = load_document(dataset(name)).unwrap();
        for problem in build_problem(&doc.catalog, doc.config.as_ref().unwrap()).unwrap() {
            let (catalog, config) = to_catalog(&problem);
            let again = build_problem(&catalog, &config).unwrap();
            assert_eq!(again.len(), 1, "{name}");
            let again = &again[0];
            let ids = |p: &nrp_core::ReleaseProblem| p.requirements.iter().map(|r| r.id.clone()).collect::<Vec<_>>();
            assert_eq!(ids(again), ids(&problem), "{name}");
            for (x, y) in again.requirements.iter().zip(&problem.requirements) {
                assert_eq!(x.scalars, y.scalars, "{name} {}", x.id);
            }
            let mut a = again.implies.clone();
            let mut b = problem.implies.clone();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b, "{name}");
            assert_eq!(again.bounds, problem.bounds, "{name}");
            let full = Selection::full(problem.len());
            assert_eq!(
                solution_for(again, &full).unwrap().values,
                solution_for(&problem, &full).unwrap().values,
                "{name}"
            );
        }
    }
}
