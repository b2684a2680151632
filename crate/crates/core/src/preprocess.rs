//! Turns a catalog plus a run configuration into one [`ReleaseProblem`] per
//! exclusion branch.
//!
//! Stages run in a fixed order: refinement level selection, scalarization,
//! mandatory removal with bound adjustment, combination merging, exclusion
//! splitting. Interactions that mention a requirement dropped by an earlier
//! stage (refined away, mandatory, or made unselectable) are resolved at that
//! stage and do not reach later ones.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::aggregate::{aggregate_categories, aggregate_sources};
use crate::error::{Error, Result};
use crate::model::{
    validate_catalog, AttributeKey, AttributeValues, BoundKind, BoundSpec, BoundValue,
    CoverageBasis, IdPair, InteractionSet, LevelPolicy, ObjectiveSpec, PreparedInteraction,
    PreparedRequirement, ProblemConfig, ReleaseProblem, RequirementCatalog, RequirementId,
    RequirementRecord, ResolvedBound, Stakeholder, ValueInteraction, ValueMode,
};

/// Value interaction in id space, carried between stages.
#[derive(Clone, Debug, PartialEq)]
pub struct PendingInteraction {
    pub attribute: AttributeKey,
    pub members: Vec<RequirementId>,
    pub mode: ValueMode,
    pub amount: f64,
    /// Sum of the attribute over the original members.
    pub base: f64,
}

impl PendingInteraction {
    fn delta(&self) -> f64 {
        match self.mode {
            ValueMode::Additive => self.amount,
            ValueMode::Multiplicative => (self.amount - 1.0) * self.base,
        }
    }
}

/// Ids of the requirements that form the decision universe at `level`, in
/// catalog order. For each refinement tree either a node or its children are
/// kept, never both.
pub fn resolve_refinement(catalog: &RequirementCatalog, level: &LevelPolicy) -> Vec<RequirementId> {
    let edges = catalog.refinement_edges();
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut has_parent: HashSet<&str> = HashSet::new();
    for (p, c) in &edges {
        children.entry(p.as_str()).or_default().push(c.as_str());
        has_parent.insert(c.as_str());
    }

    let kept: HashSet<&str> = match level {
        LevelPolicy::Leaf => catalog
            .requirements
            .iter()
            .map(|r| r.id.as_str())
            .filter(|id| !children.contains_key(id))
            .collect(),
        LevelPolicy::Root => catalog
            .requirements
            .iter()
            .map(|r| r.id.as_str())
            .filter(|id| !has_parent.contains(id))
            .collect(),
        LevelPolicy::Custom { keep } => {
            let mut out = HashSet::new();
            let mut stack: Vec<&str> = catalog
                .requirements
                .iter()
                .map(|r| r.id.as_str())
                .filter(|id| !has_parent.contains(id))
                .collect();
            while let Some(id) = stack.pop() {
                match children.get(id) {
                    Some(cs) if !keep.contains(id) => stack.extend(cs.iter().copied()),
                    _ => {
                        out.insert(id);
                    }
                }
            }
            out
        }
    };

    catalog
        .requirements
        .iter()
        .filter(|r| kept.contains(r.id.as_str()))
        .map(|r| r.id.clone())
        .collect()
}

/// Reduces every attribute of `record` to a scalar, keeping raw per-source and
/// per-category values alongside.
pub fn scalarize(catalog: &RequirementCatalog, record: &RequirementRecord) -> Result<PreparedRequirement> {
    let weights = catalog.weights();
    let mut prepared = PreparedRequirement {
        id: record.id.clone(),
        provenance: vec![record.id.clone()],
        scalars: BTreeMap::new(),
        sources: BTreeMap::new(),
        categories: BTreeMap::new(),
    };
    for (attribute, values) in &record.attributes {
        let scalar = match values {
            AttributeValues::Scalar(v) => *v,
            AttributeValues::Sources {
                values,
                stated_total,
            } => {
                prepared.sources.insert(attribute.clone(), values.clone());
                match stated_total {
                    Some(total) => *total,
                    None => aggregate_sources(values, &weights, catalog.aggregation_for(attribute))?,
                }
            }
            AttributeValues::Categories(values) => {
                prepared.categories.insert(attribute.clone(), values.clone());
                aggregate_categories(values)
            }
        };
        prepared.scalars.insert(attribute.clone(), scalar);
    }
    Ok(prepared)
}

/// Result of taking mandatory requirements out of the decision set.
#[derive(Clone, Debug, PartialEq)]
pub struct MandatoryRemoval {
    pub requirements: Vec<PreparedRequirement>,
    pub bounds: Vec<BoundSpec>,
    pub baseline: BTreeMap<AttributeKey, f64>,
}

/// Drops `mandatory` from `requirements` and lowers every absolute bound by the
/// mandatory total of its attribute. Fraction bounds pass through untouched;
/// they are resolved later against what remains.
pub fn remove_mandatory(
    requirements: &[PreparedRequirement],
    mandatory: &BTreeSet<RequirementId>,
    bounds: &[BoundSpec],
) -> Result<MandatoryRemoval> {
    let mut baseline: BTreeMap<AttributeKey, f64> = BTreeMap::new();
    let mut reduced = Vec::new();
    for r in requirements {
        if mandatory.contains(&r.id) {
            for (k, v) in &r.scalars {
                *baseline.entry(k.clone()).or_insert(0.0) += v;
            }
            *baseline.entry(AttributeKey::n_req()).or_insert(0.0) += 1.0;
        } else {
            reduced.push(r.clone());
        }
    }
    let bounds = adjust_bounds(bounds, &baseline)?;
    Ok(MandatoryRemoval {
        requirements: reduced,
        bounds,
        baseline,
    })
}

fn adjust_bounds(bounds: &[BoundSpec], baseline: &BTreeMap<AttributeKey, f64>) -> Result<Vec<BoundSpec>> {
    bounds
        .iter()
        .map(|b| {
            let BoundValue::Absolute(value) = b.value else {
                return Ok(b.clone());
            };
            let used = baseline.get(&b.attribute).copied().unwrap_or(0.0);
            let adjusted = value - used;
            if b.kind == BoundKind::Upper && adjusted < -1e-9 * value.abs().max(1.0) {
                return Err(Error::MandatoryInfeasible {
                    attribute: b.attribute.to_string(),
                    required: used,
                    bound: value,
                });
            }
            Ok(BoundSpec {
                value: BoundValue::Absolute(if b.kind == BoundKind::Upper {
                    adjusted.max(0.0)
                } else {
                    adjusted
                }),
                ..b.clone()
            })
        })
        .collect()
}

/// Decision set after combination merging, in id space.
#[derive(Clone, Debug, PartialEq)]
pub struct Merged {
    pub requirements: Vec<PreparedRequirement>,
    pub implies: Vec<IdPair>,
    pub excludes: Vec<IdPair>,
    pub value_interactions: Vec<PendingInteraction>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut x = x;
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the earlier requirement as representative so merged order is stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

fn merge_group(members: &[&PreparedRequirement]) -> PreparedRequirement {
    if let [only] = members {
        return (*only).clone();
    }
    let id = RequirementId::new(
        members
            .iter()
            .map(|m| m.id.as_str())
            .collect::<Vec<_>>()
            .join("+"),
    );
    let provenance = members.iter().flat_map(|m| m.provenance.iter().cloned()).collect();

    let common = |get: &dyn Fn(&PreparedRequirement) -> BTreeSet<AttributeKey>| {
        let mut it = members.iter().map(|m| get(m));
        let first = it.next().unwrap_or_default();
        it.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
    };

    let mut scalars = BTreeMap::new();
    for k in common(&|m| m.scalars.keys().cloned().collect()) {
        scalars.insert(k.clone(), members.iter().map(|m| m.scalars[&k]).sum());
    }
    let sum_maps = |maps: Vec<&BTreeMap<String, f64>>| {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for m in maps {
            for (s, v) in m {
                *out.entry(s.clone()).or_insert(0.0) += v;
            }
        }
        out
    };
    let mut sources = BTreeMap::new();
    for k in common(&|m| m.sources.keys().cloned().collect()) {
        sources.insert(k.clone(), sum_maps(members.iter().map(|m| &m.sources[&k]).collect()));
    }
    let mut categories = BTreeMap::new();
    for k in common(&|m| m.categories.keys().cloned().collect()) {
        categories.insert(k.clone(), sum_maps(members.iter().map(|m| &m.categories[&k]).collect()));
    }
    PreparedRequirement {
        id,
        provenance,
        scalars,
        sources,
        categories,
    }
}

/// Merges every connected component of the `combines` graph into a single
/// requirement whose attributes are member sums, and rewrites the other
/// relations onto the merged ids. All pairs must reference `requirements`.
pub fn merge_combinations(
    requirements: &[PreparedRequirement],
    combines: &[IdPair],
    implies: &[IdPair],
    excludes: &[IdPair],
    value_interactions: &[PendingInteraction],
) -> Result<Merged> {
    let index: HashMap<&RequirementId, usize> =
        requirements.iter().enumerate().map(|(i, r)| (&r.id, i)).collect();
    let mut uf = UnionFind::new(requirements.len());
    for (a, b) in combines {
        if let (Some(&ia), Some(&ib)) = (index.get(a), index.get(b)) {
            uf.union(ia, ib);
        }
    }

    for (a, b) in excludes {
        if let (Some(&ia), Some(&ib)) = (index.get(a), index.get(b)) {
            if uf.find(ia) == uf.find(ib) {
                return Err(Error::Contradiction {
                    a: a.to_string(),
                    b: b.to_string(),
                });
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<&PreparedRequirement>> = BTreeMap::new();
    for (i, r) in requirements.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(r);
    }
    let mut rename: HashMap<RequirementId, RequirementId> = HashMap::new();
    let mut merged = Vec::with_capacity(groups.len());
    for members in groups.values() {
        let m = merge_group(members);
        for original in members {
            rename.insert(original.id.clone(), m.id.clone());
        }
        merged.push(m);
    }

    let rewrite = |pairs: &[IdPair]| -> Vec<IdPair> {
        let mut seen = HashSet::new();
        pairs
            .iter()
            .filter_map(|(a, b)| Some((rename.get(a)?.clone(), rename.get(b)?.clone())))
            .filter(|(a, b)| a != b)
            .filter(|p| seen.insert(p.clone()))
            .collect()
    };
    let implies = rewrite(implies);
    let excludes = rewrite(excludes);

    let mut interactions = Vec::new();
    for vi in value_interactions {
        let mut members: Vec<RequirementId> = Vec::new();
        for m in &vi.members {
            let Some(target) = rename.get(m) else { continue };
            if !members.contains(target) {
                members.push(target.clone());
            }
        }
        if members.is_empty() {
            continue;
        }
        interactions.push(PendingInteraction {
            members,
            ..vi.clone()
        });
    }

    // An interaction living entirely inside one merged requirement always
    // fires with it, so it becomes part of that requirement's value.
    let mut kept = Vec::new();
    for vi in interactions {
        if let [only] = vi.members.as_slice() {
            if let Some(r) = merged.iter_mut().find(|r| &r.id == only) {
                if let Some(v) = r.scalars.get_mut(&vi.attribute) {
                    *v += vi.delta();
                    continue;
                }
            }
        }
        kept.push(vi);
    }

    Ok(Merged {
        requirements: merged,
        implies,
        excludes,
        value_interactions: kept,
    })
}

/// Enumerates maximal independent sets of the conflict graph over `nodes`.
fn maximal_independent_sets(nodes: &[usize], conflicts: &HashSet<(usize, usize)>) -> Vec<Vec<usize>> {
    let conflict = |a: usize, b: usize| conflicts.contains(&(a.min(b), a.max(b)));
    let compatible =
        |v: usize, set: &BTreeSet<usize>| -> BTreeSet<usize> { set.iter().copied().filter(|&u| u != v && !conflict(u, v)).collect() };

    fn recurse(
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        compatible: &dyn Fn(usize, &BTreeSet<usize>) -> BTreeSet<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() && x.is_empty() {
            let mut set = r.clone();
            set.sort_unstable();
            out.push(set);
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| (compatible(u, &p).len(), std::cmp::Reverse(u)))
            .expect("p or x is non-empty");
        let pivot_nbrs = compatible(pivot, &p);
        let candidates: Vec<usize> = p.iter().copied().filter(|v| !pivot_nbrs.contains(v)).collect();
        for v in candidates {
            r.push(v);
            recurse(r, compatible(v, &p), compatible(v, &x), compatible, out);
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }

    let mut out = Vec::new();
    recurse(
        &mut Vec::new(),
        nodes.iter().copied().collect(),
        BTreeSet::new(),
        &compatible,
        &mut out,
    );
    out.sort();
    out
}

/// Splits the decision set into branches free of exclusion conflicts.
///
/// Each branch holds one maximal conflict-free choice among the excluded
/// requirements plus everything else; requirements whose prerequisites are
/// absent from a branch are pruned from it, and branches contained in another
/// branch are dropped. Returned as sorted index lists into `requirements`.
pub fn split_exclusions(
    requirements: &[PreparedRequirement],
    implies: &[IdPair],
    excludes: &[IdPair],
) -> Vec<Vec<usize>> {
    let index: HashMap<&RequirementId, usize> =
        requirements.iter().enumerate().map(|(i, r)| (&r.id, i)).collect();
    let mut conflicts = HashSet::new();
    let mut involved = BTreeSet::new();
    for (a, b) in excludes {
        if let (Some(&ia), Some(&ib)) = (index.get(a), index.get(b)) {
            conflicts.insert((ia.min(ib), ia.max(ib)));
            involved.insert(ia);
            involved.insert(ib);
        }
    }
    let all: Vec<usize> = (0..requirements.len()).collect();
    if involved.is_empty() {
        return vec![all];
    }

    let prereqs: Vec<(usize, usize)> = implies
        .iter()
        .filter_map(|(p, d)| Some((*index.get(p)?, *index.get(d)?)))
        .collect();

    let free: Vec<usize> = all.iter().copied().filter(|i| !involved.contains(i)).collect();
    let involved: Vec<usize> = involved.into_iter().collect();
    let mut branches: Vec<BTreeSet<usize>> = Vec::new();
    for choice in maximal_independent_sets(&involved, &conflicts) {
        let mut branch: BTreeSet<usize> = free.iter().copied().chain(choice).collect();
        loop {
            let orphaned: Vec<usize> = prereqs
                .iter()
                .filter(|(p, d)| branch.contains(d) && !branch.contains(p))
                .map(|(_, d)| *d)
                .collect();
            if orphaned.is_empty() {
                break;
            }
            for d in orphaned {
                branch.remove(&d);
            }
        }
        if !branches.contains(&branch) {
            branches.push(branch);
        }
    }

    let maximal: Vec<Vec<usize>> = branches
        .iter()
        .filter(|b| !branches.iter().any(|o| o != *b && b.is_subset(o)))
        .map(|b| b.iter().copied().collect())
        .collect();
    maximal
}

/// Returns a cycle among `implies` if there is one (Kahn's algorithm, then a
/// walk through the leftover nodes).
pub fn find_implication_cycle(n: usize, implies: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, d) in implies {
        out[p].push(d);
        indegree[d] += 1;
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut removed = vec![false; n];
    while let Some(v) = queue.pop_front() {
        removed[v] = true;
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    let start = (0..n).find(|&i| !removed[i])?;
    // Every leftover node has a leftover predecessor; walk backwards until a repeat.
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, d) in implies {
        if !removed[p] && !removed[d] {
            preds[d].push(p);
        }
    }
    let mut path = vec![start];
    let mut seen: HashMap<usize, usize> = HashMap::from([(start, 0)]);
    let mut v = start;
    loop {
        v = preds[v][0];
        if let Some(&pos) = seen.get(&v) {
            let mut cycle: Vec<usize> = path[pos..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return Some(cycle);
        }
        seen.insert(v, path.len());
        path.push(v);
    }
}

fn check_config(catalog: &RequirementCatalog, config: &ProblemConfig) -> Result<()> {
    if config.objectives.is_empty() {
        return Err(Error::NoObjectives);
    }
    let mut seen = HashSet::new();
    for o in &config.objectives {
        if !seen.insert(&o.attribute) {
            return Err(Error::DuplicateObjective(o.attribute.to_string()));
        }
    }
    let known = catalog.attribute_names();
    for attribute in config
        .objectives
        .iter()
        .map(|o| &o.attribute)
        .chain(config.bounds.iter().map(|b| &b.attribute))
    {
        if !attribute.is_count() && !known.contains(attribute) {
            return Err(Error::UnknownAttribute(attribute.to_string()));
        }
    }
    for b in &config.bounds {
        let bad = match b.value {
            BoundValue::Absolute(v) => (!v.is_finite()).then(|| format!("value {v} is not finite")),
            BoundValue::Fraction(f) => {
                (!(f > 0.0 && f <= 1.0)).then(|| format!("fraction {f} is outside (0, 1]"))
            }
        };
        if let Some(reason) = bad {
            return Err(Error::InvalidBound {
                attribute: b.attribute.to_string(),
                reason,
            });
        }
    }
    Ok(())
}

/// Mandatory set after closure: prerequisites and combination partners of a
/// mandatory requirement are mandatory too.
fn close_mandatory(
    initial: BTreeSet<RequirementId>,
    implies: &[IdPair],
    combines: &[IdPair],
) -> BTreeSet<RequirementId> {
    let mut mandatory = initial;
    loop {
        let mut grew = false;
        for (p, d) in implies {
            if mandatory.contains(d) && !mandatory.contains(p) {
                mandatory.insert(p.clone());
                grew = true;
            }
        }
        for (a, b) in combines {
            match (mandatory.contains(a), mandatory.contains(b)) {
                (true, false) => {
                    mandatory.insert(b.clone());
                    grew = true;
                }
                (false, true) => {
                    mandatory.insert(a.clone());
                    grew = true;
                }
                _ => {}
            }
        }
        if !grew {
            return mandatory;
        }
    }
}

/// Requirements that can never be selected: exclusion partners of mandatory
/// requirements, and everything that requires or must accompany one of those.
fn unselectable(
    mandatory: &BTreeSet<RequirementId>,
    interactions: &Relations,
) -> Result<BTreeSet<RequirementId>> {
    let mut out = BTreeSet::new();
    for (a, b) in &interactions.excludes {
        match (mandatory.contains(a), mandatory.contains(b)) {
            (true, true) => {
                return Err(Error::Contradiction {
                    a: a.to_string(),
                    b: b.to_string(),
                })
            }
            (true, false) => {
                out.insert(b.clone());
            }
            (false, true) => {
                out.insert(a.clone());
            }
            _ => {}
        }
    }
    loop {
        let mut grew = false;
        for (p, d) in &interactions.implies {
            if out.contains(p) && out.insert(d.clone()) {
                grew = true;
            }
        }
        for (a, b) in &interactions.combines {
            if out.contains(a) && out.insert(b.clone()) {
                grew = true;
            }
            if out.contains(b) && out.insert(a.clone()) {
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    if let Some(id) = out.iter().find(|id| mandatory.contains(*id)) {
        return Err(Error::Contradiction {
            a: id.to_string(),
            b: "a mandatory requirement".into(),
        });
    }
    Ok(out)
}

/// Id-space relations restricted to a universe.
struct Relations {
    implies: Vec<IdPair>,
    combines: Vec<IdPair>,
    excludes: Vec<IdPair>,
}

impl Relations {
    fn restrict(set: &InteractionSet, universe: &HashSet<&RequirementId>) -> Self {
        let keep = |pairs: &[IdPair]| -> Vec<IdPair> {
            pairs
                .iter()
                .filter(|(a, b)| universe.contains(a) && universe.contains(b))
                .cloned()
                .collect()
        };
        Self {
            implies: keep(&set.implies),
            combines: keep(&set.combines),
            excludes: keep(&set.excludes),
        }
    }
}

/// True when the requirement or any refinement relative of it is mandatory.
fn mandatory_after_refinement(catalog: &RequirementCatalog, kept: &[RequirementId]) -> BTreeSet<RequirementId> {
    let edges = catalog.refinement_edges();
    let mut parent: HashMap<&RequirementId, &RequirementId> = HashMap::new();
    for (p, c) in &edges {
        parent.insert(c, p);
    }
    let flagged: HashSet<&RequirementId> =
        catalog.requirements.iter().filter(|r| r.mandatory).map(|r| &r.id).collect();
    let ancestors = |id: &RequirementId| {
        let mut out = Vec::new();
        let mut cur = id;
        while let Some(p) = parent.get(cur) {
            if out.contains(p) {
                break;
            }
            out.push(*p);
            cur = p;
        }
        out
    };
    let mut out = BTreeSet::new();
    for id in kept {
        if flagged.contains(id) || ancestors(id).iter().any(|a| flagged.contains(a)) {
            out.insert(id.clone());
        }
    }
    // A mandatory requirement folded into a kept ancestor makes that ancestor mandatory.
    for m in &flagged {
        for a in ancestors(m) {
            if kept.contains(a) {
                out.insert(a.clone());
            }
        }
    }
    out
}

fn pending_interactions(
    catalog: &RequirementCatalog,
    scalars: &HashMap<&RequirementId, &PreparedRequirement>,
) -> Vec<(ValueInteraction, f64)> {
    catalog
        .interactions
        .value
        .iter()
        .filter(|vi| vi.members.iter().all(|m| scalars.contains_key(m)))
        .map(|vi| {
            let base = vi
                .members
                .iter()
                .filter_map(|m| scalars[m].scalars.get(&vi.attribute))
                .sum();
            (vi.clone(), base)
        })
        .collect()
}

/// Full pipeline: catalog + configuration to one problem per exclusion branch.
pub fn build_problem(catalog: &RequirementCatalog, config: &ProblemConfig) -> Result<Vec<ReleaseProblem>> {
    let diagnostics = validate_catalog(catalog);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidCatalog(diagnostics));
    }
    check_config(catalog, config)?;

    let kept = resolve_refinement(catalog, &config.level);
    let required = config.required_attributes();
    let mut missing = Vec::new();
    let mut prepared = Vec::with_capacity(kept.len());
    for id in &kept {
        let record = catalog.requirement(id.as_str()).expect("kept ids come from the catalog");
        for attribute in &required {
            if !record.attributes.contains_key(attribute) {
                missing.push((id.to_string(), attribute.to_string()));
            }
        }
        prepared.push(scalarize(catalog, record)?);
    }
    if !missing.is_empty() {
        return Err(Error::MissingAttributes(missing));
    }

    let universe: HashSet<&RequirementId> = kept.iter().collect();
    let relations = Relations::restrict(&catalog.interactions, &universe);
    let mandatory = close_mandatory(
        mandatory_after_refinement(catalog, &kept),
        &relations.implies,
        &relations.combines,
    );
    let blocked = unselectable(&mandatory, &relations)?;

    let by_id: HashMap<&RequirementId, &PreparedRequirement> = prepared.iter().map(|r| (&r.id, r)).collect();
    let interactions = pending_interactions(catalog, &by_id);

    let removal = remove_mandatory(&prepared, &mandatory, &config.bounds)?;
    let mut baseline = removal.baseline;

    // Interactions among mandatory requirements only always fire; others lose
    // their mandatory members (always present) and die with blocked ones.
    let mut pending = Vec::new();
    let mut always: BTreeMap<AttributeKey, f64> = BTreeMap::new();
    for (vi, base) in interactions {
        if vi.members.iter().any(|m| blocked.contains(m)) {
            continue;
        }
        let p = PendingInteraction {
            attribute: vi.attribute.clone(),
            members: vi.members.iter().filter(|m| !mandatory.contains(*m)).cloned().collect(),
            mode: vi.mode,
            amount: vi.amount,
            base,
        };
        if p.members.is_empty() {
            *always.entry(p.attribute.clone()).or_insert(0.0) += p.delta();
        } else {
            pending.push(p);
        }
    }
    for (k, v) in &always {
        *baseline.entry(k.clone()).or_insert(0.0) += v;
    }
    let bounds = if always.is_empty() {
        removal.bounds
    } else {
        adjust_bounds(&removal.bounds, &always)?
    };

    let decision: Vec<PreparedRequirement> = removal
        .requirements
        .into_iter()
        .filter(|r| !blocked.contains(&r.id))
        .collect();
    let live: HashSet<&RequirementId> = decision.iter().map(|r| &r.id).collect();
    let live_relations = Relations::restrict(&catalog.interactions, &live);

    let merged = merge_combinations(
        &decision,
        &live_relations.combines,
        &live_relations.implies,
        &live_relations.excludes,
        &pending,
    )?;

    let index: HashMap<&RequirementId, usize> =
        merged.requirements.iter().enumerate().map(|(i, r)| (&r.id, i)).collect();
    let implies_idx: Vec<(usize, usize)> =
        merged.implies.iter().map(|(p, d)| (index[p], index[d])).collect();
    if let Some(cycle) = find_implication_cycle(merged.requirements.len(), &implies_idx) {
        return Err(Error::ImplicationCycle(
            cycle.iter().map(|&i| merged.requirements[i].id.to_string()).collect(),
        ));
    }

    let resolved = resolve_bounds(&bounds, &merged.requirements);
    let coverage_basis = coverage_totals(&merged.requirements);
    let branches = split_exclusions(&merged.requirements, &merged.implies, &merged.excludes);

    let problems = branches
        .iter()
        .enumerate()
        .map(|(b, members)| {
            let position: HashMap<usize, usize> = members.iter().enumerate().map(|(new, &old)| (old, new)).collect();
            let requirements: Vec<PreparedRequirement> =
                members.iter().map(|&i| merged.requirements[i].clone()).collect();
            let implies = implies_idx
                .iter()
                .filter_map(|(p, d)| Some((*position.get(p)?, *position.get(d)?)))
                .collect();
            let value_interactions = merged
                .value_interactions
                .iter()
                .filter_map(|vi| {
                    let members = vi
                        .members
                        .iter()
                        .map(|m| position.get(index.get(m)?).copied())
                        .collect::<Option<Vec<usize>>>()?;
                    Some(PreparedInteraction {
                        attribute: vi.attribute.clone(),
                        members,
                        mode: vi.mode,
                        amount: vi.amount,
                        base: vi.base,
                    })
                })
                .collect();
            ReleaseProblem {
                name: catalog.name.clone(),
                branch: b,
                requirements,
                implies,
                value_interactions,
                objectives: config.objectives.clone(),
                bounds: resolved.clone(),
                mandatory: mandatory.iter().cloned().collect(),
                mandatory_baseline: baseline.clone(),
                coverage_basis: coverage_basis.clone(),
            }
        })
        .collect();
    Ok(problems)
}

fn resolve_bounds(bounds: &[BoundSpec], requirements: &[PreparedRequirement]) -> Vec<ResolvedBound> {
    bounds
        .iter()
        .map(|b| {
            let value = match b.value {
                BoundValue::Absolute(v) => v,
                BoundValue::Fraction(f) => {
                    let total: f64 = if b.attribute.is_count() {
                        requirements.len() as f64
                    } else {
                        requirements.iter().filter_map(|r| r.scalars.get(&b.attribute)).sum()
                    };
                    f * total
                }
            };
            ResolvedBound {
                attribute: b.attribute.clone(),
                kind: b.kind,
                value,
            }
        })
        .collect()
}

fn coverage_totals(requirements: &[PreparedRequirement]) -> CoverageBasis {
    let mut basis = CoverageBasis::default();
    for r in requirements {
        for (attribute, values) in &r.sources {
            let slot = basis.sources.entry(attribute.clone()).or_default();
            for (s, v) in values {
                *slot.entry(s.clone()).or_insert(0.0) += v;
            }
        }
        for (attribute, values) in &r.categories {
            let slot = basis.categories.entry(attribute.clone()).or_default();
            for (c, v) in values {
                *slot.entry(c.clone()).or_insert(0.0) += v;
            }
        }
    }
    basis
}

/// Writes a prepared problem back out as a flat catalog and configuration.
///
/// Multiplicative interactions come back as additive ones carrying the same
/// delta, so preprocessing the result reproduces the problem.
pub fn to_catalog(problem: &ReleaseProblem) -> (RequirementCatalog, ProblemConfig) {
    let mut stakeholders: BTreeSet<String> = BTreeSet::new();
    let requirements = problem
        .requirements
        .iter()
        .map(|r| {
            let mut record = RequirementRecord::new(r.id.clone());
            for (k, v) in &r.scalars {
                let values = if let Some(sources) = r.sources.get(k) {
                    stakeholders.extend(sources.keys().cloned());
                    AttributeValues::Sources {
                        values: sources.clone(),
                        stated_total: Some(*v),
                    }
                } else if let Some(categories) = r.categories.get(k).filter(|c| (c.values().sum::<f64>() - v).abs() == 0.0) {
                    AttributeValues::Categories(categories.clone())
                } else {
                    AttributeValues::Scalar(*v)
                };
                record.attributes.insert(k.clone(), values);
            }
            record
        })
        .collect();
    let id = |i: usize| problem.requirements[i].id.clone();
    let interactions = InteractionSet {
        implies: problem.implies.iter().map(|&(p, d)| (id(p), id(d))).collect(),
        value: problem
            .value_interactions
            .iter()
            .map(|vi| ValueInteraction {
                attribute: vi.attribute.clone(),
                members: vi.members.iter().map(|&m| id(m)).collect(),
                mode: ValueMode::Additive,
                amount: vi.delta(),
            })
            .collect(),
        ..Default::default()
    };
    let catalog = RequirementCatalog {
        name: problem.name.clone(),
        stakeholders: stakeholders
            .into_iter()
            .map(|id| Stakeholder { id, weight: 1.0 })
            .collect(),
        requirements,
        interactions,
        aggregation: BTreeMap::new(),
    };
    let config = ProblemConfig {
        objectives: problem.objectives.clone(),
        bounds: problem
            .bounds
            .iter()
            .map(|b| BoundSpec {
                attribute: b.attribute.clone(),
                kind: b.kind,
                value: BoundValue::Absolute(b.value),
            })
            .collect(),
        level: LevelPolicy::Leaf,
    };
    (catalog, config)
}

/// Objectives from attribute names using each attribute's default polarity.
pub fn default_objectives<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<ObjectiveSpec> {
    names
        .into_iter()
        .map(|n| {
            let attribute = AttributeKey::parse(n);
            let direction = attribute.polarity();
            ObjectiveSpec { attribute, direction }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, ObjectiveSpec};

    fn req(id: &str, effort: f64, value: f64) -> RequirementRecord {
        RequirementRecord::new(id).scalar("effort", effort).scalar("value", value)
    }

    fn pair(a: &str, b: &str) -> IdPair {
        (a.into(), b.into())
    }

    fn config(bound: Option<f64>) -> ProblemConfig {
        ProblemConfig::new(
            vec![ObjectiveSpec::maximize("value"), ObjectiveSpec::minimize("effort")],
            bound.map(|b| vec![BoundSpec::upper("effort", b)]).unwrap_or_default(),
        )
    }

    fn catalog(reqs: Vec<RequirementRecord>, interactions: InteractionSet) -> RequirementCatalog {
        RequirementCatalog {
            name: "t".into(),
            requirements: reqs,
            interactions,
            ..Default::default()
        }
    }

    fn ids(p: &ReleaseProblem) -> Vec<&str> {
        p.requirements.iter().map(|r| r.id.as_str()).collect()
    }

    #[test]
    fn identity_without_interactions() {
        let c = catalog(vec![req("a", 1.0, 2.0), req("b", 3.0, 4.0)], InteractionSet::default());
        let ps = build_problem(&c, &config(Some(3.0))).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ids(&ps[0]), ["a", "b"]);
        assert_eq!(ps[0].bounds[0].value, 3.0);
        assert!(ps[0].mandatory_baseline.is_empty());
    }

    #[test]
    fn refinement_levels() {
        let mut c = catalog(
            vec![req("p", 5.0, 5.0), req("c1", 1.0, 1.0), req("c2", 2.0, 2.0), req("x", 1.0, 1.0)],
            InteractionSet {
                refines: vec![pair("p", "c1"), pair("p", "c2")],
                ..Default::default()
            },
        );
        let leaf = resolve_refinement(&c, &LevelPolicy::Leaf);
        assert_eq!(leaf, vec!["c1".into(), "c2".into(), RequirementId::from("x")]);
        let root = resolve_refinement(&c, &LevelPolicy::Root);
        assert_eq!(root, vec!["p".into(), RequirementId::from("x")]);
        let custom = LevelPolicy::Custom {
            keep: ["p".into()].into_iter().collect(),
        };
        assert_eq!(resolve_refinement(&c, &custom), root);

        c.requirements[1].attributes.clear();
        let err = build_problem(&c, &config(None)).unwrap_err();
        assert!(matches!(err, Error::MissingAttributes(ref m) if m.len() == 2), "{err}");
    }

    #[test]
    fn mandatory_adjusts_bounds_and_is_removed() {
        let mut a = req("a", 4.0, 1.0);
        a.mandatory = true;
        let c = catalog(vec![a, req("b", 3.0, 4.0)], InteractionSet::default());
        let ps = build_problem(&c, &config(Some(18.0))).unwrap();
        assert_eq!(ids(&ps[0]), ["b"]);
        assert_eq!(ps[0].bounds[0].value, 14.0);
        assert_eq!(ps[0].mandatory_baseline[&AttributeKey::effort()], 4.0);

        let err = build_problem(&c, &config(Some(3.0))).unwrap_err();
        assert!(matches!(err, Error::MandatoryInfeasible { .. }));
    }

    #[test]
    fn mandatory_promotes_prerequisites_and_blocks_exclusions() {
        let mut a = req("a", 1.0, 1.0);
        a.mandatory = true;
        let c = catalog(
            vec![a, req("b", 1.0, 1.0), req("c", 1.0, 1.0), req("d", 1.0, 1.0)],
            InteractionSet {
                implies: vec![pair("b", "a"), pair("c", "d")],
                excludes: vec![pair("a", "c")],
                ..Default::default()
            },
        );
        let ps = build_problem(&c, &config(None)).unwrap();
        assert_eq!(ps.len(), 1);
        assert!(ps[0].is_empty(), "{:?}", ids(&ps[0]));
        assert_eq!(ps[0].mandatory, vec![RequirementId::from("a"), "b".into()]);
    }

    #[test]
    fn merge_closure_and_rewrite() {
        let reqs: Vec<PreparedRequirement> = ["a", "b", "c", "d"]
            .iter()
            .enumerate()
            .map(|(i, id)| PreparedRequirement {
                id: (*id).into(),
                provenance: vec![(*id).into()],
                scalars: [(AttributeKey::effort(), i as f64 + 1.0)].into_iter().collect(),
                sources: BTreeMap::new(),
                categories: BTreeMap::new(),
            })
            .collect();
        let m = merge_combinations(
            &reqs,
            &[pair("a", "b"), pair("b", "c")],
            &[pair("d", "a"), pair("a", "c"), pair("d", "b")],
            &[],
            &[],
        )
        .unwrap();
        assert_eq!(m.requirements.len(), 2);
        assert_eq!(m.requirements[0].id.as_str(), "a+b+c");
        assert_eq!(m.requirements[0].scalars[&AttributeKey::effort()], 6.0);
        assert_eq!(m.implies, vec![pair("d", "a+b+c")]);

        let err = merge_combinations(&reqs, &[pair("a", "b")], &[], &[pair("b", "a")], &[]).unwrap_err();
        assert!(matches!(err, Error::Contradiction { .. }));
    }

    #[test]
    fn independent_exclusions_give_four_branches() {
        let c = catalog(
            ["a", "b", "c", "d"].iter().map(|id| req(id, 1.0, 1.0)).collect(),
            InteractionSet {
                excludes: vec![pair("a", "b"), pair("c", "d")],
                ..Default::default()
            },
        );
        let ps = build_problem(&c, &config(None)).unwrap();
        let branches: Vec<Vec<&str>> = ps.iter().map(ids).collect();
        assert_eq!(branches, vec![vec!["a", "c"], vec!["a", "d"], vec!["b", "c"], vec!["b", "d"]]);
    }

    #[test]
    fn branch_pruning_drops_orphans_and_subsets() {
        // c requires b; choosing a over b orphans c; the {a} branch is not a subset of {b, c}.
        let c = catalog(
            ["a", "b", "c"].iter().map(|id| req(id, 1.0, 1.0)).collect(),
            InteractionSet {
                implies: vec![pair("b", "c")],
                excludes: vec![pair("a", "b")],
                ..Default::default()
            },
        );
        let ps = build_problem(&c, &config(None)).unwrap();
        let branches: Vec<Vec<&str>> = ps.iter().map(ids).collect();
        assert_eq!(branches, vec![vec!["a"], vec!["b", "c"]]);
        assert_eq!(ps[1].implies, vec![(0, 1)]);
    }

    #[test]
    fn implication_cycle_is_reported() {
        let c = catalog(
            ["a", "b", "c"].iter().map(|id| req(id, 1.0, 1.0)).collect(),
            InteractionSet {
                implies: vec![pair("a", "b"), pair("b", "c"), pair("c", "a")],
                ..Default::default()
            },
        );
        let err = build_problem(&c, &config(None)).unwrap_err();
        let Error::ImplicationCycle(cycle) = err else { panic!("{err}") };
        assert_eq!(cycle.len(), 4);
        assert_eq!(cycle.first(), cycle.last());
    }

    #[test]
    fn merged_cycle_only_after_rewrite() {
        // a->b and b->c are fine until a and c merge.
        let c = catalog(
            ["a", "b", "c"].iter().map(|id| req(id, 1.0, 1.0)).collect(),
            InteractionSet {
                implies: vec![pair("a", "b"), pair("b", "c")],
                combines: vec![pair("a", "c")],
                ..Default::default()
            },
        );
        assert!(matches!(build_problem(&c, &config(None)), Err(Error::ImplicationCycle(_))));
    }

    #[test]
    fn fraction_bound_resolves_against_decision_total() {
        let c = catalog(vec![req("a", 10.0, 1.0), req("b", 30.0, 1.0)], InteractionSet::default());
        let mut cfg = config(None);
        cfg.bounds.push(BoundSpec::upper_fraction("effort", 0.25));
        let ps = build_problem(&c, &cfg).unwrap();
        assert_eq!(ps[0].bounds[0].value, 10.0);
    }

    #[test]
    fn config_errors() {
        let c = catalog(vec![req("a", 1.0, 1.0)], InteractionSet::default());
        let mut cfg = config(None);
        cfg.objectives.push(ObjectiveSpec {
            attribute: AttributeKey::parse("sat"),
            direction: Direction::Minimize,
        });
        assert!(matches!(build_problem(&c, &cfg), Err(Error::DuplicateObjective(_))));
        let cfg = ProblemConfig::new(vec![ObjectiveSpec::maximize("ghost")], vec![]);
        assert!(matches!(build_problem(&c, &cfg), Err(Error::UnknownAttribute(_))));
        assert!(matches!(build_problem(&c, &ProblemConfig::default()), Err(Error::NoObjectives)));
        let mut cfg = config(None);
        cfg.bounds.push(BoundSpec::upper_fraction("effort", 1.5));
        assert!(matches!(build_problem(&c, &cfg), Err(Error::InvalidBound { .. })));
    }

    #[test]
    fn value_interaction_inside_merge_folds_into_scalar() {
        let c = catalog(
            vec![req("a", 2.0, 1.0), req("b", 4.0, 1.0)],
            InteractionSet {
                combines: vec![pair("a", "b")],
                value: vec![ValueInteraction {
                    attribute: AttributeKey::effort(),
                    members: vec!["a".into(), "b".into()],
                    mode: ValueMode::Multiplicative,
                    amount: 0.5,
                }],
                ..Default::default()
            },
        );
        let ps = build_problem(&c, &config(None)).unwrap();
        assert_eq!(ps[0].requirements[0].scalars[&AttributeKey::effort()], 3.0);
        assert!(ps[0].value_interactions.is_empty());
    }
}
