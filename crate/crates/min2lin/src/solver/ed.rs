//! Disjoint compression over Euclidean domains.
//!
//! A dominating family of balanced subgraphs rooted at `s` yields cleaning
//! sets `F`: after removing `X ∪ F`, every rigid component may be assumed to
//! be zero in the solution. The algorithm then guesses how the terminals
//! `V(X ∪ F)` are grouped by the solution, checks the guess against an
//! auxiliary system on the terminals, and turns the paths that would become
//! inconsistent into pair cut requests.

use std::collections::{BTreeMap, BTreeSet};

use super::compress::light_subsets;
use super::rooted::{build_rooted_graph, family_budget};
use super::{DmlInstance, SolveError, SolveStats};
use crate::biased::Graph;
use crate::cuts::{for_each_refinement, pair_partition_cut_strict, CutInstance, PairCutRequest};
use crate::ibs::dominating_family;
use crate::ring::EuclideanDomain;
use crate::system::{flexible_components, solve, EqId, Equation, Forest, Implied, LinSystem, Var};

/// `S'` with `X ∪ F` set aside: the terminals and the components of
/// `S'' = S' - (X ∪ F)`.
#[derive(Debug, Clone)]
pub struct Cleaned<'a, D: EuclideanDomain> {
    pub system: &'a LinSystem<D>,
    pub removed: BTreeSet<EqId>,
    pub terminals: BTreeSet<Var>,
    pub rest: LinSystem<D>,
    pub forest: Forest,
    /// Per component of `rest`.
    pub flexible: Vec<bool>,
    /// Non-terminals of each component of `rest`.
    pub inner: Vec<Vec<Var>>,
}

impl<'a, D: EuclideanDomain> Cleaned<'a, D> {
    pub fn new(system: &'a LinSystem<D>, removed: BTreeSet<EqId>) -> Self {
        let terminals = system.vars_of(&removed);
        let rest = system.without(&removed);
        let forest = Forest::new(&rest);
        let flexible = flexible_components(&rest, &forest);
        let inner = forest
            .components
            .iter()
            .map(|c| c.iter().copied().filter(|v| !terminals.contains(v)).collect())
            .collect();
        Cleaned { system, removed, terminals, rest, forest, flexible, inner }
    }

    /// Terminals grouped by the component of `rest` they lie in.
    pub fn coarse_partition(&self) -> Vec<Vec<Var>> {
        let mut groups: BTreeMap<usize, Vec<Var>> = BTreeMap::new();
        for &t in &self.terminals {
            groups.entry(self.forest.comp[t]).or_default().push(t);
        }
        groups.into_values().collect()
    }

    fn flexible_at(&self, x: Var) -> bool {
        self.flexible[self.forest.comp[x]]
    }

    /// Primal graph of `rest` with the equation behind each edge.
    pub fn primal_graph(&self) -> (Graph, Vec<EqId>) {
        let mut g = Graph::new(self.rest.num_vars());
        let mut ids = Vec::new();
        for e in &self.rest.equations {
            g.add_edge(e.u, e.v, e.weight);
            ids.push(e.id);
        }
        (g, ids)
    }
}

/// The system `H_P` on the terminals plus a zero variable, solved.
#[derive(Debug, Clone)]
pub struct AuxiliaryInstance<D: EuclideanDomain> {
    pub system: LinSystem<D>,
    pub zero: Var,
    pub phi: Vec<D::Elem>,
    pub forest: Forest,
    pub flexible: Vec<bool>,
    /// Terminals in rigid components of `system`.
    pub determined: BTreeSet<Var>,
    /// Determined terminals connected to the zero variable.
    pub zero_determined: BTreeSet<Var>,
}

impl<D: EuclideanDomain> AuxiliaryInstance<D> {
    pub fn is_determined(&self, x: Var) -> bool {
        self.determined.contains(&x)
    }
}

/// Builds `H_P`: the equations of `X ∪ F`, `x - z0 = 0` and `x + z0 = 0`
/// for terminals in rigid components, and the implied equations tying each
/// block of `partition` inside a flexible component. Returns `None` when
/// `H_P` is inconsistent.
pub fn build_auxiliary<D: EuclideanDomain>(
    c: &Cleaned<'_, D>,
    partition: &[Vec<Var>],
) -> Option<AuxiliaryInstance<D>> {
    let d = &c.system.domain;
    let mut h = LinSystem { domain: d.clone(), names: c.system.names.clone(), equations: Vec::new() };
    let zero = h.add_var("z0");
    let push = |h: &mut LinSystem<D>, e: &Equation<D::Elem>| {
        let id = h.equations.len();
        h.equations.push(Equation { id, ..e.clone() });
    };
    for e in c.system.equations.iter().filter(|e| c.removed.contains(&e.id)) {
        push(&mut h, e);
    }
    for &t in &c.terminals {
        if !c.flexible_at(t) {
            h.push(t, zero, d.one(), d.neg(&d.one()), d.zero(), 1);
            h.push(t, zero, d.one(), d.one(), d.zero(), 1);
        }
    }
    for block in partition {
        let x0 = block[0];
        if !c.flexible_at(x0) {
            continue;
        }
        for &y in &block[1..] {
            let e = c.forest.implied(&c.rest, x0, y).expect("blocks refine components");
            push(&mut h, &e.to_equation(0, 1));
        }
    }
    let phi = solve(&h)?;
    let forest = Forest::new(&h);
    let flexible = flexible_components(&h, &forest);
    let determined: BTreeSet<Var> = c.terminals.iter().copied().filter(|&t| !flexible[forest.comp[t]]).collect();
    let zero_determined = determined.iter().copied().filter(|&t| forest.connected(t, zero)).collect();
    Some(AuxiliaryInstance { system: h, zero, phi, forest, flexible, determined, zero_determined })
}

/// Pair cut requests ruling out the inconsistent paths that a `P`-cut of
/// `rest` could leave behind.
pub fn build_pair_requests<D: EuclideanDomain>(
    c: &Cleaned<'_, D>,
    aux: &AuxiliaryInstance<D>,
    partition: &[Vec<Var>],
) -> Vec<PairCutRequest> {
    let d = &c.system.domain;
    let mut block = BTreeMap::new();
    for (i, b) in partition.iter().enumerate() {
        for &x in b {
            block.insert(x, i);
        }
    }
    let mut out = BTreeSet::new();
    // A determined terminal fixes its non-terminal neighbours in a flexible
    // component; requests cover those that would get no value in D.
    for &t in &aux.determined {
        if !c.flexible_at(t) {
            continue;
        }
        for &v in &c.inner[c.forest.comp[t]] {
            let e = c.forest.implied(&c.rest, t, v).expect("same component");
            let rhs = d.sub(&e.c, &d.mul(&e.a, &aux.phi[t]));
            if !e.consistent || !d.divides(&e.b, &rhs) {
                out.insert(PairCutRequest { s: t, u: v, t, v });
            }
        }
    }
    // Paths through two undetermined terminals of different blocks, from a
    // vertex of the first one's component to a vertex of the second's. An
    // endpoint may be the terminal itself; the request then reduces to
    // separating the other side.
    let terms: Vec<Var> = c.terminals.iter().copied().collect();
    for (i, &x) in terms.iter().enumerate() {
        for &y in &terms[i + 1..] {
            if block[&x] == block[&y] || aux.is_determined(x) || aux.is_determined(y) {
                continue;
            }
            if !aux.forest.connected(x, y) || !c.flexible_at(x) || !c.flexible_at(y) {
                continue;
            }
            let exy = aux.forest.implied(&aux.system, x, y).expect("connected");
            for &u in std::iter::once(&x).chain(&c.inner[c.forest.comp[x]]) {
                let eux = c.forest.implied(&c.rest, u, x).expect("same component");
                let left = eux.compose(d, &exy);
                for &v in std::iter::once(&y).chain(&c.inner[c.forest.comp[y]]) {
                    if u == x && v == y {
                        continue;
                    }
                    let eyv = c.forest.implied(&c.rest, y, v).expect("same component");
                    if !has_solution(d, &left.compose(d, &eyv)) {
                        out.insert(PairCutRequest { s: x, u, t: y, v });
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Whether `a·from + b·to = c` has a solution, with `from = to` allowed.
fn has_solution<D: EuclideanDomain>(d: &D, e: &Implied<D::Elem>) -> bool {
    if e.from == e.to {
        return d.divides(&d.add(&e.a, &e.b), &e.c);
    }
    e.consistent
}

/// Solves a disjoint compression instance over a Euclidean domain.
pub fn dml_ed<D: EuclideanDomain>(
    inst: &DmlInstance<D>,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    let rooted = build_rooted_graph(inst);
    let family = dominating_family(&rooted.gains, rooted.root, family_budget(inst));
    stats.family_nodes += family.nodes;
    let mut seen = BTreeSet::new();
    for member in &family.members {
        stats.family_members += 1;
        let fh = rooted.equations_of(&member.deleted);
        if !seen.insert(fh.clone()) {
            continue;
        }
        let fh_list: Vec<EqId> = fh.iter().copied().collect();
        for fz in light_subsets(&inst.system, &fh_list, inst.k) {
            let s1 = inst.system.without(&fz);
            let k1 = inst.k - inst.system.weight_of(&fz);
            let mut removed = inst.x.clone();
            removed.extend(fh.difference(&fz));
            let cleaned = Cleaned::new(&s1, removed);
            if let Some(mut y) = cut_cleaned(&cleaned, k1, stats)? {
                y.extend(fz);
                return Ok(Some(y));
            }
        }
    }
    Ok(None)
}

/// Tries every refinement of the coarse terminal partition.
fn cut_cleaned<D: EuclideanDomain>(
    c: &Cleaned<'_, D>,
    k: u64,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    let (graph, ids) = c.primal_graph();
    let mut found = None;
    let mut error = None;
    for_each_refinement(&c.coarse_partition(), k as usize, &mut |partition| {
        stats.partitions += 1;
        let Some(aux) = build_auxiliary(c, &partition) else {
            return false;
        };
        let requests = build_pair_requests(c, &aux, &partition);
        let mut cut_inst = match CutInstance::new(graph.clone(), partition, k) {
            Ok(i) => i,
            Err(e) => {
                error = Some(SolveError::Internal(e.to_string()));
                return true;
            }
        };
        cut_inst.requests = requests;
        let Some(cut) = pair_partition_cut_strict(&cut_inst) else {
            return false;
        };
        stats.cut_nodes += cut.nodes;
        let y: BTreeSet<EqId> = cut.edges.iter().map(|&e| ids[e]).collect();
        if solve(&c.system.without(&y)).is_some() {
            found = Some(y);
            return true;
        }
        stats.rejected_cuts += 1;
        false
    });
    match error {
        Some(e) => Err(e),
        None => Ok(found),
    }
}
