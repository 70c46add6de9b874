//! Important balanced subgraphs.
//!
//! For a rooted biased graph, the cost of a connected balanced subgraph `H`
//! containing the root is the weight of the edges that must go to carve it
//! out: edges of `G[V(H)]` missing from `H` plus the boundary `δ(V(H))`.
//! `H′` dominates `H` when `V(H) ⊆ V(H′)` and `H′` costs no more. The
//! branching procedure here, guided by extremal half-integral LP optima,
//! produces at most `4^k` subgraphs dominating every candidate of cost at
//! most `k`.

use std::collections::BTreeSet;

use crate::biased::{is_balanced_subgraph, rooted_balanced_subgraphs, BiasedGraph, EdgeId, Graph, Vertex};

/// A rooted connected balanced subgraph together with its deleted edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedSubgraph {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<EdgeId>,
    pub deleted: BTreeSet<EdgeId>,
    pub cost: u64,
}

impl BalancedSubgraph {
    pub fn new(g: &Graph, vertices: BTreeSet<Vertex>, edges: BTreeSet<EdgeId>) -> Self {
        let deleted = deleted_edges(g, &vertices, &edges);
        let cost = g.weight_of(&deleted);
        BalancedSubgraph { vertices, edges, deleted, cost }
    }

    /// `self` dominates `other`: a superset of its vertices at no greater cost.
    pub fn dominates(&self, other: &BalancedSubgraph) -> bool {
        other.vertices.is_subset(&self.vertices) && self.cost <= other.cost
    }

    /// Domination where the vertex set or the cost differs.
    pub fn strictly_dominates(&self, other: &BalancedSubgraph) -> bool {
        self.dominates(other) && (self.cost < other.cost || self.vertices.len() > other.vertices.len())
    }
}

/// `(E(G[V]) \ E(H)) ∪ δ_G(V)`.
pub fn deleted_edges(g: &Graph, vertices: &BTreeSet<Vertex>, edges: &BTreeSet<EdgeId>) -> BTreeSet<EdgeId> {
    let mut out: BTreeSet<EdgeId> = g.induced(vertices).difference(edges).copied().collect();
    out.extend(g.delta(vertices));
    out
}

/// `c_G(H)`.
pub fn cost(g: &Graph, vertices: &BTreeSet<Vertex>, edges: &BTreeSet<EdgeId>) -> u64 {
    g.weight_of(&deleted_edges(g, vertices, edges))
}

/// A node of the branching tree: `e0` is committed to stay, `e1` to go.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BranchingState {
    pub e0: BTreeSet<EdgeId>,
    pub e1: BTreeSet<EdgeId>,
}

/// Output of [`dominating_family`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominatingFamily {
    pub members: Vec<BalancedSubgraph>,
    pub budget: u64,
    /// Branching-tree nodes explored.
    pub nodes: usize,
}

/// Computes a family of at most `4^k` rooted connected balanced subgraphs
/// of cost at most `k` dominating every such subgraph.
///
/// Members are listed in branching order, with exact duplicates and
/// members strictly dominated by another member removed.
pub fn dominating_family<B: BiasedGraph + ?Sized>(view: &B, root: Vertex, k: u64) -> DominatingFamily {
    dominating_family_traced(view, root, k, &mut |_| {})
}

/// [`dominating_family`] reporting every branching state it visits.
pub fn dominating_family_traced<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    k: u64,
    on_state: &mut dyn FnMut(&BranchingState),
) -> DominatingFamily {
    let mut raw = Vec::new();
    let mut nodes = 0;
    branch(view, root, k, BranchingState::default(), &mut raw, &mut nodes, on_state);
    let g = view.graph();
    let mut members: Vec<BalancedSubgraph> = Vec::new();
    for h in raw {
        if h.cost <= k && !members.iter().any(|m| m.vertices == h.vertices && m.cost == h.cost) {
            members.push(h);
        }
    }
    let kept: Vec<BalancedSubgraph> = members
        .iter()
        .filter(|h| !members.iter().any(|m| m.strictly_dominates(h)))
        .cloned()
        .collect();
    debug_assert!(kept.iter().all(|h| h.cost == cost(g, &h.vertices, &h.edges)));
    DominatingFamily { members: kept, budget: k, nodes }
}

/// Solves the LP of a branching state: `E1` removed, `E0` made heavy.
fn state_lp<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    k: u64,
    state: &BranchingState,
) -> (crate::biased::HalfIntegralSolution, BTreeSet<EdgeId>, Vec<bool>) {
    let g = view.graph();
    let alive: Vec<bool> = (0..g.num_edges()).map(|e| !state.e1.contains(&e)).collect();
    let heavy = 2 * k + 1;
    let weights: Vec<u64> = (0..g.num_edges())
        .map(|e| if state.e0.contains(&e) { g.weights[e].max(heavy) } else { g.weights[e] })
        .collect();
    let sol = view.lp_optimum(root, &weights, &alive);
    let gb_edges: BTreeSet<EdgeId> =
        g.induced(&sol.vr).into_iter().filter(|e| alive[*e] && !sol.x1.contains(e)).collect();
    (sol, gb_edges, alive)
}

fn branch<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    k: u64,
    state: BranchingState,
    out: &mut Vec<BalancedSubgraph>,
    nodes: &mut usize,
    on_state: &mut dyn FnMut(&BranchingState),
) {
    *nodes += 1;
    on_state(&state);
    debug_assert!(state_invariants_hold(view, root, &state));
    let g = view.graph();
    let (sol, gb_edges, _) = state_lp(view, root, k, &state);
    if 2 * g.weight_of(&state.e1) + sol.value2 > 2 * k {
        return;
    }
    if sol.xhalf.is_empty() {
        out.push(BalancedSubgraph::new(g, sol.vr, gb_edges));
        return;
    }
    let mut e0 = state.e0;
    e0.extend(gb_edges);
    let mut e1 = state.e1;
    e1.extend(sol.x1);
    let e = *sol.xhalf.iter().next().expect("nonempty");
    let mut keep = e0.clone();
    keep.insert(e);
    branch(view, root, k, BranchingState { e0: keep, e1: e1.clone() }, out, nodes, on_state);
    e1.insert(e);
    branch(view, root, k, BranchingState { e0, e1 }, out, nodes, on_state);
}

/// `E0` spans a balanced connected subgraph through the root and every edge
/// of `E1` touches it.
pub fn state_invariants_hold<B: BiasedGraph + ?Sized>(view: &B, root: Vertex, state: &BranchingState) -> bool {
    let g = view.graph();
    if !state.e0.is_disjoint(&state.e1) || !is_balanced_subgraph(view, &state.e0) {
        return false;
    }
    let alive: Vec<bool> = (0..g.num_edges()).map(|e| state.e0.contains(&e)).collect();
    let reach: BTreeSet<Vertex> = g.reachable(root, &alive).into_iter().collect();
    let spans = state.e0.iter().all(|&e| reach.contains(&g.edges[e].0));
    let touches = state.e1.iter().all(|&e| reach.contains(&g.edges[e].0) || reach.contains(&g.edges[e].1));
    spans && touches
}

/// Minimum-weight edge set of weight at most `k` whose removal leaves the
/// root in a balanced component, found by LP-guided branching.
pub fn rbgce_solve<B: BiasedGraph + ?Sized>(view: &B, root: Vertex, k: u64) -> Option<BTreeSet<EdgeId>> {
    let mut best: Option<BalancedSubgraph> = None;
    rbgce_branch(view, root, k, BranchingState::default(), &mut best);
    best.map(|h| h.deleted)
}

fn rbgce_branch<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    k: u64,
    state: BranchingState,
    best: &mut Option<BalancedSubgraph>,
) {
    let g = view.graph();
    let (sol, gb_edges, _) = state_lp(view, root, k, &state);
    let lower2 = 2 * g.weight_of(&state.e1) + sol.value2;
    let limit2 = match best {
        Some(b) => (2 * b.cost).saturating_sub(1),
        None => 2 * k + 1,
    };
    if lower2 >= limit2 {
        return;
    }
    if sol.xhalf.is_empty() {
        let h = BalancedSubgraph::new(g, sol.vr, gb_edges);
        if h.cost <= k && best.as_ref().is_none_or(|b| h.cost < b.cost) {
            *best = Some(h);
        }
        return;
    }
    let mut e0 = state.e0;
    e0.extend(gb_edges);
    let mut e1 = state.e1;
    e1.extend(sol.x1);
    let e = *sol.xhalf.iter().next().expect("nonempty");
    let mut keep = e0.clone();
    keep.insert(e);
    rbgce_branch(view, root, k, BranchingState { e0: keep, e1: e1.clone() }, best);
    e1.insert(e);
    rbgce_branch(view, root, k, BranchingState { e0, e1 }, best);
}

/// Exhaustively searches for a rooted connected balanced subgraph of cost
/// at most `k` that no member of `family` dominates.
pub fn brute_dominating_check<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    k: u64,
    family: &[BalancedSubgraph],
) -> Option<BalancedSubgraph> {
    let g = view.graph();
    let alive = vec![true; g.num_edges()];
    rooted_balanced_subgraphs(view, root, &alive)
        .into_iter()
        .map(|(v, e)| BalancedSubgraph::new(g, v, e))
        .find(|h| h.cost <= k && !family.iter().any(|m| m.dominates(h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biased::{GainGraph, OracleGraph, Parity};

    fn cycle(n: usize) -> GainGraph<Parity> {
        let mut g = GainGraph::new(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n, 1, Parity(true));
        }
        g
    }

    /// Unit weights, even cycles balanced, root 0. Three nested rooted
    /// subgraphs: the root alone (cost 4), the root with its four
    /// neighbours (cost 5, the odd triangle 0-1-2 cut at edge 1-2) and that
    /// plus vertex 5 (cost 5, closing the even cycle 0-1-5-2).
    fn domination_example() -> (Graph, BalancedSubgraph, BalancedSubgraph, BalancedSubgraph) {
        let mut g = Graph::new(10);
        for (u, v) in [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 5), (2, 5), (3, 6), (4, 7), (5, 8), (5, 9)] {
            g.add_edge(u, v, 1);
        }
        let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
        let h1 = BalancedSubgraph::new(&g, set(&[0]), set(&[]));
        let h2 = BalancedSubgraph::new(&g, set(&[0, 1, 2, 3, 4]), set(&[0, 1, 2, 3]));
        let h3 = BalancedSubgraph::new(&g, set(&[0, 1, 2, 3, 4, 5]), set(&[0, 1, 2, 3, 5, 6]));
        (g, h1, h2, h3)
    }

    #[test]
    fn domination_relations() {
        let (g, h1, h2, h3) = domination_example();
        assert_eq!((h1.cost, h2.cost, h3.cost), (4, 5, 5));
        assert!(h1.dominates(&h1));
        assert!(h3.dominates(&h2));
        assert!(h3.strictly_dominates(&h2));
        assert!(!h1.dominates(&h2) && !h2.dominates(&h1));
        assert!(!h1.dominates(&h3) && !h3.dominates(&h1));
        let view = OracleGraph::even_cycles(g);
        for h in [&h1, &h2, &h3] {
            assert!(is_balanced_subgraph(&view, &h.edges));
        }
    }

    #[test]
    fn balanced_graph_is_its_own_family() {
        let g = cycle(4);
        let fam = dominating_family(&g, 0, 2);
        assert_eq!(fam.members.len(), 1);
        assert_eq!(fam.members[0].cost, 0);
        assert_eq!(fam.members[0].vertices.len(), 4);
        assert!(brute_dominating_check(&g, 0, 2, &fam.members).is_none());
        assert!(brute_dominating_check(&g, 0, 2, &[]).is_some());
    }

    #[test]
    fn odd_cycle_family() {
        let g = cycle(5);
        let fam = dominating_family(&g, 0, 1);
        assert_eq!(fam.members[0].vertices.len(), 5);
        assert_eq!(fam.members[0].cost, 1);
        assert!(brute_dominating_check(&g, 0, 1, &fam.members).is_none());
    }

    #[test]
    fn rbgce_examples() {
        assert_eq!(rbgce_solve(&cycle(4), 0, 0), Some(BTreeSet::new()));
        assert_eq!(rbgce_solve(&cycle(3), 0, 1).map(|s| s.len()), Some(1));
        let mut heavy = GainGraph::new(3);
        for i in 0..3 {
            heavy.add_edge(i, (i + 1) % 3, 3, Parity(true));
        }
        assert_eq!(rbgce_solve(&heavy, 0, 2), None);
        let o = OracleGraph::even_cycles(cycle(3).graph);
        assert_eq!(rbgce_solve(&o, 0, 1).map(|s| s.len()), Some(1));
    }

    #[test]
    fn states_satisfy_invariants() {
        let mut g = GainGraph::new(7);
        for (u, v, w) in [(0, 1, 1), (1, 2, 3), (2, 3, 3), (3, 1, 3), (0, 4, 1), (4, 5, 3), (5, 6, 3), (6, 4, 3)] {
            g.add_edge(u, v, w, Parity(true));
        }
        let mut states = Vec::new();
        dominating_family_traced(&g, 0, 2, &mut |s| states.push(s.clone()));
        assert!(states.len() > 1);
        for s in &states { assert!(state_invariants_hold(&g, 0, s), "{s:?}"); }
    }

    mod props {
        use super::*;
        use crate::biased::{GainGraph, Parity};
        use crate::ring::{PrimeField, Ratio};
        use proptest::prelude::*;

        fn raw_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, u64, u64)>)> {
            (2usize..=7).prop_flat_map(|n| (Just(n), proptest::collection::vec((0..n, 0..n, 1u64..=2, 1u64..5), 1..=10)))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn family_dominates_and_rbgce_is_optimal((n, raw) in raw_graph(), k in 0u64..=3, group in any::<bool>()) {
                let f = PrimeField::new(5).unwrap();
                let mut gf = GainGraph::new(n);
                let mut gp = GainGraph::new(n);
                for &(u, v, w, l) in &raw {
                    if u != v {
                        gf.add_edge(u, v, w, Ratio::new(&f, l, 1));
                        gp.add_edge(u, v, w, Parity(true));
                    }
                }
                let view: &dyn BiasedGraph = if group { &gf } else { &gp };
                let fam = dominating_family(view, 0, k);
                prop_assert!(fam.members.len() as u64 <= 4u64.pow(k as u32));
                prop_assert!(fam.members.iter().all(|m| m.cost <= k));
                prop_assert!(brute_dominating_check(view, 0, k, &fam.members).is_none());
                let g = view.graph();
                let alive = vec![true; g.num_edges()];
                let opt = rooted_balanced_subgraphs(view, 0, &alive)
                    .into_iter()
                    .map(|(v, e)| cost(g, &v, &e))
                    .min()
                    .filter(|&c| c <= k);
                prop_assert_eq!(rbgce_solve(view, 0, k).map(|d| g.weight_of(&d)), opt);
            }
        }
    }
}

