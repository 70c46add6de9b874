//! Biased graphs, unbalanced-cycle detection and the half-integral LP
//! relaxation of rooted edge cleaning.
//!
//! A biased graph is a graph together with a class of *balanced* cycles.
//! Group-labelled graphs ([`GainGraph`]) are the main source: a cycle is
//! balanced when the product of its labels, read around the cycle, is the
//! identity. [`OracleGraph`] accepts an arbitrary membership test instead.
//!
//! The LP relaxation of rooted cleaning asks for edge values `x ∈ [0, 1]`
//! with `2·x(P) + x(C) ≥ 1` for every balloon: an unbalanced cycle `C`
//! joined to the root by a path `P`. Extremal half-integral optima have a
//! rigid shape: a vertex set `V_R` around the root, a balanced connected
//! subgraph `G_R` spanning it, value 1 on the edges of `G[V_R]` outside
//! `G_R` and value 1/2 on the boundary `δ(V_R)`. The optimum is computed
//! exactly by searching over that shape.

use std::collections::BTreeSet;
use std::fmt;

use crate::ring::{EuclideanDomain, Ratio};

pub type Vertex = usize;
pub type EdgeId = usize;

/// Weighted undirected multigraph without self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    pub weights: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { n, edges: Vec::new(), weights: Vec::new() }
    }

    pub fn add_vertex(&mut self) -> Vertex {
        self.n += 1;
        self.n - 1
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex, w: u64) -> EdgeId {
        assert!(u < self.n && v < self.n, "unknown vertex");
        assert!(u != v, "self-loops are not supported");
        assert!(w >= 1, "weights are positive");
        self.edges.push((u, v));
        self.weights.push(w);
        self.edges.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Incidence lists `(edge, neighbour)` restricted to live edges.
    pub fn adjacency(&self, alive: &[bool]) -> Vec<Vec<(EdgeId, Vertex)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if alive[e] {
                adj[u].push((e, v));
                adj[v].push((e, u));
            }
        }
        adj
    }

    /// Vertices reachable from `from` along live edges, in BFS order.
    pub fn reachable(&self, from: Vertex, alive: &[bool]) -> Vec<Vertex> {
        let adj = self.adjacency(alive);
        let mut seen = vec![false; self.n];
        seen[from] = true;
        let mut order = vec![from];
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(_, y) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    order.push(y);
                }
            }
        }
        order
    }

    /// Edges with exactly one endpoint in `vs`.
    pub fn delta(&self, vs: &BTreeSet<Vertex>) -> BTreeSet<EdgeId> {
        (0..self.edges.len())
            .filter(|&e| {
                let (u, v) = self.edges[e];
                vs.contains(&u) != vs.contains(&v)
            })
            .collect()
    }

    /// Edges with both endpoints in `vs`.
    pub fn induced(&self, vs: &BTreeSet<Vertex>) -> BTreeSet<EdgeId> {
        (0..self.edges.len())
            .filter(|&e| {
                let (u, v) = self.edges[e];
                vs.contains(&u) && vs.contains(&v)
            })
            .collect()
    }

    pub fn weight_of<'a>(&self, edges: impl IntoIterator<Item = &'a EdgeId>) -> u64 {
        edges.into_iter().map(|&e| self.weights[e]).sum()
    }

    /// Orders the edges of a cycle into a closed walk `(edge, forwards)`.
    pub fn cycle_walk(&self, cycle: &[EdgeId]) -> Option<Vec<(EdgeId, bool)>> {
        let first = *cycle.first()?;
        let (start, mut at) = self.edges[first];
        let mut walk = vec![(first, true)];
        let mut used = vec![false; cycle.len()];
        used[0] = true;
        for _ in 1..cycle.len() {
            let pos = (0..cycle.len()).find(|&i| {
                let (u, v) = self.edges[cycle[i]];
                !used[i] && (u == at || v == at)
            })?;
            used[pos] = true;
            let (u, v) = self.edges[cycle[pos]];
            walk.push((cycle[pos], u == at));
            at = if u == at { v } else { u };
        }
        (at == start).then_some(walk)
    }
}

/// An abelian group element used as an edge label.
pub trait Gain: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn compose(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    fn is_identity(&self) -> bool;
    /// The identity element of the group containing `self`.
    fn identity_like(&self) -> Self;
}

/// The group ℤ/2; labelling every edge `Parity(true)` makes exactly the even
/// cycles balanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Parity(pub bool);

impl Gain for Parity {
    fn compose(&self, other: &Self) -> Self {
        Parity(self.0 ^ other.0)
    }
    fn inverse(&self) -> Self {
        *self
    }
    fn is_identity(&self) -> bool {
        !self.0
    }
    fn identity_like(&self) -> Self {
        Parity(false)
    }
}

/// The additive group ℤ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shift(pub i64);

impl Gain for Shift {
    fn compose(&self, other: &Self) -> Self {
        Shift(self.0 + other.0)
    }
    fn inverse(&self) -> Self {
        Shift(-self.0)
    }
    fn is_identity(&self) -> bool {
        self.0 == 0
    }
    fn identity_like(&self) -> Self {
        Shift(0)
    }
}

/// The multiplicative group of a fraction field. Labels must be nonzero.
impl<D: EuclideanDomain> Gain for Ratio<D> {
    fn compose(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn inverse(&self) -> Self {
        self.inv()
    }
    fn is_identity(&self) -> bool {
        self.is_one()
    }
    fn identity_like(&self) -> Self {
        self.mul(&self.inv())
    }
}

/// Direct product of two groups.
impl<A: Gain, B: Gain> Gain for (A, B) {
    fn compose(&self, other: &Self) -> Self {
        (self.0.compose(&other.0), self.1.compose(&other.1))
    }
    fn inverse(&self) -> Self {
        (self.0.inverse(), self.1.inverse())
    }
    fn is_identity(&self) -> bool {
        self.0.is_identity() && self.1.is_identity()
    }
    fn identity_like(&self) -> Self {
        (self.0.identity_like(), self.1.identity_like())
    }
}

/// Extremal half-integral LP optimum in the canonical shape described in
/// the module docs. `value2` is twice the LP value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfIntegralSolution {
    pub x1: BTreeSet<EdgeId>,
    pub xhalf: BTreeSet<EdgeId>,
    pub vr: BTreeSet<Vertex>,
    pub value2: u64,
}

/// A graph with a class of balanced cycles.
pub trait BiasedGraph: Sync {
    fn graph(&self) -> &Graph;

    /// Membership test for a cycle given as a set of edges.
    fn is_balanced(&self, cycle: &[EdgeId]) -> bool;

    /// An unbalanced cycle in the component of `from` among live edges.
    ///
    /// Checks the fundamental cycles of a BFS tree, which suffices because
    /// a connected biased graph is balanced exactly when some fundamental
    /// system of cycles is.
    fn find_unbalanced_cycle(&self, from: Vertex, alive: &[bool]) -> Option<Vec<EdgeId>> {
        let tree = BfsTree::new(self.graph(), from, alive);
        for e in tree.non_tree_edges(self.graph(), alive) {
            let cycle = tree.fundamental_cycle(self.graph(), e);
            if !self.is_balanced(&cycle) {
                return Some(cycle);
            }
        }
        None
    }

    /// Extremal half-integral optimum of the LP on live edges with the given
    /// weights. The default implementation enumerates every rooted balanced
    /// connected subgraph and is meant for small graphs.
    fn lp_optimum(&self, root: Vertex, weights: &[u64], alive: &[bool]) -> HalfIntegralSolution {
        let g = self.graph();
        let mut best: Option<HalfIntegralSolution> = None;
        for (vr, edges) in rooted_balanced_subgraphs(self, root, alive) {
            let sol = structure(g, weights, alive, &vr, &edges);
            let better = match &best {
                None => true,
                Some(b) => (sol.value2, std::cmp::Reverse(sol.vr.len())) < (b.value2, std::cmp::Reverse(b.vr.len())),
            };
            if better {
                best = Some(sol);
            }
        }
        best.expect("the root alone is always a candidate")
    }
}

/// The canonical half-integral structure for `G_R = (vr, edges)`.
fn structure(
    g: &Graph,
    weights: &[u64],
    alive: &[bool],
    vr: &BTreeSet<Vertex>,
    edges: &BTreeSet<EdgeId>,
) -> HalfIntegralSolution {
    let mut x1 = BTreeSet::new();
    let mut xhalf = BTreeSet::new();
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        if !alive[e] {
            continue;
        }
        match (vr.contains(&u), vr.contains(&v)) {
            (true, true) if !edges.contains(&e) => {
                x1.insert(e);
            }
            (true, false) | (false, true) => {
                xhalf.insert(e);
            }
            _ => {}
        }
    }
    let value2 = 2 * x1.iter().map(|&e| weights[e]).sum::<u64>() + xhalf.iter().map(|&e| weights[e]).sum::<u64>();
    HalfIntegralSolution { x1, xhalf, vr: vr.clone(), value2 }
}

/// BFS spanning tree of the component of a vertex among live edges.
#[derive(Debug, Clone)]
pub struct BfsTree {
    pub order: Vec<Vertex>,
    pub parent: Vec<Option<(EdgeId, Vertex)>>,
    depth: Vec<usize>,
    in_tree: Vec<bool>,
}

impl BfsTree {
    pub fn new(g: &Graph, from: Vertex, alive: &[bool]) -> Self {
        let adj = g.adjacency(alive);
        let mut parent = vec![None; g.n];
        let mut depth = vec![usize::MAX; g.n];
        let mut in_tree = vec![false; g.edges.len()];
        depth[from] = 0;
        let mut order = vec![from];
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(e, y) in &adj[x] {
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some((e, x));
                    in_tree[e] = true;
                    order.push(y);
                }
            }
        }
        BfsTree { order, parent, depth, in_tree }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.depth[v] != usize::MAX
    }

    /// Live edges of the component that are not tree edges.
    pub fn non_tree_edges(&self, g: &Graph, alive: &[bool]) -> Vec<EdgeId> {
        (0..g.edges.len())
            .filter(|&e| alive[e] && !self.in_tree[e] && self.contains(g.edges[e].0))
            .collect()
    }

    /// Tree edges on the path between two vertices of the component.
    pub fn path(&self, mut p: Vertex, mut q: Vertex) -> Vec<EdgeId> {
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[p] > self.depth[q] {
            let (e, par) = self.parent[p].expect("non-root");
            up.push(e);
            p = par;
        }
        while self.depth[q] > self.depth[p] {
            let (e, par) = self.parent[q].expect("non-root");
            down.push(e);
            q = par;
        }
        while p != q {
            let (e, par) = self.parent[p].expect("non-root");
            up.push(e);
            p = par;
            let (f, parq) = self.parent[q].expect("non-root");
            down.push(f);
            q = parq;
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// The cycle closed by a non-tree edge.
    pub fn fundamental_cycle(&self, g: &Graph, e: EdgeId) -> Vec<EdgeId> {
        let (u, v) = g.edges[e];
        let mut cycle = self.path(v, u);
        cycle.push(e);
        cycle
    }
}

/// Graph labelled by an abelian group; `labels[e]` is read from
/// `edges[e].0` to `edges[e].1`.
#[derive(Debug, Clone)]
pub struct GainGraph<L: Gain> {
    pub graph: Graph,
    pub labels: Vec<L>,
}

impl<L: Gain> GainGraph<L> {
    pub fn new(n: usize) -> Self {
        GainGraph { graph: Graph::new(n), labels: Vec::new() }
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex, w: u64, label: L) -> EdgeId {
        self.labels.push(label);
        self.graph.add_edge(u, v, w)
    }

    /// Label of `e` read starting from endpoint `from`.
    pub fn label_from(&self, e: EdgeId, from: Vertex) -> L {
        if self.graph.edges[e].0 == from {
            self.labels[e].clone()
        } else {
            self.labels[e].inverse()
        }
    }

    /// Potential propagation from `from`: returns a non-tree edge whose
    /// label disagrees with the tree potential, together with the tree.
    fn first_conflict(&self, from: Vertex, alive: &[bool]) -> (BfsTree, Option<EdgeId>) {
        let tree = BfsTree::new(&self.graph, from, alive);
        if self.labels.is_empty() {
            return (tree, None);
        }
        let mut pot: Vec<Option<L>> = vec![None; self.graph.n];
        pot[from] = Some(self.labels[0].identity_like());
        for &x in &tree.order[1..] {
            let (e, p) = tree.parent[x].expect("non-root");
            let lp = pot[p].clone().expect("parent visited first");
            pot[x] = Some(lp.compose(&self.label_from(e, p)));
        }
        let conflict = tree.non_tree_edges(&self.graph, alive).into_iter().find(|&e| {
            let (u, v) = self.graph.edges[e];
            let pu = pot[u].as_ref().expect("in component");
            pu.compose(&self.labels[e]) != *pot[v].as_ref().expect("in component")
        });
        (tree, conflict)
    }
}

impl<L: Gain> BiasedGraph for GainGraph<L> {
    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn is_balanced(&self, cycle: &[EdgeId]) -> bool {
        let Some(walk) = self.graph.cycle_walk(cycle) else {
            return false;
        };
        let mut acc = self.labels[walk[0].0].identity_like();
        for (e, forward) in walk {
            let l = if forward { self.labels[e].clone() } else { self.labels[e].inverse() };
            acc = acc.compose(&l);
        }
        acc.is_identity()
    }

    fn find_unbalanced_cycle(&self, from: Vertex, alive: &[bool]) -> Option<Vec<EdgeId>> {
        let (tree, conflict) = self.first_conflict(from, alive);
        conflict.map(|e| tree.fundamental_cycle(&self.graph, e))
    }

    fn lp_optimum(&self, root: Vertex, weights: &[u64], alive: &[bool]) -> HalfIntegralSolution {
        let (tree, conflict) = self.first_conflict(root, alive);
        if conflict.is_none() {
            let vr: BTreeSet<Vertex> = tree.order.iter().copied().collect();
            let edges = self.graph.induced(&vr).into_iter().filter(|&e| alive[e]).collect();
            return structure(&self.graph, weights, alive, &vr, &edges);
        }
        reduced_lp(self, root, weights, alive, &tree.order)
    }
}

/// Biased graph given by an arbitrary membership oracle.
pub struct OracleGraph {
    pub graph: Graph,
    oracle: Box<dyn Fn(&Graph, &[EdgeId]) -> bool + Send + Sync>,
}

impl OracleGraph {
    pub fn new(graph: Graph, oracle: impl Fn(&Graph, &[EdgeId]) -> bool + Send + Sync + 'static) -> Self {
        OracleGraph { graph, oracle: Box::new(oracle) }
    }

    /// The class of even cycles.
    pub fn even_cycles(graph: Graph) -> Self {
        OracleGraph::new(graph, |_, c| c.len() % 2 == 0)
    }
}

impl fmt::Debug for OracleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleGraph").field("graph", &self.graph).finish_non_exhaustive()
    }
}

impl BiasedGraph for OracleGraph {
    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn is_balanced(&self, cycle: &[EdgeId]) -> bool {
        self.graph.cycle_walk(cycle).is_some() && (self.oracle)(&self.graph, cycle)
    }
}

/// Is the subgraph formed by `edges` free of unbalanced cycles?
pub fn is_balanced_subgraph<B: BiasedGraph + ?Sized>(view: &B, edges: &BTreeSet<EdgeId>) -> bool {
    let g = view.graph();
    let alive: Vec<bool> = (0..g.edges.len()).map(|e| edges.contains(&e)).collect();
    let mut seen = vec![false; g.n];
    for &e in edges {
        let u = g.edges[e].0;
        if seen[u] {
            continue;
        }
        for x in g.reachable(u, &alive) {
            seen[x] = true;
        }
        if view.find_unbalanced_cycle(u, &alive).is_some() {
            return false;
        }
    }
    true
}

/// Every connected balanced subgraph containing `root`, as (vertex set,
/// edge set), over live edges. Exponential in the number of edges of the
/// root's component.
pub fn rooted_balanced_subgraphs<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    alive: &[bool],
) -> Vec<(BTreeSet<Vertex>, BTreeSet<EdgeId>)> {
    let g = view.graph();
    let comp: BTreeSet<Vertex> = g.reachable(root, alive).into_iter().collect();
    let local: Vec<EdgeId> = (0..g.edges.len()).filter(|&e| alive[e] && comp.contains(&g.edges[e].0)).collect();
    assert!(local.len() < 26, "too many edges for exhaustive enumeration");
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << local.len()) {
        let edges: BTreeSet<EdgeId> =
            local.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let sub: Vec<bool> = (0..g.edges.len()).map(|e| edges.contains(&e)).collect();
        let reach: BTreeSet<Vertex> = g.reachable(root, &sub).into_iter().collect();
        if edges.iter().any(|&e| !reach.contains(&g.edges[e].0)) {
            continue;
        }
        if view.find_unbalanced_cycle(root, &sub).is_some() {
            continue;
        }
        out.push((reach, edges));
    }
    out
}

/// Extremal LP optimum with the graph's own weights and every edge live.
pub fn extremal_lp_optimum<B: BiasedGraph + ?Sized>(view: &B, root: Vertex) -> HalfIntegralSolution {
    let g = view.graph();
    view.lp_optimum(root, &g.weights, &vec![true; g.edges.len()])
}

/// Checks that `cand` is a feasible LP solution with the canonical
/// half-integral shape around `root`: the edges of value zero reachable from
/// the root form a balanced graph spanning `vr`, `x1` is exactly the rest of
/// `G[vr]`, `xhalf` is exactly `δ(vr)`, no balloon constraint is violated
/// and `value2` matches the weights.
pub fn lp_value_lower_bound_check<B: BiasedGraph + ?Sized>(
    view: &B,
    root: Vertex,
    cand: &HalfIntegralSolution,
) -> bool {
    let g = view.graph();
    if !cand.vr.contains(&root) || !cand.x1.is_disjoint(&cand.xhalf) {
        return false;
    }
    let zero: Vec<bool> = (0..g.edges.len()).map(|e| !cand.x1.contains(&e) && !cand.xhalf.contains(&e)).collect();
    let reach: BTreeSet<Vertex> = g.reachable(root, &zero).into_iter().collect();
    if reach != cand.vr || cand.xhalf != g.delta(&cand.vr) {
        return false;
    }
    let induced = g.induced(&cand.vr);
    if !cand.x1.is_subset(&induced) {
        return false;
    }
    let value2 = 2 * g.weight_of(&cand.x1) + g.weight_of(&cand.xhalf);
    if value2 != cand.value2 {
        return false;
    }
    // A violated balloon has a zero path from the root and a cycle with no
    // edge of value 1 and at most one of value 1/2.
    if view.find_unbalanced_cycle(root, &zero).is_some() {
        return false;
    }
    let half_inside = cand.xhalf.iter().filter(|&&e| reach.contains(&g.edges[e].0) && reach.contains(&g.edges[e].1));
    for &h in half_inside {
        let mut with_h = zero.clone();
        with_h[h] = true;
        if view.find_unbalanced_cycle(root, &with_h).is_some() {
            return false;
        }
    }
    true
}

/// A path whose inner vertices have degree two, replaced by a single edge.
struct Chain {
    from: Vertex,
    to: Vertex,
    inner: Vec<Vertex>,
    edges: Vec<EdgeId>,
}

/// Exact extremal optimum on a shrunken copy of the root's component.
/// Pendant vertices follow their neighbour, and every chain of degree-two
/// vertices becomes one edge carrying the composed label and the lightest
/// weight of the chain; neither step changes the optimum value. Expanding a
/// chain keeps as many of its vertices inside `V_R` as the optimum allows.
fn reduced_lp<L: Gain>(
    view: &GainGraph<L>,
    root: Vertex,
    weights: &[u64],
    alive: &[bool],
    comp: &[Vertex],
) -> HalfIntegralSolution {
    let g = &view.graph;
    let adj = g.adjacency(alive);
    let mut used = vec![false; g.edges.len()];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut pendants = Vec::new();
    let mut queue: Vec<Vertex> = comp.iter().copied().filter(|&v| v != root && degree[v] == 1).collect();
    while let Some(m) = queue.pop() {
        let &(e, u) = adj[m].iter().find(|&&(e, _)| !used[e]).expect("one edge left");
        used[e] = true;
        degree[m] = 0;
        degree[u] -= 1;
        pendants.push((m, e, u));
        if u != root && degree[u] == 1 {
            queue.push(u);
        }
    }
    let is_branch = |v: Vertex| v == root || degree[v] != 2;
    let mut reduced = GainGraph::new(g.n);
    let mut reduced_weights = Vec::new();
    let mut chains = Vec::new();
    let mut kept: Vec<Vertex> = Vec::new();
    let mut add_chain = |chain: Chain| {
        let mut label = view.labels[0].identity_like();
        let mut at = chain.from;
        for (i, &e) in chain.edges.iter().enumerate() {
            label = label.compose(&view.label_from(e, at));
            at = chain.inner.get(i).copied().unwrap_or(chain.to);
        }
        let w = chain.edges.iter().map(|&e| weights[e]).min().expect("nonempty chain");
        reduced.add_edge(chain.from, chain.to, w, label);
        reduced_weights.push(w);
        chains.push(chain);
    };
    for &u in comp {
        if degree[u] == 0 || !is_branch(u) {
            continue;
        }
        kept.push(u);
        for &(first, next) in &adj[u] {
            if used[first] {
                continue;
            }
            used[first] = true;
            let (mut edges, mut inner, mut x) = (vec![first], Vec::new(), next);
            while !is_branch(x) {
                inner.push(x);
                let &(e, y) = adj[x].iter().find(|&&(e, _)| !used[e]).expect("chains continue");
                used[e] = true;
                edges.push(e);
                x = y;
            }
            if x == u {
                // A closed chain would be a loop; its last inner vertex stays.
                let mid = inner.pop().expect("no self-loops");
                let last = edges.pop().expect("closed chains have two edges");
                kept.push(mid);
                add_chain(Chain { from: u, to: mid, inner, edges });
                add_chain(Chain { from: mid, to: u, inner: Vec::new(), edges: vec![last] });
            } else {
                add_chain(Chain { from: u, to: x, inner, edges });
            }
        }
    }
    let everything = vec![true; reduced.graph.edges.len()];
    let mut labels = LabelSearch::new(&reduced, root, &reduced_weights, &everything, &kept).labels();
    for chain in &chains {
        expand_chain(view, weights, chain, &mut labels);
    }
    for &(m, e, u) in pendants.iter().rev() {
        labels[m] = labels[u].as_ref().map(|l| l.compose(&view.label_from(e, u)));
    }
    from_labels(view, weights, alive, labels)
}

fn from_labels<L: Gain>(view: &GainGraph<L>, weights: &[u64], alive: &[bool], labels: Vec<Option<L>>) -> HalfIntegralSolution {
    let g = &view.graph;
    let local: Vec<EdgeId> = (0..g.edges.len()).filter(|&e| alive[e] && labels_touch(&labels, g.edges[e])).collect();
    let vr: BTreeSet<Vertex> = (0..g.n).filter(|&v| labels[v].is_some()).collect();
    let mut x1 = BTreeSet::new();
    let mut xhalf = BTreeSet::new();
    for e in local {
        let (u, v) = g.edges[e];
        match (&labels[u], &labels[v]) {
            (Some(a), Some(b)) => {
                if a.compose(&view.labels[e]) != *b {
                    x1.insert(e);
                }
            }
            _ => {
                xhalf.insert(e);
            }
        }
    }
    let value2 = 2 * x1.iter().map(|&e| weights[e]).sum::<u64>() + xhalf.iter().map(|&e| weights[e]).sum::<u64>();
    HalfIntegralSolution { x1, xhalf, vr, value2 }
}

fn labels_touch<L>(labels: &[Option<L>], (u, v): (Vertex, Vertex)) -> bool {
    labels[u].is_some() || labels[v].is_some()
}

/// Labels the inner vertices of a contracted chain from its endpoints.
fn expand_chain<L: Gain>(view: &GainGraph<L>, weights: &[u64], chain: &Chain, labels: &mut [Option<L>]) {
    let r = chain.edges.len();
    if r == 1 {
        return;
    }
    let w: Vec<u64> = chain.edges.iter().map(|&e| weights[e]).collect();
    let lightest = *w.iter().min().expect("nonempty chain");
    let first_light = w.iter().position(|&x| x == lightest).expect("minimum is attained");
    let last_light = w.iter().rposition(|&x| x == lightest).expect("minimum is attained");
    // Labels pushed forward from `from` and backward from `to`; entry `i`
    // belongs to `inner[i]`, and the last forward entry reaches `to`.
    let forward = |a: &L| {
        let mut out = Vec::with_capacity(r);
        let mut at = chain.from;
        let mut l = a.clone();
        for (i, &e) in chain.edges.iter().enumerate() {
            l = l.compose(&view.label_from(e, at));
            at = if i + 1 < r { chain.inner[i] } else { chain.to };
            out.push(l.clone());
        }
        out
    };
    let backward = |b: &L| {
        let mut out = vec![b.clone(); r - 1];
        let mut at = chain.to;
        let mut l = b.clone();
        for i in (1..r).rev() {
            l = l.compose(&view.label_from(chain.edges[i], at));
            at = chain.inner[i - 1];
            out[i - 1] = l.clone();
        }
        out
    };
    match (labels[chain.from].clone(), labels[chain.to].clone()) {
        (None, None) => {}
        (Some(a), None) => {
            let f = forward(&a);
            for i in 0..last_light {
                labels[chain.inner[i]] = Some(f[i].clone());
            }
        }
        (None, Some(b)) => {
            let bw = backward(&b);
            for i in first_light..r - 1 {
                labels[chain.inner[i]] = Some(bw[i].clone());
            }
        }
        (Some(a), Some(b)) => {
            let f = forward(&a);
            let cut = if f[r - 1] == b { r } else { first_light };
            let bw = backward(&b);
            for i in 0..r - 1 {
                labels[chain.inner[i]] = Some(if i < cut { f[i].clone() } else { bw[i].clone() });
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Slot<L> {
    Undecided,
    Out,
    In(L),
    /// Will join with a label outside the listed ones.
    Deferred(Vec<L>),
}

/// Exact minimisation over vertex labellings `V → Γ ∪ {⊥}` with the root
/// labelled by the identity. Doubled edge costs: both endpoints labelled
/// and consistent 0, labelled but inconsistent `2w`, exactly one endpoint
/// `⊥` costs `w`. Vertices join only through a consistent edge to a vertex
/// already in, so the consistent edges always connect the labelled part.
struct LabelSearch<'a, L: Gain> {
    view: &'a GainGraph<L>,
    weights: &'a [u64],
    adj: Vec<Vec<(EdgeId, Vertex)>>,
    local: Vec<EdgeId>,
    verts: Vec<Vertex>,
    slots: Vec<Slot<L>>,
    best: Option<(u64, usize, Vec<Slot<L>>)>,
}

impl<'a, L: Gain> LabelSearch<'a, L> {
    fn new(view: &'a GainGraph<L>, root: Vertex, weights: &'a [u64], alive: &[bool], comp: &[Vertex]) -> Self {
        let g = &view.graph;
        let adj = g.adjacency(alive);
        let in_comp: BTreeSet<Vertex> = comp.iter().copied().collect();
        let local = (0..g.edges.len()).filter(|&e| alive[e] && in_comp.contains(&g.edges[e].0)).collect();
        let mut slots = vec![Slot::Out; g.n];
        for &v in comp {
            slots[v] = Slot::Undecided;
        }
        slots[root] = Slot::In(view.labels[0].identity_like());
        LabelSearch { view, weights, adj, local, verts: comp.to_vec(), slots, best: None }
    }

    /// Optimal labelling; `None` marks vertices outside `V_R`.
    fn labels(mut self) -> Vec<Option<L>> {
        self.recurse();
        let (_, _, slots) = self.best.take().expect("a leaf is always reached");
        slots.into_iter().map(|s| if let Slot::In(l) = s { Some(l) } else { None }).collect()
    }

    fn implied(&self, e: EdgeId, from: Vertex, label: &L) -> L {
        label.compose(&self.view.label_from(e, from))
    }

    /// Doubled cost already committed, and the largest reachable `|V_R|`.
    fn bound(&self) -> (u64, usize) {
        let g = &self.view.graph;
        let mut lb = 0;
        for &e in &self.local {
            let (u, v) = g.edges[e];
            let w = self.weights[e];
            lb += match (&self.slots[u], &self.slots[v]) {
                (Slot::In(a), Slot::In(b)) => {
                    if self.implied(e, u, a) == *b {
                        0
                    } else {
                        2 * w
                    }
                }
                (Slot::In(_), Slot::Out) | (Slot::Out, Slot::In(_)) => w,
                (Slot::Out, Slot::Deferred(_)) | (Slot::Deferred(_), Slot::Out) => w,
                (Slot::In(a), Slot::Deferred(f)) => {
                    if f.contains(&self.implied(e, u, a)) {
                        2 * w
                    } else {
                        0
                    }
                }
                (Slot::Deferred(f), Slot::In(b)) => {
                    if f.contains(&self.implied(e, v, b)) {
                        2 * w
                    } else {
                        0
                    }
                }
                _ => 0,
            };
        }
        let max_in = self.verts.iter().filter(|&&v| !matches!(self.slots[v], Slot::Out)).count();
        (lb, max_in)
    }

    fn pruned(&self) -> bool {
        let (lb, max_in) = self.bound();
        match &self.best {
            Some((bv, bin, _)) => lb > *bv || (lb == *bv && max_in <= *bin),
            None => false,
        }
    }

    fn with_slot(&mut self, v: Vertex, slot: Slot<L>) {
        let old = std::mem::replace(&mut self.slots[v], slot);
        self.recurse();
        self.slots[v] = old;
    }

    fn recurse(&mut self) {
        if self.pruned() {
            return;
        }
        // Settle a deferred vertex facing a labelled neighbour whose
        // implied label is still open: take it, or forbid it.
        for i in 0..self.verts.len() {
            let v = self.verts[i];
            let Slot::Deferred(forbidden) = &self.slots[v] else { continue };
            for &(e, u) in &self.adj[v] {
                if let Slot::In(lu) = &self.slots[u] {
                    let l = self.implied(e, u, lu);
                    if !forbidden.contains(&l) {
                        let mut more = forbidden.clone();
                        more.push(l.clone());
                        self.with_slot(v, Slot::In(l));
                        self.with_slot(v, Slot::Deferred(more));
                        return;
                    }
                }
            }
        }
        let frontier = self.verts.iter().copied().find(|&v| {
            matches!(self.slots[v], Slot::Undecided)
                && self.adj[v].iter().any(|&(_, u)| matches!(self.slots[u], Slot::In(_)))
        });
        if let Some(v) = frontier {
            let mut options: Vec<L> = Vec::new();
            for &(e, u) in &self.adj[v] {
                if let Slot::In(lu) = &self.slots[u] {
                    let l = self.implied(e, u, lu);
                    if !options.contains(&l) {
                        options.push(l);
                    }
                }
            }
            for l in &options {
                self.with_slot(v, Slot::In(l.clone()));
            }
            self.with_slot(v, Slot::Out);
            self.with_slot(v, Slot::Deferred(options));
            return;
        }
        if self.verts.iter().any(|&v| matches!(self.slots[v], Slot::Deferred(_))) {
            return;
        }
        // Remaining undecided vertices stay outside.
        let (lb, _) = self.bound();
        let count = self.verts.iter().filter(|&&v| matches!(self.slots[v], Slot::In(_))).count();
        let better = match &self.best {
            None => true,
            Some((bv, bin, _)) => lb < *bv || (lb == *bv && count > *bin),
        };
        if better {
            let mut slots = self.slots.clone();
            for s in &mut slots {
                if matches!(s, Slot::Undecided) {
                    *s = Slot::Out;
                }
            }
            self.best = Some((lb, count, slots));
        }
    }
}
