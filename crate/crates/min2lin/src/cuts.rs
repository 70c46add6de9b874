//! Graph separation: multiway cut, partition cut and pair partition cut.
//!
//! Pair partition cut goes through two MinCSP encodings. `Γ_k` gives every
//! vertex a value naming the block its component belongs to. `Γ′_k` turns
//! that into Boolean indicator variables whose constraints are all
//! expressible in 2-CNF, which [`mincsp_solve_exact`] handles by
//! branch-and-bound over unsatisfiable cores.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::biased::{EdgeId, Graph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CutError {
    #[error("constraint {0} is not expressible over a Boolean domain")]
    NotBoolean(usize),
    #[error("constraint {0} mentions value 0 in a disjunctive disequality")]
    ZeroDisequality(usize),
    #[error("vertex {0} appears in two blocks")]
    OverlappingBlocks(Vertex),
    #[error("request endpoint {0} is not a terminal")]
    RequestOutsideTerminals(Vertex),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(Vertex),
}

/// Max-flow network over an undirected multigraph (Dinic).
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { n, head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    /// Adds an undirected edge of capacity `c` in both directions.
    pub fn add_undirected(&mut self, u: usize, v: usize, c: u64) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(c);
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        if s == t {
            return u64::MAX;
        }
        let mut flow = 0u64;
        loop {
            let mut level = vec![usize::MAX; self.n];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &a in &self.head[x] {
                    if self.cap[a] > 0 && level[self.to[a]] == usize::MAX {
                        level[self.to[a]] = level[x] + 1;
                        queue.push_back(self.to[a]);
                    }
                }
            }
            if level[t] == usize::MAX {
                return flow;
            }
            let mut iter = vec![0usize; self.n];
            loop {
                let pushed = self.augment(s, t, u64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                flow = flow.saturating_add(pushed);
            }
        }
    }

    fn augment(&mut self, x: usize, t: usize, limit: u64, level: &[usize], iter: &mut [usize]) -> u64 {
        if x == t {
            return limit;
        }
        while iter[x] < self.head[x].len() {
            let a = self.head[x][iter[x]];
            let y = self.to[a];
            if self.cap[a] > 0 && level[y] == level[x] + 1 {
                let pushed = self.augment(y, t, limit.min(self.cap[a]), level, iter);
                if pushed > 0 {
                    self.cap[a] -= pushed;
                    self.cap[a ^ 1] = self.cap[a ^ 1].saturating_add(pushed);
                    return pushed;
                }
            }
            iter[x] += 1;
        }
        0
    }
}

/// Minimum weight of an edge set separating `sources` from `sinks` among
/// live edges, with `protected` edges uncuttable. Saturates at `u64::MAX`
/// when no finite cut exists.
pub fn min_cut_value(g: &Graph, sources: &[Vertex], sinks: &[Vertex], alive: &[bool], protected: &[bool]) -> u64 {
    let infinite = g.weights.iter().sum::<u64>() + 1;
    let (s, t) = (g.n, g.n + 1);
    let mut net = FlowNetwork::new(g.n + 2);
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        if alive[e] {
            net.add_undirected(u, v, if protected[e] { infinite } else { g.weights[e] });
        }
    }
    for &x in sources {
        net.add_undirected(s, x, infinite);
    }
    for &x in sinks {
        net.add_undirected(x, t, infinite);
    }
    let f = net.max_flow(s, t);
    if f >= infinite {
        u64::MAX
    } else {
        f
    }
}

/// Result of a cut search together with the number of search nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub edges: BTreeSet<EdgeId>,
    pub weight: u64,
    pub nodes: usize,
}

/// Minimum-weight edge set of weight at most `k` leaving every component
/// with at most one terminal.
pub fn multiway_cut(g: &Graph, terminals: &[Vertex], k: u64) -> Option<BTreeSet<EdgeId>> {
    multiway_cut_counted(g, terminals, k).map(|r| r.edges)
}

/// [`multiway_cut`] also reporting the search-node count.
pub fn multiway_cut_counted(g: &Graph, terminals: &[Vertex], k: u64) -> Option<CutResult> {
    let terminals: Vec<Vertex> = terminals.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut search = MultiwaySearch { g, terminals: &terminals, best: None, limit: k, nodes: 0 };
    let m = g.num_edges();
    search.branch(&mut vec![true; m], &mut vec![false; m], 0);
    let nodes = search.nodes;
    search.best.map(|(weight, edges)| CutResult { edges, weight, nodes })
}

struct MultiwaySearch<'a> {
    g: &'a Graph,
    terminals: &'a [Vertex],
    best: Option<(u64, BTreeSet<EdgeId>)>,
    limit: u64,
    nodes: usize,
}

impl MultiwaySearch<'_> {
    fn budget(&self) -> u64 {
        match &self.best {
            Some((w, _)) => w.saturating_sub(1).min(self.limit),
            None => self.limit,
        }
    }

    fn branch(&mut self, alive: &mut Vec<bool>, protected: &mut Vec<bool>, used: u64) {
        self.nodes += 1;
        if used > self.budget() || (self.best.is_some() && used >= self.best.as_ref().unwrap().0) {
            return;
        }
        let Some(path) = self.connecting_path(alive) else {
            let deleted = alive.iter().enumerate().filter(|(_, &a)| !a).map(|(e, _)| e).collect();
            self.best = Some((used, deleted));
            return;
        };
        let mut isolating = 0u64;
        for (i, &t) in self.terminals.iter().enumerate() {
            let others: Vec<Vertex> =
                self.terminals.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            let c = min_cut_value(self.g, &[t], &others, alive, protected);
            if c == u64::MAX {
                return;
            }
            isolating += c;
        }
        if used + isolating.div_ceil(2) > self.budget() {
            return;
        }
        let free: Vec<EdgeId> = path.into_iter().filter(|&e| !protected[e]).collect();
        for (i, &e) in free.iter().enumerate() {
            alive[e] = false;
            for &f in &free[..i] {
                protected[f] = true;
            }
            self.branch(alive, protected, used + self.g.weights[e]);
            for &f in &free[..i] {
                protected[f] = false;
            }
            alive[e] = true;
        }
    }

    /// Shortest live path between two distinct terminals, as edge ids.
    fn connecting_path(&self, alive: &[bool]) -> Option<Vec<EdgeId>> {
        let adj = self.g.adjacency(alive);
        let mut source = vec![usize::MAX; self.g.n];
        let mut parent: Vec<Option<(EdgeId, Vertex)>> = vec![None; self.g.n];
        let mut queue = VecDeque::new();
        for (i, &t) in self.terminals.iter().enumerate() {
            source[t] = i;
            queue.push_back(t);
        }
        while let Some(x) = queue.pop_front() {
            for &(e, y) in &adj[x] {
                if source[y] == usize::MAX {
                    source[y] = source[x];
                    parent[y] = Some((e, x));
                    queue.push_back(y);
                } else if source[y] != source[x] {
                    let mut path = trace(&parent, x);
                    path.reverse();
                    path.push(e);
                    path.extend(trace(&parent, y));
                    return Some(path);
                }
            }
        }
        None
    }
}

fn trace(parent: &[Option<(EdgeId, Vertex)>], mut x: Vertex) -> Vec<EdgeId> {
    let mut out = Vec::new();
    while let Some((e, p)) = parent[x] {
        out.push(e);
        x = p;
    }
    out
}

/// A disjunctive request: cut `s` from `u` or cut `t` from `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairCutRequest {
    pub s: Vertex,
    pub u: Vertex,
    pub t: Vertex,
    pub v: Vertex,
}

/// A pair partition cut instance. Terminals are the union of the blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutInstance {
    pub graph: Graph,
    pub partition: Vec<Vec<Vertex>>,
    pub requests: Vec<PairCutRequest>,
    pub k: u64,
}

impl CutInstance {
    pub fn new(graph: Graph, partition: Vec<Vec<Vertex>>, k: u64) -> Result<Self, CutError> {
        let mut seen = BTreeSet::new();
        for &x in partition.iter().flatten() {
            if x >= graph.n {
                return Err(CutError::UnknownVertex(x));
            }
            if !seen.insert(x) {
                return Err(CutError::OverlappingBlocks(x));
            }
        }
        Ok(CutInstance { graph, partition, requests: Vec::new(), k })
    }

    /// Adds requests, whose `s` and `t` must be terminals.
    pub fn with_requests(mut self, requests: Vec<PairCutRequest>) -> Result<Self, CutError> {
        let terminals = self.terminals();
        for r in &requests {
            if let Some(&x) = [r.s, r.u, r.t, r.v].iter().find(|&&x| x >= self.graph.n) {
                return Err(CutError::UnknownVertex(x));
            }
            if let Some(&x) = [r.s, r.t].iter().find(|x| !terminals.contains(x)) {
                return Err(CutError::RequestOutsideTerminals(x));
            }
        }
        self.requests.extend(requests);
        Ok(self)
    }

    pub fn terminals(&self) -> BTreeSet<Vertex> {
        self.partition.iter().flatten().copied().collect()
    }

    /// Block index (0-based) of every terminal.
    pub fn block_of(&self) -> BTreeMap<Vertex, usize> {
        let mut out = BTreeMap::new();
        for (i, b) in self.partition.iter().enumerate() {
            for &x in b {
                out.insert(x, i);
            }
        }
        out
    }
}

/// Connected-component labels of `g` after removing `cut`.
pub fn components_after(g: &Graph, cut: &BTreeSet<EdgeId>) -> Vec<usize> {
    let alive: Vec<bool> = (0..g.num_edges()).map(|e| !cut.contains(&e)).collect();
    let mut comp = vec![usize::MAX; g.n];
    let mut next = 0;
    for x in 0..g.n {
        if comp[x] == usize::MAX {
            for y in g.reachable(x, &alive) {
                comp[y] = next;
            }
            next += 1;
        }
    }
    comp
}

/// `cut` leaves no component with terminals from two blocks.
pub fn is_partition_cut(g: &Graph, partition: &[Vec<Vertex>], cut: &BTreeSet<EdgeId>) -> bool {
    let comp = components_after(g, cut);
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, b) in partition.iter().enumerate() {
        for &x in b {
            if *owner.entry(comp[x]).or_insert(i) != i {
                return false;
            }
        }
    }
    true
}

/// `cut` is a partition cut fulfilling every request.
pub fn verify_pair_partition_cut(inst: &CutInstance, cut: &BTreeSet<EdgeId>) -> bool {
    if !is_partition_cut(&inst.graph, &inst.partition, cut) {
        return false;
    }
    let comp = components_after(&inst.graph, cut);
    inst.requests.iter().all(|r| comp[r.s] != comp[r.u] || comp[r.t] != comp[r.v])
}

/// Minimum partition cut of weight at most `k`, through superterminals
/// joined to their blocks by edges of weight `k + 1`.
pub fn partition_cut(g: &Graph, partition: &[Vec<Vertex>], k: u64) -> Option<BTreeSet<EdgeId>> {
    partition_cut_counted(g, partition, k).map(|r| r.edges)
}

/// [`partition_cut`] also reporting the search-node count.
pub fn partition_cut_counted(g: &Graph, partition: &[Vec<Vertex>], k: u64) -> Option<CutResult> {
    let mut h = g.clone();
    let mut supers = Vec::new();
    for block in partition {
        let s = h.add_vertex();
        for &x in block {
            h.add_edge(s, x, k + 1);
        }
        supers.push(s);
    }
    let cut = multiway_cut_counted(&h, &supers, k)?;
    debug_assert!(cut.edges.iter().all(|&e| e < g.num_edges()));
    Some(cut)
}

/// A MinCSP constraint. Values of `Γ_k` variables range over `0..domain`;
/// Boolean constraints treat values as `0`/`1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `x = value`.
    Pin { x: usize, value: usize },
    /// `x = y`.
    Equal { x: usize, y: usize },
    /// `(x ≠ i) ∨ (y ≠ j)`.
    NotBoth { x: usize, i: usize, y: usize, j: usize },
    /// Boolean `x = value`.
    BoolFix { x: usize, value: bool },
    /// `R_k`: `x_l = y_l` for every pair, and at most one `x_l` is true.
    Rk { pairs: Vec<(usize, usize)> },
    /// `¬x ∨ ¬y`.
    Nand { x: usize, y: usize },
}

impl Constraint {
    pub fn holds(&self, asg: &[usize]) -> bool {
        match *self {
            Constraint::Pin { x, value } => asg[x] == value,
            Constraint::Equal { x, y } => asg[x] == asg[y],
            Constraint::NotBoth { x, i, y, j } => asg[x] != i || asg[y] != j,
            Constraint::BoolFix { x, value } => (asg[x] != 0) == value,
            Constraint::Rk { ref pairs } => {
                pairs.iter().all(|&(x, y)| (asg[x] != 0) == (asg[y] != 0))
                    && pairs.iter().filter(|&&(x, _)| asg[x] != 0).count() <= 1
            }
            Constraint::Nand { x, y } => asg[x] == 0 || asg[y] == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedConstraint {
    pub constraint: Constraint,
    pub weight: u64,
    /// The graph edge this constraint stands for, if any.
    pub origin: Option<EdgeId>,
}

/// A weighted MinCSP instance; weight `k + 1` marks crisp constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspInstance {
    pub domain: usize,
    pub num_vars: usize,
    pub constraints: Vec<WeightedConstraint>,
    pub k: u64,
}

impl CspInstance {
    pub fn push(&mut self, constraint: Constraint, weight: u64, origin: Option<EdgeId>) {
        self.constraints.push(WeightedConstraint { constraint, weight, origin });
    }

    pub fn unsatisfied_weight(&self, asg: &[usize]) -> u64 {
        self.constraints.iter().filter(|c| !c.constraint.holds(asg)).map(|c| c.weight).sum()
    }
}

/// `Γ_k` encoding: block `B_i` is value `i` (1-based), value `0` is free.
/// The domain therefore has `m + 1` values for `m` blocks.
pub fn encode_gamma_k(inst: &CutInstance) -> CspInstance {
    let crisp = inst.k + 1;
    let mut csp =
        CspInstance { domain: inst.partition.len() + 1, num_vars: inst.graph.n, constraints: Vec::new(), k: inst.k };
    for (i, block) in inst.partition.iter().enumerate() {
        for &t in block {
            csp.push(Constraint::Pin { x: t, value: i + 1 }, crisp, None);
        }
    }
    for (e, &(u, v)) in inst.graph.edges.iter().enumerate() {
        csp.push(Constraint::Equal { x: u, y: v }, inst.graph.weights[e], Some(e));
    }
    let block = inst.block_of();
    for r in &inst.requests {
        let (i, j) = (block[&r.s] + 1, block[&r.t] + 1);
        csp.push(Constraint::NotBoth { x: r.u, i, y: r.v, j }, crisp, None);
    }
    csp
}

/// Index of the indicator `v^(i)` (`i` is 1-based) among `Γ′_k` variables.
pub fn indicator(v: usize, i: usize, values: usize) -> usize {
    v * values + (i - 1)
}

/// `Γ′_k` encoding of a `Γ_k` instance over values `0..=m`.
pub fn encode_gamma_prime(csp: &CspInstance) -> Result<CspInstance, CutError> {
    let m = csp.domain - 1;
    let crisp = csp.k + 1;
    let mut out = CspInstance { domain: 2, num_vars: csp.num_vars * m, constraints: Vec::new(), k: csp.k };
    for v in 0..csp.num_vars {
        for i in 1..=m {
            for j in i + 1..=m {
                out.push(Constraint::Nand { x: indicator(v, i, m), y: indicator(v, j, m) }, crisp, None);
            }
        }
    }
    for (idx, c) in csp.constraints.iter().enumerate() {
        match c.constraint {
            Constraint::Pin { x, value: 0 } => {
                for i in 1..=m {
                    out.push(Constraint::BoolFix { x: indicator(x, i, m), value: false }, c.weight, c.origin);
                }
            }
            Constraint::Pin { x, value } => {
                out.push(Constraint::BoolFix { x: indicator(x, value, m), value: true }, c.weight, c.origin);
            }
            Constraint::Equal { x, y } => {
                let pairs = (1..=m).map(|i| (indicator(x, i, m), indicator(y, i, m))).collect();
                out.push(Constraint::Rk { pairs }, c.weight, c.origin);
            }
            Constraint::NotBoth { i: 0, .. } | Constraint::NotBoth { j: 0, .. } => {
                return Err(CutError::ZeroDisequality(idx));
            }
            Constraint::NotBoth { x, i, y, j } => {
                out.push(Constraint::Nand { x: indicator(x, i, m), y: indicator(y, j, m) }, c.weight, c.origin);
            }
            _ => return Err(CutError::NotBoolean(idx)),
        }
    }
    Ok(out)
}

/// Image of a `Γ_k` assignment under the indicator bijection.
pub fn gamma_prime_assignment(asg: &[usize], values: usize) -> Vec<usize> {
    let mut out = vec![0; asg.len() * values];
    for (v, &a) in asg.iter().enumerate() {
        if a > 0 {
            out[indicator(v, a, values)] = 1;
        }
    }
    out
}

/// Minimum-weight deletion set for a Boolean CSP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CspSolution {
    pub deleted: BTreeSet<usize>,
    pub weight: u64,
    pub assignment: Vec<usize>,
    pub nodes: usize,
}

/// 2-CNF clauses of a Boolean constraint, as pairs of literals `(var, sign)`.
fn clauses(c: &Constraint, idx: usize) -> Result<Vec<[(usize, bool); 2]>, CutError> {
    let bit = |value: usize| match value {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(CutError::NotBoolean(idx)),
    };
    Ok(match *c {
        Constraint::Pin { x, value } => vec![[(x, bit(value)?); 2]],
        Constraint::BoolFix { x, value } => vec![[(x, value); 2]],
        Constraint::Equal { x, y } => vec![[(x, false), (y, true)], [(x, true), (y, false)]],
        Constraint::NotBoth { x, i, y, j } => vec![[(x, !bit(i)?), (y, !bit(j)?)]],
        Constraint::Nand { x, y } => vec![[(x, false), (y, false)]],
        Constraint::Rk { ref pairs } => {
            let mut out = Vec::new();
            for &(x, y) in pairs {
                out.push([(x, false), (y, true)]);
                out.push([(x, true), (y, false)]);
            }
            for (a, &(x, _)) in pairs.iter().enumerate() {
                for &(y, _) in &pairs[a + 1..] {
                    out.push([(x, false), (y, false)]);
                }
            }
            out
        }
    })
}

/// Satisfying assignment of a 2-CNF formula, by strongly connected
/// components of the implication graph.
pub fn two_sat(num_vars: usize, clauses: &[[(usize, bool); 2]]) -> Option<Vec<bool>> {
    let lit = |(x, s): (usize, bool)| 2 * x + usize::from(!s);
    let n = 2 * num_vars;
    let mut adj = vec![Vec::new(); n];
    for &[a, b] in clauses {
        adj[lit(a) ^ 1].push(lit(b));
        adj[lit(b) ^ 1].push(lit(a));
    }
    let comp = tarjan(&adj);
    let mut out = Vec::with_capacity(num_vars);
    for x in 0..num_vars {
        let (t, f) = (comp[2 * x], comp[2 * x + 1]);
        if t == f {
            return None;
        }
        // Tarjan numbers components in reverse topological order.
        out.push(t < f);
    }
    Some(out)
}

fn tarjan(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![usize::MAX; n];
    let mut counter = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (x, ref mut i)) = work.last_mut() {
            if *i < adj[x].len() {
                let y = adj[x][*i];
                *i += 1;
                if index[y] == usize::MAX {
                    index[y] = counter;
                    low[y] = counter;
                    counter += 1;
                    stack.push(y);
                    on_stack[y] = true;
                    work.push((y, 0));
                } else if on_stack[y] {
                    low[x] = low[x].min(index[y]);
                }
            } else {
                work.pop();
                if let Some(&(p, _)) = work.last() {
                    low[p] = low[p].min(low[x]);
                }
                if low[x] == index[x] {
                    loop {
                        let y = stack.pop().expect("stack holds the component");
                        on_stack[y] = false;
                        comp[y] = ncomp;
                        if y == x {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Exact minimum-weight deletion set of weight at most `k` for a Boolean
/// CSP whose constraints are 2-CNF expressible.
///
/// Branch-and-bound: branch on the soft members of a minimal unsatisfiable
/// core, bounded below by a greedy packing of soft-disjoint cores.
pub fn mincsp_solve_exact(csp: &CspInstance) -> Result<Option<CspSolution>, CutError> {
    let encoded: Vec<Vec<[(usize, bool); 2]>> =
        csp.constraints.iter().enumerate().map(|(i, c)| clauses(&c.constraint, i)).collect::<Result<_, _>>()?;
    let mut search = CoreSearch {
        csp,
        encoded: &encoded,
        best: None,
        nodes: 0,
    };
    let n = csp.constraints.len();
    let hard: Vec<bool> = csp.constraints.iter().map(|c| c.weight > csp.k).collect();
    search.branch(&mut vec![true; n], &mut hard.clone(), 0);
    let nodes = search.nodes;
    Ok(search.best.map(|(weight, deleted, asg)| CspSolution {
        deleted,
        weight,
        assignment: asg.into_iter().map(usize::from).collect(),
        nodes,
    }))
}

struct CoreSearch<'a> {
    csp: &'a CspInstance,
    encoded: &'a [Vec<[(usize, bool); 2]>],
    best: Option<(u64, BTreeSet<usize>, Vec<bool>)>,
    nodes: usize,
}

impl CoreSearch<'_> {
    fn limit(&self) -> u64 {
        match &self.best {
            Some((w, _, _)) if *w == 0 => 0,
            Some((w, _, _)) => (w - 1).min(self.csp.k),
            None => self.csp.k,
        }
    }

    fn sat(&self, active: &[bool]) -> Option<Vec<bool>> {
        let all: Vec<[(usize, bool); 2]> =
            active.iter().enumerate().filter(|(_, &a)| a).flat_map(|(i, _)| self.encoded[i].iter().copied()).collect();
        two_sat(self.csp.num_vars, &all)
    }

    /// Deletion-minimal unsatisfiable subset of `active`.
    fn core(&self, active: &[bool]) -> Vec<usize> {
        let mut keep = active.to_vec();
        for i in 0..keep.len() {
            if keep[i] {
                keep[i] = false;
                if self.sat(&keep).is_some() {
                    keep[i] = true;
                }
            }
        }
        keep.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i).collect()
    }

    fn branch(&mut self, active: &mut Vec<bool>, fixed: &mut Vec<bool>, used: u64) {
        self.nodes += 1;
        if used > self.limit() {
            return;
        }
        if let Some(asg) = self.sat(active) {
            let deleted = active.iter().enumerate().filter(|(_, &a)| !a).map(|(i, _)| i).collect();
            self.best = Some((used, deleted, asg));
            return;
        }
        // Lower bound from soft-disjoint cores; the first one is branched on.
        let mut probe = active.clone();
        let mut first: Option<Vec<usize>> = None;
        let mut bound = used;
        while self.sat(&probe).is_none() {
            let core = self.core(&probe);
            let soft: Vec<usize> = core.iter().copied().filter(|&i| !fixed[i]).collect();
            let Some(cheapest) = soft.iter().map(|&i| self.csp.constraints[i].weight).min() else {
                return;
            };
            bound += cheapest;
            if bound > self.limit() {
                return;
            }
            for &i in &soft {
                probe[i] = false;
            }
            first.get_or_insert(core);
        }
        let core = first.expect("unsatisfiable state has a core");
        let soft: Vec<usize> = core.into_iter().filter(|&i| !fixed[i]).collect();
        for (pos, &c) in soft.iter().enumerate() {
            active[c] = false;
            for &f in &soft[..pos] {
                fixed[f] = true;
            }
            self.branch(active, fixed, used + self.csp.constraints[c].weight);
            for &f in &soft[..pos] {
                fixed[f] = false;
            }
            active[c] = true;
        }
    }
}

/// Every set partition of `items` in restricted-growth order.
pub fn set_partitions<T: Clone>(items: &[T]) -> Vec<Vec<Vec<T>>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; items.len()];
    fn rec<T: Clone>(i: usize, blocks: usize, labels: &mut Vec<usize>, items: &[T], out: &mut Vec<Vec<Vec<T>>>) {
        if i == items.len() {
            let mut parts = vec![Vec::new(); blocks];
            for (j, &l) in labels.iter().enumerate() {
                parts[l].push(items[j].clone());
            }
            out.push(parts);
            return;
        }
        for l in 0..=blocks {
            labels[i] = l;
            rec(i + 1, blocks.max(l + 1), labels, items, out);
        }
    }
    if items.is_empty() {
        return vec![Vec::new()];
    }
    rec(0, 0, &mut labels, items, &mut out);
    out
}

/// Every partition refining `partition`, each exactly once, as the product
/// of the set partitions of its blocks.
pub fn enumerate_refinements<T: Clone>(partition: &[Vec<T>]) -> Vec<Vec<Vec<T>>> {
    let mut out: Vec<Vec<Vec<T>>> = vec![Vec::new()];
    for block in partition {
        let options = set_partitions(block);
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for opt in &options {
                let mut p = prefix.clone();
                p.extend(opt.iter().cloned());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Visits every refinement of `partition` that splits it into at most
/// `max_extra` additional blocks, in the order of [`enumerate_refinements`],
/// until `visit` returns `true`. Returns whether some visit stopped it.
pub fn for_each_refinement<T: Clone>(
    partition: &[Vec<T>],
    max_extra: usize,
    visit: &mut dyn FnMut(Vec<Vec<T>>) -> bool,
) -> bool {
    fn rec<T: Clone>(
        partition: &[Vec<T>],
        block: usize,
        item: usize,
        extra_left: usize,
        current: &mut Vec<Vec<T>>,
        first_of_block: usize,
        visit: &mut dyn FnMut(Vec<Vec<T>>) -> bool,
    ) -> bool {
        if block == partition.len() {
            return visit(current.clone());
        }
        if item == partition[block].len() {
            let next = current.len();
            return rec(partition, block + 1, 0, extra_left, current, next, visit);
        }
        let x = partition[block][item].clone();
        for slot in first_of_block..current.len() {
            current[slot].push(x.clone());
            let stop = rec(partition, block, item + 1, extra_left, current, first_of_block, visit);
            current[slot].pop();
            if stop {
                return true;
            }
        }
        let opens_extra = current.len() > first_of_block;
        if !opens_extra || extra_left > 0 {
            current.push(vec![x]);
            let left = if opens_extra { extra_left - 1 } else { extra_left };
            let stop = rec(partition, block, item + 1, left, current, first_of_block, visit);
            current.pop();
            if stop {
                return true;
            }
        }
        false
    }
    rec(partition, 0, 0, max_extra, &mut Vec::new(), 0, visit)
}

/// Solves the instance with every block of the partition forced into
/// a single value, which is stronger than the partition cut condition when
/// a block may split. Returns the cut and the CSP search-node count.
pub fn pair_partition_cut_strict(inst: &CutInstance) -> Option<CutResult> {
    let gamma = encode_gamma_k(inst);
    let prime = encode_gamma_prime(&gamma).expect("Γ_k instances only use values 1..=m in requests");
    let sol = mincsp_solve_exact(&prime).expect("Γ′_k constraints are 2-CNF")?;
    let mut edges = BTreeSet::new();
    for &c in &sol.deleted {
        let wc = &prime.constraints[c];
        if wc.weight > inst.k {
            return None;
        }
        edges.insert(wc.origin.expect("soft constraints stand for edges"));
    }
    let weight = inst.graph.weight_of(&edges);
    Some(CutResult { edges, weight, nodes: sol.nodes })
}

/// Minimum partition cut of weight at most `k` fulfilling every request.
///
/// The components of an optimal cut split the terminals into some
/// refinement of the partition; trying every refinement with the strict
/// encoding therefore finds the optimum.
pub fn pair_partition_cut(inst: &CutInstance) -> Option<BTreeSet<EdgeId>> {
    pair_partition_cut_counted(inst).map(|r| r.edges)
}

/// [`pair_partition_cut`] also reporting the total search-node count.
pub fn pair_partition_cut_counted(inst: &CutInstance) -> Option<CutResult> {
    let base = components_after(&inst.graph, &BTreeSet::new());
    let mut best: Option<CutResult> = None;
    let mut nodes = 0;
    for refined in enumerate_refinements(&inst.partition) {
        // Each extra block inside one component needs another deleted edge.
        let mut per_comp: BTreeMap<usize, usize> = BTreeMap::new();
        for b in &refined {
            *per_comp.entry(base[b[0]]).or_default() += 1;
        }
        let needed: usize = per_comp.values().map(|c| c - 1).sum();
        let limit = best.as_ref().map_or(inst.k, |b| b.weight.saturating_sub(1).min(inst.k));
        if best.as_ref().is_some_and(|b| b.weight == 0) || needed as u64 > limit {
            continue;
        }
        let sub = CutInstance { graph: inst.graph.clone(), partition: refined, requests: inst.requests.clone(), k: limit };
        if let Some(r) = pair_partition_cut_strict(&sub) {
            nodes += r.nodes;
            debug_assert!(verify_pair_partition_cut(inst, &r.edges));
            best = Some(r);
        }
    }
    best.map(|b| CutResult { nodes, ..b })
}
