//! The rooted biased graph of a disjoint compression instance.
//!
//! Vertices are the variables plus a root `s`. Every equation `a·u + b·v = 0`
//! of `S - X` becomes an edge labelled `-a/b` (read from `u` to `v`), so a
//! cycle is balanced exactly when it implies the identity. The root gets a
//! weight-one spoke to every variable of `X`; spokes carry distinct shifts,
//! which makes every cycle through the root unbalanced.

use std::collections::BTreeSet;

use super::DmlInstance;
use crate::biased::{EdgeId, GainGraph, Shift, Vertex};
use crate::ring::{EuclideanDomain, Ratio};
use crate::system::{EqId, Var};

pub type RootedLabel<D> = (Ratio<D>, Shift);

#[derive(Debug, Clone)]
pub struct RootedGraph<D: EuclideanDomain> {
    pub gains: GainGraph<RootedLabel<D>>,
    pub root: Vertex,
    /// Equation behind each edge; `None` for spokes.
    pub edge_eq: Vec<Option<EqId>>,
    /// Variable at the end of each spoke.
    pub spokes: Vec<(EdgeId, Var)>,
}

impl<D: EuclideanDomain> RootedGraph<D> {
    /// Equations behind the given edges, ignoring spokes.
    pub fn equations_of(&self, edges: &BTreeSet<EdgeId>) -> BTreeSet<EqId> {
        edges.iter().filter_map(|&e| self.edge_eq[e]).collect()
    }
}

pub fn build_rooted_graph<D: EuclideanDomain>(inst: &DmlInstance<D>) -> RootedGraph<D> {
    let sys = &inst.system;
    let d = &sys.domain;
    let root = sys.num_vars();
    let mut gains = GainGraph::new(root + 1);
    let mut edge_eq = Vec::new();
    for e in sys.equations.iter().filter(|e| !inst.x.contains(&e.id)) {
        let label = Ratio::new(d, d.neg(&e.a), e.b.clone());
        gains.add_edge(e.u, e.v, e.weight, (label, Shift(0)));
        edge_eq.push(Some(e.id));
    }
    let mut spokes = Vec::new();
    for (i, x) in inst.x_vars().into_iter().enumerate() {
        let e = gains.add_edge(root, x, 1, (Ratio::one(d), Shift(i as i64 + 1)));
        edge_eq.push(None);
        spokes.push((e, x));
    }
    RootedGraph { gains, root, edge_eq, spokes }
}

/// Cost bound for the zero-free subgraph: `w(Z) + |V(X)| - 1`, where at
/// least one component of `S - (X ∪ Z)` meeting `V(X)` is nonzero.
pub fn family_budget<D: EuclideanDomain>(inst: &DmlInstance<D>) -> u64 {
    inst.k + inst.x_vars().len() as u64 - 1
}
