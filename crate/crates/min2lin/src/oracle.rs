//! Ground truth for testing: exhaustive solvers, seeded instance
//! generators, and the classical problems that embed into Min-2-Lin.
//!
//! Everything here is exponential and meant for instances with at most a
//! couple of dozen equations or edges.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::biased::{EdgeId, Graph, Vertex};
use crate::cuts::{components_after, verify_pair_partition_cut, CutInstance};
use crate::ring::{is_prime, DomainSpec, EuclideanDomain, Integers, PrimeField, Rationals};
use crate::system::{solve, EqId, LinSystem};

/// Minimum-weight subset of `items` (with weights `weight`) of total at
/// most `k` accepted by `ok`. Subsets are tried by nondecreasing weight and
/// lexicographically within a weight, so the answer is deterministic.
pub fn brute_min_subset<T: Copy + Ord>(
    items: &[(T, u64)],
    k: u64,
    mut ok: impl FnMut(&BTreeSet<T>) -> bool,
) -> Option<(u64, BTreeSet<T>)> {
    fn rec<T: Copy + Ord>(
        items: &[(T, u64)],
        i: usize,
        left: u64,
        current: &mut BTreeSet<T>,
        ok: &mut dyn FnMut(&BTreeSet<T>) -> bool,
    ) -> bool {
        if left == 0 {
            return ok(current);
        }
        for j in i..items.len() {
            let (x, w) = items[j];
            if w <= left {
                current.insert(x);
                if rec(items, j + 1, left - w, current, ok) {
                    return true;
                }
                current.remove(&x);
            }
        }
        false
    }
    let total: u64 = items.iter().map(|i| i.1).sum();
    for target in 0..=k.min(total) {
        let mut current = BTreeSet::new();
        if rec(items, 0, target, &mut current, &mut ok) {
            return Some((target, current));
        }
    }
    None
}

/// Exact minimum deletion set of weight at most `k`.
pub fn brute_min2lin<D: EuclideanDomain>(sys: &LinSystem<D>, k: u64) -> Option<(u64, BTreeSet<EqId>)> {
    let items: Vec<(EqId, u64)> = sys.equations.iter().map(|e| (e.id, e.weight)).collect();
    brute_min_subset(&items, k, |z| solve(&sys.without(z)).is_some())
}

/// Exact optimum with no budget.
pub fn brute_optimum<D: EuclideanDomain>(sys: &LinSystem<D>) -> (u64, BTreeSet<EqId>) {
    brute_min2lin(sys, sys.total_weight()).expect("deleting everything is consistent")
}

fn edge_items(g: &Graph) -> Vec<(EdgeId, u64)> {
    (0..g.num_edges()).map(|e| (e, g.weights[e])).collect()
}

/// Minimum edge set separating every pair of terminals.
pub fn brute_multiway_cut(g: &Graph, terminals: &[Vertex], k: u64) -> Option<(u64, BTreeSet<EdgeId>)> {
    brute_min_subset(&edge_items(g), k, |cut| {
        let comp = components_after(g, cut);
        let seen: BTreeSet<usize> = terminals.iter().map(|&t| comp[t]).collect();
        seen.len() == terminals.len()
    })
}

/// Minimum edge set separating every requested pair.
pub fn brute_multicut(g: &Graph, pairs: &[(Vertex, Vertex)], k: u64) -> Option<(u64, BTreeSet<EdgeId>)> {
    brute_min_subset(&edge_items(g), k, |cut| {
        let comp = components_after(g, cut);
        pairs.iter().all(|&(s, t)| comp[s] != comp[t])
    })
}

/// Minimum edge set whose removal leaves a bipartite graph.
pub fn brute_bipartization(g: &Graph, k: u64) -> Option<(u64, BTreeSet<EdgeId>)> {
    brute_min_subset(&edge_items(g), k, |cut| is_bipartite(g, cut))
}

pub fn is_bipartite(g: &Graph, cut: &BTreeSet<EdgeId>) -> bool {
    let alive: Vec<bool> = (0..g.num_edges()).map(|e| !cut.contains(&e)).collect();
    let adj = g.adjacency(&alive);
    let mut side: Vec<Option<bool>> = vec![None; g.n];
    for s in 0..g.n {
        if side[s].is_some() {
            continue;
        }
        side[s] = Some(false);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            let sx = side[x].expect("visited");
            for &(_, y) in &adj[x] {
                match side[y] {
                    None => {
                        side[y] = Some(!sx);
                        stack.push(y);
                    }
                    Some(sy) if sy == sx => return false,
                    Some(_) => {}
                }
            }
        }
    }
    true
}

/// Minimum pair partition cut by exhaustive search.
pub fn brute_pair_partition_cut(inst: &CutInstance) -> Option<(u64, BTreeSet<EdgeId>)> {
    brute_min_subset(&edge_items(&inst.graph), inst.k, |cut| verify_pair_partition_cut(inst, cut))
}

/// All important `(s, t)` edge separators of weight at most `k`: cuts `C`
/// such that every other cut `C'` with `w(C') ≤ w(C)` reaches strictly less
/// from `s` or something incomparable. Returned in increasing order.
pub fn brute_important_separators(g: &Graph, s: Vertex, t: Vertex, k: u64) -> Vec<BTreeSet<EdgeId>> {
    let m = g.num_edges();
    assert!(m <= 24, "exhaustive separator enumeration over {m} edges");
    let mut cuts: Vec<(u64, BTreeSet<EdgeId>, BTreeSet<Vertex>)> = Vec::new();
    for mask in 0u32..(1u32 << m) {
        let cut: BTreeSet<EdgeId> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
        let w = g.weight_of(&cut);
        if w > k {
            continue;
        }
        let alive: Vec<bool> = (0..m).map(|e| !cut.contains(&e)).collect();
        let reach: BTreeSet<Vertex> = g.reachable(s, &alive).into_iter().collect();
        if !reach.contains(&t) {
            cuts.push((w, cut, reach));
        }
    }
    let mut out: Vec<BTreeSet<EdgeId>> = cuts
        .iter()
        .filter(|(w, c, r)| !cuts.iter().any(|(w2, c2, r2)| w2 <= w && r.is_subset(r2) && c2 != c))
        .map(|(_, c, _)| c.clone())
        .collect();
    out.sort();
    out
}

/// Odd cycle transversal as 2-Lin over GF(2): `x - y = 1` per edge.
pub fn reduce_bipartization(g: &Graph) -> LinSystem<PrimeField> {
    let f = PrimeField::new(2).expect("2 is prime");
    let mut s = LinSystem::with_vars(f, g.n);
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        s.push_i64(u, v, 1, -1, 1, g.weights[e]);
    }
    s
}

/// Multiway cut as 2-Lin over the rationals: `x = y` per edge and terminal
/// `i` pinned to `i` with weight `k + 1`.
pub fn reduce_multiway_cut(g: &Graph, terminals: &[Vertex], k: u64) -> LinSystem<Rationals> {
    let mut s = LinSystem::with_vars(Rationals, g.n);
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        s.push_i64(u, v, 1, -1, 0, g.weights[e]);
    }
    for (i, &t) in terminals.iter().enumerate() {
        s.push_i64(t, t, 1, 0, i as i64, k + 1);
    }
    s
}

/// The first `n` odd primes.
pub fn odd_primes(n: usize) -> Vec<u64> {
    (3u64..).step_by(2).filter(|&q| is_prime(q)).take(n).collect()
}

/// Multicut as 2-Lin over the integers: `x = y` per edge, and for request
/// `i` with prime `p` the equations `s = p·s'` and `t = p·t' + 1` with
/// weight `k + 1` on fresh `s'`, `t'`. Connected `s` and `t` would need one
/// integer to be both divisible by `p` and one more than a multiple of it.
pub fn reduce_multicut(g: &Graph, pairs: &[(Vertex, Vertex)], k: u64) -> LinSystem<Integers> {
    let mut sys = LinSystem::with_vars(Integers, g.n);
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        sys.push_i64(u, v, 1, -1, 0, g.weights[e]);
    }
    for (i, (&(s, t), p)) in pairs.iter().zip(odd_primes(pairs.len())).enumerate() {
        let s1 = sys.add_var(format!("s{i}'"));
        let t1 = sys.add_var(format!("t{i}'"));
        sys.push_i64(s, s1, 1, -(p as i64), 0, k + 1);
        sys.push_i64(t, t1, 1, -(p as i64), 1, k + 1);
    }
    sys
}

/// Planting parameters: `budget` equations violated by a hidden assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedConfig {
    pub budget: usize,
}

/// Reproducible random-instance description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub domain: DomainSpec,
    pub n_vars: usize,
    pub n_eqs: usize,
    pub weight_max: u64,
    pub seed: u64,
    #[serde(default)]
    pub planted: Option<PlantedConfig>,
}

impl GeneratorConfig {
    pub fn new(domain: DomainSpec, n_vars: usize, n_eqs: usize, seed: u64) -> Self {
        GeneratorConfig { domain, n_vars, n_eqs, weight_max: 1, seed, planted: None }
    }
}

/// A generated instance with the deletion set and assignment it was built
/// around.
#[derive(Debug, Clone)]
pub struct Planted<D: EuclideanDomain> {
    pub system: LinSystem<D>,
    pub deleted: BTreeSet<EqId>,
    pub assignment: Vec<D::Elem>,
}

fn nonzero<D: EuclideanDomain>(d: &D, rng: &mut ChaCha8Rng) -> D::Elem {
    loop {
        let x = d.from_i64(rng.gen_range(-3..=3));
        if !d.is_zero(&x) {
            return x;
        }
    }
}

fn endpoints(n: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    assert!(n >= 2, "need two variables");
    let u = rng.gen_range(0..n);
    let v = (u + rng.gen_range(1..n)) % n;
    (u, v)
}

/// Random equations with small coefficients over `domain`; `cfg.domain`
/// only matters to callers that pick the domain from the config.
pub fn gen_random<D: EuclideanDomain>(domain: &D, cfg: &GeneratorConfig) -> LinSystem<D> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut s = LinSystem::with_vars(domain.clone(), cfg.n_vars);
    for _ in 0..cfg.n_eqs {
        let (u, v) = endpoints(cfg.n_vars, &mut rng);
        let a = nonzero(domain, &mut rng);
        let b = nonzero(domain, &mut rng);
        let c = domain.from_i64(rng.gen_range(-3..=3));
        let w = rng.gen_range(1..=cfg.weight_max.max(1));
        s.push(u, v, a, b, c, w);
    }
    s
}

/// Equations satisfied by a hidden assignment, except for
/// `cfg.planted.budget` unit-weight ones that it violates.
pub fn gen_planted<D: EuclideanDomain>(domain: &D, cfg: &GeneratorConfig) -> Planted<D> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let budget = cfg.planted.map_or(0, |p| p.budget).min(cfg.n_eqs);
    let phi: Vec<D::Elem> = (0..cfg.n_vars).map(|_| domain.from_i64(rng.gen_range(-4..=4))).collect();
    let mut noisy: Vec<bool> = (0..cfg.n_eqs).map(|i| i < budget).collect();
    noisy.shuffle(&mut rng);
    let mut s = LinSystem::with_vars(domain.clone(), cfg.n_vars);
    let mut deleted = BTreeSet::new();
    for bad in noisy {
        let (u, v) = endpoints(cfg.n_vars, &mut rng);
        let a = nonzero(domain, &mut rng);
        let b = nonzero(domain, &mut rng);
        let mut c = domain.add(&domain.mul(&a, &phi[u]), &domain.mul(&b, &phi[v]));
        let w = if bad {
            c = domain.add(&c, &nonzero(domain, &mut rng));
            1
        } else {
            rng.gen_range(1..=cfg.weight_max.max(1))
        };
        let id = s.push(u, v, a, b, c, w);
        if bad {
            deleted.insert(id);
        }
    }
    Planted { system: s, deleted, assignment: phi }
}

/// `G(n, p)` with weights drawn from `1..=weight_max`.
pub fn random_graph(n: usize, edge_prob: f64, weight_max: u64, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(edge_prob) {
                g.add_edge(u, v, rng.gen_range(1..=weight_max.max(1)));
            }
        }
    }
    g
}
