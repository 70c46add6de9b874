//! Iterative compression and equation subdivision.
//!
//! The system is built up one equation at a time while a deletion set of
//! weight at most `k` is maintained. When a new equation breaks it, the old
//! set plus the new equation is shrunk to an inclusion-minimal set `X`; if
//! that is still too heavy, a disjoint compression problem is solved.

use std::collections::{BTreeMap, BTreeSet};

use super::{dml_ed, dml_field, SolveError, SolveStats};
use crate::ring::EuclideanDomain;
use crate::system::{shift, solve, EqId, Equation, LinSystem};

/// A disjoint compression instance: `S - X` is homogeneous and every
/// equation of `X` is not, so `X` is inclusion-minimal with that property.
#[derive(Debug, Clone)]
pub struct DmlInstance<D: EuclideanDomain> {
    pub system: LinSystem<D>,
    pub x: BTreeSet<EqId>,
    pub k: u64,
}

impl<D: EuclideanDomain> DmlInstance<D> {
    pub fn new(system: LinSystem<D>, x: BTreeSet<EqId>, k: u64) -> Result<Self, SolveError> {
        let d = &system.domain;
        for e in &system.equations {
            if x.contains(&e.id) == d.is_zero(&e.c) {
                let why = if x.contains(&e.id) { "is homogeneous" } else { "is outside X but not homogeneous" };
                return Err(SolveError::InvalidDml(format!("equation {} {why}", e.id)));
            }
        }
        if !system.is_binary() {
            return Err(SolveError::InvalidDml("system is not binary".into()));
        }
        Ok(DmlInstance { system, x, k })
    }

    /// `S - X`.
    pub fn rest(&self) -> LinSystem<D> {
        self.system.without(&self.x)
    }

    /// `V(X)` in increasing order.
    pub fn x_vars(&self) -> BTreeSet<usize> {
        self.system.vars_of(&self.x)
    }
}

/// Runs iterative compression, calling `compress(S_i, X, k)` whenever the
/// maintained solution cannot be extended cheaply.
pub(crate) fn iterate<D, F>(
    sys: &LinSystem<D>,
    k: u64,
    stats: &mut SolveStats,
    mut compress: F,
) -> Result<Option<BTreeSet<EqId>>, SolveError>
where
    D: EuclideanDomain,
    F: FnMut(&LinSystem<D>, &BTreeSet<EqId>, u64, &mut SolveStats) -> Result<Option<BTreeSet<EqId>>, SolveError>,
{
    let mut prefix = LinSystem { domain: sys.domain.clone(), names: sys.names.clone(), equations: Vec::new() };
    let mut z = BTreeSet::new();
    for e in &sys.equations {
        prefix.equations.push(e.clone());
        if solve(&prefix.without(&z)).is_some() {
            continue;
        }
        let mut x = z.clone();
        x.insert(e.id);
        minimize(&prefix, &mut x);
        if prefix.weight_of(&x) <= k {
            z = x;
            continue;
        }
        stats.compressions += 1;
        let Some(next) = compress(&prefix, &x, k, stats)? else {
            return Ok(None);
        };
        if prefix.weight_of(&next) > k || solve(&prefix.without(&next)).is_none() {
            return Err(SolveError::Internal("compression returned an invalid set".into()));
        }
        z = next;
    }
    Ok(Some(z))
}

/// Drops members of `x` whose return keeps `sys - x` consistent.
fn minimize<D: EuclideanDomain>(sys: &LinSystem<D>, x: &mut BTreeSet<EqId>) {
    for id in x.clone() {
        x.remove(&id);
        if solve(&sys.without(x)).is_none() {
            x.insert(id);
        }
    }
}

/// Homogenizes `S` with a solution of `S - X` and keeps the members of `X`
/// that stay inhomogeneous.
pub(crate) fn homogenized<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    x: &BTreeSet<EqId>,
) -> Result<(LinSystem<D>, BTreeSet<EqId>), SolveError> {
    let phi = solve(&sys.without(x)).ok_or_else(|| SolveError::Internal("S - X is inconsistent".into()))?;
    let shifted = shift(sys, &phi);
    let keep = shifted.equations.iter().filter(|e| x.contains(&e.id) && !sys.domain.is_zero(&e.c)).map(|e| e.id).collect();
    Ok((shifted, keep))
}

/// Subsets of `items` of total weight at most `k`, smallest masks first.
pub(crate) fn light_subsets<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    items: &[EqId],
    k: u64,
) -> Vec<BTreeSet<EqId>> {
    let mut out = Vec::new();
    let mut current = BTreeSet::new();
    fn rec<D: EuclideanDomain>(
        sys: &LinSystem<D>,
        items: &[EqId],
        i: usize,
        left: u64,
        current: &mut BTreeSet<EqId>,
        out: &mut Vec<BTreeSet<EqId>>,
    ) {
        if i == items.len() {
            out.push(current.clone());
            return;
        }
        rec(sys, items, i + 1, left, current, out);
        let w = sys.get(items[i]).map_or(u64::MAX, |e| e.weight);
        if w <= left {
            current.insert(items[i]);
            rec(sys, items, i + 1, left - w, current, out);
            current.remove(&items[i]);
        }
    }
    rec(sys, items, 0, k, &mut current, &mut out);
    out.sort_by_key(|s| s.len());
    out
}

/// Iterative compression for Euclidean domains: each step guesses the part
/// `Y` of `X` shared with the new solution and solves the disjoint problem
/// on the rest.
pub fn compress_general<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    iterate(sys, k, stats, |s, x, k, stats| {
        let xs: Vec<EqId> = x.iter().copied().collect();
        for y in light_subsets(s, &xs, k) {
            let sy = s.without(&y);
            let rest: BTreeSet<EqId> = x.difference(&y).copied().collect();
            let (shifted, x_min) = homogenized(&sy, &rest)?;
            let ky = k - s.weight_of(&y);
            if x_min.is_empty() {
                return Ok(Some(y));
            }
            let inst = DmlInstance::new(shifted, x_min, ky)?;
            if let Some(z) = dml_ed(&inst, stats)? {
                let mut out = y;
                out.extend(z);
                return Ok(Some(out));
            }
        }
        Ok(None)
    })
}

/// A subdivided system with the origin of every new equation.
#[derive(Debug, Clone)]
pub struct Subdivided<D: EuclideanDomain> {
    pub system: LinSystem<D>,
    pub origin: BTreeMap<EqId, EqId>,
}

impl<D: EuclideanDomain> Subdivided<D> {
    pub fn map_back(&self, ids: &BTreeSet<EqId>) -> BTreeSet<EqId> {
        ids.iter().map(|i| self.origin[i]).collect()
    }
}

/// Replaces every `a·x + b·y = c` by the chain `x = z_1, …, z_{t-1} = z_t,
/// a·z_t + b·y = c` with fresh variables, each link keeping the weight.
pub fn subdivide<D: EuclideanDomain>(sys: &LinSystem<D>, times: usize) -> Subdivided<D> {
    let d = &sys.domain;
    let mut out = LinSystem { domain: d.clone(), names: sys.names.clone(), equations: Vec::new() };
    let mut origin = BTreeMap::new();
    let mut push = |out: &mut LinSystem<D>, u, v, a: D::Elem, b: D::Elem, c: D::Elem, weight, from| {
        let id = out.equations.len();
        out.equations.push(Equation { id, u, v, a, b, c, weight });
        origin.insert(id, from);
    };
    for e in &sys.equations {
        let mut prev = e.u;
        for j in 0..times {
            let z = out.add_var(format!("{}~{}.{}", sys.names[e.u], e.id, j + 1));
            push(&mut out, prev, z, d.one(), d.neg(&d.one()), d.zero(), e.weight, e.id);
            prev = z;
        }
        push(&mut out, prev, e.v, e.a.clone(), e.b.clone(), e.c.clone(), e.weight, e.id);
    }
    Subdivided { system: out, origin }
}

/// Iterative compression for fields over the doubly subdivided system; no
/// guessing of the overlap with `X` is needed.
pub fn compress_field<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    let sub = subdivide(sys, 2);
    let found = iterate(&sub.system, k, stats, |s, x, k, stats| {
        let (shifted, x_min) = homogenized(s, x)?;
        if x_min.is_empty() {
            return Ok(Some(BTreeSet::new()));
        }
        dml_field(&DmlInstance::new(shifted, x_min, k)?, stats)
    })?;
    Ok(found.map(|z| sub.map_back(&z)))
}
