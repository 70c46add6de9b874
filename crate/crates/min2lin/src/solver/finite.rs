//! Min-2-Lin over prime fields by enumerating assignments of `X`.
//!
//! Every solution extends some assignment `α` of `V(X)` satisfying `X`.
//! For a fixed `α`, the system `S - X` is turned into a gain graph in which
//! a root `s` carries the value one and a vertex `t` the value zero; the
//! assignment extends with deletions of weight at most `k` exactly when
//! deleting that much makes the component of `s` balanced.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::compress::{homogenized, iterate, subdivide};
use super::{Algorithm, DmlInstance, SolveError, SolveStats};
use crate::biased::{GainGraph, Shift};
use crate::ibs::rbgce_solve;
use crate::ring::{EuclideanDomain, Ratio};
use crate::system::{solve, EqId, LinSystem, Var};

/// Iterative compression over the subdivided system, each step solved by
/// [`dml_finite`] with `threads` workers.
pub fn min2lin_finite_field<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    threads: usize,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    field_order(&sys.domain)?;
    let sub = subdivide(sys, 1);
    let found = iterate(&sub.system, k, stats, |s, x, k, stats| {
        let (shifted, x_min) = homogenized(s, x)?;
        if x_min.is_empty() {
            return Ok(Some(BTreeSet::new()));
        }
        dml_finite(&DmlInstance::new(shifted, x_min, k)?, threads, stats)
    })?;
    Ok(found.map(|z| sub.map_back(&z)))
}

fn field_order<D: EuclideanDomain>(d: &D) -> Result<u64, SolveError> {
    match d.order() {
        Some(p) if d.is_field() => Ok(p),
        _ => Err(SolveError::UnsupportedDomain { algorithm: Algorithm::Finite, domain: d.spec() }),
    }
}

/// Solves a disjoint compression instance over a prime field. The
/// assignments of `X` are split over `threads` workers; the answer is the
/// one for the first assignment in enumeration order, independent of the
/// number of workers.
pub fn dml_finite<D: EuclideanDomain>(
    inst: &DmlInstance<D>,
    threads: usize,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    let p = field_order(&inst.system.domain)?;
    let chosen: Vec<Var> = inst.x.iter().map(|&id| inst.system.get(id).expect("member of S").u).collect::<BTreeSet<_>>().into_iter().collect();
    let total = (p as usize).checked_pow(chosen.len() as u32).ok_or_else(|| {
        SolveError::Internal(format!("{p}^{} assignments do not fit in memory indices", chosen.len()))
    })?;
    let threads = threads.max(1).min(total);
    let best = AtomicUsize::new(usize::MAX);
    let scanned = AtomicUsize::new(0);
    let results: Vec<Option<(usize, BTreeSet<EqId>)>> = std::thread::scope(|scope| {
        let workers: Vec<_> = (0..threads)
            .map(|w| {
                let (best, scanned, chosen) = (&best, &scanned, &chosen);
                scope.spawn(move || {
                    let mut i = w;
                    while i < total && i < best.load(Ordering::Relaxed) {
                        scanned.fetch_add(1, Ordering::Relaxed);
                        if let Some(z) = try_alpha(inst, chosen, p, i) {
                            best.fetch_min(i, Ordering::Relaxed);
                            return Some((i, z));
                        }
                        i += threads;
                    }
                    None
                })
            })
            .collect();
        workers.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let step = scanned.into_inner();
    stats.alphas += step;
    stats.max_alphas_per_step = stats.max_alphas_per_step.max(step);
    Ok(results.into_iter().flatten().min_by_key(|r| r.0).map(|r| r.1))
}

/// Decodes assignment number `index` of the chosen variables, propagates
/// it over `X` and solves the resulting balanced-subgraph problem.
fn try_alpha<D: EuclideanDomain>(inst: &DmlInstance<D>, chosen: &[Var], p: u64, index: usize) -> Option<BTreeSet<EqId>> {
    let d = &inst.system.domain;
    let mut alpha: Vec<Option<D::Elem>> = vec![None; inst.system.num_vars()];
    let mut rest = index as u64;
    for &v in chosen {
        alpha[v] = Some(d.from_i64((rest % p) as i64));
        rest /= p;
    }
    if !propagate(inst, &mut alpha) {
        return None;
    }
    let (graph, s, edge_eq) = restriction(inst, &alpha, p);
    let cut = rbgce_solve(&graph, s, inst.k)?;
    let z: BTreeSet<EqId> = cut.iter().filter_map(|&e| edge_eq[e]).collect();
    debug_assert_eq!(z.len(), cut.len(), "pins and the zero triangle weigh k + 1");
    solve(&inst.system.without(&z)).map(|_| z)
}

/// Extends `alpha` along the equations of `X`; false on a conflict.
fn propagate<D: EuclideanDomain>(inst: &DmlInstance<D>, alpha: &mut [Option<D::Elem>]) -> bool {
    let d = &inst.system.domain;
    let x: Vec<_> = inst.system.equations.iter().filter(|e| inst.x.contains(&e.id)).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for e in &x {
            match (alpha[e.u].clone(), alpha[e.v].clone()) {
                (Some(a), Some(b)) => {
                    if d.add(&d.mul(&e.a, &a), &d.mul(&e.b, &b)) != e.c {
                        return false;
                    }
                }
                (Some(a), None) => {
                    let r = d.sub(&e.c, &d.mul(&e.a, &a));
                    alpha[e.v] = Some(d.mul(&r, &d.inverse(&e.b).expect("nonzero")));
                    changed = true;
                }
                (None, Some(b)) => {
                    let r = d.sub(&e.c, &d.mul(&e.b, &b));
                    alpha[e.u] = Some(d.mul(&r, &d.inverse(&e.a).expect("nonzero")));
                    changed = true;
                }
                (None, None) => {}
            }
        }
    }
    true
}

type Restricted<D> = GainGraph<(Ratio<D>, Shift)>;

/// The restriction of `S` to `alpha` as a gain graph rooted at `s`.
///
/// `S - X` keeps its equations; each variable of `X` is tied to `s` with
/// label `α(x)` or to `t` when `α(x) = 0`; and `t` closes an unbalanced
/// triangle. Over GF(2) the multiplicative group is trivial, so the
/// triangle is made unbalanced by an integer shift instead.
fn restriction<D: EuclideanDomain>(
    inst: &DmlInstance<D>,
    alpha: &[Option<D::Elem>],
    p: u64,
) -> (Restricted<D>, Var, Vec<Option<EqId>>) {
    let sys = &inst.system;
    let d = &sys.domain;
    let heavy = inst.k + 1;
    let n = sys.num_vars();
    let (s, t, t1, t2) = (n, n + 1, n + 2, n + 3);
    let mut g = GainGraph::new(n + 4);
    let mut edge_eq = Vec::new();
    let one = || (Ratio::one(d), Shift(0));
    for e in sys.equations.iter().filter(|e| !inst.x.contains(&e.id)) {
        g.add_edge(e.u, e.v, e.weight, (Ratio::new(d, d.neg(&e.a), e.b.clone()), Shift(0)));
        edge_eq.push(Some(e.id));
    }
    for v in sys.vars_of(&inst.x) {
        let a = alpha[v].clone().expect("propagated");
        if d.is_zero(&a) {
            g.add_edge(t, v, heavy, one());
        } else {
            g.add_edge(s, v, heavy, (Ratio::new(d, a, d.one()), Shift(0)));
        }
        edge_eq.push(None);
    }
    let gamma = if p >= 3 { (Ratio::new(d, d.from_i64(2), d.one()), Shift(0)) } else { (Ratio::one(d), Shift(1)) };
    g.add_edge(t, t1, heavy, gamma);
    g.add_edge(t1, t2, heavy, one());
    g.add_edge(t2, t, heavy, one());
    edge_eq.extend([None, None, None]);
    (g, s, edge_eq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PrimeField;

    fn cycle(p: u64, n: usize, rhs: i64) -> LinSystem<PrimeField> {
        let mut s = LinSystem::with_vars(PrimeField::new(p).unwrap(), n);
        for i in 0..n {
            s.push_i64(i, (i + 1) % n, 1, -1, if i == 0 { rhs } else { 0 }, 1);
        }
        s
    }

    #[test]
    fn inconsistent_cycle_needs_one_deletion() {
        for p in [2, 3, 5] {
            let s = cycle(p, 4, 1);
            let mut stats = SolveStats::default();
            assert_eq!(min2lin_finite_field(&s, 0, 1, &mut stats).unwrap(), None);
            let z = min2lin_finite_field(&s, 1, 1, &mut stats).unwrap().unwrap();
            assert_eq!(z.len(), 1);
            assert!(solve(&s.without(&z)).is_some());
        }
    }

    #[test]
    fn thread_count_does_not_change_the_answer() {
        let mut s = cycle(3, 5, 1);
        s.push_i64(0, 2, 1, -1, 2, 1);
        s.push_i64(1, 3, 1, 1, 1, 1);
        let mut one = SolveStats::default();
        let a = min2lin_finite_field(&s, 2, 1, &mut one).unwrap();
        for threads in [2, 3, 8] {
            let mut st = SolveStats::default();
            assert_eq!(min2lin_finite_field(&s, 2, threads, &mut st).unwrap(), a);
        }
        assert!(one.max_alphas_per_step <= 3usize.pow(3));
    }

    #[test]
    fn rationals_are_rejected() {
        let s = LinSystem::with_vars(crate::ring::Rationals, 1);
        let mut stats = SolveStats::default();
        assert!(matches!(
            min2lin_finite_field(&s, 1, 1, &mut stats),
            Err(SolveError::UnsupportedDomain { .. })
        ));
    }
}
