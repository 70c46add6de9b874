//! Disjoint compression over fields.
//!
//! Over a field no path can become inconsistent once the cleaning set is
//! removed, so a minimum partition cut for the right grouping of the
//! terminals is already a solution. Subdivision keeps the optimum away
//! from `X`; the overlap with the cleaning set is still guessed, because a
//! cleaning set may take every link of a chain that `X` already cuts.

use std::collections::BTreeSet;

use super::compress::light_subsets;
use super::ed::Cleaned;
use super::rooted::{build_rooted_graph, family_budget};
use super::{DmlInstance, SolveStats};
use super::SolveError;
use crate::cuts::{for_each_refinement, partition_cut_counted};
use crate::ibs::dominating_family;
use crate::ring::EuclideanDomain;
use crate::system::{solve, EqId};

pub fn dml_field<D: EuclideanDomain>(
    inst: &DmlInstance<D>,
    stats: &mut SolveStats,
) -> Result<Option<BTreeSet<EqId>>, SolveError> {
    if !inst.system.domain.is_field() {
        return Err(SolveError::UnsupportedDomain {
            algorithm: super::Algorithm::Field,
            domain: inst.system.domain.spec(),
        });
    }
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
            if let Some(mut y) = cut_field(&Cleaned::new(&s1, removed), k1, stats) {
                y.extend(fz);
                return Ok(Some(y));
            }
        }
    }
    Ok(None)
}

/// Minimum partition cuts for every refinement of the coarse partition,
/// returning the first that leaves a consistent system.
fn cut_field<D: EuclideanDomain>(c: &Cleaned<'_, D>, k: u64, stats: &mut SolveStats) -> Option<BTreeSet<EqId>> {
    let (graph, ids) = c.primal_graph();
    let mut found = None;
    for_each_refinement(&c.coarse_partition(), k as usize, &mut |partition| {
        stats.partitions += 1;
        let Some(cut) = partition_cut_counted(&graph, &partition, k) else {
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
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Rationals;
    use crate::solver::subdivide;
    use crate::system::{shift, LinSystem};

    #[test]
    fn two_conflicting_paths() {
        // x0 = x1 along two routes, x0 - x1 = 1 along a third: one must go.
        let mut s = LinSystem::with_vars(Rationals, 2);
        s.push_i64(0, 1, 1, -1, 0, 1);
        s.push_i64(0, 1, 1, -1, 1, 1);
        let sub = subdivide(&s, 2).system;
        let x = BTreeSet::from([5]);
        let phi = solve(&sub.without(&x)).unwrap();
        let inst = DmlInstance::new(shift(&sub, &phi), x, 1).unwrap();
        let mut stats = SolveStats::default();
        let y = dml_field(&inst, &mut stats).unwrap().unwrap();
        assert_eq!(sub.weight_of(&y), 1);
        assert!(!y.contains(&5));
        assert!(stats.family_nodes > 0);
    }
}
