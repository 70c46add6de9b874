//! Min-2-Lin: delete equations of total weight at most `k` to make a
//! system consistent.
//!
//! Three pipelines share the same driver. Integers use the Euclidean-domain
//! algorithm, rationals the field algorithm and prime fields the
//! finite-field algorithm; each can also be requested explicitly where it
//! applies. Every pipeline runs iterative compression over a normalized
//! copy of the input, and every answer is verified against the original
//! system before it is returned.

pub mod compress;
pub mod ed;
pub mod field;
pub mod finite;
pub mod rooted;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::ring::{DomainSpec, EuclideanDomain};
use crate::system::{normalize, solve, EqId, LinSystem, Normalized};

pub use compress::{compress_field, compress_general, subdivide, DmlInstance, Subdivided};
pub use ed::{build_auxiliary, build_pair_requests, dml_ed, AuxiliaryInstance, Cleaned};
pub use field::dml_field;
pub use finite::{dml_finite, min2lin_finite_field};
pub use rooted::{build_rooted_graph, family_budget, RootedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("algorithm {algorithm} does not support domain {domain}")]
    UnsupportedDomain { algorithm: Algorithm, domain: DomainSpec },
    #[error("invalid compression instance: {0}")]
    InvalidDml(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Algorithm {
    /// Pick by domain: integers → `Ed`, rationals → `Field`, prime fields → `Finite`.
    #[default]
    Auto,
    /// Euclidean-domain algorithm; any domain except GF(2).
    Ed,
    /// Field algorithm; rationals and prime fields.
    Field,
    /// Finite-field algorithm; prime fields.
    Finite,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Auto => "auto",
            Algorithm::Ed => "ed",
            Algorithm::Field => "field",
            Algorithm::Finite => "finite",
        })
    }
}

impl Algorithm {
    /// The concrete pipeline for `domain`, or an error when it does not apply.
    pub fn resolve(self, domain: DomainSpec) -> Result<Algorithm, SolveError> {
        let ok = match (self, domain) {
            (Algorithm::Auto, DomainSpec::Integers) => return Ok(Algorithm::Ed),
            (Algorithm::Auto, DomainSpec::Rationals) => return Ok(Algorithm::Field),
            (Algorithm::Auto, DomainSpec::PrimeField(_)) => return Ok(Algorithm::Finite),
            // The zero-variable pair x - z0, x + z0 cannot pin x over GF(2).
            (Algorithm::Ed, DomainSpec::PrimeField(2)) => false,
            (Algorithm::Ed, _) => true,
            (Algorithm::Field, d) => d != DomainSpec::Integers,
            (Algorithm::Finite, d) => matches!(d, DomainSpec::PrimeField(_)),
        };
        if ok {
            Ok(self)
        } else {
            Err(SolveError::UnsupportedDomain { algorithm: self, domain })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    /// Worker threads for the finite-field assignment enumeration.
    pub threads: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { algorithm: Algorithm::Auto, threads: 1 }
    }
}

/// Work counters accumulated over a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Compression steps that needed a disjoint-problem call.
    pub compressions: usize,
    /// Branching-tree nodes spent on dominating families.
    pub family_nodes: usize,
    /// Family members examined.
    pub family_members: usize,
    /// Terminal partitions examined.
    pub partitions: usize,
    /// Search nodes of the cut and CSP solvers.
    pub cut_nodes: usize,
    /// Cuts rejected by the final consistency check.
    pub rejected_cuts: usize,
    /// Assignments of the chosen variables enumerated by the finite-field
    /// algorithm, in total and at most per compression step.
    pub alphas: usize,
    pub max_alphas_per_step: usize,
}

impl SolveStats {
    /// Total explored branching nodes.
    pub fn nodes(&self) -> usize {
        self.family_nodes + self.partitions + self.cut_nodes + self.alphas
    }
}

/// A verified deletion set with a satisfying assignment of what remains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution<E> {
    pub deleted: BTreeSet<EqId>,
    pub weight: u64,
    pub assignment: Vec<E>,
    pub stats: SolveStats,
}

/// Minimum-weight deletion set of weight at most `k`, with the default
/// pipeline for the domain.
pub fn min2lin<D: EuclideanDomain>(sys: &LinSystem<D>, k: u64) -> Result<Option<Solution<D::Elem>>, SolveError> {
    min2lin_with(sys, k, &SolveOptions::default())
}

/// [`min2lin`] with explicit options. Budgets `0, 1, …, k` are tried in
/// turn, so the first success is optimal.
pub fn min2lin_with<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    opts: &SolveOptions,
) -> Result<Option<Solution<D::Elem>>, SolveError> {
    run(sys, k, opts, true)
}

/// Some deletion set of weight at most `k`, not necessarily minimum.
pub fn decide<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    opts: &SolveOptions,
) -> Result<Option<Solution<D::Elem>>, SolveError> {
    run(sys, k, opts, false)
}

fn run<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    opts: &SolveOptions,
    minimize: bool,
) -> Result<Option<Solution<D::Elem>>, SolveError> {
    let algorithm = opts.algorithm.resolve(sys.domain.spec())?;
    let norm = normalize(sys, k);
    let Some(left) = k.checked_sub(norm.removed_weight) else {
        return Ok(None);
    };
    let mut stats = SolveStats::default();
    let budgets: Vec<u64> = if minimize { (0..=left).collect() } else { vec![left] };
    for budget in budgets {
        let found = match algorithm {
            Algorithm::Ed => compress_general(&norm.system, budget, &mut stats)?,
            Algorithm::Field => compress_field(&norm.system, budget, &mut stats)?,
            Algorithm::Finite => min2lin_finite_field(&norm.system, budget, opts.threads, &mut stats)?,
            Algorithm::Auto => unreachable!("resolved above"),
        };
        if let Some(z) = found {
            return finish(sys, &norm, z, k, stats).map(Some);
        }
    }
    Ok(None)
}

/// Maps a deletion set of the normalized system back and verifies it.
fn finish<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    norm: &Normalized<D>,
    z: BTreeSet<EqId>,
    k: u64,
    stats: SolveStats,
) -> Result<Solution<D::Elem>, SolveError> {
    if !z.is_disjoint(&norm.gadget) {
        return Err(SolveError::Internal("an undeletable gadget equation was deleted".into()));
    }
    let asg = solve(&norm.system.without(&z))
        .ok_or_else(|| SolveError::Internal("remaining normalized system is inconsistent".into()))?;
    let assignment = norm.pull_back(&asg);
    let mut deleted = norm.removed.clone();
    deleted.extend(z);
    let weight = sys.weight_of(&deleted);
    if weight > k || !sys.without(&deleted).is_satisfied_by(&assignment) {
        return Err(SolveError::Internal("returned deletion set does not verify".into()));
    }
    Ok(Solution { deleted, weight, assignment, stats })
}
