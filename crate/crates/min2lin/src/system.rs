//! Systems of two-variable linear equations and their polynomial-time
//! consistency theory: path composition, homogenization, equalization,
//! cycle classification, flexibility and the general solver.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ring::EuclideanDomain;

/// Index of a variable inside a [`LinSystem`].
pub type Var = usize;
/// Stable identifier of an equation; survives filtering and normalization.
pub type EqId = usize;
/// A total assignment, indexed by variable.
pub type Assignment<E> = Vec<E>;

/// Id given to equations that are derived rather than read from input.
pub const DERIVED_ID: EqId = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("equations do not form a path")]
    InvalidPath,
    #[error("equations do not form a cycle")]
    InvalidCycle,
    #[error("assignment violates equation {0}")]
    NotSatisfying(EqId),
    #[error("domain is not a field")]
    NotAField,
    #[error("system is not flexible")]
    NotFlexible,
    #[error("system is not connected")]
    NotConnected,
    #[error("system is not homogeneous")]
    NotHomogeneous,
}

/// `a·u + b·v = c` with a positive weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation<E> {
    pub id: EqId,
    pub u: Var,
    pub v: Var,
    pub a: E,
    pub b: E,
    pub c: E,
    pub weight: u64,
}

impl<E: Clone> Equation<E> {
    /// The endpoint opposite to `x`.
    pub fn other(&self, x: Var) -> Var {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

/// Shape of a single equation once degenerate coefficients are accounted for.
enum Kind<E> {
    Binary,
    Unary(Var, E),
    Constant,
}

fn kind<D: EuclideanDomain>(d: &D, e: &Equation<D::Elem>) -> Kind<D::Elem> {
    if e.u == e.v {
        let s = d.add(&e.a, &e.b);
        if d.is_zero(&s) {
            return Kind::Constant;
        }
        return Kind::Unary(e.u, s);
    }
    match (d.is_zero(&e.a), d.is_zero(&e.b)) {
        (true, true) => Kind::Constant,
        (true, false) => Kind::Unary(e.v, e.b.clone()),
        (false, true) => Kind::Unary(e.u, e.a.clone()),
        (false, false) => Kind::Binary,
    }
}

/// A weighted system of two-variable equations over `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinSystem<D: EuclideanDomain> {
    pub domain: D,
    pub names: Vec<String>,
    pub equations: Vec<Equation<D::Elem>>,
}

impl<D: EuclideanDomain> LinSystem<D> {
    pub fn new(domain: D) -> Self {
        LinSystem { domain, names: Vec::new(), equations: Vec::new() }
    }

    /// A system with `n` variables named `x0, x1, …`.
    pub fn with_vars(domain: D, n: usize) -> Self {
        LinSystem { domain, names: (0..n).map(|i| format!("x{i}")).collect(), equations: Vec::new() }
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> Var {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn var(&self, name: &str) -> Option<Var> {
        self.names.iter().position(|n| n == name)
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// The smallest id not used by any equation.
    pub fn next_id(&self) -> EqId {
        self.equations.iter().filter(|e| e.id != DERIVED_ID).map(|e| e.id + 1).max().unwrap_or(0)
    }

    /// Appends `a·u + b·v = c` and returns its id.
    pub fn push(&mut self, u: Var, v: Var, a: D::Elem, b: D::Elem, c: D::Elem, weight: u64) -> EqId {
        assert!(u < self.num_vars() && v < self.num_vars(), "unknown variable");
        assert!(weight >= 1, "weights are positive");
        let id = self.next_id();
        self.equations.push(Equation { id, u, v, a, b, c, weight });
        id
    }

    /// [`push`](Self::push) with small integer coefficients.
    pub fn push_i64(&mut self, u: Var, v: Var, a: i64, b: i64, c: i64, weight: u64) -> EqId {
        let d = self.domain.clone();
        self.push(u, v, d.from_i64(a), d.from_i64(b), d.from_i64(c), weight)
    }

    pub fn get(&self, id: EqId) -> Option<&Equation<D::Elem>> {
        self.equations.iter().find(|e| e.id == id)
    }

    pub fn ids(&self) -> BTreeSet<EqId> {
        self.equations.iter().map(|e| e.id).collect()
    }

    pub fn total_weight(&self) -> u64 {
        self.equations.iter().map(|e| e.weight).sum()
    }

    /// Total weight of the equations whose ids are in `ids`.
    pub fn weight_of(&self, ids: &BTreeSet<EqId>) -> u64 {
        self.equations.iter().filter(|e| ids.contains(&e.id)).map(|e| e.weight).sum()
    }

    pub fn satisfies(&self, e: &Equation<D::Elem>, asg: &[D::Elem]) -> bool {
        let d = &self.domain;
        d.add(&d.mul(&e.a, &asg[e.u]), &d.mul(&e.b, &asg[e.v])) == e.c
    }

    pub fn is_satisfied_by(&self, asg: &[D::Elem]) -> bool {
        asg.len() == self.num_vars() && self.equations.iter().all(|e| self.satisfies(e, asg))
    }

    /// Ids of the equations violated by `asg`.
    pub fn violated(&self, asg: &[D::Elem]) -> BTreeSet<EqId> {
        self.equations.iter().filter(|e| !self.satisfies(e, asg)).map(|e| e.id).collect()
    }

    /// The system with the equations in `ids` removed.
    pub fn without(&self, ids: &BTreeSet<EqId>) -> Self {
        self.filtered(|e| !ids.contains(&e.id))
    }

    /// The subsystem made of the equations in `ids`.
    pub fn only(&self, ids: &BTreeSet<EqId>) -> Self {
        self.filtered(|e| ids.contains(&e.id))
    }

    pub fn filtered(&self, keep: impl Fn(&Equation<D::Elem>) -> bool) -> Self {
        LinSystem {
            domain: self.domain.clone(),
            names: self.names.clone(),
            equations: self.equations.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.equations.iter().all(|e| self.domain.is_zero(&e.c))
    }

    /// True when every equation joins two distinct variables with nonzero
    /// coefficients, i.e. is an honest edge of the primal graph.
    pub fn is_binary(&self) -> bool {
        self.equations.iter().all(|e| matches!(kind(&self.domain, e), Kind::Binary))
    }

    /// Variables touched by the equations in `ids`.
    pub fn vars_of(&self, ids: &BTreeSet<EqId>) -> BTreeSet<Var> {
        self.equations
            .iter()
            .filter(|e| ids.contains(&e.id))
            .flat_map(|e| [e.u, e.v])
            .collect()
    }
}

impl<D: EuclideanDomain> fmt::Display for LinSystem<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.equations {
            writeln!(
                f,
                "[{}] {}*{} + {}*{} = {}  (w={})",
                e.id, e.a, self.names[e.u], e.b, self.names[e.v], e.c, e.weight
            )?;
        }
        Ok(())
    }
}

/// An equation `a·from + b·to = c` implied along a walk.
///
/// `consistent` is false once some step produced an equation whose
/// coefficient gcd does not divide the right-hand side; such a walk admits
/// no satisfying assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Implied<E> {
    pub from: Var,
    pub to: Var,
    pub a: E,
    pub b: E,
    pub c: E,
    pub consistent: bool,
}

impl<E: Clone> Implied<E> {
    /// Orients `e` so that it starts at `from`.
    pub fn from_equation(e: &Equation<E>, from: Var) -> Self {
        if e.u == from {
            Implied { from, to: e.v, a: e.a.clone(), b: e.b.clone(), c: e.c.clone(), consistent: true }
        } else {
            Implied { from, to: e.u, a: e.b.clone(), b: e.a.clone(), c: e.c.clone(), consistent: true }
        }
    }

    pub fn reversed(&self) -> Self {
        Implied {
            from: self.to,
            to: self.from,
            a: self.b.clone(),
            b: self.a.clone(),
            c: self.c.clone(),
            consistent: self.consistent,
        }
    }

    pub fn to_equation(&self, id: EqId, weight: u64) -> Equation<E> {
        Equation {
            id,
            u: self.from,
            v: self.to,
            a: self.a.clone(),
            b: self.b.clone(),
            c: self.c.clone(),
            weight,
        }
    }
}

impl<E: Clone> Implied<E> {
    /// Eliminates the shared middle variable of `self` (`p1 → p2`) and
    /// `next` (`p2 → p3`): `(a'a)p1 − (b'b)p3 = a'c − bc'`.
    pub fn compose<D: EuclideanDomain<Elem = E>>(&self, d: &D, next: &Implied<E>) -> Implied<E> {
        debug_assert_eq!(self.to, next.from);
        let a = d.mul(&next.a, &self.a);
        let b = d.neg(&d.mul(&next.b, &self.b));
        let c = d.sub(&d.mul(&next.a, &self.c), &d.mul(&self.b, &next.c));
        normalized(d, self.from, next.to, a, b, c, self.consistent && next.consistent)
    }
}

/// Divides by the coefficient gcd when it divides `c` and fixes the unit of `a`.
fn normalized<D: EuclideanDomain>(
    d: &D,
    from: Var,
    to: Var,
    a: D::Elem,
    b: D::Elem,
    c: D::Elem,
    consistent: bool,
) -> Implied<D::Elem> {
    let g = d.gcd(&a, &b);
    match d.exact_div(&c, &g) {
        Some(c) if consistent => {
            let a = d.exact_div(&a, &g).expect("gcd divides a");
            let b = d.exact_div(&b, &g).expect("gcd divides b");
            let u = d.inverse(&d.unit_part(&a)).expect("unit");
            Implied { from, to, a: d.mul(&a, &u), b: d.mul(&b, &u), c: d.mul(&c, &u), consistent: true }
        }
        _ => Implied { from, to, a, b, c, consistent: false },
    }
}

/// Elimination constants for two equations over the same ordered pair
/// `(x, y)`: any common solution has `A·y = B`.
fn cross<D: EuclideanDomain>(d: &D, e1: &Implied<D::Elem>, e2: &Implied<D::Elem>) -> (D::Elem, D::Elem) {
    debug_assert_eq!((e1.from, e1.to), (e2.from, e2.to));
    let a = d.sub(&d.mul(&e2.a, &e1.b), &d.mul(&e1.a, &e2.b));
    let b = d.sub(&d.mul(&e2.a, &e1.c), &d.mul(&e1.a, &e2.c));
    (a, b)
}

/// Do two equations over the same pair have the same solution set?
pub fn equivalent<D: EuclideanDomain>(d: &D, e1: &Implied<D::Elem>, e2: &Implied<D::Elem>) -> bool {
    let (a, b) = cross(d, e1, e2);
    d.is_zero(&a) && d.is_zero(&b)
}

/// Breadth-first spanning forest of the primal graph restricted to binary
/// equations.
#[derive(Debug, Clone)]
pub struct Forest {
    /// Component index of each variable.
    pub comp: Vec<usize>,
    /// Variables of each component in breadth-first order, root first.
    pub components: Vec<Vec<Var>>,
    /// Tree edge (equation index) and parent of each non-root variable.
    pub parent: Vec<Option<(usize, Var)>>,
    depth: Vec<usize>,
    is_tree_edge: Vec<bool>,
    binary: Vec<bool>,
    adj: Vec<Vec<usize>>,
}

impl Forest {
    pub fn new<D: EuclideanDomain>(sys: &LinSystem<D>) -> Self {
        let n = sys.num_vars();
        let binary: Vec<bool> =
            sys.equations.iter().map(|e| matches!(kind(&sys.domain, e), Kind::Binary)).collect();
        let mut adj = vec![Vec::new(); n];
        for (i, e) in sys.equations.iter().enumerate() {
            if binary[i] {
                adj[e.u].push(i);
                adj[e.v].push(i);
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut is_tree_edge = vec![false; sys.equations.len()];
        let mut components = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = components.len();
            comp[s] = id;
            let mut order = vec![s];
            let mut head = 0;
            while head < order.len() {
                let x = order[head];
                head += 1;
                for &i in &adj[x] {
                    let y = sys.equations[i].other(x);
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        parent[y] = Some((i, x));
                        depth[y] = depth[x] + 1;
                        is_tree_edge[i] = true;
                        order.push(y);
                    }
                }
            }
            components.push(order);
        }
        Forest { comp, components, parent, depth, is_tree_edge, binary, adj }
    }

    /// Binary equation indices that are not tree edges.
    pub fn non_tree_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.is_tree_edge.len()).filter(|&i| self.binary[i] && !self.is_tree_edge[i])
    }

    /// Equation indices incident to `x` in the primal graph.
    pub fn incident(&self, x: Var) -> &[usize] {
        &self.adj[x]
    }

    pub fn connected(&self, x: Var, y: Var) -> bool {
        self.comp[x] == self.comp[y]
    }

    /// The tree path from `x` to `y` as `(equation index, from, to)` steps.
    pub fn path(&self, x: Var, y: Var) -> Option<Vec<(usize, Var, Var)>> {
        if !self.connected(x, y) {
            return None;
        }
        let (mut p, mut q) = (x, y);
        let mut up = Vec::new();
        let mut down = Vec::new();
        while self.depth[p] > self.depth[q] {
            let (i, par) = self.parent[p].expect("non-root");
            up.push((i, p, par));
            p = par;
        }
        while self.depth[q] > self.depth[p] {
            let (i, par) = self.parent[q].expect("non-root");
            down.push((i, par, q));
            q = par;
        }
        while p != q {
            let (i, par) = self.parent[p].expect("non-root");
            up.push((i, p, par));
            p = par;
            let (j, parq) = self.parent[q].expect("non-root");
            down.push((j, parq, q));
            q = parq;
        }
        down.reverse();
        up.extend(down);
        Some(up)
    }

    /// The equation implied by the tree path from `x` to `y`.
    pub fn implied<D: EuclideanDomain>(&self, sys: &LinSystem<D>, x: Var, y: Var) -> Option<Implied<D::Elem>> {
        let steps = self.path(x, y)?;
        Some(implied_along(sys, &steps).unwrap_or_else(|| identity(&sys.domain, x)))
    }
}

fn identity<D: EuclideanDomain>(d: &D, x: Var) -> Implied<D::Elem> {
    Implied { from: x, to: x, a: d.one(), b: d.neg(&d.one()), c: d.zero(), consistent: true }
}

fn implied_along<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    steps: &[(usize, Var, Var)],
) -> Option<Implied<D::Elem>> {
    let d = &sys.domain;
    let mut acc: Option<Implied<D::Elem>> = None;
    for &(i, from, _) in steps {
        let e = Implied::from_equation(&sys.equations[i], from);
        acc = Some(match acc {
            None => normalized(d, e.from, e.to, e.a, e.b, e.c, true),
            Some(prev) => prev.compose(d, &e),
        });
    }
    acc
}

/// The implied equation `e_P` of a path given by equation ids.
pub fn compose_path<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    path: &[EqId],
) -> Result<Equation<D::Elem>, SystemError> {
    let steps = orient_walk(sys, path, false)?;
    let e = implied_along(sys, &steps).ok_or(SystemError::InvalidPath)?;
    Ok(e.to_equation(DERIVED_ID, 1))
}

/// Orients a sequence of equation ids into a walk; with `closed` set the
/// walk must return to its start.
fn orient_walk<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    ids: &[EqId],
    closed: bool,
) -> Result<Vec<(usize, Var, Var)>, SystemError> {
    let err = if closed { SystemError::InvalidCycle } else { SystemError::InvalidPath };
    let idx: Vec<usize> = ids
        .iter()
        .map(|id| sys.equations.iter().position(|e| e.id == *id).ok_or(err.clone()))
        .collect::<Result<_, _>>()?;
    if idx.is_empty() {
        return Err(err);
    }
    for &i in &idx {
        if !matches!(kind(&sys.domain, &sys.equations[i]), Kind::Binary) {
            return Err(err);
        }
    }
    let first = &sys.equations[idx[0]];
    let start = match idx.get(1) {
        None => first.u,
        Some(&j) => {
            let second = &sys.equations[j];
            let touches = |x: Var| x == second.u || x == second.v;
            match (touches(first.u), touches(first.v)) {
                (true, false) => first.v,
                (false, true) => first.u,
                (true, true) if closed => first.u,
                _ => return Err(err),
            }
        }
    };
    let mut steps = Vec::with_capacity(idx.len());
    let mut seen = BTreeSet::from([start]);
    let mut at = start;
    for (pos, &i) in idx.iter().enumerate() {
        let e = &sys.equations[i];
        if e.u != at && e.v != at {
            return Err(err);
        }
        let next = e.other(at);
        let last = pos + 1 == idx.len();
        if !(closed && last && next == start) && !seen.insert(next) {
            return Err(err);
        }
        steps.push((i, at, next));
        at = next;
    }
    if closed != (at == start) {
        return Err(err);
    }
    Ok(steps)
}

/// Classification of a cycle of the primal graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CycleClass {
    Inconsistent,
    Identity,
    NonIdentity,
}

/// Decides whether a cycle is inconsistent, an identity cycle (many
/// solutions) or a non-identity cycle (a unique solution).
pub fn classify_cycle<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    cycle: &[EqId],
) -> Result<CycleClass, SystemError> {
    let steps = orient_walk(sys, cycle, true)?;
    if steps.len() < 2 {
        return Err(SystemError::InvalidCycle);
    }
    let sub = sys.only(&cycle.iter().copied().collect());
    if solve(&sub).is_none() {
        return Ok(CycleClass::Inconsistent);
    }
    let (path, closing) = steps.split_at(steps.len() - 1);
    let p = implied_along(sys, path).expect("nonempty path");
    let (i, from, _) = closing[0];
    let e = Implied::from_equation(&sys.equations[i], from).reversed();
    let (a, _) = cross(&sys.domain, &p, &e);
    Ok(if sys.domain.is_zero(&a) { CycleClass::Identity } else { CycleClass::NonIdentity })
}

/// Every path between two variables implies equivalent equations.
///
/// Systems with unary or constant equations are never reported flexible.
pub fn is_flexible<D: EuclideanDomain>(sys: &LinSystem<D>) -> bool {
    if !sys.is_binary() {
        return false;
    }
    let forest = Forest::new(sys);
    forest_is_flexible(sys, &forest)
}

fn forest_is_flexible<D: EuclideanDomain>(sys: &LinSystem<D>, forest: &Forest) -> bool {
    forest.non_tree_edges().all(|i| non_tree_agrees(sys, forest, i))
}

fn non_tree_agrees<D: EuclideanDomain>(sys: &LinSystem<D>, forest: &Forest, i: usize) -> bool {
    let e = &sys.equations[i];
    let e1 = Implied::from_equation(e, e.u);
    let e2 = forest.implied(sys, e.u, e.v).expect("same component");
    equivalent(&sys.domain, &e1, &e2)
}

/// Flags, per component of the forest, whether it is flexible.
pub fn flexible_components<D: EuclideanDomain>(sys: &LinSystem<D>, forest: &Forest) -> Vec<bool> {
    let mut flex = vec![true; forest.components.len()];
    for i in forest.non_tree_edges() {
        let c = forest.comp[sys.equations[i].u];
        if flex[c] && !non_tree_agrees(sys, forest, i) {
            flex[c] = false;
        }
    }
    flex
}

/// `e_xy(S)` for a flexible system.
pub fn implied_equation<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    x: Var,
    y: Var,
) -> Result<Equation<D::Elem>, SystemError> {
    if !is_flexible(sys) {
        return Err(SystemError::NotFlexible);
    }
    let forest = Forest::new(sys);
    let e = forest.implied(sys, x, y).ok_or(SystemError::NotConnected)?;
    Ok(e.to_equation(DERIVED_ID, 1))
}

/// `star(S, x) = { e_xy(S) | y ≠ x }` for a connected flexible system.
pub fn star<D: EuclideanDomain>(sys: &LinSystem<D>, x: Var) -> Result<LinSystem<D>, SystemError> {
    if !is_flexible(sys) {
        return Err(SystemError::NotFlexible);
    }
    let forest = Forest::new(sys);
    let mut out = LinSystem { domain: sys.domain.clone(), names: sys.names.clone(), equations: Vec::new() };
    for y in 0..sys.num_vars() {
        if y == x {
            continue;
        }
        let e = forest.implied(sys, x, y).ok_or(SystemError::NotConnected)?;
        let id = out.equations.len();
        out.equations.push(e.to_equation(id, 1));
    }
    Ok(out)
}

/// Affine change of variables `x = scale(x)·x′ + shift(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution<E> {
    pub scale: Vec<E>,
    pub shift: Vec<E>,
}

impl<E: Clone> Substitution<E> {
    /// Maps an assignment of the substituted system back to the original variables.
    pub fn pull_back<D: EuclideanDomain<Elem = E>>(&self, d: &D, asg: &[E]) -> Vec<E> {
        asg.iter()
            .zip(self.scale.iter().zip(&self.shift))
            .map(|(x, (s, t))| d.add(&d.mul(s, x), t))
            .collect()
    }
}

/// Applies `x = x′ + φ(x)` to every equation, whether satisfied or not.
pub fn shift<D: EuclideanDomain>(sys: &LinSystem<D>, phi: &[D::Elem]) -> LinSystem<D> {
    let d = &sys.domain;
    let mut out = sys.clone();
    for e in &mut out.equations {
        let used = d.add(&d.mul(&e.a, &phi[e.u]), &d.mul(&e.b, &phi[e.v]));
        e.c = d.sub(&e.c, &used);
    }
    out
}

/// The homogenizing substitution `x = x′ + φ(x)` for a satisfying `φ`.
pub fn homogenize<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    phi: &[D::Elem],
) -> Result<(LinSystem<D>, Substitution<D::Elem>), SystemError> {
    if let Some(e) = sys.equations.iter().find(|e| !sys.satisfies(e, phi)) {
        return Err(SystemError::NotSatisfying(e.id));
    }
    let d = &sys.domain;
    let sub = Substitution { scale: vec![d.one(); sys.num_vars()], shift: phi.to_vec() };
    Ok((shift(sys, phi), sub))
}

/// Rewrites a homogeneous flexible system over a field so that every
/// equation reads `u′ − v′ = 0`, via `x = a_x·x′`.
pub fn equalize<D: EuclideanDomain>(
    sys: &LinSystem<D>,
) -> Result<(LinSystem<D>, Substitution<D::Elem>), SystemError> {
    let d = &sys.domain;
    if !d.is_field() {
        return Err(SystemError::NotAField);
    }
    if !sys.is_homogeneous() {
        return Err(SystemError::NotHomogeneous);
    }
    if !is_flexible(sys) {
        return Err(SystemError::NotFlexible);
    }
    let forest = Forest::new(sys);
    let mut scale = vec![d.one(); sys.num_vars()];
    for comp in &forest.components {
        let r = comp[0];
        for &v in &comp[1..] {
            let e = forest.implied(sys, r, v).expect("same component");
            let (q, _) = d.divmod(&e.a, &e.b).expect("nonzero coefficient");
            scale[v] = d.neg(&q);
        }
    }
    let mut out = sys.clone();
    for e in &mut out.equations {
        e.a = d.one();
        e.b = d.neg(&d.one());
        e.c = d.zero();
    }
    Ok((out, Substitution { scale, shift: vec![d.zero(); sys.num_vars()] }))
}

/// A satisfying assignment, or `None` when the system is inconsistent.
///
/// Flexible components are solved with free parameter `1`.
pub fn solve<D: EuclideanDomain>(sys: &LinSystem<D>) -> Option<Assignment<D::Elem>> {
    let one = sys.domain.one();
    solve_with_parameter(sys, &one)
}

/// [`solve`] with an explicit value `r` for the free parameter of each
/// flexible component: such a component is assigned `p + r·h` where `p` is
/// a particular solution and `h` generates its homogeneous solutions.
pub fn solve_with_parameter<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    r: &D::Elem,
) -> Option<Assignment<D::Elem>> {
    let d = &sys.domain;
    let n = sys.num_vars();
    let mut value: Vec<Option<D::Elem>> = vec![None; n];
    for e in &sys.equations {
        match kind(d, e) {
            Kind::Binary => {}
            Kind::Constant => {
                if !d.is_zero(&e.c) {
                    return None;
                }
            }
            Kind::Unary(x, s) => {
                let q = d.exact_div(&e.c, &s)?;
                match &value[x] {
                    Some(old) if *old != q => return None,
                    _ => value[x] = Some(q),
                }
            }
        }
    }
    let forest = Forest::new(sys);
    for comp in &forest.components {
        let seeds: Vec<Var> = comp.iter().copied().filter(|&x| value[x].is_some()).collect();
        if !seeds.is_empty() {
            propagate(sys, &forest, &mut value, seeds)?;
            continue;
        }
        let mut forced = false;
        for i in forest.non_tree_edges() {
            let e = &sys.equations[i];
            if forest.comp[e.u] != forest.comp[comp[0]] {
                continue;
            }
            let e1 = Implied::from_equation(e, e.u);
            let e2 = forest.implied(sys, e.u, e.v).expect("same component");
            if !e2.consistent {
                return None;
            }
            let (a, b) = cross(d, &e1, &e2);
            if d.is_zero(&a) {
                if !d.is_zero(&b) {
                    return None;
                }
                continue;
            }
            value[e.v] = Some(d.exact_div(&b, &a)?);
            propagate(sys, &forest, &mut value, vec![e.v])?;
            forced = true;
            break;
        }
        if !forced {
            solve_tree(sys, &forest, comp, r, &mut value)?;
        }
    }
    let asg: Vec<D::Elem> = value.into_iter().map(|v| v.unwrap_or_else(|| d.zero())).collect();
    sys.is_satisfied_by(&asg).then_some(asg)
}

/// Spreads fixed values along binary equations; fails on a clash or a
/// non-divisible right-hand side.
fn propagate<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    forest: &Forest,
    value: &mut [Option<D::Elem>],
    seeds: Vec<Var>,
) -> Option<()> {
    let d = &sys.domain;
    let mut queue: VecDeque<Var> = seeds.into();
    while let Some(x) = queue.pop_front() {
        let vx = value[x].clone().expect("seeded");
        for &i in forest.incident(x) {
            let e = Implied::from_equation(&sys.equations[i], x);
            let rhs = d.sub(&e.c, &d.mul(&e.a, &vx));
            let vy = d.exact_div(&rhs, &e.b)?;
            match &value[e.to] {
                Some(old) if *old != vy => return None,
                Some(_) => {}
                None => {
                    value[e.to] = Some(vy);
                    queue.push_back(e.to);
                }
            }
        }
    }
    Some(())
}

/// Solves a component through its spanning tree, keeping a particular
/// solution `p` and a generator `h` of the homogeneous solutions.
fn solve_tree<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    forest: &Forest,
    comp: &[Var],
    r: &D::Elem,
    value: &mut [Option<D::Elem>],
) -> Option<()> {
    let d = &sys.domain;
    let mut p = vec![d.zero(); comp.len()];
    let mut h = vec![d.one(); comp.len()];
    let mut pos = vec![usize::MAX; sys.num_vars()];
    pos[comp[0]] = 0;
    for (k, &z) in comp.iter().enumerate().skip(1) {
        let (i, y) = forest.parent[z].expect("non-root");
        let e = Implied::from_equation(&sys.equations[i], y);
        let py = pos[y];
        let lhs = d.mul(&e.a, &h[py]);
        let rhs = d.sub(&e.c, &d.mul(&e.a, &p[py]));
        let s = d.solve_single(&lhs, &e.b, &rhs)?;
        for j in 0..k {
            p[j] = d.add(&p[j], &d.mul(&s.x0, &h[j]));
            h[j] = d.mul(&s.stride_x, &h[j]);
        }
        p[k] = s.y0;
        h[k] = s.stride_y;
        pos[z] = k;
    }
    for (k, &x) in comp.iter().enumerate() {
        value[x] = Some(d.add(&p[k], &d.mul(r, &h[k])));
    }
    Some(())
}

/// Result of [`normalize`].
#[derive(Debug, Clone)]
pub struct Normalized<D: EuclideanDomain> {
    /// Binary equations with co-prime coefficients; ids are preserved.
    pub system: LinSystem<D>,
    /// Ids of equations that are unsatisfiable on their own.
    pub removed: BTreeSet<EqId>,
    /// Their total (uncapped) weight.
    pub removed_weight: u64,
    /// The zero variable, when one was introduced.
    pub zero: Option<Var>,
    /// Ids of the undeletable gadget equations pinning the zero variable.
    pub gadget: BTreeSet<EqId>,
    original_vars: usize,
}

impl<D: EuclideanDomain> Normalized<D> {
    /// Restricts an assignment of the normalized system to the original
    /// variables, flipping all values over GF(2) when the zero variable is 1.
    pub fn pull_back(&self, asg: &[D::Elem]) -> Vec<D::Elem> {
        let d = &self.system.domain;
        let flip = match self.zero {
            Some(z) if d.order() == Some(2) && d.is_one(&asg[z]) => Some(asg[z].clone()),
            _ => None,
        };
        asg[..self.original_vars]
            .iter()
            .map(|x| match &flip {
                Some(f) => d.add(x, f),
                None => x.clone(),
            })
            .collect()
    }
}

/// Brings a system to the normal form used by the solvers.
///
/// Coefficients are divided by their gcd, equations unsatisfiable on their
/// own are removed, `0 = 0` equations are dropped, unary equations
/// `a·x = c` become `x − z₀ = c/a` with a zero variable `z₀`, and weights are
/// capped at `k + 1`. The zero variable is pinned by the undeletable pair
/// `z₀′ + z₀ = 0`, `z₀′ − z₀ = 0`; over GF(2) that pair collapses and is
/// omitted, since every normalized equation there reads `x + y = c` and the
/// solution set is closed under flipping all values.
pub fn normalize<D: EuclideanDomain>(sys: &LinSystem<D>, k: u64) -> Normalized<D> {
    let d = &sys.domain;
    let cap = k.saturating_add(1);
    let mut out = LinSystem { domain: d.clone(), names: sys.names.clone(), equations: Vec::new() };
    let mut removed = BTreeSet::new();
    let mut removed_weight = 0u64;
    let mut zero: Option<Var> = None;
    let mut gadget = BTreeSet::new();
    let mut next_id = sys.next_id();
    for e in &sys.equations {
        let w = e.weight.min(cap);
        match kind(d, e) {
            Kind::Constant => {
                if !d.is_zero(&e.c) {
                    removed.insert(e.id);
                    removed_weight += e.weight;
                }
            }
            Kind::Unary(x, s) => match d.exact_div(&e.c, &s) {
                None => {
                    removed.insert(e.id);
                    removed_weight += e.weight;
                }
                Some(q) => {
                    let z = *zero.get_or_insert_with(|| {
                        let z = out.add_var("z0");
                        if d.order() != Some(2) {
                            let zp = out.add_var("z0'");
                            for sign in [1, -1] {
                                gadget.insert(next_id);
                                out.equations.push(Equation {
                                    id: next_id,
                                    u: zp,
                                    v: z,
                                    a: d.one(),
                                    b: d.from_i64(sign),
                                    c: d.zero(),
                                    weight: cap,
                                });
                                next_id += 1;
                            }
                        }
                        z
                    });
                    out.equations.push(Equation {
                        id: e.id,
                        u: x,
                        v: z,
                        a: d.one(),
                        b: d.neg(&d.one()),
                        c: q,
                        weight: w,
                    });
                }
            },
            Kind::Binary => {
                let n = normalized(d, e.u, e.v, e.a.clone(), e.b.clone(), e.c.clone(), true);
                if n.consistent {
                    out.equations.push(Equation { id: e.id, u: e.u, v: e.v, a: n.a, b: n.b, c: n.c, weight: w });
                } else {
                    removed.insert(e.id);
                    removed_weight += e.weight;
                }
            }
        }
    }
    Normalized { system: out, removed, removed_weight, zero, gadget, original_vars: sys.num_vars() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Integers, PrimeField, Rationals};
    use num_bigint::BigInt;

    fn z(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn eq_tuple(e: &Equation<BigInt>) -> (Var, Var, BigInt, BigInt, BigInt) {
        (e.u, e.v, e.a.clone(), e.b.clone(), e.c.clone())
    }

    /// x = 0, y = 1, z = 2 with y − 2x = 1 and y − 2z = 0.
    fn intro_pair() -> LinSystem<Integers> {
        let mut s = LinSystem::with_vars(Integers, 3);
        s.push_i64(1, 0, 1, -2, 1, 1);
        s.push_i64(1, 2, 1, -2, 0, 1);
        s
    }

    #[test]
    fn intro_pair_is_inconsistent() {
        assert!(solve(&intro_pair()).is_none());
        let e = compose_path(&intro_pair(), &[0, 1]).unwrap();
        assert_eq!(eq_tuple(&e), (0, 2, z(2), z(-2), z(-1)));
    }

    #[test]
    fn composition_example() {
        // x = 0, z = 1, y = 2: x − 2z = 2, z − y = 1.
        let mut s = LinSystem::with_vars(Integers, 3);
        s.push_i64(0, 1, 1, -2, 2, 1);
        s.push_i64(1, 2, 1, -1, 1, 1);
        let e = compose_path(&s, &[0, 1]).unwrap();
        assert_eq!(eq_tuple(&e), (0, 2, z(1), z(-2), z(4)));
        let single = compose_path(&s, &[1]).unwrap();
        assert_eq!(eq_tuple(&single), (1, 2, z(1), z(-1), z(1)));
        assert_eq!(compose_path(&s, &[0, 0]), Err(SystemError::InvalidPath));
    }

    #[test]
    fn lcm_construction() {
        // x = 2y, x = 3z.
        let mut s = LinSystem::with_vars(Integers, 3);
        s.push_i64(0, 1, 1, -2, 0, 1);
        s.push_i64(0, 2, 1, -3, 0, 1);
        assert_eq!(solve_with_parameter(&s, &z(1)).unwrap(), vec![z(6), z(3), z(2)]);
        assert_eq!(solve_with_parameter(&s, &z(0)).unwrap(), vec![z(0), z(0), z(0)]);
        assert_eq!(solve_with_parameter(&s, &z(2)).unwrap(), vec![z(12), z(6), z(4)]);
    }

    #[test]
    fn forced_value_through_cycle() {
        // x − y = 1, x − 2y = 0 forces y = 1, x = 2.
        let mut s = LinSystem::with_vars(Integers, 2);
        s.push_i64(0, 1, 1, -1, 1, 1);
        s.push_i64(0, 1, 1, -2, 0, 1);
        assert_eq!(solve(&s).unwrap(), vec![z(2), z(1)]);
        s.push_i64(0, 1, 2, -3, 0, 1);
        assert!(solve(&s).is_none());
    }

    #[test]
    fn unary_equations() {
        let mut s = LinSystem::with_vars(Integers, 2);
        s.push_i64(0, 0, 2, 1, 6, 1);
        s.push_i64(0, 1, 1, 1, 5, 1);
        assert_eq!(solve(&s).unwrap(), vec![z(2), z(3)]);
        s.push_i64(1, 0, 0, 2, 3, 1);
        assert!(solve(&s).is_none());
    }

    #[test]
    fn cycle_classes() {
        let q = Rationals;
        let mut s = LinSystem::with_vars(q, 2);
        s.push_i64(0, 1, 1, -1, 0, 1);
        s.push_i64(1, 0, 1, -1, 0, 1);
        assert_eq!(classify_cycle(&s, &[0, 1]).unwrap(), CycleClass::Identity);
        let mut s = LinSystem::with_vars(q, 2);
        s.push_i64(0, 1, 1, -1, 0, 1);
        s.push_i64(0, 1, 1, -2, 0, 1);
        assert_eq!(classify_cycle(&s, &[0, 1]).unwrap(), CycleClass::NonIdentity);
        let mut s = LinSystem::with_vars(q, 2);
        s.push_i64(0, 1, 1, -1, 1, 1);
        s.push_i64(1, 0, 1, -1, 1, 1);
        assert_eq!(classify_cycle(&s, &[0, 1]).unwrap(), CycleClass::Inconsistent);
        let mut s = LinSystem::with_vars(q, 3);
        s.push_i64(0, 1, 1, -1, 0, 1);
        s.push_i64(1, 2, 1, -1, 0, 1);
        assert_eq!(classify_cycle(&s, &[0, 1]), Err(SystemError::InvalidCycle));
    }

    fn triangle() -> LinSystem<Rationals> {
        // x = 2y, y = 3z, x = 6z.
        let mut s = LinSystem::with_vars(Rationals, 3);
        s.push_i64(0, 1, 1, -2, 0, 1);
        s.push_i64(1, 2, 1, -3, 0, 1);
        s.push_i64(0, 2, 1, -6, 0, 1);
        s
    }

    #[test]
    fn flexibility() {
        assert!(is_flexible(&triangle()));
        assert!(is_flexible(&intro_pair()));
        let mut s = triangle();
        s.push_i64(0, 2, 1, -5, 0, 1);
        assert!(!is_flexible(&s));
    }

    #[test]
    fn star_of_path() {
        let mut s = LinSystem::with_vars(Rationals, 3);
        s.push_i64(0, 1, 1, -2, 0, 1);
        s.push_i64(1, 2, 1, -3, 0, 1);
        let st = star(&s, 0).unwrap();
        let q = |v: i64| Rationals.from_i64(v);
        let tuples: Vec<_> = st.equations.iter().map(|e| (e.u, e.v, e.a.clone(), e.b.clone())).collect();
        assert_eq!(tuples, vec![(0, 1, q(1), q(-2)), (0, 2, q(1), q(-6))]);
        let mut disconnected = s.clone();
        disconnected.add_var("w");
        assert_eq!(star(&disconnected, 0).unwrap_err(), SystemError::NotConnected);
    }

    #[test]
    fn homogenize_examples() {
        let mut s = LinSystem::with_vars(Integers, 2);
        s.push_i64(0, 1, 1, -1, 3, 1);
        let (h, sub) = homogenize(&s, &[z(3), z(0)]).unwrap();
        assert!(h.is_homogeneous());
        assert!(s.is_satisfied_by(&sub.pull_back(&Integers, &[z(5), z(5)])));
        assert_eq!(homogenize(&s, &[z(0), z(0)]).unwrap_err(), SystemError::NotSatisfying(0));
        let mut q = LinSystem::with_vars(Rationals, 2);
        q.push_i64(0, 1, 2, 3, 12, 1);
        let phi = [Rationals.from_i64(3), Rationals.from_i64(2)];
        let (h, _) = homogenize(&q, &phi).unwrap();
        assert_eq!(h.equations[0].c, Rationals.zero());
        assert_eq!(h.equations[0].a, Rationals.from_i64(2));
    }

    #[test]
    fn equalize_triangle() {
        let (eq, sub) = equalize(&triangle()).unwrap();
        assert!(eq.equations.iter().all(|e| e.a == Rationals.one() && e.b == Rationals.from_i64(-1)));
        let back = sub.pull_back(&Rationals, &vec![Rationals.from_i64(7); 3]);
        assert!(triangle().is_satisfied_by(&back));
        assert_eq!(equalize(&intro_pair()).unwrap_err(), SystemError::NotAField);
    }

    #[test]
    fn normalize_examples() {
        let mut s = LinSystem::with_vars(Integers, 2);
        s.push_i64(0, 1, 2, 2, 1, 3);
        let n = normalize(&s, 5);
        assert!(n.system.is_empty());
        assert_eq!(n.removed_weight, 3);

        let mut s = LinSystem::with_vars(Integers, 2);
        s.push_i64(0, 1, 4, 6, 2, 1);
        s.push_i64(0, 1, 0, 0, 0, 1);
        let n = normalize(&s, 5);
        assert_eq!(n.system.len(), 1);
        assert_eq!(eq_tuple(&n.system.equations[0]), (0, 1, z(2), z(3), z(1)));
        assert_eq!(n.removed_weight, 0);
    }

    #[test]
    fn normalize_zero_gadget() {
        let mut s = LinSystem::with_vars(Integers, 1);
        s.push_i64(0, 0, 3, 0, 6, 9);
        let n = normalize(&s, 2);
        assert_eq!(n.system.num_vars(), 3);
        assert_eq!(n.gadget.len(), 2);
        assert!(n.system.equations.iter().all(|e| e.weight == 3));
        let asg = solve(&n.system).unwrap();
        assert_eq!(n.pull_back(&asg), vec![z(2)]);

        let f2 = PrimeField::new(2).unwrap();
        let mut s = LinSystem::with_vars(f2, 2);
        s.push_i64(0, 1, 1, 0, 1, 1);
        s.push_i64(0, 1, 1, 1, 0, 1);
        let n = normalize(&s, 2);
        assert!(n.gadget.is_empty());
        let asg = solve_with_parameter(&n.system, &1).unwrap();
        assert!(s.is_satisfied_by(&n.pull_back(&asg)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        type Raw = (usize, usize, i64, i64, i64);

        fn build<D: EuclideanDomain>(d: D, n: usize, raw: &[Raw]) -> LinSystem<D> {
            let mut s = LinSystem::with_vars(d, n);
            for &(u, v, a, b, c) in raw {
                s.push_i64(u % n, v % n, a, b, c, 1);
            }
            s
        }

        fn all_assignments(p: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
            (0..p.pow(n as u32)).map(move |mut code| {
                (0..n)
                    .map(|_| {
                        let x = code % p;
                        code /= p;
                        x
                    })
                    .collect()
            })
        }

        fn raw_eqs(n: usize, max: usize) -> impl Strategy<Value = Vec<Raw>> {
            proptest::collection::vec((0..n, 0..n, -3i64..=3, -3i64..=3, -3i64..=3), 0..=max)
        }

        /// Random tree over ℤ: vertex i > 0 hangs below a smaller vertex.
        fn tree_eqs(n: usize) -> impl Strategy<Value = Vec<Raw>> {
            proptest::collection::vec((any::<usize>(), nonzero(), nonzero(), -6i64..=6), n - 1).prop_map(
                |v| v.into_iter().enumerate().map(|(i, (p, a, b, c))| (p % (i + 1), i + 1, a, b, c)).collect(),
            )
        }

        fn nonzero() -> impl Strategy<Value = i64> {
            prop_oneof![-4i64..=-1, 1i64..=4]
        }

        proptest! {
            #[test]
            fn solve_matches_exhaustive_search(p in prop::sample::select(vec![2u64, 3]), n in 1usize..=4, raw in raw_eqs(4, 5)) {
                let f = PrimeField::new(p).unwrap();
                let sys = build(f, n, &raw);
                let exists = all_assignments(p, n).any(|asg| sys.is_satisfied_by(&asg));
                let found = solve(&sys);
                prop_assert_eq!(found.is_some(), exists);
                if let Some(asg) = found {
                    prop_assert!(sys.is_satisfied_by(&asg));
                }
            }

            #[test]
            fn acyclic_criterion(raw in tree_eqs(6)) {
                let sys = build(Integers, 6, &raw);
                let forest = Forest::new(&sys);
                let paths_ok = (0..6).all(|x| (0..6).all(|y| forest.implied(&sys, x, y).unwrap().consistent));
                prop_assert!(is_flexible(&sys));
                prop_assert_eq!(solve(&sys).is_some(), paths_ok);
            }

            #[test]
            fn elimination_is_safe(raw in tree_eqs(5), seed in proptest::collection::vec(-5i64..=5, 5)) {
                // Make the path consistent by choosing c from a sampled assignment.
                let mut sys = build(Integers, 5, &raw);
                let asg: Vec<BigInt> = seed.iter().map(|&v| z(v)).collect();
                for e in &mut sys.equations {
                    e.c = &e.a * &asg[e.u] + &e.b * &asg[e.v];
                }
                let forest = Forest::new(&sys);
                for y in 1..5 {
                    let e = forest.implied(&sys, 0, y).unwrap();
                    prop_assert!(e.consistent);
                    prop_assert_eq!(&e.a * &asg[0] + &e.b * &asg[y], e.c);
                }
            }

            #[test]
            fn flexible_parameter_family(raw in tree_eqs(5), r in -3i64..=3) {
                let sys = build(Integers, 5, &raw);
                if let Some(asg) = solve_with_parameter(&sys, &z(r)) {
                    prop_assert!(sys.is_satisfied_by(&asg));
                }
            }

            #[test]
            fn star_equivalence(raw in tree_eqs(5), extra in proptest::collection::vec((0usize..5, 0usize..5), 0..3)) {
                // Close cycles with the equations the tree already implies.
                let mut sys = build(Integers, 5, &raw);
                let forest = Forest::new(&sys);
                for (x, y) in extra {
                    if x != y {
                        let e = forest.implied(&sys, x, y).unwrap();
                        if e.consistent {
                            sys.push(x, y, e.a, e.b, e.c, 1);
                        }
                    }
                }
                prop_assert!(is_flexible(&sys));
                for x in 0..5 {
                    let st = star(&sys, x).unwrap();
                    if let Some(asg) = solve(&sys) {
                        prop_assert!(st.is_satisfied_by(&asg));
                    }
                    if let Some(asg) = solve(&st) {
                        prop_assert!(sys.is_satisfied_by(&asg));
                    }
                }
            }

            #[test]
            fn homogenize_round_trip(raw in raw_eqs(5, 6), seed in proptest::collection::vec(-4i64..=4, 5), back in proptest::collection::vec(-4i64..=4, 5)) {
                let mut sys = build(Rationals, 5, &raw);
                let q = |v: i64| Rationals.from_i64(v);
                let phi: Vec<_> = seed.iter().map(|&v| q(v)).collect();
                for e in &mut sys.equations {
                    e.c = Rationals.add(&Rationals.mul(&e.a, &phi[e.u]), &Rationals.mul(&e.b, &phi[e.v]));
                }
                let (h, sub) = homogenize(&sys, &phi).unwrap();
                prop_assert!(h.is_homogeneous());
                for (e, f) in sys.equations.iter().zip(&h.equations) {
                    prop_assert_eq!((e.id, e.u, e.v, &e.a, &e.b, e.weight), (f.id, f.u, f.v, &f.a, &f.b, f.weight));
                }
                let candidate: Vec<_> = back.iter().map(|&v| q(v)).collect();
                let pulled = sub.pull_back(&Rationals, &candidate);
                for (e, f) in sys.equations.iter().zip(&h.equations) {
                    prop_assert_eq!(h.satisfies(f, &candidate), sys.satisfies(e, &pulled));
                }
            }

            #[test]
            fn field_flexible_instances_pin_any_value(raw in tree_eqs(5), zv in 0usize..5, dv in 0u64..5) {
                let f = PrimeField::new(5).unwrap();
                let raw: Vec<Raw> = raw.into_iter().filter(|r| r.2 % 5 != 0 && r.3 % 5 != 0).collect();
                let mut sys = build(f, 5, &raw);
                prop_assert!(is_flexible(&sys));
                prop_assert!(solve(&sys).is_some());
                sys.push(zv, zv, 1, 0, dv, 1);
                prop_assert!(solve(&sys).is_some());
            }
        }
    }
}

