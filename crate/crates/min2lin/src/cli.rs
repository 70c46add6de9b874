//! The `min2lin` command-line tool.
//!
//! Instances and results are JSON documents. Ring elements are written as
//! JSON numbers while they fit in 53 bits and as strings otherwise; a
//! rational with a denominator is always a string such as `"3/2"`.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::biased::{BiasedGraph, GainGraph, Graph, OracleGraph};
use crate::cuts::{multiway_cut, pair_partition_cut, partition_cut, CutInstance, PairCutRequest};
use crate::ibs::dominating_family;
use crate::oracle::{
    brute_min2lin, gen_planted, gen_random, reduce_bipartization, reduce_multicut, reduce_multiway_cut,
    GeneratorConfig, PlantedConfig,
};
use crate::ring::{DomainSpec, EuclideanDomain, Integers, PrimeField, Ratio, Rationals};
use crate::solver::{decide, min2lin_with, Algorithm, SolveError, SolveOptions, SolveStats, Solution};
use crate::system::{solve, EqId, LinSystem};

/// Largest magnitude written as a JSON number.
const EXACT_JSON: i64 = 1 << 53;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::UnsupportedDomain { .. } => CliError::Unsupported(e.to_string()),
            SolveError::InvalidDml(_) | SolveError::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "min2lin", version, about = "Delete few two-variable linear equations to make a system consistent")]
pub struct Cli {
    /// Report wall_ms as 0 so that output is reproducible byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide consistency and print a satisfying assignment.
    Check { file: PathBuf },
    /// Delete equations of weight at most the file's k.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Optimize)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Shuffle the order in which equations enter iterative compression.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List a dominating family of rooted balanced subgraphs.
    EnumerateIbs {
        graph: PathBuf,
        #[arg(long)]
        root: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        /// `even`, `group:F<p>` or `group:Q`; group labels come from the edges.
        #[arg(long, default_value = "even")]
        oracle: String,
    },
    /// Exhaustive minimum deletion set for the file's k.
    Oracle { file: PathBuf },
    /// Print a random instance.
    Generate {
        /// `Z`, `Q` or `F<p>`.
        #[arg(long, default_value = "Z")]
        domain: String,
        #[arg(long, default_value_t = 6)]
        vars: usize,
        #[arg(long, default_value_t = 10)]
        eqs: usize,
        #[arg(long, default_value_t = 1)]
        weight_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plant this many violated equations around a hidden solution.
        #[arg(long)]
        planted: Option<usize>,
        /// Budget written to the file; defaults to the planted count.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Encode a graph problem as a Min-2-Lin instance.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        graph: PathBuf,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Minimum multiway, partition or pair partition cut of a graph file.
    Cut {
        graph: PathBuf,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Solve planted instances for k = 1..=max_k and print CSV rows.
    Bench {
        #[arg(long, default_value = "Z")]
        domain: String,
        #[arg(long, default_value_t = 6)]
        vars: usize,
        #[arg(long, default_value_t = 10)]
        eqs: usize,
        #[arg(long, default_value_t = 3)]
        max_k: u64,
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = AlgoArg::Auto)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Decide,
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Auto,
    Ed,
    Field,
    Finite,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Auto => Algorithm::Auto,
            AlgoArg::Ed => Algorithm::Ed,
            AlgoArg::Field => Algorithm::Field,
            AlgoArg::Finite => Algorithm::Finite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceKind {
    Bipartization,
    MultiwayCut,
    Multicut,
}

/// A ring element or a variable reference as written in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationEntry {
    pub u: Scalar,
    pub v: Scalar,
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    #[serde(default = "unit_weight")]
    pub w: u64,
}

fn unit_weight() -> u64 {
    1
}

/// `{domain, variables, equations, k}`; equations refer to variables by
/// name or by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub domain: DomainSpec,
    pub variables: Vec<String>,
    pub equations: Vec<EquationEntry>,
    pub k: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordStats {
    pub nodes: usize,
    pub family_size: usize,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deleted: Option<Vec<EqId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<BTreeMap<String, Value>>,
    pub stats: RecordStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    #[serde(default = "unit_weight")]
    pub w: u64,
    /// Group label for `group:` oracles, read in the direction `u → v`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Scalar>,
}

/// An undirected graph with optional terminals, pairs and cut requests.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terminals: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partition: Vec<Vec<usize>>,
    /// `[s, u, t, v]`: cut `s` from `u` or `t` from `v`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub requests: Vec<[usize; 4]>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<Graph, CliError> {
        let mut g = Graph::new(self.n);
        for e in &self.edges {
            self.check_vertex(e.u)?;
            self.check_vertex(e.v)?;
            if e.u == e.v {
                return Err(input(format!("self-loop at vertex {}", e.u)));
            }
            if e.w == 0 {
                return Err(input("edge weights must be at least 1"));
            }
            g.add_edge(e.u, e.v, e.w);
        }
        Ok(g)
    }

    fn check_vertex(&self, v: usize) -> Result<usize, CliError> {
        if v < self.n {
            Ok(v)
        } else {
            Err(input(format!("vertex {v} out of range for n = {}", self.n)))
        }
    }

    fn budget(&self, flag: Option<u64>) -> Result<u64, CliError> {
        flag.or(self.k).ok_or_else(|| input("no budget: pass --k or set \"k\" in the graph file"))
    }
}

/// Writes an element as a JSON number when that is exact.
pub fn elem_to_json<E: std::fmt::Display>(e: &E) -> Value {
    let text = e.to_string();
    match text.parse::<i64>() {
        Ok(v) if v.abs() <= EXACT_JSON => Value::from(v),
        _ => Value::String(text),
    }
}

fn elem_to_scalar<E: std::fmt::Display>(e: &E) -> Scalar {
    match elem_to_json(e) {
        Value::Number(n) => Scalar::Int(n.as_i64().expect("written from an i64")),
        other => Scalar::Text(other.as_str().expect("string").to_string()),
    }
}

/// Parses an element; integers are reduced into the domain, strings use
/// the domain's own notation.
pub fn parse_scalar<D: EuclideanDomain>(d: &D, s: &Scalar) -> Result<D::Elem, CliError> {
    match s {
        Scalar::Int(v) => Ok(d.from_i64(*v)),
        Scalar::Text(t) => d.parse_elem(t).map_err(input),
    }
}

/// A system over the domain named in its file.
#[derive(Debug, Clone)]
pub enum AnySystem {
    Z(LinSystem<Integers>),
    Q(LinSystem<Rationals>),
    F(LinSystem<PrimeField>),
}

macro_rules! with_system {
    ($any:expr, $s:ident => $body:expr) => {
        match $any {
            AnySystem::Z($s) => $body,
            AnySystem::Q($s) => $body,
            AnySystem::F($s) => $body,
        }
    };
}

impl InstanceFile {
    pub fn to_system(&self) -> Result<AnySystem, CliError> {
        Ok(match self.domain {
            DomainSpec::Integers => AnySystem::Z(self.build(Integers)?),
            DomainSpec::Rationals => AnySystem::Q(self.build(Rationals)?),
            DomainSpec::PrimeField(p) => AnySystem::F(self.build(PrimeField::new(p).map_err(input)?)?),
        })
    }

    fn build<D: EuclideanDomain>(&self, d: D) -> Result<LinSystem<D>, CliError> {
        let mut sys = LinSystem::new(d.clone());
        for name in &self.variables {
            if sys.var(name).is_some() {
                return Err(input(format!("duplicate variable {name:?}")));
            }
            sys.add_var(name.clone());
        }
        let var = |s: &Scalar, sys: &LinSystem<D>| match s {
            Scalar::Text(name) => sys.var(name).ok_or_else(|| input(format!("unknown variable {name:?}"))),
            Scalar::Int(i) => usize::try_from(*i)
                .ok()
                .filter(|&i| i < sys.num_vars())
                .ok_or_else(|| input(format!("variable index {i} out of range"))),
        };
        for (i, e) in self.equations.iter().enumerate() {
            if e.w == 0 {
                return Err(input(format!("equation {i} has weight 0; weights must be at least 1")));
            }
            let (u, v) = (var(&e.u, &sys)?, var(&e.v, &sys)?);
            let (a, b, c) = (parse_scalar(&d, &e.a)?, parse_scalar(&d, &e.b)?, parse_scalar(&d, &e.c)?);
            sys.push(u, v, a, b, c, e.w);
        }
        Ok(sys)
    }

    /// The file describing `sys` with budget `k`.
    pub fn from_system<D: EuclideanDomain>(sys: &LinSystem<D>, k: u64) -> Self {
        InstanceFile {
            domain: sys.domain.spec(),
            variables: sys.names.clone(),
            equations: sys
                .equations
                .iter()
                .map(|e| EquationEntry {
                    u: Scalar::Text(sys.names[e.u].clone()),
                    v: Scalar::Text(sys.names[e.v].clone()),
                    a: elem_to_scalar(&e.a),
                    b: elem_to_scalar(&e.b),
                    c: elem_to_scalar(&e.c),
                    w: e.weight,
                })
                .collect(),
            k,
        }
    }
}

/// Parses `Z`, `Q` or `F<p>`.
pub fn parse_domain(text: &str) -> Result<DomainSpec, CliError> {
    let spec = match text {
        "Z" => DomainSpec::Integers,
        "Q" => DomainSpec::Rationals,
        _ => match text.strip_prefix('F').and_then(|p| p.parse::<u64>().ok()) {
            Some(p) => DomainSpec::PrimeField(p),
            None => return Err(input(format!("unknown domain {text:?}; expected Z, Q or F<p>"))),
        },
    };
    spec.validate().map_err(input)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

pub fn read_graph(path: &Path) -> Result<GraphFile, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    fn start(enabled: bool) -> Self {
        Clock { start: Instant::now(), enabled }
    }

    fn ms(&self) -> u64 {
        if self.enabled {
            self.start.elapsed().as_millis() as u64
        } else {
            0
        }
    }
}

fn assignment_json<D: EuclideanDomain>(sys: &LinSystem<D>, asg: &[D::Elem]) -> BTreeMap<String, Value> {
    sys.names.iter().zip(asg).map(|(n, x)| (n.clone(), elem_to_json(x))).collect()
}

/// A "solved" record after checking it against `sys` and `k`.
fn solved_record<D: EuclideanDomain>(
    sys: &LinSystem<D>,
    k: u64,
    deleted: &BTreeSet<EqId>,
    asg: &[D::Elem],
    stats: RecordStats,
) -> Result<ResultRecord, CliError> {
    let weight = sys.weight_of(deleted);
    if weight > k || asg.len() != sys.num_vars() || !sys.without(deleted).is_satisfied_by(asg) {
        return Err(CliError::Internal("result failed verification".into()));
    }
    Ok(ResultRecord {
        status: "solved".into(),
        weight: Some(weight),
        deleted: Some(deleted.iter().copied().collect()),
        assignment: Some(assignment_json(sys, asg)),
        stats,
    })
}

fn infeasible(stats: RecordStats) -> ResultRecord {
    ResultRecord { status: "infeasible".into(), weight: None, deleted: None, assignment: None, stats }
}

pub fn cmd_check(file: &InstanceFile, timing: bool) -> Result<ResultRecord, CliError> {
    let clock = Clock::start(timing);
    with_system!(file.to_system()?, sys => {
        match solve(&sys) {
            Some(asg) => {
                let mut r = solved_record(&sys, 0, &BTreeSet::new(), &asg, RecordStats::default())?;
                r.status = "sat".into();
                r.weight = None;
                r.deleted = None;
                r.stats.wall_ms = clock.ms();
                Ok(r)
            }
            None => Ok(ResultRecord {
                status: "unsat".into(),
                weight: None,
                deleted: None,
                assignment: None,
                stats: RecordStats { wall_ms: clock.ms(), ..RecordStats::default() },
            }),
        }
    })
}

/// Options of [`cmd_solve`].
#[derive(Debug, Clone, Copy)]
pub struct SolveFlags {
    pub mode: Mode,
    pub algorithm: Algorithm,
    pub threads: usize,
    pub seed: Option<u64>,
    pub timing: bool,
}

impl Default for SolveFlags {
    fn default() -> Self {
        SolveFlags { mode: Mode::Optimize, algorithm: Algorithm::Auto, threads: 1, seed: None, timing: true }
    }
}

pub fn cmd_solve(file: &InstanceFile, flags: &SolveFlags) -> Result<ResultRecord, CliError> {
    with_system!(file.to_system()?, sys => solve_system(&sys, file.k, flags))
}

fn solve_system<D: EuclideanDomain>(sys: &LinSystem<D>, k: u64, flags: &SolveFlags) -> Result<ResultRecord, CliError> {
    let clock = Clock::start(flags.timing);
    let (order, shuffled) = shuffled(sys, flags.seed);
    let opts = SolveOptions { algorithm: flags.algorithm, threads: flags.threads.max(1) };
    let mut stats = SolveStats::default();
    let absorb = |r: Option<Solution<D::Elem>>, stats: &mut SolveStats| r.inspect(|s| add_stats(stats, &s.stats));
    let found = match flags.mode {
        Mode::Decide => absorb(decide(&shuffled, k, &opts)?, &mut stats),
        Mode::Optimize => {
            let mut best = absorb(decide(&shuffled, k, &opts)?, &mut stats);
            let mut lo = 0;
            while let Some(hi) = best.as_ref().map(|s| s.weight).filter(|&hi| lo < hi) {
                let mid = lo + (hi - lo) / 2;
                match absorb(decide(&shuffled, mid, &opts)?, &mut stats) {
                    Some(s) => best = Some(s),
                    None => lo = mid + 1,
                }
            }
            best
        }
    };
    let record_stats = |ms| RecordStats { nodes: stats.nodes(), family_size: stats.family_members, wall_ms: ms };
    match found {
        Some(s) => {
            let deleted: BTreeSet<EqId> = s.deleted.iter().map(|&id| order[id]).collect();
            solved_record(sys, k, &deleted, &s.assignment, record_stats(clock.ms()))
        }
        None => Ok(infeasible(record_stats(clock.ms()))),
    }
}

fn add_stats(total: &mut SolveStats, s: &SolveStats) {
    total.compressions += s.compressions;
    total.family_nodes += s.family_nodes;
    total.family_members += s.family_members;
    total.partitions += s.partitions;
    total.cut_nodes += s.cut_nodes;
    total.rejected_cuts += s.rejected_cuts;
    total.alphas += s.alphas;
    total.max_alphas_per_step = total.max_alphas_per_step.max(s.max_alphas_per_step);
}

/// The system with its equations permuted by `seed`, and for every new id
/// the original one.
fn shuffled<D: EuclideanDomain>(sys: &LinSystem<D>, seed: Option<u64>) -> (Vec<EqId>, LinSystem<D>) {
    let mut order: Vec<usize> = (0..sys.len()).collect();
    if let Some(seed) = seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut out = LinSystem::new(sys.domain.clone());
    out.names = sys.names.clone();
    for &i in &order {
        let e = &sys.equations[i];
        out.push(e.u, e.v, e.a.clone(), e.b.clone(), e.c.clone(), e.weight);
    }
    (order.iter().map(|&i| sys.equations[i].id).collect(), out)
}

pub fn cmd_oracle(file: &InstanceFile, timing: bool) -> Result<ResultRecord, CliError> {
    let clock = Clock::start(timing);
    with_system!(file.to_system()?, sys => {
        match brute_min2lin(&sys, file.k) {
            Some((_, z)) => {
                let asg = solve(&sys.without(&z)).ok_or_else(|| CliError::Internal("oracle set does not verify".into()))?;
                let stats = RecordStats { wall_ms: clock.ms(), ..RecordStats::default() };
                solved_record(&sys, file.k, &z, &asg, stats)
            }
            None => Ok(infeasible(RecordStats { wall_ms: clock.ms(), ..RecordStats::default() })),
        }
    })
}

pub fn cmd_generate(cfg: &GeneratorConfig, k: u64) -> Result<InstanceFile, CliError> {
    fn make<D: EuclideanDomain>(d: D, cfg: &GeneratorConfig, k: u64) -> InstanceFile {
        let sys = if cfg.planted.is_some() { gen_planted(&d, cfg).system } else { gen_random(&d, cfg) };
        InstanceFile::from_system(&sys, k)
    }
    if cfg.n_vars < 2 {
        return Err(input("generated instances need at least two variables"));
    }
    Ok(match cfg.domain {
        DomainSpec::Integers => make(Integers, cfg, k),
        DomainSpec::Rationals => make(Rationals, cfg, k),
        DomainSpec::PrimeField(p) => make(PrimeField::new(p).map_err(input)?, cfg, k),
    })
}

pub fn cmd_reduce(kind: ReduceKind, graph: &GraphFile, k: Option<u64>) -> Result<InstanceFile, CliError> {
    let g = graph.to_graph()?;
    let k = graph.budget(k)?;
    for &v in graph.terminals.iter().chain(graph.pairs.iter().flatten()) {
        graph.check_vertex(v)?;
    }
    Ok(match kind {
        ReduceKind::Bipartization => InstanceFile::from_system(&reduce_bipartization(&g), k),
        ReduceKind::MultiwayCut => InstanceFile::from_system(&reduce_multiway_cut(&g, &graph.terminals, k), k),
        ReduceKind::Multicut => {
            let pairs: Vec<(usize, usize)> = graph.pairs.iter().map(|p| (p[0], p[1])).collect();
            InstanceFile::from_system(&reduce_multicut(&g, &pairs, k), k)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRecord {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<usize>>,
}

/// Pair partition cut when the file has a partition or requests, multiway
/// cut of its terminals otherwise.
pub fn cmd_cut(graph: &GraphFile, k: Option<u64>) -> Result<CutRecord, CliError> {
    let g = graph.to_graph()?;
    let k = graph.budget(k)?;
    for &v in graph.terminals.iter().chain(graph.partition.iter().flatten()).chain(graph.requests.iter().flatten()) {
        graph.check_vertex(v)?;
    }
    let cut = if !graph.requests.is_empty() {
        let requests = graph.requests.iter().map(|r| PairCutRequest { s: r[0], u: r[1], t: r[2], v: r[3] }).collect();
        let inst = CutInstance::new(g.clone(), graph.partition.clone(), k).and_then(|i| i.with_requests(requests));
        pair_partition_cut(&inst.map_err(input)?)
    } else if !graph.partition.is_empty() {
        CutInstance::new(g.clone(), graph.partition.clone(), k).map_err(input)?;
        partition_cut(&g, &graph.partition, k)
    } else {
        multiway_cut(&g, &graph.terminals, k)
    };
    Ok(match cut {
        Some(c) => CutRecord {
            status: "solved".into(),
            weight: Some(g.weight_of(&c)),
            edges: Some(c.into_iter().collect()),
        },
        None => CutRecord { status: "infeasible".into(), weight: None, edges: None },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IbsEntry {
    pub vertices: Vec<usize>,
    pub cost: u64,
    pub deleted: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IbsListing {
    pub root: usize,
    pub budget: u64,
    pub nodes: usize,
    pub members: Vec<IbsEntry>,
}

pub fn cmd_enumerate_ibs(
    graph: &GraphFile,
    root: Option<usize>,
    budget: Option<u64>,
    oracle: &str,
) -> Result<IbsListing, CliError> {
    let g = graph.to_graph()?;
    let root = graph.check_vertex(root.or(graph.root).unwrap_or(0))?;
    let budget = budget.or(graph.k).ok_or_else(|| input("no budget: pass --budget or set \"k\" in the graph file"))?;
    match oracle {
        "even" => Ok(listing(&OracleGraph::even_cycles(g), root, budget)),
        "group:Q" => Ok(listing(&gain_graph(graph, Rationals)?, root, budget)),
        other => match other.strip_prefix("group:").map(parse_domain) {
            Some(Ok(DomainSpec::PrimeField(p))) => {
                Ok(listing(&gain_graph(graph, PrimeField::new(p).map_err(input)?)?, root, budget))
            }
            _ => Err(input(format!("unknown oracle {other:?}; expected even, group:F<p> or group:Q"))),
        },
    }
}

fn gain_graph<D: EuclideanDomain>(graph: &GraphFile, d: D) -> Result<GainGraph<Ratio<D>>, CliError> {
    let plain = graph.to_graph()?;
    let mut g = GainGraph::new(graph.n);
    for ((&(u, v), &w), entry) in plain.edges.iter().zip(&plain.weights).zip(&graph.edges) {
        let label = match &entry.label {
            Some(s) => parse_scalar(&d, s)?,
            None => d.one(),
        };
        if d.is_zero(&label) {
            return Err(input("group labels must be nonzero"));
        }
        g.add_edge(u, v, w, Ratio::new(&d, label, d.one()));
    }
    Ok(g)
}

fn listing<B: BiasedGraph>(view: &B, root: usize, budget: u64) -> IbsListing {
    let fam = dominating_family(view, root, budget);
    IbsListing {
        root,
        budget,
        nodes: fam.nodes,
        members: fam
            .members
            .into_iter()
            .map(|m| IbsEntry {
                vertices: m.vertices.into_iter().collect(),
                cost: m.cost,
                deleted: m.deleted.into_iter().collect(),
            })
            .collect(),
    }
}

/// One row of the benchmark CSV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance: String,
    pub k: u64,
    pub algo: Algorithm,
    pub weight: Option<u64>,
    pub nodes: usize,
    pub wall_ms: u64,
}

pub const BENCH_HEADER: &str = "instance,k,algo,weight,nodes,wall_ms";

impl BenchRow {
    pub fn csv(&self) -> String {
        let weight = self.weight.map_or(String::new(), |w| w.to_string());
        format!("{},{},{},{},{},{}", self.instance, self.k, self.algo, weight, self.nodes, self.wall_ms)
    }
}

/// Parameters of [`cmd_bench`].
#[derive(Debug, Clone, Copy)]
pub struct BenchSuite {
    pub domain: DomainSpec,
    pub vars: usize,
    pub eqs: usize,
    pub max_k: u64,
    pub seeds: u64,
    pub algorithm: Algorithm,
    pub threads: usize,
    pub timing: bool,
}

/// Planted instances with `k` violated equations, solved with budget `k`.
pub fn cmd_bench(suite: &BenchSuite) -> Result<Vec<BenchRow>, CliError> {
    let algo = suite.algorithm.resolve(suite.domain)?;
    if suite.vars < 2 {
        return Err(input("benchmark instances need at least two variables"));
    }
    let mut rows = Vec::new();
    for k in 1..=suite.max_k {
        for seed in 0..suite.seeds {
            let mut cfg = GeneratorConfig::new(suite.domain, suite.vars, suite.eqs, seed);
            cfg.planted = Some(PlantedConfig { budget: k as usize });
            let (weight, nodes, wall_ms) = match suite.domain {
                DomainSpec::Integers => bench_one(Integers, &cfg, k, suite)?,
                DomainSpec::Rationals => bench_one(Rationals, &cfg, k, suite)?,
                DomainSpec::PrimeField(p) => bench_one(PrimeField::new(p).map_err(input)?, &cfg, k, suite)?,
            };
            let instance = format!("planted-{}-n{}-m{}-k{k}-s{seed}", suite.domain, suite.vars, suite.eqs);
            rows.push(BenchRow { instance, k, algo, weight, nodes, wall_ms });
        }
    }
    Ok(rows)
}

fn bench_one<D: EuclideanDomain>(
    d: D,
    cfg: &GeneratorConfig,
    k: u64,
    suite: &BenchSuite,
) -> Result<(Option<u64>, usize, u64), CliError> {
    let sys = gen_planted(&d, cfg).system;
    let clock = Clock::start(suite.timing);
    let opts = SolveOptions { algorithm: suite.algorithm, threads: suite.threads.max(1) };
    let found = min2lin_with(&sys, k, &opts)?;
    let ms = clock.ms();
    Ok(match found {
        Some(s) => (Some(s.weight), s.stats.nodes(), ms),
        None => (None, 0, ms),
    })
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| CliError::Internal(e.to_string()))
}

/// Runs a parsed command, writing its output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let timing = !cli.no_timing;
    match &cli.command {
        Command::Check { file } => print_json(out, &cmd_check(&read_instance(file)?, timing)?),
        Command::Solve { file, mode, algo, threads, seed } => {
            let flags = SolveFlags { mode: *mode, algorithm: (*algo).into(), threads: *threads, seed: *seed, timing };
            print_json(out, &cmd_solve(&read_instance(file)?, &flags)?)
        }
        Command::EnumerateIbs { graph, root, budget, oracle } => {
            print_json(out, &cmd_enumerate_ibs(&read_graph(graph)?, *root, *budget, oracle)?)
        }
        Command::Oracle { file } => print_json(out, &cmd_oracle(&read_instance(file)?, timing)?),
        Command::Generate { domain, vars, eqs, weight_max, seed, planted, k } => {
            let mut cfg = GeneratorConfig::new(parse_domain(domain)?, *vars, *eqs, *seed);
            cfg.weight_max = (*weight_max).max(1);
            cfg.planted = planted.map(|budget| PlantedConfig { budget });
            let k = k.unwrap_or(planted.unwrap_or(1) as u64);
            print_json(out, &cmd_generate(&cfg, k)?)
        }
        Command::Reduce { kind, graph, k } => print_json(out, &cmd_reduce(*kind, &read_graph(graph)?, *k)?),
        Command::Cut { graph, k } => print_json(out, &cmd_cut(&read_graph(graph)?, *k)?),
        Command::Bench { domain, vars, eqs, max_k, seeds, algo, threads } => {
            let suite = BenchSuite {
                domain: parse_domain(domain)?,
                vars: *vars,
                eqs: *eqs,
                max_k: *max_k,
                seeds: *seeds,
                algorithm: (*algo).into(),
                threads: *threads,
                timing,
            };
            let rows = cmd_bench(&suite)?;
            let mut text = format!("{BENCH_HEADER}\n");
            for r in rows {
                text.push_str(&r.csv());
                text.push('\n');
            }
            out.write_all(text.as_bytes()).map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "min2lin: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intro_pair() -> InstanceFile {
        serde_json::from_str(
            r#"{"domain": {"kind": "Z"}, "variables": ["x", "y", "z"],
                "equations": [{"u": "y", "v": "x", "a": 1, "b": -2, "c": 1, "w": 1},
                              {"u": "y", "v": "z", "a": 1, "b": -2, "c": 0, "w": 1}],
                "k": 1}"#,
        )
        .unwrap()
    }

    #[test]
    fn intro_pair_is_unsat_and_solvable() {
        let f = intro_pair();
        assert_eq!(cmd_check(&f, false).unwrap().status, "unsat");
        let r = cmd_solve(&f, &SolveFlags::default()).unwrap();
        assert_eq!((r.status.as_str(), r.weight), ("solved", Some(1)));
        let r = cmd_solve(&InstanceFile { k: 0, ..f }, &SolveFlags { mode: Mode::Decide, ..SolveFlags::default() });
        assert_eq!(r.unwrap().status, "infeasible");
    }

    #[test]
    fn unknown_fields_and_zero_weights_are_rejected() {
        let bad = r#"{"domain": {"kind": "Z"}, "variables": [], "equations": [], "k": 1, "extra": 0}"#;
        assert!(serde_json::from_str::<InstanceFile>(bad).is_err());
        let mut f = intro_pair();
        f.equations[0].w = 0;
        assert!(matches!(f.to_system(), Err(CliError::Input(_))));
        f.equations[0].w = 1;
        f.equations[0].u = Scalar::Text("w".into());
        assert!(matches!(f.to_system(), Err(CliError::Input(_))));
    }

    #[test]
    fn big_integers_become_strings() {
        assert_eq!(elem_to_json(&(1i64 << 53)), Value::from(1i64 << 53));
        assert_eq!(elem_to_json(&((1i64 << 53) + 1)), Value::String("9007199254740993".into()));
        assert_eq!(elem_to_json(&"3/2"), Value::String("3/2".into()));
    }

    #[test]
    fn generated_files_roundtrip() {
        let mut cfg = GeneratorConfig::new(DomainSpec::Rationals, 4, 6, 3);
        cfg.planted = Some(PlantedConfig { budget: 1 });
        let f = cmd_generate(&cfg, 1).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: InstanceFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(cmd_solve(&back, &SolveFlags::default()).unwrap().weight, Some(1));
    }

    #[test]
    fn seeds_only_permute_the_compression_order() {
        let f = intro_pair();
        for seed in 0..4 {
            let flags = SolveFlags { seed: Some(seed), timing: false, ..SolveFlags::default() };
            let r = cmd_solve(&f, &flags).unwrap();
            assert_eq!(r.weight, Some(1));
            assert_eq!(cmd_solve(&f, &flags).unwrap(), r);
        }
    }

    #[test]
    fn domains_parse() {
        assert_eq!(parse_domain("F7").unwrap(), DomainSpec::PrimeField(7));
        assert!(parse_domain("F8").is_err());
        assert!(parse_domain("R").is_err());
    }
}
