//! Acceptance criteria 1 to 8. Each test prints one `PASS` or `FAIL` line.

use std::collections::BTreeSet;
use std::time::Instant;

use min2lin::biased::{
    extremal_lp_optimum, lp_value_lower_bound_check, BiasedGraph, GainGraph, Graph, OracleGraph, Shift,
};
use min2lin::cuts::{multiway_cut, pair_partition_cut, partition_cut, CutInstance, FlowNetwork, PairCutRequest};
use min2lin::ibs::{brute_dominating_check, dominating_family, dominating_family_traced, rbgce_solve, state_invariants_hold};
use min2lin::oracle::{
    brute_bipartization, brute_important_separators, brute_min2lin, brute_multicut, brute_multiway_cut,
    brute_pair_partition_cut, gen_planted, gen_random, random_graph, reduce_bipartization, reduce_multicut,
    reduce_multiway_cut, GeneratorConfig, PlantedConfig,
};
use min2lin::ring::{DomainSpec, EuclideanDomain, Integers, PrimeField, Ratio, Rationals};
use min2lin::solver::{min2lin, min2lin_with, Algorithm, SolveOptions};
use min2lin::system::{compose_path, homogenize, is_flexible, solve, star, Forest, LinSystem};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: usize, name: &str, start: Instant, result: Result<String, String>) {
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(detail) => println!("criterion {n} ({name}): PASS in {secs:.1}s; {detail}"),
        Err(why) => {
            println!("criterion {n} ({name}): FAIL in {secs:.1}s; {why}");
            panic!("criterion {n} failed: {why}");
        }
    }
}

fn check(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn f5() -> PrimeField {
    PrimeField::new(5).unwrap()
}

/// A random simple graph on `2..=n_max` vertices with `1..=m_max` edges.
fn small_graph(rng: &mut ChaCha8Rng, n_max: usize, m_max: usize, w_max: u64) -> Graph {
    let n = rng.gen_range(2..=n_max);
    let m = rng.gen_range(1..=m_max);
    let mut g = Graph::new(n);
    let mut seen = BTreeSet::new();
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && seen.insert((u.min(v), u.max(v))) {
            g.add_edge(u, v, rng.gen_range(1..=w_max));
        }
    }
    g
}

fn f5_labels(g: &Graph, rng: &mut ChaCha8Rng) -> GainGraph<Ratio<PrimeField>> {
    let f = f5();
    let mut out = GainGraph::new(g.n);
    for (&(u, v), &w) in g.edges.iter().zip(&g.weights) {
        out.add_edge(u, v, w, Ratio::new(&f, rng.gen_range(1..5), 1));
    }
    out
}

#[test]
fn criterion_1_exact_values() {
    let start = Instant::now();
    let result = (|| {
        let mut s = LinSystem::new(Integers);
        let (x, y, z) = (s.add_var("x"), s.add_var("y"), s.add_var("z"));
        s.push_i64(y, x, 1, -2, 1, 1);
        s.push_i64(y, z, 1, -2, 0, 1);
        check(solve(&s).is_none(), || "y - 2x = 1, y - 2z = 0 reported consistent".into())?;
        let sol = min2lin(&s, 1).map_err(|e| e.to_string())?.ok_or("no solution at k = 1")?;
        check(sol.weight == 1, || format!("weight {} at k = 1", sol.weight))?;

        let mut p = LinSystem::new(Integers);
        let (x, y, z) = (p.add_var("x"), p.add_var("y"), p.add_var("z"));
        p.push_i64(x, z, 1, -2, 2, 1);
        p.push_i64(z, y, 1, -1, 1, 1);
        let e = compose_path(&p, &[0, 1]).map_err(|e| e.to_string())?;
        let got = (e.u, e.v, e.a.clone(), e.b.clone(), e.c.clone());
        let want = (x, y, BigInt::from(1), BigInt::from(-2), BigInt::from(4));
        check(got == want, || format!("composed path gave {got:?}"))?;

        let qr = Integers.divmod(&BigInt::from(9), &BigInt::from(4)).map_err(|e| e.to_string())?;
        check(qr == (BigInt::from(2), BigInt::from(1)), || format!("divmod(9, 4) = {qr:?}"))?;
        Ok("intro pair, composed path and divmod all exact".to_string())
    })();
    report(1, "exact values", start, result);
}

#[test]
fn criterion_2_dominating_families() {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut largest, mut runs, mut multi) = (0, 0, 0);
        for case in 0..200 {
            let k = rng.gen_range(0..=4);
            let (view, root): (Box<dyn BiasedGraph>, usize) = match case % 3 {
                0 => {
                    let g = small_graph(&mut rng, 8, 11, 2);
                    (Box::new(OracleGraph::even_cycles(g.clone())), rng.gen_range(0..g.n))
                }
                1 => {
                    let g = random_graph(rng.gen_range(4..=7), 0.45, 2, &mut rng);
                    (Box::new(f5_labels(&g, &mut rng)), rng.gen_range(0..g.n))
                }
                _ => {
                    let g = random_graph(rng.gen_range(3..=6), 0.5, 2, &mut rng);
                    let t = rng.gen_range(1..g.n);
                    (Box::new(f5_pendant_triangle(&g, t, rng.gen_range(1..=3))), 0)
                }
            };
            let fam = dominating_family(view.as_ref(), root, k);
            check(fam.members.len() <= 4usize.pow(k as u32), || {
                format!("case {case}: {} members exceed 4^{k}", fam.members.len())
            })?;
            check(fam.members.iter().all(|m| m.cost <= k), || format!("case {case}: member above budget {k}"))?;
            if let Some(h) = brute_dominating_check(view.as_ref(), root, k, &fam.members) {
                return Err(format!("case {case}: undominated subgraph on {:?}", h.vertices));
            }
            largest = largest.max(fam.members.len());
            multi += usize::from(fam.members.len() > 1);
            runs += 1;
        }
        Ok(format!("{runs} graphs, largest family {largest}, {multi} with several members"))
    })();
    report(2, "dominating families", start, result);
}

/// `g` with an unbalanced heavy triangle hanging from `t`; every other
/// cycle is balanced.
fn pendant_triangle(g: &Graph, t: usize, k: u64) -> GainGraph<Shift> {
    let mut out = GainGraph::new(g.n + 2);
    for (&(u, v), &w) in g.edges.iter().zip(&g.weights) {
        out.add_edge(u, v, w, Shift(0));
    }
    let (a, b) = (g.n, g.n + 1);
    out.add_edge(t, a, k + 1, Shift(1));
    out.add_edge(a, b, k + 1, Shift(0));
    out.add_edge(b, t, k + 1, Shift(0));
    out
}

/// The same construction with 𝔽_5 labels: 1 on `g`, 2 once on the triangle.
fn f5_pendant_triangle(g: &Graph, t: usize, w: u64) -> GainGraph<Ratio<PrimeField>> {
    let f = f5();
    let mut out = GainGraph::new(g.n + 2);
    for (&(u, v), &wt) in g.edges.iter().zip(&g.weights) {
        out.add_edge(u, v, wt, Ratio::one(&f));
    }
    let (a, b) = (g.n, g.n + 1);
    out.add_edge(t, a, w, Ratio::new(&f, 2, 1));
    out.add_edge(a, b, w, Ratio::one(&f));
    out.add_edge(b, t, w, Ratio::one(&f));
    out
}

#[test]
fn criterion_3_important_separators() {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut total = 0;
        for case in 0..50 {
            let g = random_graph(rng.gen_range(3..=8), 0.45, 2, &mut rng);
            let k = rng.gen_range(1..=4);
            let s = 0;
            let t = rng.gen_range(1..g.n);
            let fam = dominating_family(&pendant_triangle(&g, t, k), s, k);
            let got: BTreeSet<BTreeSet<usize>> = fam.members.iter().map(|m| m.deleted.clone()).collect();
            let want: BTreeSet<BTreeSet<usize>> = brute_important_separators(&g, s, t, k).into_iter().collect();
            check(got == want, || format!("case {case}: family {got:?} but important separators {want:?}"))?;
            total += want.len();
        }
        Ok(format!("50 graphs, {total} important separators matched"))
    })();
    report(3, "important separators", start, result);
}

fn agree_on<D: EuclideanDomain>(d: D, spec: DomainSpec, seed0: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed0);
    let mut nonzero = 0;
    for case in 0..100 {
        let mut cfg = GeneratorConfig::new(spec, rng.gen_range(3..=5), rng.gen_range(4..=8), seed0 * 1000 + case);
        cfg.weight_max = rng.gen_range(1..=2);
        let sys = gen_random(&d, &cfg);
        let k = rng.gen_range(0..=3);
        let fast = min2lin(&sys, k).map_err(|e| format!("{spec} case {case}: {e}"))?;
        let slow = brute_min2lin(&sys, k);
        if let Some(sol) = &fast {
            check(sol.weight <= k && sys.without(&sol.deleted).is_satisfied_by(&sol.assignment), || {
                format!("{spec} case {case}: returned set does not verify")
            })?;
        }
        let (a, b) = (fast.map(|s| s.weight), slow.map(|s| s.0));
        check(a == b, || format!("{spec} case {case}: solver {a:?}, brute force {b:?}"))?;
        nonzero += usize::from(matches!(a, Some(w) if w > 0));
    }
    Ok(nonzero)
}

#[test]
fn criterion_4_oracle_equivalence() {
    let start = Instant::now();
    let result = (|| {
        let counts = [
            agree_on(Integers, DomainSpec::Integers, 41)?,
            agree_on(Rationals, DomainSpec::Rationals, 42)?,
            agree_on(PrimeField::new(2).unwrap(), DomainSpec::PrimeField(2), 43)?,
            agree_on(PrimeField::new(3).unwrap(), DomainSpec::PrimeField(3), 44)?,
            agree_on(f5(), DomainSpec::PrimeField(5), 45)?,
        ];
        Ok(format!("500 instances agree; nonzero optima per domain Z/Q/F2/F3/F5: {counts:?}"))
    })();
    report(4, "oracle equivalence", start, result);
}

#[test]
fn criterion_5_reductions() {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for case in 0..30 {
            let g = small_graph(&mut rng, 6, 8, 1);
            let k = rng.gen_range(0..=3);
            let direct = brute_bipartization(&g, k).map(|r| r.0);
            let via = min2lin(&reduce_bipartization(&g), k).map_err(|e| e.to_string())?.map(|s| s.weight);
            check(direct == via, || format!("bipartization case {case}: {direct:?} vs {via:?}"))?;
        }
        for case in 0..30 {
            let g = small_graph(&mut rng, 6, 7, 2);
            let k = rng.gen_range(0..=3);
            let mut terminals: Vec<usize> = (0..g.n).filter(|_| rng.gen_bool(0.5)).collect();
            terminals.truncate(3);
            let direct = brute_multiway_cut(&g, &terminals, k).map(|r| r.0);
            let via = min2lin(&reduce_multiway_cut(&g, &terminals, k), k).map_err(|e| e.to_string())?.map(|s| s.weight);
            check(direct == via, || format!("multiway cut case {case}: {direct:?} vs {via:?}"))?;
        }
        for case in 0..30 {
            let g = small_graph(&mut rng, 5, 6, 1);
            let k = rng.gen_range(0..=2);
            let pairs: Vec<(usize, usize)> = (0..rng.gen_range(1..=2))
                .map(|_| (rng.gen_range(0..g.n), rng.gen_range(0..g.n)))
                .filter(|(s, t)| s != t)
                .collect();
            let direct = brute_multicut(&g, &pairs, k).map(|r| r.0);
            let via = min2lin(&reduce_multicut(&g, &pairs, k), k).map_err(|e| e.to_string())?.map(|s| s.weight);
            check(direct == via, || format!("multicut case {case}: {direct:?} vs {via:?}"))?;
        }
        Ok("30 instances each of bipartization, multiway cut and multicut".to_string())
    })();
    report(5, "reductions", start, result);
}

#[test]
fn criterion_6_cut_stack() {
    let start = Instant::now();
    let result = (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for case in 0..50 {
            let g = random_graph(rng.gen_range(2..=8), 0.4, 3, &mut rng);
            let k = rng.gen_range(0..=6);
            let (s, t) = (0, g.n - 1);
            let mut net = FlowNetwork::new(g.n);
            for (&(u, v), &w) in g.edges.iter().zip(&g.weights) {
                net.add_undirected(u, v, w);
            }
            let flow = net.max_flow(s, t);
            let cut = multiway_cut(&g, &[s, t], k).map(|c| g.weight_of(&c));
            let want = (flow <= k).then_some(flow);
            check(cut == want, || format!("two-terminal case {case}: cut {cut:?}, max flow {flow}"))?;
        }
        for case in 0..50 {
            let g = small_graph(&mut rng, 8, 10, 2);
            let k = rng.gen_range(0..=4);
            let mut vs: Vec<usize> = (0..g.n).collect();
            rand::seq::SliceRandom::shuffle(&mut vs[..], &mut rng);
            let blocks = rng.gen_range(1..=3).min(g.n);
            let partition: Vec<Vec<usize>> =
                (0..blocks).map(|b| vs.iter().skip(b).step_by(blocks + 1).copied().take(2).collect()).collect();
            let mut inst = CutInstance::new(g.clone(), partition.clone(), k).map_err(|e| e.to_string())?;
            let plain = pair_partition_cut(&inst).map(|c| g.weight_of(&c));
            let direct = partition_cut(&g, &partition, k).map(|c| g.weight_of(&c));
            check(plain == direct, || format!("empty request case {case}: {plain:?} vs {direct:?}"))?;
            let terminals: Vec<usize> = partition.iter().flatten().copied().collect();
            let requests = (0..rng.gen_range(1..=3))
                .map(|_| PairCutRequest {
                    s: terminals[rng.gen_range(0..terminals.len())],
                    u: rng.gen_range(0..g.n),
                    t: terminals[rng.gen_range(0..terminals.len())],
                    v: rng.gen_range(0..g.n),
                })
                .collect();
            inst = inst.with_requests(requests).map_err(|e| e.to_string())?;
            let fast = pair_partition_cut(&inst).map(|c| g.weight_of(&c));
            let slow = brute_pair_partition_cut(&inst).map(|r| r.0);
            check(fast == slow, || format!("pair request case {case}: {fast:?} vs brute force {slow:?}"))?;
        }
        Ok("50 max-flow checks, 50 partition checks, 50 pair request checks".to_string())
    })();
    report(6, "cut solver stack", start, result);
}

/// Random tree system over ℤ on `n` variables.
fn tree_system(rng: &mut ChaCha8Rng, n: usize) -> LinSystem<Integers> {
    let mut s = LinSystem::with_vars(Integers, n);
    let nz = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { rng.gen_range(1..=4) } else { -rng.gen_range(1..=4) };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let (a, b) = (nz(rng), nz(rng));
        s.push_i64(u, v, a, b, rng.gen_range(-6..=6), 1);
    }
    s
}

fn structural_suites() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases = 120;
    for case in 0..cases {
        // Homogenization round trip over ℚ.
        let mut cfg = GeneratorConfig::new(DomainSpec::Rationals, 5, rng.gen_range(1..=7), case);
        cfg.planted = Some(PlantedConfig { budget: 0 });
        let planted = gen_planted(&Rationals, &cfg);
        let (h, sub) = homogenize(&planted.system, &planted.assignment).map_err(|e| e.to_string())?;
        check(h.is_homogeneous(), || format!("homogenize case {case}: right-hand sides remain"))?;
        let cand: Vec<_> = (0..5).map(|_| Rationals.from_i64(rng.gen_range(-4..=4))).collect();
        let pulled = sub.pull_back(&Rationals, &cand);
        check(h.is_satisfied_by(&cand) == planted.system.is_satisfied_by(&pulled), || {
            format!("homogenize case {case}: substitution does not preserve solutions")
        })?;

        // Flexible consistency: a tree is consistent exactly when every
        // path implies a solvable equation.
        let tree = tree_system(&mut rng, 6);
        let forest = Forest::new(&tree);
        let paths_ok = (0..6).all(|x| (0..6).all(|y| forest.implied(&tree, x, y).is_some_and(|e| e.consistent)));
        check(is_flexible(&tree) && solve(&tree).is_some() == paths_ok, || {
            format!("flexible criterion case {case}")
        })?;

        // Star equivalence on a tree closed with implied equations.
        let mut closed = tree_system(&mut rng, 5);
        let forest = Forest::new(&closed);
        let (x, y) = (rng.gen_range(0..5), rng.gen_range(0..5));
        if x != y {
            let e = forest.implied(&closed, x, y).expect("tree is connected");
            if e.consistent {
                closed.push(x, y, e.a, e.b, e.c, 1);
            }
        }
        for x in 0..5 {
            let st = star(&closed, x).map_err(|e| format!("star case {case}: {e}"))?;
            if let Some(asg) = solve(&closed) {
                check(st.is_satisfied_by(&asg), || format!("star case {case}: star misses a solution"))?;
            }
            if let Some(asg) = solve(&st) {
                check(closed.is_satisfied_by(&asg), || format!("star case {case}: star adds a solution"))?;
            }
        }
    }
    Ok(format!("{cases} cases each of homogenization, flexible consistency and star equivalence"))
}

/// Three internally disjoint paths between two vertices.
fn theta(rng: &mut ChaCha8Rng) -> (Graph, [Vec<usize>; 3]) {
    let mut g = Graph::new(2);
    let mut paths: [Vec<usize>; 3] = Default::default();
    for (i, path) in paths.iter_mut().enumerate() {
        let len = if i == 0 { rng.gen_range(1..=3) } else { rng.gen_range(2..=3) };
        let mut at = 0;
        for step in 0..len {
            let next = if step + 1 == len { 1 } else { g.add_vertex() };
            path.push(g.add_edge(at, next, 1));
            at = next;
        }
    }
    (g, paths)
}

fn biased_suites() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let cases = 120;
    let mut states = 0;
    for case in 0..cases {
        // Theta property for both oracles.
        let (g, paths) = theta(&mut rng);
        let labelled = f5_labels(&g, &mut rng);
        let even = OracleGraph::even_cycles(g);
        for view in [&labelled as &dyn BiasedGraph, &even] {
            let balanced = [(0, 1), (0, 2), (1, 2)]
                .iter()
                .filter(|&&(i, j)| view.is_balanced(&[paths[i].clone(), paths[j].clone()].concat()))
                .count();
            check(balanced != 2, || format!("theta case {case}: exactly two balanced cycles"))?;
        }

        // Half-integral optimum shape and LP lower bound.
        let g = small_graph(&mut rng, 7, 10, 3);
        let view = f5_labels(&g, &mut rng);
        let lp = extremal_lp_optimum(&view, 0);
        check(lp_value_lower_bound_check(&view, 0, &lp), || format!("half-integral case {case}: bad shape"))?;
        let total: u64 = g.weights.iter().sum();
        let opt = rbgce_solve(&view, 0, total).ok_or("cleaning everything is always possible")?;
        check(lp.value2 <= 2 * g.weight_of(&opt), || format!("half-integral case {case}: LP above optimum"))?;

        // Branching-state invariants.
        let k = rng.gen_range(1..=4);
        let g = random_graph(rng.gen_range(3..=7), 0.45, 2, &mut rng);
        let view = f5_pendant_triangle(&g, rng.gen_range(1..g.n), rng.gen_range(1..=3));
        let mut ok = true;
        dominating_family_traced(&view, 0, k, &mut |st| {
            states += 1;
            ok &= state_invariants_hold(&view, 0, st);
        });
        check(ok, || format!("branching case {case}: invariant broken"))?;
    }
    Ok(format!("{cases} theta graphs, {cases} LP optima, {states} branching states"))
}

#[test]
fn criterion_7_structural_suites() {
    let start = Instant::now();
    let result = structural_suites().and_then(|a| biased_suites().map(|b| format!("{a}; {b}")));
    report(7, "structural suites", start, result);
}

fn bell(n: usize) -> f64 {
    // Bell triangle.
    let mut row = vec![1f64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            next.push(next.last().unwrap() + x);
        }
        row = next;
    }
    row[0]
}

#[test]
fn criterion_8_parameter_scaling() {
    let start = Instant::now();
    let result = (|| {
        let (n, m, seeds) = (6, 14, 6);
        let mut field_nodes = Vec::new();
        let mut lines = Vec::new();
        for k in 1..=5u64 {
            let mut nodes = 0usize;
            let mut max_alpha = 0usize;
            for seed in 0..seeds {
                let mut cfg = GeneratorConfig::new(DomainSpec::PrimeField(5), n, m, 100 * k + seed);
                cfg.planted = Some(PlantedConfig { budget: k as usize });
                let sys = gen_planted(&f5(), &cfg).system;
                let field = min2lin_with(&sys, k, &SolveOptions { algorithm: Algorithm::Field, threads: 1 })
                    .map_err(|e| e.to_string())?
                    .ok_or_else(|| format!("planted k = {k} seed {seed} not solved by the field algorithm"))?;
                let envelope = field.stats.compressions.max(1) as f64 * 4f64.powi(3 * k as i32 + 1) * bell(4 * k as usize);
                check((field.stats.nodes() as f64) <= envelope, || {
                    format!("k = {k}: {} nodes above envelope {envelope:e}", field.stats.nodes())
                })?;
                nodes += field.stats.nodes();
                let finite = min2lin_with(&sys, k, &SolveOptions { algorithm: Algorithm::Finite, threads: 1 })
                    .map_err(|e| e.to_string())?
                    .ok_or_else(|| format!("planted k = {k} seed {seed} not solved by the finite-field algorithm"))?;
                check(finite.weight == field.weight, || format!("k = {k}: the two algorithms disagree"))?;
                let cap = 5usize.pow(k as u32 + 1);
                check(finite.stats.max_alphas_per_step <= cap, || {
                    format!("k = {k}: {} assignments in one step, cap {cap}", finite.stats.max_alphas_per_step)
                })?;
                max_alpha = max_alpha.max(finite.stats.max_alphas_per_step);
            }
            lines.push(format!("k={k}: field nodes {nodes}, max alphas/step {max_alpha}"));
            field_nodes.push(nodes);
        }
        for l in &lines {
            println!("  {l}");
        }
        check(field_nodes.windows(2).all(|w| w[0] < w[1]), || format!("node counts do not grow: {field_nodes:?}"))?;
        Ok(format!("field node totals over k = 1..5: {field_nodes:?}"))
    })();
    report(8, "parameter scaling", start, result);
}
