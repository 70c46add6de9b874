//! Min-2-Lin over the integers on a planted instance, checked against
//! exhaustive search.

use min2lin::oracle::{brute_min2lin, gen_planted, GeneratorConfig, PlantedConfig};
use min2lin::ring::{DomainSpec, Integers};
use min2lin::solver::min2lin;

fn main() {
    let mut cfg = GeneratorConfig::new(DomainSpec::Integers, 6, 12, 7);
    cfg.planted = Some(PlantedConfig { budget: 2 });
    let planted = gen_planted(&Integers, &cfg);
    let sys = &planted.system;
    for e in &sys.equations {
        println!("  #{:<2} {}·{} + {}·{} = {}", e.id, e.a, sys.names[e.u], e.b, sys.names[e.v], e.c);
    }
    let sol = min2lin(sys, 3).unwrap().expect("the planted set has weight 2");
    println!("deleted {:?} (weight {}), planted {:?}", sol.deleted, sol.weight, planted.deleted);
    println!("assignment {:?}", sol.assignment.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    println!("work: {} compressions, {} nodes", sol.stats.compressions, sol.stats.nodes());
    let (w, _) = brute_min2lin(sys, 3).unwrap();
    println!("exhaustive optimum {w}");
}
