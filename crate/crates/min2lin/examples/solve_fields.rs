//! The field and finite-field pipelines on the same kind of instance, and
//! how each algorithm is matched to a domain.

use min2lin::oracle::{gen_planted, GeneratorConfig, PlantedConfig};
use min2lin::ring::{DomainSpec, EuclideanDomain, PrimeField, Rationals};
use min2lin::solver::{min2lin_with, Algorithm, SolveOptions};
use min2lin::system::LinSystem;

fn run<D: EuclideanDomain>(sys: &LinSystem<D>, k: u64, algorithm: Algorithm) {
    let opts = SolveOptions { algorithm, threads: 2 };
    match min2lin_with(sys, k, &opts) {
        Ok(Some(sol)) => println!(
            "{} via {algorithm}: weight {}, {} nodes, {} assignments enumerated",
            sys.domain, sol.weight, sol.stats.nodes(), sol.stats.alphas
        ),
        Ok(None) => println!("{} via {algorithm}: nothing within {k}", sys.domain),
        Err(e) => println!("{} via {algorithm}: {e}", sys.domain),
    }
}

fn main() {
    let mut cfg = GeneratorConfig::new(DomainSpec::Rationals, 6, 11, 3);
    cfg.planted = Some(PlantedConfig { budget: 2 });
    let q = gen_planted(&Rationals, &cfg).system;
    run(&q, 2, Algorithm::Field);
    run(&q, 2, Algorithm::Ed);
    run(&q, 2, Algorithm::Finite);

    let f5 = PrimeField::new(5).unwrap();
    cfg.domain = DomainSpec::PrimeField(5);
    let f = gen_planted(&f5, &cfg).system;
    for algorithm in [Algorithm::Finite, Algorithm::Field, Algorithm::Ed] {
        run(&f, 2, algorithm);
    }
}
