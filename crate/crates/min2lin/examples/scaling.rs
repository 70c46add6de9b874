//! Work of the field and finite-field algorithms as the budget grows, in
//! the CSV format of `min2lin bench`.

use min2lin::cli::{cmd_bench, BenchSuite, BENCH_HEADER};
use min2lin::ring::DomainSpec;
use min2lin::solver::Algorithm;

fn main() {
    println!("{BENCH_HEADER}");
    for algorithm in [Algorithm::Field, Algorithm::Finite] {
        let suite = BenchSuite {
            domain: DomainSpec::PrimeField(3),
            vars: 6,
            eqs: 12,
            max_k: 4,
            seeds: 2,
            algorithm,
            threads: 1,
            timing: true,
        };
        for row in cmd_bench(&suite).unwrap() {
            println!("{}", row.csv());
        }
    }
}
