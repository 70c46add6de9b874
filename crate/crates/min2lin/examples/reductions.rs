//! Graph problems written as Min-2-Lin: odd cycle transversal over GF(2),
//! multiway cut over the rationals and multicut over the integers.

use min2lin::biased::Graph;
use min2lin::oracle::{
    brute_bipartization, brute_multicut, brute_multiway_cut, reduce_bipartization, reduce_multicut,
    reduce_multiway_cut,
};
use min2lin::solver::min2lin;

fn main() {
    // Two triangles sharing the vertex 2.
    let mut g = Graph::new(5);
    for (u, v) in [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)] {
        g.add_edge(u, v, 1);
    }
    let k = 3;
    let sys = reduce_bipartization(&g);
    let sol = min2lin(&sys, k).unwrap().unwrap();
    println!("bipartization: min2lin {} via {:?}, direct {:?}", sol.weight, sol.deleted, brute_bipartization(&g, k));

    let terminals = [0, 3];
    let sys = reduce_multiway_cut(&g, &terminals, k);
    let sol = min2lin(&sys, k).unwrap().unwrap();
    println!("multiway cut: min2lin {}, direct {:?}", sol.weight, brute_multiway_cut(&g, &terminals, k).map(|r| r.0));

    let pairs = [(0, 4), (1, 3)];
    let sys = reduce_multicut(&g, &pairs, k);
    let sol = min2lin(&sys, k).unwrap().unwrap();
    println!("multicut: min2lin {}, direct {:?}", sol.weight, brute_multicut(&g, &pairs, k).map(|r| r.0));
}
