//! Important balanced subgraphs: a dominating family for a group-labelled
//! graph, and important separators recovered from a pendant triangle.

use min2lin::biased::{GainGraph, Graph, Shift};
use min2lin::ibs::{dominating_family, rbgce_solve};
use min2lin::oracle::brute_important_separators;
use min2lin::ring::{PrimeField, Ratio};

fn main() {
    // A square with labels multiplying to 2 around it, plus a chord.
    let f = PrimeField::new(5).unwrap();
    let mut g = GainGraph::new(5);
    for (u, v, w, l) in [(0, 1, 1, 1), (1, 2, 2, 2), (2, 3, 1, 1), (3, 0, 1, 1), (1, 3, 1, 1), (3, 4, 1, 3)] {
        g.add_edge(u, v, w, Ratio::new(&f, l, 1));
    }
    for k in 0..=3 {
        let fam = dominating_family(&g, 0, k);
        println!("k = {k}: {} members after {} branching nodes", fam.members.len(), fam.nodes);
        for m in &fam.members {
            println!("  vertices {:?}, cost {}, deleted {:?}", m.vertices, m.cost, m.deleted);
        }
    }
    println!("cheapest cleaning of the root's component: {:?}", rbgce_solve(&g, 0, 3));

    // s = 0 reaches t = 4 through 1 and then two parallel routes. The
    // triangle behind t is unbalanced and too heavy to cut, so every member
    // is an (s, t)-separator: {0-1} alone, or the two edges into t, which
    // cost more but leave more of the graph on the side of s.
    let mut plain = Graph::new(5);
    for (u, v) in [(0, 1), (1, 2), (1, 3), (2, 4), (3, 4)] {
        plain.add_edge(u, v, 1);
    }
    for k in 1..=2 {
        let mut biased = GainGraph::new(7);
        for &(u, v) in &plain.edges {
            biased.add_edge(u, v, 1, Shift(0));
        }
        biased.add_edge(4, 5, k + 1, Shift(1));
        biased.add_edge(5, 6, k + 1, Shift(0));
        biased.add_edge(6, 4, k + 1, Shift(0));
        let fam = dominating_family(&biased, 0, k);
        let from_family: Vec<_> = fam.members.iter().map(|m| m.deleted.clone()).collect();
        println!("k = {k}: separators from the family {from_family:?}");
        println!("       important separators      {:?}", brute_important_separators(&plain, 0, 4, k));
    }
}
