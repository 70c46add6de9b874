//! Multiway cut, partition cut and pair partition cut on a small grid.

use min2lin::biased::Graph;
use min2lin::cuts::{multiway_cut, pair_partition_cut, partition_cut, CutInstance, PairCutRequest};

fn grid(w: usize, h: usize) -> Graph {
    let mut g = Graph::new(w * h);
    for y in 0..h {
        for x in 0..w {
            let v = y * w + x;
            if x + 1 < w {
                g.add_edge(v, v + 1, 1);
            }
            if y + 1 < h {
                g.add_edge(v, v + w, 1);
            }
        }
    }
    g
}

fn main() {
    let g = grid(3, 3);
    let corners = [0, 2, 6, 8];
    let cut = multiway_cut(&g, &corners, 8).unwrap();
    println!("separating the four corners costs {} edges: {cut:?}", cut.len());

    let partition = vec![vec![0, 8], vec![2, 6]];
    let cut = partition_cut(&g, &partition, 8).unwrap();
    println!("keeping opposite corners together costs {}", cut.len());

    let inst = CutInstance::new(g.clone(), partition, 8)
        .unwrap()
        .with_requests(vec![PairCutRequest { s: 0, u: 4, t: 2, v: 4 }])
        .unwrap();
    let cut = pair_partition_cut(&inst).unwrap();
    println!("also cutting the centre from 0 or from 2 costs {}: {cut:?}", cut.len());
}
