#![allow(dead_code)]

use pugraph::{path_graph, EdgePair, PseudoGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn weight<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.5..2.0)
}

pub fn positive_path<R: Rng>(rng: &mut R, n: usize) -> PseudoGraph {
    let f: Vec<f64> = (1..n).map(|_| weight(rng)).collect();
    let r: Vec<f64> = (1..n).map(|_| weight(rng)).collect();
    path_graph(n, &f, &r).unwrap()
}

/// Random spanning tree plus up to `n` chords, positive weights.
pub fn positive_graph<R: Rng>(rng: &mut R, n: usize) -> PseudoGraph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        pairs.push((parent, order[k]));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b && !pairs.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
            pairs.push((a, b));
        }
    }
    let pairs = pairs
        .into_iter()
        .map(|(a, b)| EdgePair { a, b, w_ab: weight(rng), w_ba: weight(rng) })
        .collect();
    PseudoGraph::new(n, pairs).unwrap()
}
