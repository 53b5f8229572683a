#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use regen_core::Graph;

/// Random spanning tree on `n` nodes plus up to `extra` random chords.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && !edges.contains(&(a.min(b), a.max(b))) && !edges.contains(&(a.max(b), a.min(b))) {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::new(n, edges).expect("tree plus chords is connected")
}
