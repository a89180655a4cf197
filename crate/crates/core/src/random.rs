//! Seeded random instances for property checks, the acceptance suite, and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{BipartiteGraph, Graph};
use crate::linalg::{Label, SymMatrix, WeightedPSD};
use crate::mixed::MDInstance;
use crate::rational::{int, ratio, Rational};

/// Gram matrix of `labels.len()` random integer vectors of length `rank`, entries in `-2..=2`.
pub fn gram<R: Rng>(rng: &mut R, labels: Vec<Label>, rank: usize) -> SymMatrix {
    let vectors: Vec<Vec<Rational>> = (0..labels.len())
        .map(|_| (0..rank).map(|_| int(rng.gen_range(-2..=2))).collect())
        .collect();
    SymMatrix::gram(labels, &vectors).expect("labels are distinct")
}

/// Random Gram base with random positive weights from a small set of rationals.
pub fn weighted<R: Rng>(rng: &mut R, labels: Vec<Label>, rank: usize) -> WeightedPSD {
    const WEIGHTS: [(i64, i64); 5] = [(1, 1), (2, 1), (1, 2), (3, 1), (2, 3)];
    let n = labels.len();
    let base = gram(rng, labels, rank);
    let weights = (0..n)
        .map(|_| {
            let (p, q) = WEIGHTS[rng.gen_range(0..WEIGHTS.len())];
            ratio(p, q)
        })
        .collect();
    WeightedPSD::new(base, weights).expect("Gram matrices are PSD")
}

/// Connected graph on `n` vertices: a random tree plus up to `extra` further edges.
pub fn connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Graph {
    let vertices: Vec<Label> = (0..n).map(|i| format!("v{i}")).collect();
    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    let mut missing: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|p| !pairs.contains(p))
        .collect();
    missing.shuffle(rng);
    pairs.extend(missing.into_iter().take(extra));
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| (format!("e{k}"), vertices[i].clone(), vertices[j].clone()))
        .collect();
    Graph::new(vertices, edges).expect("simple by construction")
}

/// Balanced bipartite graph with `n` vertices per side; each pair is an edge with
/// probability `p`.
pub fn bipartite<R: Rng>(rng: &mut R, n: usize, p: f64) -> BipartiteGraph {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    BipartiteGraph::from_pairs(n, &pairs).expect("balanced by construction")
}

fn order_labels(n: usize) -> Vec<Label> {
    (1..=n).map(|i| i.to_string()).collect()
}

/// `n` random PSD matrices of order `n`, each of random rank in `1..=n`.
pub fn md_instance<R: Rng>(rng: &mut R, n: usize) -> MDInstance {
    let matrices = (0..n)
        .map(|_| {
            let rank = rng.gen_range(1..=n);
            gram(rng, order_labels(n), rank)
        })
        .collect();
    MDInstance::new(matrices).expect("Gram matrices are PSD")
}

/// An instance with `D = 0` and a rank-deficient `K¹`.
///
/// Every matrix vanishes on the last coordinate, so `det(Σ x_i Kⁱ)` is identically zero.
/// With probability one half `K¹` is the zero matrix.
pub fn zero_md_instance<R: Rng>(rng: &mut R, n: usize) -> MDInstance {
    let labels = order_labels(n);
    let restricted = |rng: &mut R| {
        let vectors: Vec<Vec<Rational>> = (0..n)
            .map(|_| {
                let mut v: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-2..=2))).collect();
                v[n - 1] = int(0);
                v
            })
            .collect();
        let rows: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &vectors[k][i] * &vectors[k][j]).sum()).collect())
            .collect();
        SymMatrix::new(labels.clone(), rows).expect("symmetric")
    };
    let first = if rng.gen_bool(0.5) {
        SymMatrix::zeros(labels.clone()).expect("distinct labels")
    } else {
        restricted(rng)
    };
    let mut matrices = vec![first];
    matrices.extend((1..n).map(|_| restricted(rng)));
    MDInstance::new(matrices).expect("Gram matrices are PSD")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caps::EnumCaps;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_are_seeded() {
        let a = gram(&mut ChaCha8Rng::seed_from_u64(3), order_labels(3), 2);
        let b = gram(&mut ChaCha8Rng::seed_from_u64(3), order_labels(3), 2);
        assert_eq!(a, b);
        assert!(a.is_psd());
    }

    #[test]
    fn connected_graphs_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..8 {
            let g = connected_graph(&mut rng, n, 3);
            assert!(g.is_connected());
            assert!(g.edge_count() <= n - 1 + 3);
        }
    }

    #[test]
    fn zero_instances_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=3 {
            for _ in 0..10 {
                let k = zero_md_instance(&mut rng, n);
                assert!(k.mixed_discriminant(&EnumCaps::default()).unwrap().is_zero());
            }
        }
    }
}
