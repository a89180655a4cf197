use num_traits::{Signed, Zero};
use proptest::prelude::*;

use treedpp::dpp::{z_forest, z_tree, ConstrainedDPP, Constraint};
use treedpp::matroid::{matroid_intersection, IndependenceOracle, LinearMatroid, PartitionMatroid};
use treedpp::rational::{int, Rational};
use treedpp::{build_md_gadget, build_partition_instance, find_witness, EnumCaps, Graph, MDInstance, SymMatrix, WeightedPSD};

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn gram_from(labels: Vec<String>, vectors: &[Vec<i64>]) -> SymMatrix {
    let vs: Vec<Vec<Rational>> = vectors.iter().map(|v| v.iter().map(|&x| int(x)).collect()).collect();
    SymMatrix::gram(labels, &vs).unwrap()
}

/// `n` vectors of length `rank` with small integer entries.
fn vectors(n: std::ops::RangeInclusive<usize>, rank: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (n, rank).prop_flat_map(|(n, r)| prop::collection::vec(prop::collection::vec(-3i64..=3, r), n))
}

fn gram(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SymMatrix> {
    vectors(n, 1..=4).prop_map(|vs| gram_from(labels(vs.len()), &vs))
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Connected graph: a tree given by parent choices plus extra vertex pairs.
fn connected_graph() -> impl Strategy<Value = Graph> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (Just(n), parents, prop::collection::vec((0..n, 0..n), 0..=n))
        })
        .prop_map(|(n, parents, extra)| {
            let mut pairs: Vec<(usize, usize)> = parents.into_iter().enumerate().map(|(i, p)| (p, i + 1)).collect();
            for (a, b) in extra {
                let (a, b) = (a.min(b), a.max(b));
                if a != b && !pairs.contains(&(a, b)) {
                    pairs.push((a, b));
                }
            }
            let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let edges = pairs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| (format!("e{k}"), vertices[a].clone(), vertices[b].clone()))
                .collect();
            Graph::new(vertices, edges).unwrap()
        })
}

fn md_instance(n: usize) -> impl Strategy<Value = MDInstance> {
    prop::collection::vec(vectors(n..=n, 1..=n), n)
        .prop_map(move |ks| MDInstance::new(ks.iter().map(|vs| gram_from(labels(n), vs)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn principal_minors_of_gram_matrices_are_nonnegative(m in gram(1..=6)) {
        prop_assert!(m.is_psd());
        for s in subsets(m.dim()) {
            prop_assert!(!m.restrict(&s).det().is_negative());
        }
    }

    #[test]
    fn ldlt_pivots_multiply_to_the_determinant(m in gram(1..=6)) {
        let f = m.ldlt().unwrap();
        prop_assert_eq!(f.d.iter().cloned().product::<Rational>(), m.det());
        // a PSD matrix has rank equal to its largest k with e_k != 0
        let rank = m.char_poly_coeffs().iter().rposition(|e| !e.is_zero()).map_or(0, |k| k + 1);
        prop_assert_eq!(f.rank(), rank);
    }

    #[test]
    fn elementary_coefficients_are_minor_sums(m in gram(1..=6)) {
        let mut sums = vec![Rational::zero(); m.dim() + 1];
        for s in subsets(m.dim()) {
            sums[s.len()] += m.restrict(&s).det();
        }
        prop_assert_eq!(m.char_poly_coeffs(), sums[1..].to_vec());
    }

    #[test]
    fn unconstrained_normalizer_is_the_sum_of_minors(m in gram(0..=7), w in prop::collection::vec(1i64..=4, 7)) {
        let n = m.dim();
        let a = WeightedPSD::new(m, w[..n].iter().map(|&x| int(x)).collect()).unwrap();
        let brute: Rational = subsets(n).map(|s| a.principal_minor_idx(&s)).sum();
        prop_assert_eq!(brute, a.unconstrained_normalizer());
    }

    #[test]
    fn kirchhoff_matches_enumeration(g in connected_graph()) {
        let trees = g.spanning_trees(&EnumCaps::default()).unwrap();
        prop_assert_eq!(g.count_spanning_trees(None).unwrap(), int(trees.len() as i64));
        for t in &trees {
            prop_assert!(g.is_spanning_tree(t));
        }
    }

    #[test]
    fn pruned_normalizers_match_support_sums(g in connected_graph(), seed in vectors(12..=12, 1..=3)) {
        let caps = EnumCaps::default();
        let m = g.edge_count();
        let a = WeightedPSD::unit(gram_from(g.edge_ids(), &seed[..m])).unwrap();
        for (constraint, fast) in [
            (Constraint::SpanningTree, z_tree(&a, &g, &caps).unwrap()),
            (Constraint::Forest, z_forest(&a, &g, &caps).unwrap()),
        ] {
            let dpp = ConstrainedDPP::new(a.clone(), Some(g.clone()), constraint).unwrap();
            let plain: Rational = dpp.support(&caps).unwrap().into_iter().map(|(_, w)| w).sum();
            prop_assert_eq!(plain, fast);
        }
    }

    #[test]
    fn mixed_discriminant_is_symmetric_and_nonnegative(k in md_instance(3)) {
        let caps = EnumCaps::default();
        let d = k.mixed_discriminant(&caps).unwrap();
        prop_assert!(!d.is_negative());
        let permuted = MDInstance::new([2usize, 0, 1].iter().map(|&i| k.matrices()[i].clone()).collect()).unwrap();
        prop_assert_eq!(permuted.mixed_discriminant(&caps).unwrap(), d);
    }

    #[test]
    fn mixed_discriminant_is_additive_in_each_argument(k in md_instance(2), extra in vectors(2..=2, 1..=2), slot in 0usize..2) {
        let caps = EnumCaps::default();
        let e = gram_from(labels(2), &extra);
        let rows = (0..2)
            .map(|i| (0..2).map(|j| k.matrices()[slot].get(i, j) + e.get(i, j)).collect())
            .collect();
        let mut summed = k.matrices().to_vec();
        summed[slot] = SymMatrix::new(labels(2), rows).unwrap();
        let mut replaced = k.matrices().to_vec();
        replaced[slot] = e;
        let lhs = MDInstance::new(summed).unwrap().mixed_discriminant(&caps).unwrap();
        let rhs = k.mixed_discriminant(&caps).unwrap() + MDInstance::new(replaced).unwrap().mixed_discriminant(&caps).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witness_exists_iff_mixed_discriminant_is_positive(k in prop_oneof![md_instance(2), md_instance(3)]) {
        let d = k.mixed_discriminant(&EnumCaps::default()).unwrap();
        let g = build_md_gadget(&build_partition_instance(&k).unwrap()).unwrap();
        let w = find_witness(&g).unwrap();
        prop_assert_eq!(w.is_some(), d.is_positive());
    }

    #[test]
    fn intersection_matches_exhaustive_search(
        vs in vectors(2..=8, 1..=4),
        assignment in prop::collection::vec(0usize..4, 8),
        caps in prop::collection::vec(0usize..=2, 4),
    ) {
        let n = vs.len();
        let ground = labels(n);
        let linear = LinearMatroid::new(WeightedPSD::unit(gram_from(ground.clone(), &vs)).unwrap());
        let mut parts = vec![Vec::new(); 4];
        for (l, &p) in ground.iter().zip(&assignment) {
            parts[p].push(l.clone());
        }
        let partition = PartitionMatroid::new(ground.clone(), &parts, caps).unwrap();
        let best = subsets(n)
            .filter(|s| linear.is_independent(s) && partition.is_independent(s))
            .map(|s| s.len())
            .max()
            .unwrap();
        for target in 0..=n {
            let found = matroid_intersection(&linear, &partition, target).unwrap();
            prop_assert_eq!(found.is_some(), target <= best);
            if let Some(set) = found {
                let idx: Vec<usize> = set.iter().map(|l| ground.iter().position(|g| g == l).unwrap()).collect();
                prop_assert_eq!(idx.len(), target);
                prop_assert!(linear.is_independent(&idx) && partition.is_independent(&idx));
            }
        }
    }
}
