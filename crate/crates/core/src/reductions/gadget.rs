//! The two gadget graphs: a chain of blocks `v_i -> w_{i,·} -> v_{i+1}` whose left edges
//! carry a PSD block and whose right edges carry the identity.

use num_traits::{One, Signed, Zero};

use crate::caps::EnumCaps;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Graph};
use crate::linalg::{Label, SymMatrix, WeightedPSD};
use crate::mixed::PartitionInstance;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GadgetSource {
    Matching(BipartiteGraph),
    MixedDiscriminant(PartitionInstance),
}

/// A gadget graph `G` with its edge-indexed matrix `B`.
///
/// `|V| = n + m + 1` and `|E| = 2m`, where `n` is the number of parts and `m` the number of
/// left edges. `B` is block diagonal: some PSD block on the left edges, the identity on the
/// right edges, and nothing in between (weights may rescale either side).
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub graph: Graph,
    pub matrix: WeightedPSD,
    pub left_edges: Vec<Label>,
    pub right_edges: Vec<Label>,
    /// Left edges grouped by their chain vertex `v_i`.
    pub parts: Vec<Vec<Label>>,
    pub source: GadgetSource,
    pub scale: Rational,
}

impl GadgetInstance {
    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn m(&self) -> usize {
        self.left_edges.len()
    }

    /// Validates sizes, labels, and the identity/zero blocks of the base matrix.
    pub fn check_block_structure(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        let bad = |msg: String| Err(Error::MalformedGadget(msg));
        if self.right_edges.len() != m {
            return bad(format!("{} left edges but {} right edges", m, self.right_edges.len()));
        }
        if self.graph.vertex_count() != n + m + 1 || self.graph.edge_count() != 2 * m {
            return bad(format!(
                "expected |V| = {} and |E| = {}, found {} and {}",
                n + m + 1,
                2 * m,
                self.graph.vertex_count(),
                self.graph.edge_count()
            ));
        }
        if self.parts.iter().map(Vec::len).sum::<usize>() != m {
            return bad("parts do not cover the left edges".into());
        }
        let base = self.matrix.base();
        let left = base.indices_of(&self.left_edges)?;
        let right = base.indices_of(&self.right_edges)?;
        if base.dim() != 2 * m {
            return bad("matrix is not indexed by the edges".into());
        }
        for id in self.left_edges.iter().chain(&self.right_edges) {
            if self.graph.edge_position(id).is_none() {
                return bad(format!("`{id}` is not a graph edge"));
            }
        }
        for (a, &i) in right.iter().enumerate() {
            for (b, &j) in right.iter().enumerate() {
                let expect = if a == b { Rational::one() } else { Rational::zero() };
                if *base.get(i, j) != expect {
                    return bad("right block is not the identity".into());
                }
            }
            if left.iter().any(|&j| !base.get(i, j).is_zero()) {
                return bad("nonzero coupling between left and right edges".into());
            }
        }
        Ok(())
    }

    pub fn is_right_edge(&self, id: &str) -> bool {
        self.right_edges.iter().any(|r| r == id)
    }

    /// `Σ det(B_S)` over spanning trees `S ⊇ E_r`, by plain enumeration.
    pub fn tree_sum_containing_right(&self, caps: &EnumCaps) -> Result<Rational> {
        let right: Vec<usize> = self
            .right_edges
            .iter()
            .map(|id| self.graph.edge_position(id).expect("validated"))
            .collect();
        let items: Vec<usize> = self.matrix.base().indices_of(&self.graph.edge_ids())?;
        let mut total = Rational::zero();
        self.graph.visit_spanning_trees(caps, |t| {
            if right.iter().all(|r| t.binary_search(r).is_ok()) {
                let idx: Vec<usize> = t.iter().map(|&e| items[e]).collect();
                total += self.matrix.principal_minor_idx(&idx);
            }
        })?;
        Ok(total)
    }
}

fn left_id(tag: &str) -> Label {
    format!("l:{tag}")
}

fn right_id(tag: &str) -> Label {
    format!("r:{tag}")
}

/// Chain graph on `v1..v{n+1}` with one middle vertex per tag, tags grouped into parts.
fn chain_graph(parts: &[Vec<String>], chain: &str) -> Result<(Graph, Vec<Label>, Vec<Label>, Vec<Vec<Label>>)> {
    let n = parts.len();
    let mut vertices: Vec<Label> = (1..=n + 1).map(|i| format!("{chain}{i}")).collect();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut edge_parts = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let mut ep = Vec::with_capacity(part.len());
        for tag in part {
            let mid = format!("{chain}{}·{tag}", i + 1);
            vertices.push(mid.clone());
            let l = left_id(tag);
            edges.push((l.clone(), format!("{chain}{}", i + 1), mid));
            left.push(l.clone());
            ep.push(l);
        }
        edge_parts.push(ep);
    }
    for (i, part) in parts.iter().enumerate() {
        for tag in part {
            let mid = format!("{chain}{}·{tag}", i + 1);
            let r = right_id(tag);
            edges.push((r.clone(), mid, format!("{chain}{}", i + 2)));
            right.push(r);
        }
    }
    Ok((Graph::new(vertices, edges)?, left, right, edge_parts))
}

/// `[[A', 0], [0, I]]` on left edges then right edges.
fn block_matrix(left: &[Label], right: &[Label], a_prime: &[Vec<Rational>], left_weights: Vec<Rational>) -> Result<WeightedPSD> {
    let m = left.len();
    let mut rows = vec![vec![Rational::zero(); 2 * m]; 2 * m];
    for i in 0..m {
        for j in 0..m {
            rows[i][j] = a_prime[i][j].clone();
        }
        rows[m + i][m + i] = Rational::one();
    }
    let labels = left.iter().chain(right).cloned().collect();
    let mut weights = left_weights;
    weights.extend(std::iter::repeat(Rational::one()).take(m));
    WeightedPSD::new(SymMatrix::new(labels, rows)?, weights)
}

/// Perfect-matching gadget: `Z_T(B, G)` equals the number of perfect matchings of `bip`.
///
/// Middle vertex `u_i w_j` for each edge `(u_i, w_j)`; left edge `(u_i, u_i w_j)`, right edge
/// `(u_i w_j, u_{i+1})`. `A'` has a one exactly where two left edges share `w_j`.
pub fn build_pm_gadget(bip: &BipartiteGraph) -> Result<GadgetInstance> {
    let n = bip.side();
    let mut parts: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut right_of = Vec::new();
    for &(i, j) in bip.edges() {
        parts[i].push(format!("{}{}", bip.left()[i], bip.right()[j]));
        right_of.push(j);
    }
    let (graph, left, right, edge_parts) = chain_graph(&parts, "u")?;
    // edges are sorted by (i, j), which is also the part-by-part left edge order
    let m = left.len();
    let a_prime: Vec<Vec<Rational>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| if right_of[a] == right_of[b] { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let matrix = block_matrix(&left, &right, &a_prime, vec![Rational::one(); m])?;
    Ok(GadgetInstance {
        graph,
        matrix,
        left_edges: left,
        right_edges: right,
        parts: edge_parts,
        source: GadgetSource::Matching(bip.clone()),
        scale: Rational::one(),
    })
}

/// Mixed-discriminant gadget over a partition instance.
///
/// Left edge `(v_i, w_{i,j})` for every label `j` of part `P_i`, right edge
/// `(w_{i,j}, v_{i+1})`; `A'` copies the partition matrix entry for `(j1, j2)`, and left edges
/// inherit the instance weights.
pub fn build_md_gadget(p: &PartitionInstance) -> Result<GadgetInstance> {
    let a = &p.matrix;
    let (graph, left, right, edge_parts) = chain_graph(&p.parts, "v")?;
    let order: Vec<usize> = a.base().indices_of(&p.parts.concat())?;
    if order.len() != a.dim() {
        return Err(Error::InvalidPartition("parts do not cover the labels".into()));
    }
    let a_prime: Vec<Vec<Rational>> = order
        .iter()
        .map(|&i| order.iter().map(|&j| a.base().get(i, j).clone()).collect())
        .collect();
    let weights = order.iter().map(|&i| a.weights()[i].clone()).collect();
    let matrix = block_matrix(&left, &right, &a_prime, weights)?;
    Ok(GadgetInstance {
        graph,
        matrix,
        left_edges: left,
        right_edges: right,
        parts: edge_parts,
        source: GadgetSource::MixedDiscriminant(p.clone()),
        scale: p.scale.clone(),
    })
}

/// `B ∘ uuᵀ` with `u = left_factor` on left edges and `right_factor` on right edges.
///
/// A rank-one Hadamard product is the congruence `diag(u) B diag(u)`, so it only multiplies
/// the weights: by `left_factor²` on `E_ℓ` and `right_factor²` on `E_r`.
pub fn reweight_rank_one(inst: &GadgetInstance, left_factor: &Rational, right_factor: &Rational) -> Result<GadgetInstance> {
    for f in [left_factor, right_factor] {
        if !f.is_positive() {
            return Err(Error::NonPositiveFactor(f.to_string()));
        }
    }
    let (l2, r2) = (left_factor * left_factor, right_factor * right_factor);
    let factors: Vec<Rational> = inst
        .matrix
        .labels()
        .iter()
        .map(|id| if inst.is_right_edge(id) { r2.clone() } else { l2.clone() })
        .collect();
    Ok(GadgetInstance {
        matrix: inst.matrix.reweight(&factors)?,
        ..inst.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpp::{partition_constrained_sum, z_tree};
    use crate::graph::BipartiteGraph;
    use crate::mixed::{build_partition_instance, MDInstance};
    use crate::rational::int;

    fn id(n: usize) -> SymMatrix {
        SymMatrix::identity((1..=n).map(|i| i.to_string()).collect()).unwrap()
    }

    #[test]
    fn single_edge_pm_gadget_is_a_path() {
        let g = build_pm_gadget(&BipartiteGraph::from_pairs(1, &[(0, 0)]).unwrap()).unwrap();
        assert_eq!(g.graph.vertex_count(), 3);
        assert_eq!(g.graph.edge_count(), 2);
        assert_eq!(z_tree(&g.matrix, &g.graph, &EnumCaps::default()).unwrap(), int(1));
        g.check_block_structure().unwrap();
    }

    #[test]
    fn k22_pm_gadget_sizes() {
        let g = build_pm_gadget(&BipartiteGraph::complete(2).unwrap()).unwrap();
        assert_eq!(g.graph.vertex_count(), 7);
        assert_eq!(g.graph.edge_count(), 8);
        assert!(g.matrix.base().is_psd());
        assert_eq!(z_tree(&g.matrix, &g.graph, &EnumCaps::default()).unwrap(), int(2));
    }

    #[test]
    fn md_gadget_identity_instance() {
        let caps = EnumCaps::gadget();
        let p = build_partition_instance(&MDInstance::new(vec![id(2), id(2)]).unwrap()).unwrap();
        let g = build_md_gadget(&p).unwrap();
        assert_eq!(g.graph.vertex_count(), 7);
        assert_eq!(g.graph.edge_count(), 8);
        assert!(g.matrix.base().is_psd());
        g.check_block_structure().unwrap();
        assert_eq!(
            g.tree_sum_containing_right(&caps).unwrap(),
            partition_constrained_sum(&p.matrix, &p.parts, &caps).unwrap()
        );
    }

    #[test]
    fn md_gadget_zero_block() {
        let caps = EnumCaps::gadget();
        let zero = SymMatrix::zeros(vec!["1".into(), "2".into()]).unwrap();
        let p = build_partition_instance(&MDInstance::new(vec![zero, id(2)]).unwrap()).unwrap();
        let g = build_md_gadget(&p).unwrap();
        assert_eq!(g.tree_sum_containing_right(&caps).unwrap(), int(0));
    }

    #[test]
    fn reweighting_scales_minors() {
        let g = build_pm_gadget(&BipartiteGraph::complete(2).unwrap()).unwrap();
        let same = reweight_rank_one(&g, &int(1), &int(1)).unwrap();
        assert_eq!(same.matrix, g.matrix);
        let x = int(3);
        let heavy = reweight_rank_one(&g, &int(1), &x).unwrap();
        let right: Vec<&str> = g.right_edges.iter().map(String::as_str).collect();
        assert_eq!(heavy.matrix.principal_minor(&right).unwrap(), crate::rational::pow(&x, 8));
        assert!(reweight_rank_one(&g, &int(0), &int(1)).is_err());
        assert!(reweight_rank_one(&g, &int(1), &int(-2)).is_err());
    }

    #[test]
    fn malformed_gadget_is_detected() {
        let mut g = build_pm_gadget(&BipartiteGraph::complete(2).unwrap()).unwrap();
        g.right_edges.pop();
        assert!(matches!(g.check_block_structure(), Err(Error::MalformedGadget(_))));
    }
}
