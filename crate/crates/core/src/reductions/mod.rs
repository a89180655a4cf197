//! The four reductions: perfect matchings to `Z_T`, `Z_T` to `Z_F` by interpolation, and the
//! approximation-preserving reductions from the mixed discriminant to `Z_T` and `Z_F`.

pub mod apreduce;
pub mod gadget;
pub mod interpolation;
pub mod oracle;

use num_traits::ToPrimitive;

use crate::caps::EnumCaps;
use crate::dpp::z_tree;
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

pub use apreduce::{
    apreduce_md_to_zf, apreduce_md_to_zt, check_forest_cases, classify_forest, BoundsCheck, ForestCase,
    ReductionOutcome, ReductionReport,
};
pub use gadget::{build_md_gadget, build_pm_gadget, reweight_rank_one, GadgetInstance, GadgetSource};
pub use interpolation::{lagrange_leading_coeff, zt_via_zf};
pub use oracle::{Direction, Family, NormalizerOracle, OracleCall, OracleSpec, SimulatedOracle};

/// Number of perfect matchings of `bip`, read off as `Z_T` of its gadget.
pub fn count_pm_via_zt(bip: &BipartiteGraph, caps: &EnumCaps) -> Result<u64> {
    let gadget = build_pm_gadget(bip)?;
    let z = z_tree(&gadget.matrix, &gadget.graph, caps)?;
    if !z.is_integer() {
        return Err(Error::MalformedGadget(format!("non-integral tree sum {z}")));
    }
    z.to_integer()
        .to_u64()
        .ok_or_else(|| Error::MalformedGadget(format!("tree sum {z} out of range")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpp::z_forest;
    use crate::rational::int;

    #[test]
    fn pm_counts_match_brute_force() {
        let caps = EnumCaps::gadget();
        assert_eq!(count_pm_via_zt(&BipartiteGraph::complete(2).unwrap(), &caps).unwrap(), 2);
        assert_eq!(count_pm_via_zt(&BipartiteGraph::complete(3).unwrap(), &caps).unwrap(), 6);
        let isolated = BipartiteGraph::from_pairs(2, &[(0, 0), (0, 1)]).unwrap();
        assert_eq!(count_pm_via_zt(&isolated, &caps).unwrap(), 0);
        let path = BipartiteGraph::from_pairs(3, &[(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]).unwrap();
        assert_eq!(
            count_pm_via_zt(&path, &caps).unwrap(),
            path.count_perfect_matchings(&caps).unwrap()
        );
    }

    #[test]
    fn positive_trees_of_pm_gadget_are_matchings() {
        let caps = EnumCaps::gadget();
        let bip = BipartiteGraph::complete(3).unwrap();
        let g = build_pm_gadget(&bip).unwrap();
        let items = g.matrix.base().indices_of(&g.graph.edge_ids()).unwrap();
        let mut positive = 0;
        g.graph
            .visit_spanning_trees(&caps, |t| {
                let idx: Vec<usize> = t.iter().map(|&e| items[e]).collect();
                if g.matrix.principal_minor_idx(&idx) > int(0) {
                    positive += 1;
                    let ids = g.graph.labels_of(t);
                    assert!(g.right_edges.iter().all(|r| ids.contains(r)));
                    // left edges "l:u{i}w{j}": one per u and one per w
                    let mut ws: Vec<&str> = ids
                        .iter()
                        .filter_map(|id| id.strip_prefix("l:"))
                        .map(|tag| &tag[tag.find('w').unwrap()..])
                        .collect();
                    ws.sort();
                    ws.dedup();
                    assert_eq!(ws.len(), 3);
                }
            })
            .unwrap();
        assert_eq!(positive, 6);
    }

    #[test]
    fn gadget_is_within_forest_reach() {
        let caps = EnumCaps::gadget();
        let g = build_pm_gadget(&BipartiteGraph::complete(2).unwrap()).unwrap();
        assert!(z_forest(&g.matrix, &g.graph, &caps).unwrap() >= int(2));
    }
}
