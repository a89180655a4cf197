pub mod caps;
pub mod dpp;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod matroid;
pub mod mixed;
pub mod random;
pub mod rational;
pub mod reductions;
pub mod verify;

pub use caps::EnumCaps;
pub use dpp::{partition_constrained_sum, z_forest, z_tree, ConstrainedDPP, Constraint};
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, EdgeSet, Graph};
pub use linalg::{det_bareiss, Label, Ldlt, SymMatrix, WeightedPSD};
pub use rational::Rational;
pub use matroid::{find_witness, matroid_intersection, FreeMatroid, IndependenceOracle, LinearMatroid, PartitionMatroid};
pub use mixed::{build_partition_instance, MDInstance, PartitionInstance};
pub use reductions::{
    apreduce_md_to_zf, apreduce_md_to_zt, build_md_gadget, build_pm_gadget, count_pm_via_zt, lagrange_leading_coeff,
    reweight_rank_one, zt_via_zf, GadgetInstance, NormalizerOracle, OracleSpec, ReductionOutcome, SimulatedOracle,
};
