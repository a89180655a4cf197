//! Seeded property suite: every identity the library relies on, checked against an
//! independent computation on random instances.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::EnumCaps;
use crate::dpp::{partition_constrained_sum, z_forest, z_tree, ConstrainedDPP, Constraint};
use crate::error::Result;
use crate::graph::Graph;
use crate::io;
use crate::linalg::{Label, SymMatrix, WeightedPSD};
use crate::matroid::{find_witness, matroid_intersection, IndependenceOracle, LinearMatroid, PartitionMatroid};
use crate::mixed::{build_partition_instance, MDInstance};
use crate::random;
use crate::rational::{int, ratio, within_exp_band, Rational};
use crate::reductions::{
    apreduce_md_to_zf, apreduce_md_to_zt, build_md_gadget, check_forest_cases, count_pm_via_zt, zt_via_zf, Family,
    ReductionOutcome, SimulatedOracle,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub trials: usize,
    /// First failing trial, or the error that stopped the check.
    pub failure: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Instance sizes for the suite. `size` scales dense matrices and graphs; mixed
/// discriminant orders stay in `2..=min(size, 3)` so the gadget enumerations stay small.
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub size: usize,
    pub trials: usize,
}

impl SuiteConfig {
    pub fn new(seed: u64, size: usize) -> Self {
        SuiteConfig {
            seed,
            size: size.max(2),
            trials: 5,
        }
    }

    fn md_orders(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.size.min(3)
    }
}

type Check = fn(&SuiteConfig, &mut ChaCha8Rng) -> Result<std::result::Result<(), String>>;

const PROPERTIES: &[(&str, Check)] = &[
    ("principal minors are nonnegative", minors_nonnegative),
    ("det equals the product of LDL pivots", ldlt_determinant),
    ("char-poly coefficients are sums of principal minors", char_poly_sums),
    ("det(A+I) equals the sum of all principal minors", unconstrained_normalizer),
    ("Kirchhoff count equals spanning-tree enumeration", kirchhoff),
    ("pruned Z_T and Z_F equal plain enumeration", pruned_sums),
    ("mixed discriminant identities", md_identities),
    ("mixed discriminant is symmetric, multilinear, nonnegative", md_structure),
    ("partition encoding reproduces the mixed discriminant", partition_encoding),
    ("matching gadget Z_T counts perfect matchings", pm_reduction),
    ("interpolation through Z_F recovers Z_T", interpolation),
    ("gadget trees through E_r sum to the transversal sum", gadget_tree_sum),
    ("witness exists iff the mixed discriminant is nonzero", witness_iff_nonzero),
    ("matroid intersection agrees with exhaustive search", intersection_vs_exhaustive),
    ("Z_T reduction sandwich", tree_sandwich),
    ("Z_F reduction sandwich", forest_sandwich),
    ("forest monomials respect the three-case bounds", forest_cases),
    ("file formats round-trip", round_trips),
];

pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|(n, _)| *n).collect()
}

/// Runs every property; each gets its own generator derived from the seed.
pub fn run_suite(config: &SuiteConfig) -> Vec<PropertyOutcome> {
    PROPERTIES
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i as u64);
            let failure = match check(config, &mut rng) {
                Ok(Ok(())) => None,
                Ok(Err(msg)) => Some(msg),
                Err(e) => Some(format!("error: {e}")),
            };
            PropertyOutcome {
                name,
                trials: config.trials,
                failure,
            }
        })
        .collect()
}

fn labels(n: usize) -> Vec<Label> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect())
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).map(int).product()
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Ok(Err(format!($($fmt)+)));
        }
    };
}

fn pass() -> Result<std::result::Result<(), String>> {
    Ok(Ok(()))
}

fn random_matrix(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> WeightedPSD {
    let n = rng.gen_range(1..=(c.size + 2).min(10));
    let rank = rng.gen_range(1..=n);
    random::weighted(rng, labels(n), rank)
}

fn minors_nonnegative(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    for t in 0..c.trials {
        let a = random_matrix(c, rng);
        for s in subsets(a.dim()) {
            ensure!(!a.principal_minor_idx(&s).is_negative(), "trial {t}: negative minor on {s:?}");
        }
    }
    pass()
}

fn ldlt_determinant(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    for t in 0..c.trials {
        let a = random_matrix(c, rng);
        let f = a.base().ldlt()?;
        let product: Rational = f.d.iter().cloned().product();
        ensure!(product == a.base().det(), "trial {t}: Π d = {product}, det = {}", a.base().det());
    }
    pass()
}

fn char_poly_sums(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    for t in 0..c.trials {
        let a = random_matrix(c, rng);
        let n = a.dim();
        let mut sums = vec![Rational::zero(); n + 1];
        for s in subsets(n) {
            sums[s.len()] += a.base().restrict(&s).det();
        }
        ensure!(a.base().char_poly_coeffs()[..] == sums[1..], "trial {t}: coefficient mismatch");
    }
    pass()
}

fn unconstrained_normalizer(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    for t in 0..c.trials {
        let a = random_matrix(c, rng);
        let brute: Rational = subsets(a.dim()).map(|s| a.principal_minor_idx(&s)).sum();
        ensure!(brute == a.unconstrained_normalizer(), "trial {t}: {brute} vs {}", a.unconstrained_normalizer());
    }
    pass()
}

fn random_graph(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Graph {
    let n = rng.gen_range(2..=(c.size + 3).min(8));
    let extra = rng.gen_range(0..=n);
    random::connected_graph(rng, n, extra)
}

fn kirchhoff(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::default();
    for t in 0..c.trials {
        let g = random_graph(c, rng);
        let w: Vec<Rational> = (0..g.edge_count()).map(|_| ratio(rng.gen_range(1..5), rng.gen_range(1..4))).collect();
        let mut brute = Rational::zero();
        g.visit_spanning_trees(&caps, |tree| brute += tree.iter().map(|&e| w[e].clone()).product::<Rational>())?;
        let kirchhoff = g.count_spanning_trees(Some(&w))?;
        ensure!(brute == kirchhoff, "trial {t}: enumeration {brute}, Kirchhoff {kirchhoff}");
    }
    pass()
}

fn graph_matrix(g: &Graph, rng: &mut ChaCha8Rng) -> WeightedPSD {
    let rank = rng.gen_range(1..=g.edge_count().max(1));
    random::weighted(rng, g.edge_ids(), rank)
}

fn pruned_sums(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::default();
    for t in 0..c.trials {
        let g = random_graph(c, rng);
        let a = graph_matrix(&g, rng);
        for (constraint, fast) in [
            (Constraint::SpanningTree, z_tree(&a, &g, &caps)?),
            (Constraint::Forest, z_forest(&a, &g, &caps)?),
        ] {
            let dpp = ConstrainedDPP::new(a.clone(), Some(g.clone()), constraint.clone())?;
            let plain: Rational = dpp.support(&caps)?.into_iter().map(|(_, w)| w).sum();
            ensure!(plain == fast, "trial {t} {constraint:?}: plain {plain}, pruned {fast}");
        }
    }
    pass()
}

fn md_identities(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::default();
    for n in 1..=c.size.min(caps.max_md_order) {
        let id = SymMatrix::identity(labels(n))?;
        let d = MDInstance::new(vec![id; n])?.mixed_discriminant(&caps)?;
        ensure!(d == factorial(n), "D(I,...,I) = {d} at n = {n}");
        let k = random::gram(rng, labels(n), n);
        let d = MDInstance::new(vec![k.clone(); n])?.mixed_discriminant(&caps)?;
        ensure!(d == factorial(n) * k.det(), "D(K,...,K) = {d} at n = {n}");
    }
    pass()
}

fn md_structure(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::default();
    for t in 0..c.trials {
        let n = rng.gen_range(2..=c.size.min(4));
        let k = random::md_instance(rng, n);
        let d = k.mixed_discriminant(&caps)?;
        ensure!(!d.is_negative(), "trial {t}: D = {d} < 0");
        let mut swapped = k.matrices().to_vec();
        swapped.swap(0, n - 1);
        let ds = MDInstance::new(swapped)?.mixed_discriminant(&caps)?;
        ensure!(ds == d, "trial {t}: swapping arguments changed D");
        // additivity and homogeneity in the first argument
        let extra = random::gram(rng, labels(n), 1);
        let lambda = ratio(rng.gen_range(1..5), rng.gen_range(1..4));
        let combined: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| &lambda * k.matrices()[0].get(i, j) + extra.get(i, j))
                    .collect()
            })
            .collect();
        let mut with_sum = k.matrices().to_vec();
        with_sum[0] = SymMatrix::new(labels(n), combined)?;
        let mut with_extra = k.matrices().to_vec();
        with_extra[0] = extra;
        let lhs = MDInstance::new(with_sum)?.mixed_discriminant(&caps)?;
        let rhs = &lambda * &d + MDInstance::new(with_extra)?.mixed_discriminant(&caps)?;
        ensure!(lhs == rhs, "trial {t}: not multilinear ({lhs} vs {rhs})");
    }
    pass()
}

fn partition_encoding(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::default();
    for t in 0..c.trials {
        let n = rng.gen_range(c.md_orders());
        let k = random::md_instance(rng, n);
        let p = build_partition_instance(&k)?;
        let lhs = partition_constrained_sum(&p.matrix, &p.parts, &caps)?;
        let rhs = &p.scale * k.mixed_discriminant(&caps)?;
        ensure!(lhs == rhs, "trial {t}: transversal sum {lhs}, scale·D {rhs}");
    }
    pass()
}

fn pm_reduction(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::gadget();
    for t in 0..c.trials {
        let n = rng.gen_range(1..=c.size.min(4));
        let b = random::bipartite(rng, n, 0.6);
        let via = count_pm_via_zt(&b, &caps)?;
        let brute = b.count_perfect_matchings(&caps)?;
        ensure!(via == brute, "trial {t}: gadget {via}, brute force {brute}");
    }
    pass()
}

fn interpolation(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::default();
    for t in 0..c.trials {
        let g = random_graph(c, rng);
        let a = graph_matrix(&g, rng);
        let mut oracle = SimulatedOracle::exact(Family::Forest, caps);
        let via = zt_via_zf(&a, &g, &mut oracle)?;
        let direct = z_tree(&a, &g, &caps)?;
        ensure!(via == direct, "trial {t}: interpolated {via}, direct {direct}");
    }
    pass()
}

fn gadget_tree_sum(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::gadget();
    for t in 0..c.trials {
        let n = rng.gen_range(c.md_orders());
        let p = build_partition_instance(&random::md_instance(rng, n))?;
        let g = build_md_gadget(&p)?;
        let lhs = g.tree_sum_containing_right(&caps)?;
        let rhs = partition_constrained_sum(&p.matrix, &p.parts, &caps)?;
        ensure!(lhs == rhs, "trial {t}: tree sum {lhs}, transversal sum {rhs}");
    }
    pass()
}

fn witness_iff_nonzero(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::gadget();
    for t in 0..c.trials {
        let n = rng.gen_range(c.md_orders());
        let k = if t % 2 == 0 {
            random::zero_md_instance(rng, n)
        } else {
            random::md_instance(rng, n)
        };
        let d = k.mixed_discriminant(&caps)?;
        let g = build_md_gadget(&build_partition_instance(&k)?)?;
        match find_witness(&g)? {
            None => ensure!(d.is_zero(), "trial {t}: no witness but D = {d}"),
            Some(w) => {
                ensure!(!d.is_zero(), "trial {t}: witness found but D = 0");
                let pos: Vec<usize> = w.iter().filter_map(|id| g.graph.edge_position(id)).collect();
                ensure!(g.graph.is_spanning_tree(&pos), "trial {t}: witness is not a spanning tree");
                ensure!(g.right_edges.iter().all(|r| w.contains(r)), "trial {t}: witness misses E_r");
                ensure!(g.matrix.principal_minor(&w)?.is_positive(), "trial {t}: witness minor is zero");
            }
        }
    }
    pass()
}

/// Largest common independent set size by brute force.
fn exhaustive_best(m1: &dyn IndependenceOracle, m2: &dyn IndependenceOracle) -> usize {
    subsets(m1.ground().len())
        .filter(|s| m1.is_independent(s) && m2.is_independent(s))
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

fn intersection_vs_exhaustive(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    for t in 0..c.trials {
        let size = rng.gen_range(2..=(c.size + 5).min(10));
        let ground = labels(size);
        let rank = rng.gen_range(1..=size);
        let linear = LinearMatroid::new(WeightedPSD::unit(random::gram(rng, ground.clone(), rank))?);
        let k = rng.gen_range(1..=size);
        let mut parts: Vec<Vec<Label>> = vec![Vec::new(); k];
        for l in &ground {
            parts[rng.gen_range(0..k)].push(l.clone());
        }
        let caps: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=2)).collect();
        let partition = PartitionMatroid::new(ground.clone(), &parts, caps)?;
        let best = exhaustive_best(&linear, &partition);
        for target in 0..=size {
            let found = matroid_intersection(&linear, &partition, target)?;
            ensure!(found.is_some() == (target <= best), "trial {t}: target {target}, best {best}");
            if let Some(set) = found {
                let idx: Vec<usize> = set.iter().map(|l| ground.iter().position(|g| g == l).unwrap()).collect();
                ensure!(set.len() == target, "trial {t}: wrong size");
                ensure!(
                    linear.is_independent(&idx) && partition.is_independent(&idx),
                    "trial {t}: result not independent in both"
                );
            }
        }
    }
    pass()
}

fn sandwich(c: &SuiteConfig, rng: &mut ChaCha8Rng, family: Family) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::gadget();
    for t in 0..c.trials {
        let n = rng.gen_range(c.md_orders());
        let k = random::md_instance(rng, n);
        let eps = ratio(1, 1 << rng.gen_range(1..=3));
        let d = k.mixed_discriminant(&caps)?;
        let mut oracle = SimulatedOracle::exact(family, caps);
        let outcome = match family {
            Family::SpanningTree => apreduce_md_to_zt(&k, &eps, &mut oracle, &caps)?,
            Family::Forest => apreduce_md_to_zf(&k, &eps, &mut oracle, &caps)?,
        };
        ensure!(oracle.calls().len() <= 1, "trial {t}: more than one oracle call");
        match outcome {
            ReductionOutcome::Zero => ensure!(d.is_zero(), "trial {t}: declared zero but D = {d}"),
            ReductionOutcome::Estimate(r) => {
                ensure!(
                    r.estimate >= d && within_exp_band(&r.estimate, &d, &Rational::zero(), &(&eps / int(2))),
                    "trial {t}: estimate {} outside [D, e^(ε/2) D] for D = {d}",
                    r.estimate
                );
            }
        }
    }
    pass()
}

fn tree_sandwich(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    sandwich(c, rng, Family::SpanningTree)
}

fn forest_sandwich(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    sandwich(c, rng, Family::Forest)
}

fn forest_cases(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    let caps = EnumCaps::gadget();
    for t in 0..c.trials {
        let n = rng.gen_range(c.md_orders());
        let g = build_md_gadget(&build_partition_instance(&random::md_instance(rng, n))?)?;
        let Some(w) = find_witness(&g)? else { continue };
        let r = g.matrix.unconstrained_normalizer() / g.matrix.principal_minor(&w)?;
        let eps = ratio(1, 2);
        let y = &r * int(4) / &eps;
        let x = &r * crate::rational::pow(&y, 2 * g.m() - 2 * g.n()) * int(4) / &eps;
        ensure!(check_forest_cases(&g, &x, &y, &caps)?, "trial {t}: a forest monomial breaks its case bound");
    }
    pass()
}

fn round_trips(c: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<std::result::Result<(), String>> {
    for t in 0..c.trials {
        let a = random_matrix(c, rng);
        ensure!(io::read_matrix(&io::write_matrix(&a))? == a, "trial {t}: matrix");
        let g = random_graph(c, rng);
        ensure!(io::read_graph(&io::write_graph(&g))? == g, "trial {t}: graph");
        let b = random::bipartite(rng, c.size.min(4), 0.5);
        ensure!(io::read_bipartite(&io::write_bipartite(&b))? == b, "trial {t}: bipartite");
        let order = rng.gen_range(c.md_orders());
        let k = random::md_instance(rng, order);
        ensure!(io::read_md(&io::write_md(&k))? == k, "trial {t}: md instance");
        let bundle = io::Bundle {
            matrix: graph_matrix(&g, rng),
            graph: Some(g),
            constraint: Constraint::Forest,
        };
        let again = io::read_bundle(&io::write_bundle(&bundle))?;
        ensure!(
            again.matrix == bundle.matrix && again.graph == bundle.graph && again.constraint == bundle.constraint,
            "trial {t}: bundle"
        );
    }
    pass()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_is_deterministic() {
        let config = SuiteConfig::new(42, 3);
        let first = run_suite(&config);
        for p in &first {
            assert!(p.passed(), "{}: {:?}", p.name, p.failure);
        }
        assert_eq!(first, run_suite(&config));
        assert_eq!(first.len(), property_names().len());
    }
}
