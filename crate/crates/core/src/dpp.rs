//! Normalizing constants and exact sampling for constrained DPPs.
//!
//! The normalizers are computed by a depth-first walk over the ground set that carries the
//! Schur complement of the chosen indices. Each include step contributes one pivot, so the
//! minor of a leaf is the product of its pivots. A zero pivot means every superset has a
//! zero minor (the matrix is PSD), and the whole subtree is skipped. The plain route,
//! enumerating the family and taking one determinant per member, is [`ConstrainedDPP::support`].

use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::caps::EnumCaps;
use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::linalg::{Label, WeightedPSD};
use crate::rational::{pow, Rational};

/// The admissible family `C` of a constrained DPP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    SpanningTree,
    Forest,
    /// Exactly one label from each part.
    Partition(Vec<Vec<Label>>),
    Unconstrained,
}

/// `Σ_{S ∈ T(G)} det(A_S)`.
pub fn z_tree(a: &WeightedPSD, g: &Graph, caps: &EnumCaps) -> Result<Rational> {
    EnumCaps::check("vertex count", g.vertex_count(), caps.max_vertices)?;
    let items = edge_items(a, g)?;
    if !g.is_connected() {
        return Ok(Rational::zero());
    }
    let rule = TreeRule::new(g);
    Ok(pruned_sum(a, &items, rule))
}

/// `Σ_{S ∈ F(G)} det(A_S)`, including `det(A_∅) = 1`.
pub fn z_forest(a: &WeightedPSD, g: &Graph, caps: &EnumCaps) -> Result<Rational> {
    EnumCaps::check("edge count", g.edge_count(), caps.max_edges)?;
    let items = edge_items(a, g)?;
    let rule = ForestRule {
        graph: g,
        uf: UnionFind::new(g.vertex_count()),
    };
    Ok(pruned_sum(a, &items, rule))
}

/// Sum of principal minors over all transversals of `parts` (one label per part).
pub fn partition_constrained_sum(a: &WeightedPSD, parts: &[Vec<Label>], caps: &EnumCaps) -> Result<Rational> {
    let (items, part_of) = partition_items(a, parts)?;
    check_transversal_count(parts, caps)?;
    let rule = TransversalRule {
        part_of: Rc::new(part_of),
        used: vec![false; parts.len()],
    };
    Ok(pruned_sum(a, &items, rule))
}

/// Matrix index of each graph edge, in edge order.
fn edge_items(a: &WeightedPSD, g: &Graph) -> Result<Vec<usize>> {
    if a.dim() != g.edge_count() {
        return Err(Error::LabelMismatch(format!(
            "{} matrix labels, {} edges",
            a.dim(),
            g.edge_count()
        )));
    }
    g.edges()
        .iter()
        .map(|e| {
            a.index_of(&e.id)
                .ok_or_else(|| Error::LabelMismatch(format!("edge `{}` has no matrix row", e.id)))
        })
        .collect()
}

/// Items ordered part by part, with the part of each item.
fn partition_items(a: &WeightedPSD, parts: &[Vec<Label>]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut seen = vec![false; a.dim()];
    let mut items = Vec::with_capacity(a.dim());
    let mut part_of = Vec::with_capacity(a.dim());
    for (p, part) in parts.iter().enumerate() {
        for label in part {
            let i = a
                .index_of(label)
                .ok_or_else(|| Error::InvalidPartition(format!("unknown label `{label}`")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("label `{label}` appears twice")));
            }
            items.push(i);
            part_of.push(p);
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!(
            "label `{}` is in no part",
            a.labels()[i]
        )));
    }
    Ok((items, part_of))
}

fn check_transversal_count(parts: &[Vec<Label>], caps: &EnumCaps) -> Result<()> {
    let mut count: usize = 1;
    for p in parts {
        count = count.saturating_mul(p.len());
    }
    EnumCaps::check("transversal count", count, caps.max_subsets)
}

/// Admissibility rule for the depth-first walk over items `0..m`.
trait FamilyRule: Clone {
    fn can_include(&self, item: usize) -> bool;
    fn include(&mut self, item: usize);
    /// Whether some admissible set can still avoid `item` (decided after items `< item`).
    fn can_exclude(&self, item: usize) -> bool;
    fn accept(&self) -> bool;
}

#[derive(Clone)]
struct ForestRule<'g> {
    graph: &'g Graph,
    uf: UnionFind,
}

impl FamilyRule for ForestRule<'_> {
    fn can_include(&self, item: usize) -> bool {
        let e = &self.graph.edges()[item];
        self.uf.find(e.u) != self.uf.find(e.v)
    }
    fn include(&mut self, item: usize) {
        let e = &self.graph.edges()[item];
        self.uf.union(e.u, e.v);
    }
    fn can_exclude(&self, _item: usize) -> bool {
        true
    }
    fn accept(&self) -> bool {
        true
    }
}

#[derive(Clone)]
struct TreeRule<'g> {
    forest: ForestRule<'g>,
}

impl<'g> TreeRule<'g> {
    fn new(graph: &'g Graph) -> Self {
        TreeRule {
            forest: ForestRule {
                graph,
                uf: UnionFind::new(graph.vertex_count()),
            },
        }
    }
}

impl FamilyRule for TreeRule<'_> {
    fn can_include(&self, item: usize) -> bool {
        self.forest.can_include(item)
    }
    fn include(&mut self, item: usize) {
        self.forest.include(item)
    }
    fn can_exclude(&self, item: usize) -> bool {
        if self.forest.uf.count() <= 1 {
            return true;
        }
        let mut rest = self.forest.uf.clone();
        for e in &self.forest.graph.edges()[item + 1..] {
            rest.union(e.u, e.v);
        }
        rest.count() <= 1
    }
    fn accept(&self) -> bool {
        self.forest.uf.count() <= 1
    }
}

#[derive(Clone)]
struct TransversalRule {
    part_of: Rc<Vec<usize>>,
    used: Vec<bool>,
}

impl FamilyRule for TransversalRule {
    fn can_include(&self, item: usize) -> bool {
        !self.used[self.part_of[item]]
    }
    fn include(&mut self, item: usize) {
        self.used[self.part_of[item]] = true;
    }
    fn can_exclude(&self, item: usize) -> bool {
        let p = self.part_of[item];
        self.used[p] || self.part_of.get(item + 1) == Some(&p)
    }
    fn accept(&self) -> bool {
        self.used.iter().all(|&u| u)
    }
}

/// Schur complement of the base matrix restricted to items `offset..`.
struct Residual {
    offset: usize,
    data: Vec<Vec<Rational>>,
}

impl Residual {
    fn get(&self, a: usize, b: usize) -> &Rational {
        &self.data[a - self.offset][b - self.offset]
    }

    /// Eliminates pivot item `k`, or returns `None` if no later item couples to it.
    fn eliminate(&self, k: usize) -> Option<Residual> {
        let m = self.offset + self.data.len();
        if (k + 1..m).all(|a| self.get(a, k).is_zero()) {
            return None;
        }
        let pivot = self.get(k, k);
        let data = (k + 1..m)
            .map(|a| {
                let coupling = self.get(a, k);
                (k + 1..m)
                    .map(|b| {
                        let x = self.get(a, b);
                        if coupling.is_zero() || self.get(k, b).is_zero() {
                            x.clone()
                        } else {
                            x - coupling * self.get(k, b) / pivot
                        }
                    })
                    .collect()
            })
            .collect();
        Some(Residual { offset: k + 1, data })
    }
}

/// `Σ det(A_S)` over admissible `S`, walking items in order.
///
/// The walk runs on the base matrix and records how often each distinct weight was used, so
/// the (possibly huge) weights only enter once per exponent pattern at the end.
fn pruned_sum<R: FamilyRule>(a: &WeightedPSD, items: &[usize], rule: R) -> Rational {
    let base = a.base();
    let data = items
        .iter()
        .map(|&i| items.iter().map(|&j| base.get(i, j).clone()).collect())
        .collect();
    let mut classes: Vec<Rational> = Vec::new();
    let class_of: Vec<usize> = items
        .iter()
        .map(|&i| {
            let w = &a.weights()[i];
            classes.iter().position(|c| c == w).unwrap_or_else(|| {
                classes.push(w.clone());
                classes.len() - 1
            })
        })
        .collect();
    let residual = Rc::new(Residual { offset: 0, data });
    let mut walker = Walker {
        class_of: &class_of,
        exponents: vec![0; classes.len()],
        totals: HashMap::new(),
    };
    walker.walk(0, residual, rule, Rational::one());
    walker
        .totals
        .into_iter()
        .map(|(exps, coef)| {
            exps.iter()
                .zip(&classes)
                .fold(coef, |acc, (&e, w)| acc * pow(w, e as usize))
        })
        .sum()
}

struct Walker<'a> {
    class_of: &'a [usize],
    exponents: Vec<u32>,
    totals: HashMap<Vec<u32>, Rational>,
}

impl Walker<'_> {
    fn walk<R: FamilyRule>(&mut self, k: usize, residual: Rc<Residual>, rule: R, product: Rational) {
        if k == self.class_of.len() {
            if rule.accept() {
                *self.totals.entry(self.exponents.clone()).or_insert_with(Rational::zero) += product;
            }
            return;
        }
        let pivot = residual.get(k, k);
        if rule.can_include(k) && !pivot.is_zero() {
            let mut next_rule = rule.clone();
            next_rule.include(k);
            let next_product = &product * pivot;
            let next = match residual.eliminate(k) {
                Some(r) => Rc::new(r),
                None => Rc::clone(&residual),
            };
            self.exponents[self.class_of[k]] += 1;
            self.walk(k + 1, next, next_rule, next_product);
            self.exponents[self.class_of[k]] -= 1;
        }
        if rule.can_exclude(k) {
            self.walk(k + 1, residual, rule, product);
        }
    }
}

/// A DPP restricted to an admissible family.
#[derive(Clone, Debug)]
pub struct ConstrainedDPP {
    matrix: WeightedPSD,
    graph: Option<Graph>,
    constraint: Constraint,
}

impl ConstrainedDPP {
    pub fn new(matrix: WeightedPSD, graph: Option<Graph>, constraint: Constraint) -> Result<Self> {
        match (&constraint, &graph) {
            (Constraint::SpanningTree | Constraint::Forest, Some(g)) => {
                edge_items(&matrix, g)?;
            }
            (Constraint::SpanningTree | Constraint::Forest, None) => {
                return Err(Error::InvalidGraph("graph constraint without a graph".into()));
            }
            (Constraint::Partition(parts), _) => {
                partition_items(&matrix, parts)?;
            }
            (Constraint::Unconstrained, _) => {}
        }
        Ok(ConstrainedDPP {
            matrix,
            graph,
            constraint,
        })
    }

    pub fn matrix(&self) -> &WeightedPSD {
        &self.matrix
    }

    pub fn graph(&self) -> Option<&Graph> {
        self.graph.as_ref()
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    fn graph_or_err(&self) -> Result<&Graph> {
        self.graph
            .as_ref()
            .ok_or_else(|| Error::InvalidGraph("graph constraint without a graph".into()))
    }

    /// `Σ_{S ∈ C} det(A_S)`.
    pub fn normalizer(&self, caps: &EnumCaps) -> Result<Rational> {
        match &self.constraint {
            Constraint::SpanningTree => z_tree(&self.matrix, self.graph_or_err()?, caps),
            Constraint::Forest => z_forest(&self.matrix, self.graph_or_err()?, caps),
            Constraint::Partition(parts) => partition_constrained_sum(&self.matrix, parts, caps),
            Constraint::Unconstrained => Ok(self.matrix.unconstrained_normalizer()),
        }
    }

    /// Every member of the family with its principal minor, zero minors included, in the
    /// deterministic enumeration order.
    pub fn support(&self, caps: &EnumCaps) -> Result<Vec<(Vec<Label>, Rational)>> {
        let mut out = Vec::new();
        match &self.constraint {
            Constraint::SpanningTree | Constraint::Forest => {
                let g = self.graph_or_err()?;
                let items = edge_items(&self.matrix, g)?;
                let mut push = |set: &[usize]| {
                    let idx: Vec<usize> = set.iter().map(|&e| items[e]).collect();
                    out.push((g.labels_of(set), self.matrix.principal_minor_idx(&idx)));
                };
                if self.constraint == Constraint::SpanningTree {
                    g.visit_spanning_trees(caps, &mut push)?;
                } else {
                    g.visit_forests(caps, &mut push)?;
                }
            }
            Constraint::Partition(parts) => {
                check_transversal_count(parts, caps)?;
                for pick in transversals(parts) {
                    let minor = self.matrix.principal_minor(&pick)?;
                    out.push((pick, minor));
                }
            }
            Constraint::Unconstrained => {
                let m = self.matrix.dim();
                EnumCaps::check("subset count", 1usize.checked_shl(m as u32).unwrap_or(usize::MAX), caps.max_subsets)?;
                for mask in 0usize..(1 << m) {
                    let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
                    let labels = idx.iter().map(|&i| self.matrix.labels()[i].clone()).collect();
                    out.push((labels, self.matrix.principal_minor_idx(&idx)));
                }
            }
        }
        Ok(out)
    }

    /// `count` i.i.d. draws with `P(S) = det(A_S) / Z`, by inverse CDF over [`Self::support`].
    ///
    /// Each draw takes two 64-bit outputs of a ChaCha8 stream seeded with `seed`, read as a
    /// uniform rational `u / 2^128` in `[0, 1)`.
    pub fn sample_exact(&self, seed: u64, count: usize, caps: &EnumCaps) -> Result<Vec<Vec<Label>>> {
        let support = self.support(caps)?;
        let mut cumulative = Vec::with_capacity(support.len());
        let mut acc = Rational::zero();
        for (_, w) in &support {
            acc += w;
            cumulative.push(acc.clone());
        }
        let z = acc;
        if z.is_zero() {
            return Err(Error::EmptySupport);
        }
        let two_128 = Rational::from_integer(num_bigint::BigInt::one() << 128);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let hi = rng.next_u64() as u128;
            let lo = rng.next_u64() as u128;
            let u = Rational::from_integer(BigUint::from((hi << 64) | lo).into());
            let threshold = u * &z / &two_128;
            // First member whose cumulative weight exceeds the threshold; zero-weight members
            // never qualify.
            let pos = cumulative.partition_point(|c| *c <= threshold);
            out.push(support[pos].0.clone());
        }
        Ok(out)
    }
}

/// All picks of one label per part, in lexicographic order of positions.
pub fn transversals(parts: &[Vec<Label>]) -> Vec<Vec<Label>> {
    let mut out = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for prefix in &out {
            for label in part {
                let mut p: Vec<Label> = prefix.clone();
                p.push(label.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::rational::{int, ratio};
    use std::collections::HashMap;

    fn labels(v: &[&str]) -> Vec<Label> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn triangle() -> Graph {
        Graph::new(
            vec!["x", "y", "z"],
            vec![("a", "x", "y"), ("b", "y", "z"), ("c", "x", "z")],
        )
        .unwrap()
    }

    fn diag(ls: &[&str], d: &[i64]) -> WeightedPSD {
        let n = d.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { int(d[i]) } else { int(0) }).collect())
            .collect();
        WeightedPSD::unit(SymMatrix::new(labels(ls), rows).unwrap()).unwrap()
    }

    #[test]
    fn z_tree_examples() {
        let caps = EnumCaps::default();
        let id = diag(&["a", "b", "c"], &[1, 1, 1]);
        assert_eq!(z_tree(&id, &triangle(), &caps).unwrap(), int(3));

        let w = diag(&["a", "b", "c"], &[2, 3, 5]);
        let kirchhoff = triangle().count_spanning_trees(Some(&[int(2), int(3), int(5)])).unwrap();
        assert_eq!(z_tree(&w, &triangle(), &caps).unwrap(), kirchhoff);

        let path = Graph::new(vec!["x", "y", "z"], vec![("1", "x", "y"), ("2", "y", "z")]).unwrap();
        let ones = WeightedPSD::unit(SymMatrix::from_i64(&[&[1, 1], &[1, 1]]).unwrap()).unwrap();
        assert_eq!(z_tree(&ones, &path, &caps).unwrap(), int(0));
    }

    #[test]
    fn z_forest_examples() {
        let caps = EnumCaps::default();
        assert_eq!(z_forest(&diag(&["a", "b", "c"], &[1, 1, 1]), &triangle(), &caps).unwrap(), int(7));
        assert_eq!(z_forest(&diag(&["a", "b", "c"], &[2, 2, 2]), &triangle(), &caps).unwrap(), int(19));
        let lonely = Graph::new::<&str, &str>(vec!["x", "y"], vec![]).unwrap();
        let empty = WeightedPSD::unit(SymMatrix::from_rows(vec![]).unwrap()).unwrap();
        assert_eq!(z_forest(&empty, &lonely, &caps).unwrap(), int(1));
    }

    #[test]
    fn label_mismatch_is_an_error() {
        let caps = EnumCaps::default();
        let wrong = diag(&["a", "b", "q"], &[1, 1, 1]);
        assert!(matches!(z_tree(&wrong, &triangle(), &caps), Err(Error::LabelMismatch(_))));
        let short = diag(&["a", "b"], &[1, 1]);
        assert!(matches!(z_forest(&short, &triangle(), &caps), Err(Error::LabelMismatch(_))));
    }

    #[test]
    fn partition_examples() {
        let caps = EnumCaps::default();
        let id = diag(&["1", "2", "3", "4"], &[1, 1, 1, 1]);
        let parts = vec![labels(&["1", "2"]), labels(&["3", "4"])];
        assert_eq!(partition_constrained_sum(&id, &parts, &caps).unwrap(), int(4));

        let ones = WeightedPSD::unit(
            SymMatrix::from_i64(&[&[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]]).unwrap(),
        )
        .unwrap();
        assert_eq!(partition_constrained_sum(&ones, &parts, &caps).unwrap(), int(0));

        let overlapping = vec![labels(&["1", "2"]), labels(&["2", "3", "4"])];
        assert!(matches!(
            partition_constrained_sum(&id, &overlapping, &caps),
            Err(Error::InvalidPartition(_))
        ));
        let missing = vec![labels(&["1", "2"]), labels(&["3"])];
        assert!(partition_constrained_sum(&id, &missing, &caps).is_err());
    }

    #[test]
    fn pruned_sum_matches_plain_enumeration() {
        let caps = EnumCaps::default();
        // Gram of (1,0), (1,1), (0,2), (1,-1), (2,1) on a 4-cycle with a chord.
        let v = |a: i64, b: i64| vec![int(a), int(b)];
        let vectors = vec![v(1, 0), v(1, 1), v(0, 2), v(1, -1), v(2, 1)];
        let base = SymMatrix::gram(labels(&["a", "b", "c", "d", "e"]), &vectors).unwrap();
        let m = WeightedPSD::new(base, vec![int(1), ratio(1, 2), int(3), int(2), ratio(5, 3)]).unwrap();
        let g = Graph::new(
            vec!["p", "q", "r", "s"],
            vec![("a", "p", "q"), ("b", "q", "r"), ("c", "r", "s"), ("d", "s", "p"), ("e", "p", "r")],
        )
        .unwrap();
        for constraint in [Constraint::SpanningTree, Constraint::Forest] {
            let dpp = ConstrainedDPP::new(m.clone(), Some(g.clone()), constraint).unwrap();
            let plain: Rational = dpp.support(&caps).unwrap().into_iter().map(|(_, w)| w).sum();
            assert_eq!(dpp.normalizer(&caps).unwrap(), plain);
        }
    }

    #[test]
    fn unconstrained_support_sums_to_closed_form() {
        let caps = EnumCaps::default();
        let m = WeightedPSD::new(
            SymMatrix::from_i64(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]).unwrap(),
            vec![int(1), int(3), ratio(1, 2)],
        )
        .unwrap();
        let dpp = ConstrainedDPP::new(m.clone(), None, Constraint::Unconstrained).unwrap();
        let plain: Rational = dpp.support(&caps).unwrap().into_iter().map(|(_, w)| w).sum();
        assert_eq!(plain, m.unconstrained_normalizer());
    }

    #[test]
    fn sampler_is_deterministic_and_skips_zero_mass() {
        let caps = EnumCaps::default();
        let dpp = ConstrainedDPP::new(diag(&["a", "b", "c"], &[1, 1, 2]), Some(triangle()), Constraint::SpanningTree)
            .unwrap();
        let a = dpp.sample_exact(7, 200, &caps).unwrap();
        assert_eq!(a, dpp.sample_exact(7, 200, &caps).unwrap());
        assert_ne!(a, dpp.sample_exact(8, 200, &caps).unwrap());

        // path with a singular pair: one tree, zero mass
        let path = Graph::new(vec!["x", "y", "z"], vec![("1", "x", "y"), ("2", "y", "z")]).unwrap();
        let ones = WeightedPSD::unit(SymMatrix::from_i64(&[&[1, 1], &[1, 1]]).unwrap()).unwrap();
        let dead = ConstrainedDPP::new(ones, Some(path), Constraint::SpanningTree).unwrap();
        assert_eq!(dead.sample_exact(1, 1, &caps), Err(Error::EmptySupport));
    }

    #[test]
    fn sampler_frequencies_on_weighted_triangle() {
        let caps = EnumCaps::default();
        let dpp = ConstrainedDPP::new(diag(&["a", "b", "c"], &[1, 1, 2]), Some(triangle()), Constraint::SpanningTree)
            .unwrap();
        let draws = dpp.sample_exact(42, 5000, &caps).unwrap();
        let mut counts: HashMap<Vec<Label>, usize> = HashMap::new();
        for d in draws {
            *counts.entry(d).or_default() += 1;
        }
        let ab = counts[&labels(&["a", "b"])] as f64 / 5000.0;
        assert!((ab - 0.2).abs() < 0.03, "{ab}");
    }
}
