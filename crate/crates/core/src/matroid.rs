//! Independence oracles and unweighted two-matroid intersection.

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::linalg::{Label, WeightedPSD};
use crate::reductions::GadgetInstance;

/// A matroid given by its ground set and an independence predicate on index subsets.
pub trait IndependenceOracle {
    fn ground(&self) -> &[Label];
    /// `set` holds distinct indices into [`Self::ground`].
    fn is_independent(&self, set: &[usize]) -> bool;
}

/// `S` is independent iff its principal minor is positive, i.e. the Gram vectors of `S` are
/// linearly independent.
pub struct LinearMatroid {
    matrix: WeightedPSD,
    cache: RefCell<HashMap<Vec<usize>, bool>>,
}

impl LinearMatroid {
    pub fn new(matrix: WeightedPSD) -> Self {
        LinearMatroid {
            matrix,
            cache: RefCell::new(HashMap::new()),
        }
    }
}

impl IndependenceOracle for LinearMatroid {
    fn ground(&self) -> &[Label] {
        self.matrix.labels()
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        let mut key = set.to_vec();
        key.sort_unstable();
        if let Some(&hit) = self.cache.borrow().get(&key) {
            return hit;
        }
        let independent = self.matrix.principal_minor_idx(&key).is_positive();
        self.cache.borrow_mut().insert(key, independent);
        independent
    }
}

/// `S` is independent iff `|S ∩ P_i| <= cap_i` for every part. Labels in no part are free.
pub struct PartitionMatroid {
    ground: Vec<Label>,
    part_of: Vec<Option<usize>>,
    capacities: Vec<usize>,
}

impl PartitionMatroid {
    pub fn new(ground: Vec<Label>, parts: &[Vec<Label>], capacities: Vec<usize>) -> Result<Self> {
        if parts.len() != capacities.len() {
            return Err(Error::InvalidPartition(format!(
                "{} parts but {} capacities",
                parts.len(),
                capacities.len()
            )));
        }
        let index: HashMap<&str, usize> = ground.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let mut part_of = vec![None; ground.len()];
        for (p, part) in parts.iter().enumerate() {
            for label in part {
                let i = *index
                    .get(label.as_str())
                    .ok_or_else(|| Error::InvalidPartition(format!("unknown label `{label}`")))?;
                if part_of[i].replace(p).is_some() {
                    return Err(Error::InvalidPartition(format!("label `{label}` in two parts")));
                }
            }
        }
        Ok(PartitionMatroid {
            ground,
            part_of,
            capacities,
        })
    }

    /// Ground set is the concatenation of the parts.
    pub fn from_parts(parts: &[Vec<Label>], capacities: Vec<usize>) -> Result<Self> {
        let ground = parts.iter().flatten().cloned().collect();
        Self::new(ground, parts, capacities)
    }
}

impl IndependenceOracle for PartitionMatroid {
    fn ground(&self) -> &[Label] {
        &self.ground
    }

    fn is_independent(&self, set: &[usize]) -> bool {
        let mut used = vec![0usize; self.capacities.len()];
        for &i in set {
            if let Some(p) = self.part_of[i] {
                used[p] += 1;
                if used[p] > self.capacities[p] {
                    return false;
                }
            }
        }
        true
    }
}

/// Every subset is independent.
pub struct FreeMatroid {
    ground: Vec<Label>,
}

impl FreeMatroid {
    pub fn new(ground: Vec<Label>) -> Self {
        FreeMatroid { ground }
    }
}

impl IndependenceOracle for FreeMatroid {
    fn ground(&self) -> &[Label] {
        &self.ground
    }

    fn is_independent(&self, _set: &[usize]) -> bool {
        true
    }
}

/// A common independent set of exactly `target` elements, if one exists.
///
/// Cardinality augmenting paths: each phase builds the exchange graph of the current set
/// `I` and augments along a shortest path from `{x : I+x ∈ M1}` to `{x : I+x ∈ M2}`,
/// found by breadth-first search. Elements are visited in lexicographic label order, so
/// ties resolve to the smallest labels. Returned labels are sorted.
pub fn matroid_intersection(
    m1: &dyn IndependenceOracle,
    m2: &dyn IndependenceOracle,
    target: usize,
) -> Result<Option<Vec<Label>>> {
    let ground = m1.ground();
    let n = ground.len();
    let m2_index: HashMap<&str, usize> = m2.ground().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if m2.ground().len() != n {
        return Err(Error::MalformedOracle("ground sets differ".into()));
    }
    let to_m2: Vec<usize> = ground
        .iter()
        .map(|l| {
            m2_index
                .get(l.as_str())
                .copied()
                .ok_or_else(|| Error::MalformedOracle(format!("`{l}` missing from second ground set")))
        })
        .collect::<Result<_>>()?;
    if !m1.is_independent(&[]) || !m2.is_independent(&[]) {
        return Err(Error::MalformedOracle("empty set is not independent".into()));
    }
    if target > n {
        return Ok(None);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ground[a].cmp(&ground[b]));

    let indep1 = |s: &[usize]| m1.is_independent(s);
    let indep2 = |s: &[usize]| {
        let mapped: Vec<usize> = s.iter().map(|&i| to_m2[i]).collect();
        m2.is_independent(&mapped)
    };

    let mut in_set = vec![false; n];
    let mut size = 0;
    while size < target {
        let current: Vec<usize> = order.iter().copied().filter(|&i| in_set[i]).collect();
        let with = |x: usize| {
            let mut s = current.clone();
            s.push(x);
            s
        };
        let swap = |y: usize, x: usize| {
            let mut s: Vec<usize> = current.iter().copied().filter(|&i| i != y).collect();
            s.push(x);
            s
        };
        let outside: Vec<usize> = order.iter().copied().filter(|&i| !in_set[i]).collect();
        let sinks: Vec<bool> = {
            let mut v = vec![false; n];
            for &x in &outside {
                v[x] = indep2(&with(x));
            }
            v
        };

        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut visited = vec![false; n];
        let mut queue = VecDeque::new();
        for &x in &outside {
            if indep1(&with(x)) {
                visited[x] = true;
                queue.push_back(x);
            }
        }
        let mut end = None;
        while let Some(node) = queue.pop_front() {
            if !in_set[node] && sinks[node] {
                end = Some(node);
                break;
            }
            if in_set[node] {
                // y -> x when I - y + x is independent in M1
                for &x in &outside {
                    if !visited[x] && indep1(&swap(node, x)) {
                        visited[x] = true;
                        parent[x] = Some(node);
                        queue.push_back(x);
                    }
                }
            } else {
                // x -> y when I - y + x is independent in M2
                for &y in &current {
                    if !visited[y] && indep2(&swap(y, node)) {
                        visited[y] = true;
                        parent[y] = Some(node);
                        queue.push_back(y);
                    }
                }
            }
        }
        let Some(mut node) = end else {
            return Ok(None);
        };
        loop {
            in_set[node] = !in_set[node];
            match parent[node] {
                Some(p) => node = p,
                None => break,
            }
        }
        size += 1;
    }

    let mut out: Vec<Label> = (0..n).filter(|&i| in_set[i]).map(|i| ground[i].clone()).collect();
    out.sort();
    Ok(Some(out))
}

/// A spanning tree `S̃ ⊇ E_r` of the gadget graph with `det(B_S̃) > 0`, if one exists.
///
/// `B` is the identity on `E_r` with no coupling to `E_ℓ`, so contracting `E_r` leaves the
/// linear matroid of `B` restricted to `E_ℓ`. Spanning trees containing `E_r` are exactly the
/// sets with one `E_ℓ` edge per part, which is a partition matroid with unit capacities.
/// The returned edge ids are in graph edge order.
pub fn find_witness(gadget: &GadgetInstance) -> Result<Option<Vec<Label>>> {
    gadget.check_block_structure()?;
    let b = &gadget.matrix;
    let left_idx: Vec<usize> = b.base().indices_of(&gadget.left_edges)?;
    let linear = LinearMatroid::new(b.restrict(&left_idx));
    let partition = PartitionMatroid::new(
        gadget.left_edges.clone(),
        &gadget.parts,
        vec![1; gadget.parts.len()],
    )?;
    let Some(chosen) = matroid_intersection(&linear, &partition, gadget.parts.len())? else {
        return Ok(None);
    };
    let mut witness: Vec<Label> = chosen;
    witness.extend(gadget.right_edges.iter().cloned());
    let mut positions: Vec<usize> = witness
        .iter()
        .map(|id| {
            gadget
                .graph
                .edge_position(id)
                .ok_or_else(|| Error::MalformedGadget(format!("`{id}` is not a graph edge")))
        })
        .collect::<Result<_>>()?;
    positions.sort_unstable();
    if !gadget.graph.is_spanning_tree(&positions) {
        return Err(Error::MalformedGadget("witness is not a spanning tree".into()));
    }
    let witness = gadget.graph.labels_of(&positions);
    if !b.principal_minor(&witness)?.is_positive() {
        return Err(Error::MalformedGadget("witness has zero minor".into()));
    }
    Ok(Some(witness))
}
