//! Simple undirected graphs, exhaustive spanning-tree and forest enumeration, the weighted
//! matrix-tree theorem, and brute-force perfect matching counts.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};

use crate::caps::EnumCaps;
use crate::error::{Error, Result};
use crate::linalg::{det_bareiss, Label};
use crate::rational::Rational;

/// Sorted edge indices into [`Graph::edges`].
pub type EdgeSet = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: Label,
    pub u: usize,
    pub v: usize,
}

/// A simple undirected graph with stable edge ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<Label>,
    edges: Vec<Edge>,
    edge_index: HashMap<Label, usize>,
}

impl Graph {
    /// Builds a graph from vertex labels and `(edge id, endpoint, endpoint)` triples.
    pub fn new<V, E>(vertices: Vec<V>, edges: Vec<(E, V, V)>) -> Result<Self>
    where
        V: Into<Label>,
        E: Into<Label>,
    {
        let vertices: Vec<Label> = vertices.into_iter().map(Into::into).collect();
        let mut vindex = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vindex.insert(v.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        let mut out = Vec::with_capacity(edges.len());
        let mut edge_index = HashMap::new();
        let mut seen_pairs = HashSet::new();
        for (id, a, b) in edges {
            let (id, a, b): (Label, Label, Label) = (id.into(), a.into(), b.into());
            let lookup = |x: &Label| {
                vindex
                    .get(x)
                    .copied()
                    .ok_or_else(|| Error::InvalidGraph(format!("edge `{id}` has unknown endpoint `{x}`")))
            };
            let (u, v) = (lookup(&a)?, lookup(&b)?);
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop `{id}`")));
            }
            if !seen_pairs.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("parallel edge `{id}`")));
            }
            if edge_index.insert(id.clone(), out.len()).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge id `{id}`")));
            }
            out.push(Edge { id, u, v });
        }
        Ok(Graph {
            vertices,
            edges: out,
            edge_index,
        })
    }

    /// Cycle on `n` vertices `0..n` with edge ids `e0..`, edge `ei` joining `i` and `i+1`.
    pub fn cycle(n: usize) -> Result<Self> {
        let vs: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let es = (0..n)
            .map(|i| (format!("e{i}"), vs[i].clone(), vs[(i + 1) % n].clone()))
            .collect();
        Graph::new(vs, es)
    }

    pub fn path(n: usize) -> Result<Self> {
        let vs: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let es = (0..n.saturating_sub(1))
            .map(|i| (format!("e{i}"), vs[i].clone(), vs[i + 1].clone()))
            .collect();
        Graph::new(vs, es)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let vs: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let mut es = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                es.push((format!("e{i}_{j}"), vs[i].clone(), vs[j].clone()));
            }
        }
        Graph::new(vs, es)
    }

    pub fn vertices(&self) -> &[Label] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_ids(&self) -> Vec<Label> {
        self.edges.iter().map(|e| e.id.clone()).collect()
    }

    pub fn edge_position(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn labels_of(&self, set: &[usize]) -> Vec<Label> {
        set.iter().map(|&e| self.edges[e].id.clone()).collect()
    }

    /// Number of connected components of `(V, set)`.
    pub fn components(&self, set: &[usize]) -> usize {
        let mut uf = UnionFind::new(self.vertex_count());
        for &e in set {
            uf.union(self.edges[e].u, self.edges[e].v);
        }
        uf.count()
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.edge_count()).collect();
        self.components(&all) <= 1
    }

    pub fn is_forest(&self, set: &[usize]) -> bool {
        let mut uf = UnionFind::new(self.vertex_count());
        set.iter()
            .all(|&e| uf.union(self.edges[e].u, self.edges[e].v))
    }

    pub fn is_spanning_tree(&self, set: &[usize]) -> bool {
        set.len() + 1 == self.vertex_count().max(1) && self.is_forest(set)
    }

    /// Calls `visit` with every spanning tree, each exactly once.
    ///
    /// Deletion/contraction on the lowest undecided edge index: the contract branch comes
    /// first, and a deletion is only explored if the remaining graph stays connected.
    pub fn visit_spanning_trees<F: FnMut(&[usize])>(&self, caps: &EnumCaps, mut visit: F) -> Result<()> {
        EnumCaps::check("vertex count", self.vertex_count(), caps.max_vertices)?;
        if !self.is_connected() {
            return Ok(());
        }
        let target = self.vertex_count().saturating_sub(1);
        let mut chosen = Vec::with_capacity(target);
        self.trees_from(0, &UnionFind::new(self.vertex_count()), &mut chosen, target, &mut visit);
        Ok(())
    }

    fn trees_from<F: FnMut(&[usize])>(
        &self,
        k: usize,
        uf: &UnionFind,
        chosen: &mut Vec<usize>,
        target: usize,
        visit: &mut F,
    ) {
        if chosen.len() == target {
            visit(chosen);
            return;
        }
        if target - chosen.len() > self.edge_count() - k {
            return;
        }
        let e = &self.edges[k];
        if uf.find(e.u) != uf.find(e.v) {
            let mut contracted = uf.clone();
            contracted.union(e.u, e.v);
            chosen.push(k);
            self.trees_from(k + 1, &contracted, chosen, target, visit);
            chosen.pop();
        }
        let mut rest = uf.clone();
        for f in &self.edges[k + 1..] {
            rest.union(f.u, f.v);
        }
        if rest.count() == 1 {
            self.trees_from(k + 1, uf, chosen, target, visit);
        }
    }

    pub fn spanning_trees(&self, caps: &EnumCaps) -> Result<Vec<EdgeSet>> {
        let mut out = Vec::new();
        self.visit_spanning_trees(caps, |t| out.push(t.to_vec()))?;
        Ok(out)
    }

    /// Calls `visit` with every acyclic edge subset (including the empty set), each once.
    pub fn visit_forests<F: FnMut(&[usize])>(&self, caps: &EnumCaps, mut visit: F) -> Result<()> {
        EnumCaps::check("edge count", self.edge_count(), caps.max_edges)?;
        let mut chosen = Vec::new();
        self.forests_from(0, &UnionFind::new(self.vertex_count()), &mut chosen, &mut visit);
        Ok(())
    }

    fn forests_from<F: FnMut(&[usize])>(&self, k: usize, uf: &UnionFind, chosen: &mut Vec<usize>, visit: &mut F) {
        if k == self.edge_count() {
            visit(chosen);
            return;
        }
        let e = &self.edges[k];
        if uf.find(e.u) != uf.find(e.v) {
            let mut merged = uf.clone();
            merged.union(e.u, e.v);
            chosen.push(k);
            self.forests_from(k + 1, &merged, chosen, visit);
            chosen.pop();
        }
        self.forests_from(k + 1, uf, chosen, visit);
    }

    pub fn forests(&self, caps: &EnumCaps) -> Result<Vec<EdgeSet>> {
        let mut out = Vec::new();
        self.visit_forests(caps, |f| out.push(f.to_vec()))?;
        Ok(out)
    }

    /// Weighted matrix-tree theorem: the determinant of the reduced Laplacian.
    ///
    /// With `weights = None` every edge has weight one and the result counts spanning trees.
    pub fn count_spanning_trees(&self, weights: Option<&[Rational]>) -> Result<Rational> {
        let n = self.vertex_count();
        if let Some(w) = weights {
            if w.len() != self.edge_count() {
                return Err(Error::DimensionMismatch {
                    expected: self.edge_count(),
                    found: w.len(),
                });
            }
        }
        if n <= 1 {
            return Ok(Rational::one());
        }
        let mut lap = vec![vec![Rational::zero(); n]; n];
        for (k, e) in self.edges.iter().enumerate() {
            let w = weights.map_or_else(Rational::one, |w| w[k].clone());
            lap[e.u][e.u] += &w;
            lap[e.v][e.v] += &w;
            lap[e.u][e.v] -= &w;
            lap[e.v][e.u] -= &w;
        }
        lap.pop();
        for row in lap.iter_mut() {
            row.pop();
        }
        det_bareiss(&lap)
    }
}

/// Union-find over `0..n` with path halving; cheap to clone for backtracking.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            components: n,
        }
    }

    pub(crate) fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if they were already merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        self.components -= 1;
        true
    }

    pub(crate) fn count(&self) -> usize {
        self.components
    }
}

/// A bipartite graph `B = (U, W; F)` with `|U| = |W|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: Vec<Label>,
    right: Vec<Label>,
    /// `(i, j)` joins `left[i]` and `right[j]`; sorted, no duplicates.
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new<L: Into<Label>>(left: Vec<L>, right: Vec<L>, edges: Vec<(L, L)>) -> Result<Self> {
        let left: Vec<Label> = left.into_iter().map(Into::into).collect();
        let right: Vec<Label> = right.into_iter().map(Into::into).collect();
        if left.len() != right.len() {
            return Err(Error::InvalidGraph(format!(
                "unbalanced sides: {} left, {} right",
                left.len(),
                right.len()
            )));
        }
        let index = |side: &[Label], name: &str| -> Result<HashMap<Label, usize>> {
            let mut m = HashMap::new();
            for (i, v) in side.iter().enumerate() {
                if m.insert(v.clone(), i).is_some() {
                    return Err(Error::InvalidGraph(format!("duplicate {name} vertex `{v}`")));
                }
            }
            Ok(m)
        };
        let li = index(&left, "left")?;
        let ri = index(&right, "right")?;
        let mut out = Vec::new();
        for (a, b) in edges {
            let (a, b): (Label, Label) = (a.into(), b.into());
            let i = *li
                .get(&a)
                .ok_or_else(|| Error::InvalidGraph(format!("`{a}` is not a left vertex")))?;
            let j = *ri
                .get(&b)
                .ok_or_else(|| Error::InvalidGraph(format!("`{b}` is not a right vertex")))?;
            out.push((i, j));
        }
        out.sort_unstable();
        let before = out.len();
        out.dedup();
        if out.len() != before {
            return Err(Error::InvalidGraph("parallel bipartite edge".into()));
        }
        Ok(BipartiteGraph {
            left,
            right,
            edges: out,
        })
    }

    /// Builds `B` on `u1..un`, `w1..wn` from index pairs.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let left = (1..=n).map(|i| format!("u{i}")).collect();
        let right = (1..=n).map(|j| format!("w{j}")).collect();
        let edges = pairs
            .iter()
            .map(|&(i, j)| (format!("u{}", i + 1), format!("w{}", j + 1)))
            .collect();
        Self::new(left, right, edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        Self::from_pairs(n, &pairs)
    }

    pub fn side(&self) -> usize {
        self.left.len()
    }

    pub fn left(&self) -> &[Label] {
        &self.left
    }

    pub fn right(&self) -> &[Label] {
        &self.right
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i, j)).is_ok()
    }

    /// Brute-force count of bijections `U -> W` that use only edges of `F`.
    pub fn count_perfect_matchings(&self, caps: &EnumCaps) -> Result<u64> {
        let n = self.side();
        EnumCaps::check("bipartite side", n, caps.max_side)?;
        let mut adj = vec![vec![false; n]; n];
        for &(i, j) in &self.edges {
            adj[i][j] = true;
        }
        fn extend(row: usize, adj: &[Vec<bool>], used: &mut [bool]) -> u64 {
            if row == adj.len() {
                return 1;
            }
            let mut total = 0;
            for j in 0..adj.len() {
                if adj[row][j] && !used[j] {
                    used[j] = true;
                    total += extend(row + 1, adj, used);
                    used[j] = false;
                }
            }
            total
        }
        Ok(extend(0, &adj, &mut vec![false; n]))
    }
}
