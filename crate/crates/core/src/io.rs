//! JSON file formats. Rationals travel as `"p/q"` or integer strings, so every format
//! round-trips bit-exactly.

use serde::{Deserialize, Serialize};

use crate::dpp::Constraint;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Graph};
use crate::linalg::{Label, SymMatrix, WeightedPSD};
use crate::mixed::MDInstance;
use crate::rational::{self, Rational};
use crate::reductions::{BoundsCheck, ReductionOutcome, ReductionReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
    pub rows: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<Label>,
    pub edges: Vec<(Label, Label, Label)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteFile {
    pub left: Vec<Label>,
    pub right: Vec<Label>,
    pub edges: Vec<(Label, Label)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphFile>,
    pub matrix: MatrixFile,
    /// Overrides `matrix.weights` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(default = "default_constraint")]
    pub constraint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<Vec<Label>>>,
}

fn default_constraint() -> String {
    "none".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdFile {
    pub matrices: Vec<MatrixFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsFile {
    pub reference: String,
    pub sigma: String,
    pub lower: String,
    pub upper: String,
    pub pass: bool,
}

/// Reduction report. `zero` is true when no witness exists and `D = 0` was declared.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub zero: bool,
    pub witness: Vec<Label>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub oracle_value: Option<String>,
    pub estimate: String,
    pub epsilon: Option<String>,
    pub tolerance: Option<String>,
    pub x_bits: Option<u64>,
    pub y_bits: Option<u64>,
    pub bounds_check: Option<BoundsFile>,
}

fn parse_all(values: &[String]) -> Result<Vec<Rational>> {
    values.iter().map(|v| rational::parse(v)).collect()
}

fn format_all(values: &[Rational]) -> Vec<String> {
    values.iter().map(rational::format).collect()
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<WeightedPSD> {
        self.to_matrix_with(self.weights.as_deref())
    }

    fn to_matrix_with(&self, weights: Option<&[String]>) -> Result<WeightedPSD> {
        let rows = self.rows.iter().map(|r| parse_all(r)).collect::<Result<Vec<_>>>()?;
        let base = match &self.labels {
            Some(labels) => SymMatrix::new(labels.clone(), rows)?,
            None => SymMatrix::from_rows(rows)?,
        };
        match weights {
            Some(w) => WeightedPSD::new(base, parse_all(w)?),
            None => WeightedPSD::unit(base),
        }
    }

    pub fn to_sym(&self) -> Result<SymMatrix> {
        let m = self.to_matrix()?;
        if m.weights().iter().any(|w| *w != Rational::from_integer(1.into())) {
            return Err(Error::Parse("weights are not allowed here".into()));
        }
        Ok(m.base().clone())
    }

    pub fn from_sym(m: &SymMatrix) -> Self {
        MatrixFile {
            labels: Some(m.labels().to_vec()),
            rows: m.rows().iter().map(|r| format_all(r)).collect(),
            weights: None,
        }
    }

    pub fn from_matrix(m: &WeightedPSD) -> Self {
        MatrixFile {
            weights: Some(format_all(m.weights())),
            ..Self::from_sym(m.base())
        }
    }
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.vertices.clone(), self.edges.clone())
    }

    pub fn from_graph(g: &Graph) -> Self {
        GraphFile {
            vertices: g.vertices().to_vec(),
            edges: g
                .edges()
                .iter()
                .map(|e| (e.id.clone(), g.vertices()[e.u].clone(), g.vertices()[e.v].clone()))
                .collect(),
        }
    }
}

impl BipartiteFile {
    pub fn to_bipartite(&self) -> Result<BipartiteGraph> {
        BipartiteGraph::new(self.left.clone(), self.right.clone(), self.edges.clone())
    }

    pub fn from_bipartite(b: &BipartiteGraph) -> Self {
        BipartiteFile {
            left: b.left().to_vec(),
            right: b.right().to_vec(),
            edges: b
                .edges()
                .iter()
                .map(|&(i, j)| (b.left()[i].clone(), b.right()[j].clone()))
                .collect(),
        }
    }
}

/// A parsed instance bundle.
#[derive(Clone, Debug)]
pub struct Bundle {
    pub matrix: WeightedPSD,
    pub graph: Option<Graph>,
    pub constraint: Constraint,
}

impl BundleFile {
    pub fn to_bundle(&self) -> Result<Bundle> {
        let matrix = self.matrix.to_matrix_with(self.weights.as_deref().or(self.matrix.weights.as_deref()))?;
        let graph = self.graph.as_ref().map(GraphFile::to_graph).transpose()?;
        let constraint = match self.constraint.as_str() {
            "tree" => Constraint::SpanningTree,
            "forest" => Constraint::Forest,
            "partition" => Constraint::Partition(
                self.parts
                    .clone()
                    .ok_or_else(|| Error::Parse("partition constraint needs `parts`".into()))?,
            ),
            "none" => Constraint::Unconstrained,
            other => return Err(Error::Parse(format!("unknown constraint `{other}`"))),
        };
        Ok(Bundle { matrix, graph, constraint })
    }

    pub fn from_bundle(b: &Bundle) -> Self {
        let (constraint, parts) = match &b.constraint {
            Constraint::SpanningTree => ("tree", None),
            Constraint::Forest => ("forest", None),
            Constraint::Partition(p) => ("partition", Some(p.clone())),
            Constraint::Unconstrained => ("none", None),
        };
        BundleFile {
            graph: b.graph.as_ref().map(GraphFile::from_graph),
            matrix: MatrixFile::from_sym(b.matrix.base()),
            weights: Some(format_all(b.matrix.weights())),
            constraint: constraint.into(),
            parts,
        }
    }
}

impl MdFile {
    pub fn to_instance(&self) -> Result<MDInstance> {
        MDInstance::new(self.matrices.iter().map(MatrixFile::to_sym).collect::<Result<_>>()?)
    }

    pub fn from_instance(k: &MDInstance) -> Self {
        MdFile {
            matrices: k.matrices().iter().map(MatrixFile::from_sym).collect(),
        }
    }
}

impl ReportFile {
    pub fn from_outcome(outcome: &ReductionOutcome) -> Self {
        match outcome {
            ReductionOutcome::Zero => ReportFile {
                zero: true,
                witness: Vec::new(),
                x: None,
                y: None,
                oracle_value: None,
                estimate: "0".into(),
                epsilon: None,
                tolerance: None,
                x_bits: None,
                y_bits: None,
                bounds_check: None,
            },
            ReductionOutcome::Estimate(r) => Self::from_report(r),
        }
    }

    fn from_report(r: &ReductionReport) -> Self {
        let mut witness = r.witness.clone();
        witness.sort();
        ReportFile {
            zero: false,
            witness,
            x: Some(rational::format(&r.x)),
            y: Some(rational::format(&r.y)),
            oracle_value: Some(rational::format(&r.oracle_value)),
            estimate: rational::format(&r.estimate),
            epsilon: Some(rational::format(&r.epsilon)),
            tolerance: Some(rational::format(&r.tolerance)),
            x_bits: Some(rational::bit_length(&r.x)),
            y_bits: Some(rational::bit_length(&r.y)),
            bounds_check: r.bounds_check.as_ref().map(BoundsFile::from_check),
        }
    }
}

impl BoundsFile {
    fn from_check(b: &BoundsCheck) -> Self {
        BoundsFile {
            reference: rational::format(&b.reference),
            sigma: rational::format(&b.sigma),
            lower: rational::format(&b.lower),
            upper: rational::format(&b.upper),
            pass: b.pass,
        }
    }
}

pub fn read_matrix(text: &str) -> Result<WeightedPSD> {
    parse_json::<MatrixFile>(text)?.to_matrix()
}

pub fn write_matrix(m: &WeightedPSD) -> String {
    to_json(&MatrixFile::from_matrix(m))
}

pub fn read_graph(text: &str) -> Result<Graph> {
    parse_json::<GraphFile>(text)?.to_graph()
}

pub fn write_graph(g: &Graph) -> String {
    to_json(&GraphFile::from_graph(g))
}

pub fn read_bipartite(text: &str) -> Result<BipartiteGraph> {
    parse_json::<BipartiteFile>(text)?.to_bipartite()
}

pub fn write_bipartite(b: &BipartiteGraph) -> String {
    to_json(&BipartiteFile::from_bipartite(b))
}

pub fn read_bundle(text: &str) -> Result<Bundle> {
    parse_json::<BundleFile>(text)?.to_bundle()
}

pub fn write_bundle(b: &Bundle) -> String {
    to_json(&BundleFile::from_bundle(b))
}

pub fn read_md(text: &str) -> Result<MDInstance> {
    parse_json::<MdFile>(text)?.to_instance()
}

pub fn write_md(k: &MDInstance) -> String {
    to_json(&MdFile::from_instance(k))
}

pub fn write_report(outcome: &ReductionOutcome) -> String {
    to_json(&ReportFile::from_outcome(outcome))
}

pub fn read_report(text: &str) -> Result<ReportFile> {
    parse_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    #[test]
    fn matrix_accepts_integers_and_fractions() {
        let m = read_matrix(r#"{"labels":["a","b"],"rows":[["1","1/2"],["1/2","3"]],"weights":["2","1/3"]}"#).unwrap();
        assert_eq!(m.base().get(0, 1), &ratio(1, 2));
        assert_eq!(m.weights()[1], ratio(1, 3));
        let plain = read_matrix(r#"{"rows":[["2"]]}"#).unwrap();
        assert_eq!(plain.labels(), &["1".to_string()]);
        assert!(read_matrix(r#"{"rows":[["1/0"]]}"#).is_err());
        assert!(read_matrix(r#"{"rows":[["0","1"],["1","0"]]}"#).is_err());
        assert!(read_matrix("not json").is_err());
    }

    #[test]
    fn bundle_constraints() {
        let text = r#"{
            "graph": {"vertices":["a","b","c"],"edges":[["x","a","b"],["y","b","c"],["z","a","c"]]},
            "matrix": {"labels":["x","y","z"],"rows":[["1","0","0"],["0","1","0"],["0","0","2"]]},
            "constraint": "tree"
        }"#;
        let b = read_bundle(text).unwrap();
        assert_eq!(b.constraint, Constraint::SpanningTree);
        let again = read_bundle(&write_bundle(&b)).unwrap();
        assert_eq!(again.matrix, b.matrix);
        assert_eq!(again.graph, b.graph);
        assert!(read_bundle(&text.replace("tree", "hedge")).is_err());
        assert!(read_bundle(&text.replace("\"tree\"", "\"partition\"")).is_err());
    }

    #[test]
    fn graph_and_bipartite_round_trip() {
        let g = Graph::complete(4).unwrap();
        assert_eq!(read_graph(&write_graph(&g)).unwrap(), g);
        let b = BipartiteGraph::from_pairs(3, &[(0, 1), (2, 0), (1, 1)]).unwrap();
        assert_eq!(read_bipartite(&write_bipartite(&b)).unwrap(), b);
    }

    #[test]
    fn md_round_trip() {
        let k = MDInstance::new(vec![
            SymMatrix::from_i64(&[&[2, 1], &[1, 1]]).unwrap(),
            SymMatrix::from_i64(&[&[1, 0], &[0, 0]]).unwrap(),
        ])
        .unwrap();
        assert_eq!(read_md(&write_md(&k)).unwrap(), k);
    }

    #[test]
    fn zero_report() {
        let r = read_report(&write_report(&ReductionOutcome::Zero)).unwrap();
        assert!(r.zero);
        assert_eq!(r.estimate, "0");
    }

    fn rational_strategy() -> impl Strategy<Value = Rational> {
        (any::<i64>(), 1i64..=i64::MAX).prop_map(|(p, q)| ratio(p, q))
    }

    proptest! {
        #[test]
        fn weighted_matrix_round_trip_is_exact(
            diag in prop::collection::vec(rational_strategy(), 1..5),
            weights in prop::collection::vec((1i64..1000, 1i64..1000), 5),
        ) {
            let n = diag.len();
            let labels: Vec<Label> = (0..n).map(|i| format!("e{i}")).collect();
            let rows: Vec<Vec<Rational>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { diag[i].clone() * &diag[i] } else { Rational::from_integer(0.into()) }).collect())
                .collect();
            let base = SymMatrix::new(labels, rows).unwrap();
            let w: Vec<Rational> = weights[..n].iter().map(|&(p, q)| ratio(p, q)).collect();
            let m = WeightedPSD::new(base, w).unwrap();
            let text = write_matrix(&m);
            prop_assert_eq!(read_matrix(&text).unwrap(), m.clone());
            prop_assert_eq!(write_matrix(&read_matrix(&text).unwrap()), text);
        }
    }
}
