//! JSON graph specification.
//!
//! ```json
//! {
//!   "vertices": [{"id": "a", "alpha": 0.0}, {"id": "b"}],
//!   "edges": [
//!     {"id": "e", "from": "a", "to": "b", "length": 1.0},
//!     {"id": "lead", "from": "b", "to": null, "length": "inf"}
//!   ],
//!   "truncation": {"L": 40.0}
//! }
//! ```
//!
//! `alpha` defaults to `0` (Kirchhoff), `to` may be omitted for leads, and
//! `truncation` is optional. Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::{Edge, GraphPoint, MetricGraph, Vertex, VertexId, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexSpec {
    pub id: String,
    #[serde(default)]
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    #[serde(default)]
    pub to: Option<String>,
    pub length: LengthSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Finite(f64),
    Infinite(InfTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InfTag {
    #[serde(rename = "inf")]
    Inf,
}

impl LengthSpec {
    pub fn value(self) -> f64 {
        match self {
            LengthSpec::Finite(l) => l,
            LengthSpec::Infinite(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSpec {
    #[serde(rename = "L")]
    pub length: f64,
}

/// A point in a file: `{"vertex": "a"}` or `{"edge": "e", "offset": 0.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PointSpec {
    Vertex { vertex: String },
    Edge { edge: String, offset: f64 },
}

impl PointSpec {
    pub fn resolve(&self, g: &MetricGraph) -> Result<GraphPoint> {
        match self {
            PointSpec::Vertex { vertex } => g
                .vertex_by_label(vertex)
                .map(GraphPoint::Vertex)
                .ok_or_else(|| Error::InvalidPoint(format!("unknown vertex '{vertex}'"))),
            PointSpec::Edge { edge, offset } => {
                let e = g
                    .edge_by_label(edge)
                    .ok_or_else(|| Error::InvalidPoint(format!("unknown edge '{edge}'")))?;
                g.point_on_edge(e, *offset)
            }
        }
    }
}

impl GraphSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self) -> Result<MetricGraph> {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for (k, v) in self.vertices.iter().enumerate() {
            if self.vertices[..k].iter().any(|w| w.id == v.id) {
                return Err(Error::invalid(format!(
                    "vertices[{k}].id: duplicate id '{}'",
                    v.id
                )));
            }
            vertices.push(Vertex {
                label: v.id.clone(),
                alpha: v.alpha,
            });
        }
        let lookup = |label: &str, field: String| {
            self.vertices
                .iter()
                .position(|v| v.id == label)
                .map(VertexId)
                .ok_or_else(|| Error::invalid(format!("{field}: unknown vertex '{label}'")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, e) in self.edges.iter().enumerate() {
            if self.edges[..k].iter().any(|f| f.id == e.id) {
                return Err(Error::invalid(format!(
                    "edges[{k}].id: duplicate id '{}'",
                    e.id
                )));
            }
            let length = e.length.value();
            if e.to.is_none() != length.is_infinite() {
                return Err(Error::invalid(format!(
                    "edges[{k}].length: 'to' is null exactly when length is \"inf\""
                )));
            }
            edges.push(Edge {
                label: e.id.clone(),
                from: lookup(&e.from, format!("edges[{k}].from"))?,
                to: e
                    .to
                    .as_deref()
                    .map(|t| lookup(t, format!("edges[{k}].to")))
                    .transpose()?,
                length,
            });
        }
        let g = MetricGraph::new(vertices, edges)?;
        let l = self
            .truncation
            .map(|t| t.length)
            .unwrap_or(DEFAULT_TRUNCATION);
        g.with_truncation(l)
            .map_err(|_| Error::invalid("truncation.L: must be positive and finite"))
    }

    pub fn from_graph(g: &MetricGraph) -> Self {
        GraphSpec {
            vertices: g
                .vertices()
                .iter()
                .map(|v| VertexSpec {
                    id: v.label.clone(),
                    alpha: v.alpha,
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeSpec {
                    id: e.label.clone(),
                    from: g.vertex(e.from).label.clone(),
                    to: e.to.map(|t| g.vertex(t).label.clone()),
                    length: if e.length.is_finite() {
                        LengthSpec::Finite(e.length)
                    } else {
                        LengthSpec::Infinite(InfTag::Inf)
                    },
                })
                .collect(),
            truncation: Some(TruncationSpec {
                length: g.truncation(),
            }),
        }
    }
}

impl MetricGraph {
    /// Parses and validates a JSON graph specification.
    pub fn from_json(text: &str) -> Result<Self> {
        GraphSpec::parse(text)?.build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphSpec::from_graph(self)).expect("graph spec serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_leads_and_defaults() {
        let g = MetricGraph::from_json(
            r#"{"vertices":[{"id":"o","alpha":-1}],
                "edges":[{"id":"l","from":"o","to":null,"length":"inf"},
                         {"id":"r","from":"o","length":"inf"}],
                "truncation":{"L":40}}"#,
        )
        .unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.truncation(), 40.0);
        assert_eq!(g.vertex(VertexId(0)).alpha, -1.0);
        assert!(g.edges().iter().all(Edge::is_lead));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lengths() {
        let err = MetricGraph::from_json(
            r#"{"vertices":[{"id":"a","colour":"red"}],"edges":[]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");

        let err = MetricGraph::from_json(
            r#"{"vertices":[{"id":"a"}],"edges":[{"id":"e","from":"a","to":null,"length":2}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("edges[0].length"), "{err}");

        let err = MetricGraph::from_json(
            r#"{"vertices":[{"id":"a"}],
                "edges":[{"id":"e","from":"a","to":"zz","length":2}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("edges[0].to"), "{err}");
    }

    #[test]
    fn syntax_errors_report_line() {
        let err = MetricGraph::from_json("{\n\"vertices\": [,]}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let g = MetricGraph::chain(2).unwrap().with_truncation(7.5).unwrap();
        let again = MetricGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, again);
    }
}
