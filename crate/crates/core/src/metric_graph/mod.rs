//! Metric graphs: vertices with δ-coupling strengths, edges isometric to
//! intervals `[0, ℓ]` (possibly half-infinite leads), the path metric, and
//! subsets of the graph described as per-edge interval unions.
//!
//! Half-infinite leads are represented up to a truncation length `L`; the far
//! end of a truncated lead is not a vertex and carries a homogeneous Dirichlet
//! condition once the graph is discretized.

mod distance;
mod file;
mod region;

pub use distance::{ball, collar, distance_to_set, neighborhood, path_distance, DistanceField};
pub use file::{EdgeSpec, GraphSpec, LengthSpec, PointSpec, TruncationSpec, VertexSpec};
pub use region::{Interval, Region};

use crate::error::{Error, Result};

/// Truncation length used for half-infinite leads when none is configured.
pub const DEFAULT_TRUNCATION: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub label: String,
    /// δ-coupling strength; zero gives the Kirchhoff condition.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub label: String,
    pub from: VertexId,
    /// `None` for a half-infinite lead.
    pub to: Option<VertexId>,
    /// `f64::INFINITY` for a lead.
    pub length: f64,
}

impl Edge {
    pub fn is_lead(&self) -> bool {
        self.to.is_none()
    }
}

/// One end of an edge, as seen from the vertex it is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeEnd {
    /// `t = 0`, attached to `i(e)`.
    Start(EdgeId),
    /// `t = ℓ`, attached to `j(e)`.
    End(EdgeId),
}

impl EdgeEnd {
    pub fn edge(self) -> EdgeId {
        match self {
            EdgeEnd::Start(e) | EdgeEnd::End(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeEnd>>,
    truncation: f64,
}

impl MetricGraph {
    /// Builds a graph from `(label, alpha)` vertices and
    /// `(label, from, to, length)` edges.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self> {
        for (k, e) in edges.iter().enumerate() {
            if !(e.length > 0.0) {
                return Err(Error::invalid(format!(
                    "edges[{k}] ({}): length must be positive",
                    e.label
                )));
            }
            if e.to.is_none() != e.length.is_infinite() {
                return Err(Error::invalid(format!(
                    "edges[{k}] ({}): an edge has no end vertex iff its length is infinite",
                    e.label
                )));
            }
            let check = |v: VertexId| {
                if v.0 >= vertices.len() {
                    Err(Error::invalid(format!(
                        "edges[{k}] ({}): unknown vertex index {}",
                        e.label, v.0
                    )))
                } else {
                    Ok(())
                }
            };
            check(e.from)?;
            if let Some(to) = e.to {
                check(to)?;
            }
        }
        for (k, v) in vertices.iter().enumerate() {
            if !v.alpha.is_finite() {
                return Err(Error::invalid(format!(
                    "vertices[{k}] ({}): alpha must be finite",
                    v.label
                )));
            }
        }
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            incidence[e.from.0].push(EdgeEnd::Start(EdgeId(k)));
            if let Some(to) = e.to {
                incidence[to.0].push(EdgeEnd::End(EdgeId(k)));
            }
        }
        Ok(MetricGraph {
            vertices,
            edges,
            incidence,
            truncation: DEFAULT_TRUNCATION,
        })
    }

    /// Sets the truncation length `L` applied to every half-infinite lead.
    pub fn with_truncation(mut self, length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("truncation length must be positive and finite"));
        }
        self.truncation = length;
        Ok(self)
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    /// Edge ends attached to `v`; loops contribute both ends.
    pub fn incident(&self, v: VertexId) -> &[EdgeEnd] {
        &self.incidence[v.0]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v.0].len()
    }

    /// Edge length, with leads cut at the truncation length.
    pub fn effective_length(&self, e: EdgeId) -> f64 {
        let l = self.edges[e.0].length;
        if l.is_finite() {
            l
        } else {
            self.truncation
        }
    }

    pub fn has_leads(&self) -> bool {
        self.edges.iter().any(Edge::is_lead)
    }

    pub fn vertex_by_label(&self, label: &str) -> Option<VertexId> {
        self.vertices
            .iter()
            .position(|v| v.label == label)
            .map(VertexId)
    }

    pub fn edge_by_label(&self, label: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.label == label).map(EdgeId)
    }

    /// The vertex at an edge end.
    pub fn end_vertex(&self, end: EdgeEnd) -> VertexId {
        match end {
            EdgeEnd::Start(e) => self.edges[e.0].from,
            EdgeEnd::End(e) => self.edges[e.0]
                .to
                .expect("lead has no end vertex"),
        }
    }

    /// Validated, canonical point on edge `e` at arclength `offset`.
    pub fn point_on_edge(&self, e: EdgeId, offset: f64) -> Result<GraphPoint> {
        let edge = self
            .edges
            .get(e.0)
            .ok_or_else(|| Error::InvalidPoint(format!("unknown edge index {}", e.0)))?;
        if !(offset >= 0.0 && offset <= edge.length) || !offset.is_finite() {
            return Err(Error::InvalidPoint(format!(
                "offset {offset} outside [0, {}] on edge {}",
                edge.length, edge.label
            )));
        }
        if offset == 0.0 {
            return Ok(GraphPoint::Vertex(edge.from));
        }
        if let Some(to) = edge.to {
            if offset == edge.length {
                return Ok(GraphPoint::Vertex(to));
            }
        }
        Ok(GraphPoint::Edge { edge: e, offset })
    }

    pub fn check_point(&self, p: GraphPoint) -> Result<GraphPoint> {
        match p {
            GraphPoint::Vertex(v) => {
                if v.0 < self.vertices.len() {
                    Ok(p)
                } else {
                    Err(Error::InvalidPoint(format!("unknown vertex index {}", v.0)))
                }
            }
            GraphPoint::Edge { edge, offset } => self.point_on_edge(edge, offset),
        }
    }

    /// `(edge, t)` coordinates of a point; vertices use their first incident
    /// edge end.
    pub fn edge_coordinates(&self, p: GraphPoint) -> Option<(EdgeId, f64)> {
        match p {
            GraphPoint::Edge { edge, offset } => Some((edge, offset)),
            GraphPoint::Vertex(v) => self.incidence[v.0].first().map(|end| match *end {
                EdgeEnd::Start(e) => (e, 0.0),
                EdgeEnd::End(e) => (e, self.edges[e.0].length),
            }),
        }
    }

    /// Connected component index of every vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.vertices.len()];
        let mut next = 0;
        for start in 0..self.vertices.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(v) = stack.pop() {
                for end in &self.incidence[v] {
                    let e = &self.edges[end.edge().0];
                    for w in std::iter::once(e.from).chain(e.to) {
                        if comp[w.0] == usize::MAX {
                            comp[w.0] = next;
                            stack.push(w.0);
                        }
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Total measure of the (truncated) graph.
    pub fn total_length(&self) -> f64 {
        self.edge_ids().map(|e| self.effective_length(e)).sum()
    }

    // Common shapes used throughout tests, examples and the CLI.

    /// The interval `[0, length]` as one edge between two vertices.
    pub fn interval(length: f64) -> Result<Self> {
        GraphBuilder::new()
            .vertex("a", 0.0)
            .vertex("b", 0.0)
            .edge("e", "a", Some("b"), length)
            .build()
    }

    /// One vertex with a self-loop of the given length.
    pub fn circle(length: f64) -> Result<Self> {
        GraphBuilder::new()
            .vertex("v", 0.0)
            .edge("loop", "v", Some("v"), length)
            .build()
    }

    /// `d` half-infinite leads glued at one vertex with coupling `alpha`.
    pub fn star_of_leads(d: usize, alpha: f64) -> Result<Self> {
        let mut b = GraphBuilder::new().vertex("o", alpha);
        for k in 0..d {
            b = b.edge(&format!("lead{k}"), "o", None, f64::INFINITY);
        }
        b.build()
    }

    /// Star with `lengths.len()` finite edges from a center vertex `o`.
    pub fn star(lengths: &[f64]) -> Result<Self> {
        let mut b = GraphBuilder::new().vertex("o", 0.0);
        for (k, &l) in lengths.iter().enumerate() {
            let leaf = format!("leaf{k}");
            b = b.vertex(&leaf, 0.0).edge(&format!("e{k}"), "o", Some(&leaf), l);
        }
        b.build()
    }

    /// The two-sided chain: vertices at the integers `-n..=n` (labelled by
    /// their position), unit edges oriented in the positive direction, and a
    /// half-infinite lead at each end (`lead+` from `n`, `lead-` from `-n`,
    /// both parametrized outward). Degree-two Kirchhoff vertices are
    /// transparent, so this is the real line with marked integer points.
    pub fn chain(n: usize) -> Result<Self> {
        let n = n as i64;
        let mut b = GraphBuilder::new();
        for k in -n..=n {
            b = b.vertex(&k.to_string(), 0.0);
        }
        for k in -n..n {
            b = b.edge(
                &format!("e{k}"),
                &k.to_string(),
                Some(&(k + 1).to_string()),
                1.0,
            );
        }
        b = b.edge("lead+", &n.to_string(), None, f64::INFINITY);
        b = b.edge("lead-", &(-n).to_string(), None, f64::INFINITY);
        b.build()
    }
}

/// Label-based builder.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    vertices: Vec<Vertex>,
    edges: Vec<(String, String, Option<String>, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, label: &str, alpha: f64) -> Self {
        self.vertices.push(Vertex {
            label: label.to_string(),
            alpha,
        });
        self
    }

    pub fn edge(mut self, label: &str, from: &str, to: Option<&str>, length: f64) -> Self {
        self.edges.push((
            label.to_string(),
            from.to_string(),
            to.map(str::to_string),
            length,
        ));
        self
    }

    pub fn build(self) -> Result<MetricGraph> {
        let lookup = |label: &str, k: usize| {
            self.vertices
                .iter()
                .position(|v| v.label == label)
                .map(VertexId)
                .ok_or_else(|| Error::invalid(format!("edges[{k}]: unknown vertex '{label}'")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (k, (label, from, to, length)) in self.edges.iter().enumerate() {
            edges.push(Edge {
                label: label.clone(),
                from: lookup(from, k)?,
                to: to.as_deref().map(|t| lookup(t, k)).transpose()?,
                length: *length,
            });
        }
        MetricGraph::new(self.vertices, edges)
    }
}

/// A point of the graph in canonical form: edge endpoints are always stored
/// as vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphPoint {
    Vertex(VertexId),
    Edge { edge: EdgeId, offset: f64 },
}
