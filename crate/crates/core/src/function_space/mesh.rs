use crate::error::{Error, Result};
use crate::metric_graph::{EdgeEnd, EdgeId, MetricGraph};

/// Uniform per-edge subdivision of a (truncated) metric graph.
///
/// Node numbering: vertices first (`0..V`), then the interior nodes of each
/// edge in edge order, then the far ends of truncated leads. Every node except
/// the lead ends is a degree of freedom, so dof indices coincide with node
/// indices `0..num_dofs()`; lead ends carry the homogeneous Dirichlet value.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    cells: Vec<usize>,
    lengths: Vec<f64>,
    from: Vec<usize>,
    to: Vec<Option<usize>>,
    interior_offset: Vec<usize>,
    lead_end: Vec<Option<usize>>,
    vertex_rep: Vec<(usize, bool)>,
    num_vertices: usize,
    num_dofs: usize,
    num_nodes: usize,
}

impl Mesh {
    /// Cells of size at most `h` on every edge (at least one per edge).
    pub fn uniform(g: &MetricGraph, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("mesh size must be positive, got {h}")));
        }
        let cells = g
            .edge_ids()
            .map(|e| ((g.effective_length(e) / h) * (1.0 - 1e-12)).ceil().max(1.0) as usize)
            .collect();
        Self::with_cells(g, cells)
    }

    pub fn with_cells(g: &MetricGraph, cells: Vec<usize>) -> Result<Self> {
        if cells.len() != g.num_edges() {
            return Err(Error::invalid("one cell count per edge required"));
        }
        if cells.contains(&0) {
            return Err(Error::invalid("every edge needs at least one cell"));
        }
        let mut vertex_rep = Vec::with_capacity(g.num_vertices());
        for v in g.vertex_ids() {
            let rep = g.incident(v).first().ok_or_else(|| {
                Error::invalid(format!(
                    "vertex '{}' has no incident edges and cannot be discretized",
                    g.vertex(v).label
                ))
            })?;
            vertex_rep.push(match *rep {
                EdgeEnd::Start(e) => (e.0, false),
                EdgeEnd::End(e) => (e.0, true),
            });
        }
        let num_vertices = g.num_vertices();
        let mut next = num_vertices;
        let mut interior_offset = Vec::with_capacity(cells.len());
        for &n in &cells {
            interior_offset.push(next);
            next += n - 1;
        }
        let num_dofs = next;
        let mut lead_end = Vec::with_capacity(cells.len());
        for e in g.edges() {
            if e.is_lead() {
                lead_end.push(Some(next));
                next += 1;
            } else {
                lead_end.push(None);
            }
        }
        Ok(Mesh {
            lengths: g.edge_ids().map(|e| g.effective_length(e)).collect(),
            from: g.edges().iter().map(|e| e.from.0).collect(),
            to: g.edges().iter().map(|e| e.to.map(|v| v.0)).collect(),
            cells,
            interior_offset,
            lead_end,
            vertex_rep,
            num_vertices,
            num_dofs,
            num_nodes: next,
        })
    }

    /// Every cell split into `factor` equal cells.
    pub fn refined(&self, g: &MetricGraph, factor: usize) -> Result<Self> {
        Self::with_cells(g, self.cells.iter().map(|n| n * factor.max(1)).collect())
    }

    pub fn num_edges(&self) -> usize {
        self.cells.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn is_dof(&self, node: usize) -> bool {
        node < self.num_dofs
    }

    pub fn cells(&self, e: EdgeId) -> usize {
        self.cells[e.0]
    }

    pub fn length(&self, e: EdgeId) -> f64 {
        self.lengths[e.0]
    }

    pub fn cell_size(&self, e: EdgeId) -> f64 {
        self.lengths[e.0] / self.cells[e.0] as f64
    }

    pub fn max_cell_size(&self) -> f64 {
        (0..self.cells.len())
            .map(|k| self.cell_size(EdgeId(k)))
            .fold(0.0, f64::max)
    }

    /// Position of node `k ∈ 0..=n` on edge `e`.
    pub fn position(&self, e: EdgeId, k: usize) -> f64 {
        if k == self.cells[e.0] {
            self.lengths[e.0]
        } else {
            k as f64 * self.cell_size(e)
        }
    }

    /// Global node index of node `k ∈ 0..=n` on edge `e`.
    pub fn node(&self, e: EdgeId, k: usize) -> usize {
        let n = self.cells[e.0];
        if k == 0 {
            self.from[e.0]
        } else if k == n {
            match self.to[e.0] {
                Some(v) => v,
                None => self.lead_end[e.0].expect("lead has an end node"),
            }
        } else {
            self.interior_offset[e.0] + k - 1
        }
    }

    /// Cell containing `t` and the local coordinate within it.
    pub fn locate(&self, e: EdgeId, t: f64) -> (usize, f64) {
        let h = self.cell_size(e);
        let n = self.cells[e.0];
        let k = ((t / h).floor().max(0.0) as usize).min(n - 1);
        (k, t - k as f64 * h)
    }

    /// Edge and end (`true` = far end) through which a vertex value is read.
    pub(crate) fn vertex_rep(&self, v: usize) -> (EdgeId, bool) {
        let (e, end) = self.vertex_rep[v];
        (EdgeId(e), end)
    }

    /// For every node, an `(edge, t)` location on the graph.
    pub fn node_locations(&self) -> Vec<(EdgeId, f64)> {
        let mut out = vec![(EdgeId(0), 0.0); self.num_nodes];
        for e in (0..self.cells.len()).map(EdgeId) {
            for k in 0..=self.cells[e.0] {
                out[self.node(e, k)] = (e, self.position(e, k));
            }
        }
        for v in 0..self.num_vertices {
            let (e, end) = self.vertex_rep(v);
            out[v] = (e, if end { self.lengths[e.0] } else { 0.0 });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbering_puts_lead_ends_last() {
        let g = MetricGraph::chain(1).unwrap().with_truncation(2.0).unwrap();
        let m = Mesh::uniform(&g, 0.5).unwrap();
        // 3 vertices, 2 unit edges with 1 interior node each, 2 leads with
        // 3 interior nodes each, 2 lead ends
        assert_eq!(m.num_dofs(), 3 + 2 + 6);
        assert_eq!(m.num_nodes(), m.num_dofs() + 2);
        let lead = g.edge_by_label("lead+").unwrap();
        assert!(!m.is_dof(m.node(lead, m.cells(lead))));
        assert_eq!(m.node(lead, 0), g.vertex_by_label("1").unwrap().0);
    }

    #[test]
    fn cell_counts_round_up() {
        let g = MetricGraph::interval(1.0).unwrap();
        assert_eq!(Mesh::uniform(&g, 1e-3).unwrap().cells(EdgeId(0)), 1000);
        assert_eq!(Mesh::uniform(&g, 0.3).unwrap().cells(EdgeId(0)), 4);
        assert_eq!(Mesh::uniform(&g, 5.0).unwrap().cells(EdgeId(0)), 1);
    }

    #[test]
    fn isolated_vertex_is_rejected() {
        let g = crate::metric_graph::GraphBuilder::new()
            .vertex("a", 0.0)
            .vertex("b", 0.0)
            .vertex("lonely", 0.0)
            .edge("e", "a", Some("b"), 1.0)
            .build()
            .unwrap();
        assert!(Mesh::uniform(&g, 0.1).is_err());
    }
}
