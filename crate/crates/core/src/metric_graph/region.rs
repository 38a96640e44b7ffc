use super::{EdgeEnd, EdgeId, GraphPoint, MetricGraph};

/// Closed subinterval `[start, end]` of an edge; `start == end` is a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Interval { start, end }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// A closed subset of the graph: per-edge sorted disjoint closed intervals,
/// plus the vertices touched by them.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    intervals: Vec<Vec<Interval>>,
    vertices: Vec<bool>,
}

const MERGE_TOL: f64 = 1e-12;

impl Region {
    pub fn empty(g: &MetricGraph) -> Self {
        Region {
            intervals: vec![Vec::new(); g.num_edges()],
            vertices: vec![false; g.num_vertices()],
        }
    }

    pub fn whole(g: &MetricGraph) -> Self {
        Self::from_intervals(
            g,
            g.edge_ids()
                .map(|e| (e, 0.0, g.effective_length(e))),
        )
    }

    /// The singleton `{p}`.
    pub fn point(g: &MetricGraph, p: GraphPoint) -> Self {
        let mut raw = Vec::new();
        match p {
            GraphPoint::Vertex(v) => {
                for end in g.incident(v) {
                    match *end {
                        EdgeEnd::Start(e) => raw.push((e, 0.0, 0.0)),
                        EdgeEnd::End(e) => {
                            let l = g.effective_length(e);
                            raw.push((e, l, l))
                        }
                    }
                }
            }
            GraphPoint::Edge { edge, offset } => raw.push((edge, offset, offset)),
        }
        let mut out = Self::from_intervals(g, raw);
        if let GraphPoint::Vertex(v) = p {
            // an isolated vertex is not reachable through any interval
            out.vertices[v.0] = true;
        }
        out
    }

    /// Adds the isolated (degree-zero) vertices selected by `pick`.
    pub(crate) fn with_isolated(mut self, g: &MetricGraph, pick: impl Fn(usize) -> bool) -> Self {
        for v in g.vertex_ids() {
            if g.degree(v) == 0 && pick(v.0) {
                self.vertices[v.0] = true;
            }
        }
        self
    }

    /// Canonical region from arbitrary `(edge, start, end)` triples; pieces
    /// are clipped to the (truncated) edge and merged.
    pub fn from_intervals(
        g: &MetricGraph,
        raw: impl IntoIterator<Item = (EdgeId, f64, f64)>,
    ) -> Self {
        let mut intervals = vec![Vec::new(); g.num_edges()];
        for (e, a, b) in raw {
            intervals[e.0].push(Interval::new(a, b));
        }
        Self::canonical(g, intervals)
    }

    fn canonical(g: &MetricGraph, mut intervals: Vec<Vec<Interval>>) -> Self {
        for (k, list) in intervals.iter_mut().enumerate() {
            let l = g.effective_length(EdgeId(k));
            let tol = MERGE_TOL * l;
            let mut pieces: Vec<Interval> = list
                .iter()
                .filter(|iv| !iv.start.is_nan() && !iv.end.is_nan())
                .map(|iv| Interval::new(iv.start.max(0.0), iv.end.min(l)))
                .filter(|iv| iv.start <= iv.end)
                .collect();
            pieces.sort_by(|x, y| x.start.total_cmp(&y.start));
            let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
            for iv in pieces {
                match merged.last_mut() {
                    Some(last) if iv.start <= last.end + tol => {
                        last.end = last.end.max(iv.end);
                    }
                    _ => merged.push(iv),
                }
            }
            if let Some(first) = merged.first_mut() {
                if first.start <= tol {
                    first.start = 0.0;
                }
            }
            if let Some(last) = merged.last_mut() {
                if last.end >= l - tol {
                    last.end = l;
                }
            }
            *list = merged;
        }
        let mut vertices = vec![false; g.num_vertices()];
        for v in g.vertex_ids() {
            vertices[v.0] = g.incident(v).iter().any(|end| match *end {
                EdgeEnd::Start(e) => intervals[e.0].first().is_some_and(|iv| iv.start == 0.0),
                EdgeEnd::End(e) => intervals[e.0]
                    .last()
                    .is_some_and(|iv| iv.end == g.effective_length(e)),
            });
        }
        Region {
            intervals,
            vertices,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals_on(&self, e: EdgeId) -> &[Interval] {
        &self.intervals[e.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, Interval)> + '_ {
        self.intervals
            .iter()
            .enumerate()
            .flat_map(|(k, list)| list.iter().map(move |iv| (EdgeId(k), *iv)))
    }

    pub fn contains_vertex(&self, v: super::VertexId) -> bool {
        self.vertices[v.0]
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().all(Vec::is_empty) && !self.vertices.iter().any(|&v| v)
    }

    /// Lebesgue measure of the region.
    pub fn measure(&self) -> f64 {
        self.iter().map(|(_, iv)| iv.length()).sum()
    }

    pub fn contains(&self, g: &MetricGraph, p: GraphPoint) -> bool {
        match p {
            GraphPoint::Vertex(v) => self.vertices[v.0],
            GraphPoint::Edge { edge, offset } => {
                let tol = MERGE_TOL * g.effective_length(edge);
                self.intervals[edge.0]
                    .iter()
                    .any(|iv| offset >= iv.start - tol && offset <= iv.end + tol)
            }
        }
    }

    pub fn union(&self, other: &Region, g: &MetricGraph) -> Region {
        let intervals = self
            .intervals
            .iter()
            .zip(&other.intervals)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Self::canonical(g, intervals).with_isolated(g, |v| self.vertices[v] || other.vertices[v])
    }

    pub fn intersection(&self, other: &Region, g: &MetricGraph) -> Region {
        let intervals = self
            .intervals
            .iter()
            .zip(&other.intervals)
            .map(|(a, b)| {
                let mut out = Vec::new();
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    let lo = a[i].start.max(b[j].start);
                    let hi = a[i].end.min(b[j].end);
                    if lo <= hi {
                        out.push(Interval::new(lo, hi));
                    }
                    if a[i].end < b[j].end {
                        i += 1;
                    } else {
                        j += 1;
                    }
                }
                out
            })
            .collect();
        Self::canonical(g, intervals).with_isolated(g, |v| self.vertices[v] && other.vertices[v])
    }

    /// Closure of the complement within the truncated graph.
    pub fn complement(&self, g: &MetricGraph) -> Region {
        let intervals = self
            .intervals
            .iter()
            .enumerate()
            .map(|(k, list)| {
                let l = g.effective_length(EdgeId(k));
                let mut gaps = Vec::new();
                let mut cursor = 0.0;
                for iv in list {
                    if iv.start > cursor {
                        gaps.push(Interval::new(cursor, iv.start));
                    }
                    cursor = iv.end;
                }
                if cursor < l {
                    gaps.push(Interval::new(cursor, l));
                }
                gaps
            })
            .collect();
        Self::canonical(g, intervals).with_isolated(g, |v| !self.vertices[v])
    }

    /// Whether `self ⊆ other` up to `tol` at the interval endpoints.
    pub fn is_subset_of(&self, other: &Region, tol: f64) -> bool {
        let isolated_ok = self
            .vertices
            .iter()
            .zip(&other.vertices)
            .all(|(&a, &b)| !a || b);
        isolated_ok && self.intervals.iter().zip(&other.intervals).all(|(a, b)| {
            a.iter().all(|iv| {
                b.iter()
                    .any(|ov| iv.start >= ov.start - tol && iv.end <= ov.end + tol)
            })
        })
    }
}
