use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{EdgeId, GraphPoint, MetricGraph, Region};
use crate::error::{Error, Result};

/// The function `y ↦ ρ(y, S)` for a closed set `S`.
///
/// Distances to the vertices are computed by a multi-source shortest-path
/// sweep; on an edge the distance is the minimum of the routes through either
/// endpoint and the direct distance to the pieces of `S` lying on that edge.
#[derive(Debug, Clone)]
pub struct DistanceField<'g> {
    graph: &'g MetricGraph,
    vertex: Vec<f64>,
    sources: Region,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'g> DistanceField<'g> {
    pub fn from_region(graph: &'g MetricGraph, sources: &Region) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mut vertex = vec![f64::INFINITY; graph.num_vertices()];
        for v in graph.vertex_ids() {
            if sources.contains_vertex(v) {
                vertex[v.0] = 0.0;
            }
        }
        for e in graph.edge_ids() {
            let list = sources.intervals_on(e);
            let (Some(first), Some(last)) = (list.first(), list.last()) else {
                continue;
            };
            let edge = graph.edge(e);
            let from = &mut vertex[edge.from.0];
            *from = from.min(first.start);
            if let Some(to) = edge.to {
                let d = edge.length - last.end;
                let slot = &mut vertex[to.0];
                *slot = slot.min(d);
            }
        }
        let mut heap: BinaryHeap<Entry> = vertex
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .map(|(k, &d)| Entry(d, k))
            .collect();
        while let Some(Entry(d, v)) = heap.pop() {
            if d > vertex[v] {
                continue;
            }
            for end in graph.incident(super::VertexId(v)) {
                let edge = graph.edge(end.edge());
                let Some(to) = edge.to else { continue };
                let other = if edge.from.0 == v { to.0 } else { edge.from.0 };
                let nd = d + edge.length;
                if nd < vertex[other] {
                    vertex[other] = nd;
                    heap.push(Entry(nd, other));
                }
            }
        }
        Ok(DistanceField {
            graph,
            vertex,
            sources: sources.clone(),
        })
    }

    pub fn from_point(graph: &'g MetricGraph, p: GraphPoint) -> Result<Self> {
        let p = graph.check_point(p)?;
        Self::from_region(graph, &Region::point(graph, p))
    }

    pub fn graph(&self) -> &'g MetricGraph {
        self.graph
    }

    pub fn at_vertex(&self, v: super::VertexId) -> f64 {
        self.vertex[v.0]
    }

    /// Distance at arclength `t` on edge `e` (`t` may run to the truncation
    /// length on leads).
    pub fn at(&self, e: EdgeId, t: f64) -> f64 {
        let edge = self.graph.edge(e);
        let mut d = self.vertex[edge.from.0] + t;
        if let Some(to) = edge.to {
            d = d.min(self.vertex[to.0] + (edge.length - t));
        }
        for iv in self.sources.intervals_on(e) {
            let direct = if t < iv.start {
                iv.start - t
            } else if t > iv.end {
                t - iv.end
            } else {
                0.0
            };
            d = d.min(direct);
        }
        d
    }

    pub fn at_point(&self, p: GraphPoint) -> f64 {
        match p {
            GraphPoint::Vertex(v) => self.vertex[v.0],
            GraphPoint::Edge { edge, offset } => self.at(edge, offset),
        }
    }

    /// `{y : ρ(y, S) ≤ r}`.
    pub fn sublevel(&self, r: f64) -> Region {
        let g = self.graph;
        let mut raw: Vec<(EdgeId, f64, f64)> = Vec::new();
        for e in g.edge_ids() {
            let edge = g.edge(e);
            let l = g.effective_length(e);
            let di = self.vertex[edge.from.0];
            if di <= r {
                raw.push((e, 0.0, r - di));
            }
            if let Some(to) = edge.to {
                let dj = self.vertex[to.0];
                if dj <= r {
                    raw.push((e, l - (r - dj), l));
                }
            }
            for iv in self.sources.intervals_on(e) {
                raw.push((e, iv.start - r, iv.end + r));
            }
        }
        Region::from_intervals(g, raw).with_isolated(g, |v| self.vertex[v] <= r)
    }

    /// Breakpoints on edge `e` where the distance is not affine, together
    /// with the endpoints `0` and the effective length; sorted.
    pub fn kinks(&self, e: EdgeId) -> Vec<f64> {
        let g = self.graph;
        let edge = g.edge(e);
        let l = g.effective_length(e);
        let di = self.vertex[edge.from.0];
        let dj = edge.to.map(|to| self.vertex[to.0]);
        let mut pts = vec![0.0, l];
        if let Some(dj) = dj {
            if di.is_finite() && dj.is_finite() {
                pts.push(0.5 * (dj + edge.length - di));
            }
        }
        for iv in self.sources.intervals_on(e) {
            pts.push(iv.start);
            pts.push(iv.end);
            // crossing of the direct branch with the endpoint branches
            if di.is_finite() {
                pts.push(0.5 * (iv.start - di));
            }
            if let Some(dj) = dj.filter(|d| d.is_finite()) {
                pts.push(0.5 * (iv.end + edge.length + dj));
            }
        }
        for w in self.sources.intervals_on(e).windows(2) {
            pts.push(0.5 * (w[0].end + w[1].start));
        }
        let mut pts: Vec<f64> = pts
            .into_iter()
            .filter(|t| t.is_finite() && *t >= 0.0 && *t <= l)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Largest finite distance attained on the truncated graph.
    pub fn max_distance(&self) -> f64 {
        let mut best: f64 = 0.0;
        for e in self.graph.edge_ids() {
            for t in self.kinks(e) {
                let d = self.at(e, t);
                if d.is_finite() {
                    best = best.max(d);
                }
            }
        }
        best
    }

    /// Distance at which the first truncated lead end is reached.
    pub fn horizon(&self) -> f64 {
        self.graph
            .edge_ids()
            .filter(|&e| self.graph.edge(e).is_lead())
            .map(|e| self.at(e, self.graph.effective_length(e)))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Path distance `ρ(x, y)`; `+∞` across connected components.
pub fn path_distance(g: &MetricGraph, x: GraphPoint, y: GraphPoint) -> Result<f64> {
    let y = g.check_point(y)?;
    Ok(DistanceField::from_point(g, x)?.at_point(y))
}

/// `ρ_E(x) = inf { ρ(x, y) : y ∈ E }`.
pub fn distance_to_set(g: &MetricGraph, x: GraphPoint, e_set: &Region) -> Result<f64> {
    let x = g.check_point(x)?;
    Ok(DistanceField::from_region(g, e_set)?.at_point(x))
}

/// Closed ball `B(x, r)`.
pub fn ball(g: &MetricGraph, x: GraphPoint, r: f64) -> Result<Region> {
    if !(r >= 0.0) {
        return Err(Error::invalid("ball radius must be nonnegative"));
    }
    Ok(DistanceField::from_point(g, x)?.sublevel(r))
}

/// The `b`-neighborhood `B_b(E)`.
pub fn neighborhood(g: &MetricGraph, e_set: &Region, b: f64) -> Result<Region> {
    if !(b > 0.0) {
        return Err(Error::invalid("neighborhood width must be positive"));
    }
    Ok(DistanceField::from_region(g, e_set)?.sublevel(b))
}

/// The `b`-collar `A_b(E) = B_b(E) ∩ B_b(Eᶜ)`; empty when `E` is the whole
/// graph.
pub fn collar(g: &MetricGraph, e_set: &Region, b: f64) -> Result<Region> {
    let inner = neighborhood(g, e_set, b)?;
    let complement = e_set.complement(g);
    if complement.is_empty() {
        return Ok(Region::empty(g));
    }
    let outer = neighborhood(g, &complement, b)?;
    Ok(inner.intersection(&outer, g))
}
