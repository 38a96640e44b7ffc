#![allow(dead_code)]

use qgraph::metric_graph::{EdgeId, GraphBuilder, GraphPoint, MetricGraph};

/// Small graphs with dyadic edge lengths (sums are exact in any order).
pub fn stored_graphs() -> Vec<(&'static str, MetricGraph)> {
    vec![
        ("interval", MetricGraph::interval(1.0).unwrap()),
        (
            "parallel",
            GraphBuilder::new()
                .vertex("v1", 0.0)
                .vertex("v2", 0.0)
                .edge("short", "v1", Some("v2"), 1.0)
                .edge("long", "v1", Some("v2"), 3.0)
                .build()
                .unwrap(),
        ),
        ("loop", MetricGraph::circle(2.0).unwrap()),
        ("star", MetricGraph::star(&[1.0, 1.0, 1.0]).unwrap()),
        (
            "lasso",
            GraphBuilder::new()
                .vertex("a", 0.0)
                .vertex("b", 0.0)
                .edge("stick", "a", Some("b"), 1.5)
                .edge("ring", "b", Some("b"), 2.25)
                .build()
                .unwrap(),
        ),
        (
            "triangle_with_tail",
            GraphBuilder::new()
                .vertex("a", 0.0)
                .vertex("b", 0.0)
                .vertex("c", 0.0)
                .vertex("d", 0.0)
                .edge("ab", "a", Some("b"), 1.0)
                .edge("bc", "b", Some("c"), 0.5)
                .edge("ca", "c", Some("a"), 2.0)
                .edge("cd", "c", Some("d"), 0.75)
                .edge("ab2", "b", Some("a"), 0.25)
                .edge("tail", "d", None, f64::INFINITY)
                .build()
                .unwrap()
                .with_truncation(4.0)
                .unwrap(),
        ),
        (
            "two_components",
            GraphBuilder::new()
                .vertex("a", 0.0)
                .vertex("b", 0.0)
                .vertex("c", 0.0)
                .vertex("d", 0.0)
                .edge("ab", "a", Some("b"), 1.0)
                .edge("cd", "c", Some("d"), 2.0)
                .build()
                .unwrap(),
        ),
        ("chain", MetricGraph::chain(2).unwrap().with_truncation(2.0).unwrap()),
    ]
}

/// Shortest path by enumerating every simple path in the graph obtained by
/// splitting edges at the two points.
pub fn brute_force_distance(g: &MetricGraph, x: GraphPoint, y: GraphPoint) -> f64 {
    // nodes: vertices, then one node per lead end, then the split points
    let nv = g.num_vertices();
    let mut next = nv;
    let mut lead_end = vec![None; g.num_edges()];
    for e in g.edge_ids() {
        if g.edge(e).is_lead() {
            lead_end[e.0] = Some(next);
            next += 1;
        }
    }
    let mut splits: Vec<Vec<(f64, usize)>> = vec![Vec::new(); g.num_edges()];
    let mut node_of = |p: GraphPoint, splits: &mut Vec<Vec<(f64, usize)>>| match p {
        GraphPoint::Vertex(v) => v.0,
        GraphPoint::Edge { edge, offset } => {
            if let Some(&(_, n)) = splits[edge.0].iter().find(|(t, _)| *t == offset) {
                n
            } else {
                let n = next;
                next += 1;
                splits[edge.0].push((offset, n));
                n
            }
        }
    };
    let sx = node_of(x, &mut splits);
    let sy = node_of(y, &mut splits);
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); next];
    for e in g.edge_ids() {
        let edge = g.edge(e);
        let l = g.effective_length(e);
        let end = edge.to.map(|v| v.0).unwrap_or_else(|| lead_end[e.0].unwrap());
        let mut pts = vec![(0.0, edge.from.0)];
        let mut s = splits[e.0].clone();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.extend(s);
        pts.push((l, end));
        for w in pts.windows(2) {
            let d = w[1].0 - w[0].0;
            adj[w[0].1].push((w[1].1, d));
            adj[w[1].1].push((w[0].1, d));
        }
    }
    fn dfs(adj: &[Vec<(usize, f64)>], at: usize, goal: usize, seen: &mut Vec<bool>, len: f64, best: &mut f64) {
        if at == goal {
            *best = best.min(len);
            return;
        }
        for &(to, d) in &adj[at] {
            if !seen[to] {
                seen[to] = true;
                dfs(adj, to, goal, seen, len + d, best);
                seen[to] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut seen = vec![false; next];
    seen[sx] = true;
    dfs(&adj, sx, sy, &mut seen, 0.0, &mut best);
    best
}

/// Vertices plus dyadic interior points on every edge.
pub fn sample_points(g: &MetricGraph) -> Vec<GraphPoint> {
    let mut out: Vec<GraphPoint> = g.vertex_ids().map(GraphPoint::Vertex).collect();
    for e in g.edge_ids() {
        let l = g.effective_length(e);
        for k in 1..8 {
            let t = l * k as f64 / 8.0;
            out.push(g.point_on_edge(e, t).unwrap());
        }
    }
    out
}

pub fn edge(g: &MetricGraph, label: &str) -> EdgeId {
    g.edge_by_label(label).unwrap()
}
