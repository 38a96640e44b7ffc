//! Closed-form generalized eigensolutions of `-u'' = λu` with Kirchhoff/δ
//! matching, built by transfer-matrix shooting (trees) or by a global
//! least-squares solve over all edge coefficients (graphs with cycles).
//!
//! Outgoing derivatives are taken along the arclength into the edge, and
//! the matching rule at a vertex `v` reads `Σ outgoing u' = α_v u(v)`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::exp_poly::ExpPoly;
use crate::forms::MeasurePerturbation;
use crate::function_space::ExactFunction;
use crate::metric_graph::{EdgeEnd, EdgeId, GraphPoint, MetricGraph, VertexId};
use crate::{Error, Result};

/// Propagated magnitudes above this trigger a rescale of the solution.
const RESCALE_LIMIT: f64 = 1e100;
/// Relative tolerance on matching conditions.
const MATCH_TOLERANCE: f64 = 1e-8;
/// Largest graph with cycles handled by the global solve.
pub const GLOBAL_EDGE_LIMIT: usize = 200;

/// Fundamental pair at `t`: `c(0)=1, c'(0)=0, s(0)=0, s'(0)=1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBasis {
    pub c: f64,
    pub s: f64,
    pub dc: f64,
    pub ds: f64,
}

impl EdgeBasis {
    /// Wronskian `c s' - s c'`, identically one.
    pub fn wronskian(&self) -> f64 {
        self.c * self.ds - self.s * self.dc
    }

    /// `[[c, s], [c', s']]`, mapping `(u, u')(0)` to `(u, u')(t)`.
    pub fn transfer(&self) -> [[f64; 2]; 2] {
        [[self.c, self.s], [self.dc, self.ds]]
    }

    fn forward(&self, a: C64, b: C64) -> (C64, C64) {
        (a * self.c + b * self.s, a * self.dc + b * self.ds)
    }

    /// Inverse transfer (determinant one).
    fn backward(&self, u: C64, du: C64) -> (C64, C64) {
        (u * self.ds - du * self.s, du * self.c - u * self.dc)
    }
}

pub fn edge_basis(lambda: f64, t: f64) -> EdgeBasis {
    if lambda > 0.0 {
        let w = lambda.sqrt();
        let (sn, cs) = (w * t).sin_cos();
        EdgeBasis {
            c: cs,
            s: sn / w,
            dc: -w * sn,
            ds: cs,
        }
    } else if lambda < 0.0 {
        let k = (-lambda).sqrt();
        let (sh, ch) = ((k * t).sinh(), (k * t).cosh());
        EdgeBasis {
            c: ch,
            s: sh / k,
            dc: k * sh,
            ds: ch,
        }
    } else {
        EdgeBasis {
            c: 1.0,
            s: t,
            dc: 0.0,
            ds: 1.0,
        }
    }
}

/// Prescribed data at a root vertex: the value there and, optionally, the
/// outgoing derivative along some incident edge ends. Ends left open share
/// the remaining matching budget equally.
#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub vertex: VertexId,
    pub value: C64,
    pub outgoing: Vec<(EdgeEnd, C64)>,
}

impl Seed {
    pub fn new(vertex: VertexId, value: C64) -> Self {
        Seed {
            vertex,
            value,
            outgoing: Vec::new(),
        }
    }

    pub fn with_outgoing(mut self, end: EdgeEnd, derivative: C64) -> Self {
        self.outgoing.push((end, derivative));
        self
    }
}

/// File form of a seed:
/// `{"vertex": "o", "value": [1, 0], "outgoing": [{"edge": "e0", "end": "start", "derivative": [0, 1]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub vertex: String,
    #[serde(default = "unit")]
    pub value: [f64; 2],
    #[serde(default)]
    pub outgoing: Vec<OutgoingSpec>,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndSpec {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutgoingSpec {
    pub edge: String,
    pub end: EndSpec,
    pub derivative: [f64; 2],
}

impl SeedSpec {
    pub fn build(&self, g: &MetricGraph) -> Result<Seed> {
        let v = g
            .vertex_by_label(&self.vertex)
            .ok_or_else(|| Error::invalid(format!("seed: unknown vertex '{}'", self.vertex)))?;
        let mut seed = Seed::new(v, C64::new(self.value[0], self.value[1]));
        for o in &self.outgoing {
            let e = g
                .edge_by_label(&o.edge)
                .ok_or_else(|| Error::invalid(format!("seed: unknown edge '{}'", o.edge)))?;
            let end = match o.end {
                EndSpec::Start => EdgeEnd::Start(e),
                EndSpec::End => EdgeEnd::End(e),
            };
            seed = seed.with_outgoing(end, C64::new(o.derivative[0], o.derivative[1]));
        }
        Ok(seed)
    }
}

fn check_seeds(g: &MetricGraph, seeds: &[Seed]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    for (k, s) in seeds.iter().enumerate() {
        if s.vertex.0 >= g.num_vertices() {
            return Err(Error::invalid(format!("seed {k}: unknown vertex")));
        }
        if seeds[..k].iter().any(|o| o.vertex == s.vertex) {
            return Err(Error::invalid(format!("seed {k}: vertex seeded twice")));
        }
        for (end, _) in &s.outgoing {
            if !g.incident(s.vertex).contains(end) {
                return Err(Error::invalid(format!(
                    "seed {k}: edge end {end:?} is not incident to the seeded vertex"
                )));
            }
        }
        if !s.value.is_finite() || s.outgoing.iter().any(|(_, d)| !d.is_finite()) {
            return Err(Error::invalid(format!("seed {k}: non-finite data")));
        }
    }
    Ok(())
}

/// Whether the edges reachable from the seeds contain a cycle.
fn has_cycle(g: &MetricGraph) -> bool {
    let comp = g.components();
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut verts = vec![0usize; ncomp];
    let mut edges = vec![0usize; ncomp];
    for v in g.vertex_ids() {
        verts[comp[v.0]] += 1;
    }
    for e in g.edges() {
        if e.to.is_some() {
            edges[comp[e.from.0]] += 1;
        }
    }
    (0..ncomp).any(|c| edges[c] >= verts[c])
}

/// Generalized eigensolution at energy `λ` determined by `seeds`.
///
/// Trees are shot edge by edge; graphs with cycles go through the global
/// solve (up to [`GLOBAL_EDGE_LIMIT`] edges). When propagated magnitudes
/// exceed `1e100` the solution is rescaled and the factor is recorded in
/// [`ExactFunction::log_scale`].
pub fn shoot(g: &MetricGraph, lambda: f64, seeds: &[Seed]) -> Result<ExactFunction> {
    check_seeds(g, seeds)?;
    if !lambda.is_finite() {
        return Err(Error::invalid("energy must be finite"));
    }
    if has_cycle(g) {
        if g.num_edges() > GLOBAL_EDGE_LIMIT {
            return Err(Error::Infeasible(format!(
                "graph has cycles and {} > {GLOBAL_EDGE_LIMIT} edges; no closure available",
                g.num_edges()
            )));
        }
        return solve_global(g, lambda, seeds);
    }
    shoot_tree(g, lambda, seeds)
}

fn outgoing_derivative(g: &MetricGraph, lambda: f64, end: EdgeEnd, c: [C64; 2]) -> C64 {
    match end {
        EdgeEnd::Start(_) => c[1],
        EdgeEnd::End(e) => {
            let (_, du) = edge_basis(lambda, g.effective_length(e)).forward(c[0], c[1]);
            -du
        }
    }
}

fn end_value(g: &MetricGraph, lambda: f64, end: EdgeEnd, c: [C64; 2]) -> C64 {
    match end {
        EdgeEnd::Start(_) => c[0],
        EdgeEnd::End(e) => edge_basis(lambda, g.effective_length(e)).forward(c[0], c[1]).0,
    }
}

fn shoot_tree(g: &MetricGraph, lambda: f64, seeds: &[Seed]) -> Result<ExactFunction> {
    let zero = C64::new(0.0, 0.0);
    let mut coeffs: Vec<Option<[C64; 2]>> = vec![None; g.num_edges()];
    let mut value: Vec<Option<C64>> = vec![None; g.num_vertices()];
    let mut log_scale = 0.0;
    let seed_at = |v: VertexId| seeds.iter().find(|s| s.vertex == v);

    for root in seeds {
        if value[root.vertex.0].is_some() {
            continue; // reached from an earlier seed and checked there
        }
        value[root.vertex.0] = Some(root.value);
        let mut queue = VecDeque::from([root.vertex]);
        while let Some(v) = queue.pop_front() {
            let uv = value[v.0].expect("queued vertices carry a value");
            let alpha = g.vertex(v).alpha;
            let seed = seed_at(v);
            let mut budget = alpha * uv;
            let mut open = Vec::new();
            for &end in g.incident(v) {
                if let Some(c) = coeffs[end.edge().0] {
                    budget -= outgoing_derivative(g, lambda, end, c);
                } else if let Some(&(_, d)) =
                    seed.and_then(|s| s.outgoing.iter().find(|(x, _)| *x == end))
                {
                    budget -= d;
                    open.push((end, Some(d)));
                } else {
                    open.push((end, None));
                }
            }
            let free = open.iter().filter(|(_, d)| d.is_none()).count();
            if free == 0 {
                let scale = uv.norm() * (1.0 + alpha.abs())
                    + g.incident(v)
                        .iter()
                        .filter_map(|&end| {
                            coeffs[end.edge().0].map(|c| outgoing_derivative(g, lambda, end, c).norm())
                        })
                        .sum::<f64>()
                    + open.iter().map(|(_, d)| d.map_or(0.0, |d| d.norm())).sum::<f64>();
                if budget.norm() > MATCH_TOLERANCE * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::Infeasible(format!(
                        "vertex '{}': |Σ outgoing u' − α u| = {:.6e} (relative {:.3e})",
                        g.vertex(v).label,
                        budget.norm(),
                        budget.norm() / scale.max(f64::MIN_POSITIVE)
                    )));
                }
            }
            let share = if free > 0 { budget / free as f64 } else { zero };
            for (end, d) in open {
                let d = d.unwrap_or(share);
                let e = end.edge();
                let c = match end {
                    EdgeEnd::Start(_) => [uv, d],
                    EdgeEnd::End(_) => {
                        let (a, b) = edge_basis(lambda, g.effective_length(e)).backward(uv, -d);
                        [a, b]
                    }
                };
                coeffs[e.0] = Some(c);
                let edge = g.edge(e);
                let Some(to) = edge.to else { continue };
                let far = match end {
                    EdgeEnd::Start(_) => to,
                    EdgeEnd::End(_) => edge.from,
                };
                let far_end = match end {
                    EdgeEnd::Start(_) => EdgeEnd::End(e),
                    EdgeEnd::End(_) => EdgeEnd::Start(e),
                };
                let uf = end_value(g, lambda, far_end, c);
                if let Some(s) = seed_at(far) {
                    let scaled = s.value / log_scale_factor(log_scale);
                    if (uf - scaled).norm() > MATCH_TOLERANCE * (uf.norm() + scaled.norm()).max(f64::MIN_POSITIVE) {
                        return Err(Error::Infeasible(format!(
                            "contradictory seeds: propagated value {uf:.6e} at vertex '{}' but seed {:.6e}",
                            g.vertex(far).label,
                            s.value
                        )));
                    }
                }
                value[far.0] = Some(uf);
                queue.push_back(far);
                // rescale to keep magnitudes representable
                let big = uf.norm().max(c[0].norm()).max(c[1].norm());
                if big > RESCALE_LIMIT {
                    log_scale += big.ln();
                    let inv = 1.0 / big;
                    value.iter_mut().flatten().for_each(|x| *x *= inv);
                    coeffs.iter_mut().flatten().for_each(|c| {
                        c[0] *= inv;
                        c[1] *= inv;
                    });
                }
            }
        }
    }
    let coeffs: Vec<[C64; 2]> = coeffs.into_iter().map(|c| c.unwrap_or([zero; 2])).collect();
    if coeffs.iter().all(|c| c[0] == zero && c[1] == zero) {
        return Err(Error::ZeroSolution);
    }
    Ok(ExactFunction::new(g, lambda, coeffs)?.with_log_scale(log_scale))
}

fn log_scale_factor(log_scale: f64) -> f64 {
    log_scale.exp()
}

/// Least-squares solve over all `2|E|` edge coefficients with continuity,
/// matching and seed rows. Works for any topology; used for graphs with
/// cycles and as a cross-check of shooting.
pub fn solve_global(g: &MetricGraph, lambda: f64, seeds: &[Seed]) -> Result<ExactFunction> {
    check_seeds(g, seeds)?;
    let n = 2 * g.num_edges();
    let zero = C64::new(0.0, 0.0);
    // row coefficients of u and outgoing u' at an edge end
    let value_row = |end: EdgeEnd| -> (usize, [f64; 2]) {
        match end {
            EdgeEnd::Start(e) => (e.0, [1.0, 0.0]),
            EdgeEnd::End(e) => {
                let b = edge_basis(lambda, g.effective_length(e));
                (e.0, [b.c, b.s])
            }
        }
    };
    let deriv_row = |end: EdgeEnd| -> (usize, [f64; 2]) {
        match end {
            EdgeEnd::Start(e) => (e.0, [0.0, 1.0]),
            EdgeEnd::End(e) => {
                let b = edge_basis(lambda, g.effective_length(e));
                (e.0, [-b.dc, -b.ds])
            }
        }
    };
    let mut rows: Vec<(Vec<(usize, f64)>, C64, bool)> = Vec::new();
    let push = |rows: &mut Vec<_>, terms: Vec<(usize, [f64; 2], f64)>, rhs: C64, seed: bool| {
        let mut r = Vec::new();
        for (e, c, w) in terms {
            r.push((2 * e, w * c[0]));
            r.push((2 * e + 1, w * c[1]));
        }
        rows.push((r, rhs, seed));
    };
    for v in g.vertex_ids() {
        let inc = g.incident(v);
        let Some(&first) = inc.first() else { continue };
        let (e0, c0) = value_row(first);
        for &end in &inc[1..] {
            let (e, c) = value_row(end);
            push(&mut rows, vec![(e, c, 1.0), (e0, c0, -1.0)], zero, false);
        }
        let mut terms: Vec<_> = inc
            .iter()
            .map(|&end| {
                let (e, c) = deriv_row(end);
                (e, c, 1.0)
            })
            .collect();
        terms.push((e0, c0, -g.vertex(v).alpha));
        push(&mut rows, terms, zero, false);
    }
    for s in seeds {
        let inc = g.incident(s.vertex);
        let Some(&first) = inc.first() else {
            return Err(Error::invalid("seed at an isolated vertex"));
        };
        let (e0, c0) = value_row(first);
        push(&mut rows, vec![(e0, c0, 1.0)], s.value, true);
        for &(end, d) in &s.outgoing {
            let (e, c) = deriv_row(end);
            push(&mut rows, vec![(e, c, 1.0)], d, true);
        }
    }
    let m = rows.len();
    let mut a = DMatrix::<C64>::zeros(m, n);
    let mut b = DVector::<C64>::zeros(m);
    for (i, (terms, rhs, _)) in rows.iter().enumerate() {
        let scale = terms.iter().fold(0.0f64, |acc, (_, w)| acc.max(w.abs())).max(f64::MIN_POSITIVE);
        for &(j, w) in terms {
            a[(i, j)] += C64::new(w / scale, 0.0);
        }
        b[i] = rhs / scale;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(&b, smax * 1e-13)
        .map_err(|msg| Error::Infeasible(format!("least-squares solve failed: {msg}")))?;
    let res = &a * &x - &b;
    let rnorm = res.norm();
    let xnorm = x.norm();
    if xnorm == 0.0 || !xnorm.is_finite() {
        return Err(Error::ZeroSolution);
    }
    if rnorm > MATCH_TOLERANCE * (b.norm() + xnorm) {
        let (worst, _) = res
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, r)| if r.norm() > acc.1 { (i, r.norm()) } else { acc });
        let kind = if rows[worst].2 { "seed" } else { "matching" };
        return Err(Error::Infeasible(format!(
            "no solution of the {kind} conditions; least-squares residual {rnorm:.6e} (largest in row {worst})"
        )));
    }
    let coeffs: Vec<[C64; 2]> = (0..g.num_edges()).map(|e| [x[2 * e], x[2 * e + 1]]).collect();
    ExactFunction::new(g, lambda, coeffs)
}

/// A compactly supported piecewise linear test function: one or more linear
/// pieces `(edge, a, b, v(a), v(b))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tent {
    pub pieces: Vec<(EdgeId, f64, f64, f64, f64)>,
}

impl Tent {
    fn value(&self, g: &MetricGraph, p: GraphPoint) -> f64 {
        let hits = |e: EdgeId, t: f64| {
            self.pieces
                .iter()
                .find(|(pe, a, b, _, _)| *pe == e && t >= *a && t <= *b)
                .map_or(0.0, |&(_, a, b, va, vb)| va + (vb - va) * (t - a) / (b - a))
        };
        match p {
            GraphPoint::Vertex(v) => {
                if let Some(&end) = g.incident(v).first() {
                    let e = end.edge();
                    let t = match end {
                        EdgeEnd::Start(_) => 0.0,
                        EdgeEnd::End(_) => g.effective_length(e),
                    };
                    hits(e, t)
                } else {
                    0.0
                }
            }
            GraphPoint::Edge { edge, offset } => hits(edge, offset),
        }
    }

    /// Tent at a vertex over all incident edges, half-width `w`.
    pub fn at_vertex(g: &MetricGraph, v: VertexId, w: f64) -> Tent {
        let pieces = g
            .incident(v)
            .iter()
            .map(|&end| match end {
                EdgeEnd::Start(e) => (e, 0.0, w, 1.0, 0.0),
                EdgeEnd::End(e) => {
                    let l = g.effective_length(e);
                    (e, l - w, l, 0.0, 1.0)
                }
            })
            .collect();
        Tent { pieces }
    }

    /// Tent inside an edge centred at `c` with half-width `w`.
    pub fn on_edge(e: EdgeId, c: f64, w: f64) -> Tent {
        Tent {
            pieces: vec![(e, c - w, c, 0.0, 1.0), (e, c, c + w, 1.0, 0.0)],
        }
    }

    fn energy(&self) -> f64 {
        self.pieces
            .iter()
            .map(|&(_, a, b, va, vb)| (vb - va).powi(2) / (b - a))
            .sum()
    }

    fn mass(&self) -> f64 {
        self.pieces
            .iter()
            .map(|&(_, a, b, va, vb)| (b - a) * (va * va + va * vb + vb * vb) / 3.0)
            .sum()
    }
}

/// `μ(u v)` for real tent `v`.
fn tent_pairing(g: &MetricGraph, mu: &MeasurePerturbation, u: &ExactFunction, v: &Tent) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for p in &mu.point_masses {
        let tv = v.value(g, p.point);
        if tv != 0.0 {
            let (e, t) = g
                .edge_coordinates(p.point)
                .ok_or_else(|| Error::InvalidPoint("point mass at an isolated vertex".into()))?;
            total += u.value(e, t) * tv * p.weight;
        }
    }
    for d in &mu.densities {
        let l = g.effective_length(d.edge);
        for &(e, a, b, va, vb) in v.pieces.iter().filter(|p| p.0 == d.edge) {
            let mut pts = vec![a, b];
            pts.extend(d.knots(l).into_iter().filter(|&t| t > a && t < b));
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                let (x, y) = (w[0], w[1]);
                let tv = |t: f64| va + (vb - va) * (t - a) / (b - a);
                let dv = |t: f64| d.value_at(l, t);
                let lin = |f0: f64, f1: f64| {
                    ExpPoly::linear(C64::new(f0, 0.0), C64::new((f1 - f0) / (y - x), 0.0))
                };
                let poly = u
                    .value_poly(e)
                    .shifted(x)
                    .mul(&lin(tv(x), tv(y)))
                    .mul(&lin(dv(x), dv(y)));
                total += poly.integrate_from_zero(y - x);
            }
        }
    }
    Ok(total)
}

/// Weak residual `|ℰ(u,v) + μ(u v) − λ(u,v)| / ‖v‖_h` of `u` against tent `v`,
/// where the graph's δ-couplings are included in `μ` and
/// `‖v‖²_h = ℰ(v) + μ₊(v²) + ‖v‖²`.
pub fn weak_residual(
    g: &MetricGraph,
    u: &ExactFunction,
    lambda: f64,
    mu: &MeasurePerturbation,
    v: &Tent,
) -> Result<f64> {
    let full = mu.with_vertex_couplings(g);
    let (plus, _) = full.split();
    let mut energy = C64::new(0.0, 0.0);
    let mut inner = C64::new(0.0, 0.0);
    for &(e, a, b, va, vb) in &v.pieces {
        let slope = (vb - va) / (b - a);
        energy += (u.value(e, b) - u.value(e, a)) * slope;
        let lin = ExpPoly::linear(C64::new(va, 0.0), C64::new(slope, 0.0));
        inner += u.value_poly(e).shifted(a).mul(&lin).integrate_from_zero(b - a);
    }
    let pair = tent_pairing(g, &full, u, v)?;
    let norm_sq = v.energy() + v.mass() + tent_pairing_sq(g, &plus, v);
    Ok((energy + pair - inner * lambda).norm() / norm_sq.sqrt())
}

fn tent_pairing_sq(g: &MetricGraph, mu: &MeasurePerturbation, v: &Tent) -> f64 {
    let mut total = 0.0;
    for p in &mu.point_masses {
        total += p.weight * v.value(g, p.point).powi(2);
    }
    for d in &mu.densities {
        let l = g.effective_length(d.edge);
        for &(_, a, b, va, vb) in v.pieces.iter().filter(|p| p.0 == d.edge) {
            let mut pts = vec![a, b];
            pts.extend(d.knots(l).into_iter().filter(|&t| t > a && t < b));
            pts.sort_by(f64::total_cmp);
            for w in pts.windows(2) {
                let (x, y) = (w[0], w[1]);
                let tv = |t: f64| va + (vb - va) * (t - a) / (b - a);
                // ∫ v² ρ over [x, y] with v, ρ linear: Simpson is exact for cubics
                let m = 0.5 * (x + y);
                let f = |t: f64| tv(t).powi(2) * d.value_at(l, t);
                total += (y - x) / 6.0 * (f(x) + 4.0 * f(m) + f(y));
            }
        }
    }
    total
}

/// Probe layout: tents at every vertex first, then interior tents spread
/// over the edges with a golden-ratio sequence.
pub fn probe_tents(g: &MetricGraph, probes: usize) -> Vec<Tent> {
    let width = |e: EdgeId| (g.effective_length(e) / 4.0).min(1.0);
    let mut out = Vec::with_capacity(probes);
    for v in g.vertex_ids() {
        if out.len() == probes {
            return out;
        }
        let inc = g.incident(v);
        if inc.is_empty() {
            continue;
        }
        let w = inc.iter().map(|end| width(end.edge())).fold(f64::INFINITY, f64::min);
        out.push(Tent::at_vertex(g, v, w));
    }
    let edges: Vec<EdgeId> = g.edge_ids().collect();
    if edges.is_empty() {
        return out;
    }
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut k = 0usize;
    while out.len() < probes {
        let e = edges[k % edges.len()];
        let l = g.effective_length(e);
        let w = width(e);
        let frac = ((k / edges.len()) as f64 * golden + 0.5).fract();
        let c = w + frac * (l - 2.0 * w);
        out.push(Tent::on_edge(e, c, w));
        k += 1;
    }
    out
}

/// Largest weak residual of `u` over `probes` tent test functions.
pub fn verify_eigensolution(
    g: &MetricGraph,
    u: &ExactFunction,
    lambda: f64,
    mu: &MeasurePerturbation,
    probes: usize,
) -> Result<f64> {
    if u.coeffs().len() != g.num_edges() {
        return Err(Error::MeshMismatch("solution does not live on this graph".into()));
    }
    mu.validate(g)?;
    let mut worst = 0.0f64;
    for v in probe_tents(g, probes) {
        worst = worst.max(weak_residual(g, u, lambda, mu, &v)?);
    }
    Ok(worst)
}
