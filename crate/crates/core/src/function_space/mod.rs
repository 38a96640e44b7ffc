//! Functions on a metric graph and their integrals over regions.
//!
//! A [`PiecewiseFunction`] is either nodal (continuous piecewise linear on a
//! [`Mesh`]) or exact (per-edge combination of the fundamental solutions of
//! `-u'' = λu`). All integrals are evaluated in closed form: every integrand
//! is an exponential polynomial on each piece between mesh nodes, region
//! boundaries and distance kinks.

mod mesh;

use std::sync::Arc;

use num_complex::Complex64 as C64;

pub use mesh::Mesh;

use crate::error::{Error, Result};
use crate::exp_poly::ExpPoly;
use crate::metric_graph::{ball, DistanceField, EdgeId, GraphPoint, MetricGraph, Region};
use crate::table::Table;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Continuous piecewise-linear function given by its node values.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFunction {
    mesh: Arc<Mesh>,
    values: Vec<C64>,
}

impl NodalFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<C64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::MeshMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                mesh.num_nodes()
            )));
        }
        Ok(NodalFunction { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.num_nodes();
        NodalFunction {
            mesh,
            values: vec![ZERO; n],
        }
    }

    /// Nodal interpolant of `f(edge, t)`; vertex values are read through the
    /// first incident edge end.
    pub fn interpolate(mesh: Arc<Mesh>, f: impl Fn(EdgeId, f64) -> C64) -> Self {
        let values = mesh
            .node_locations()
            .into_iter()
            .map(|(e, t)| f(e, t))
            .collect();
        NodalFunction { mesh, values }
    }

    /// From degree-of-freedom values; truncated lead ends are set to zero.
    pub fn from_dofs(mesh: Arc<Mesh>, dofs: &[C64]) -> Result<Self> {
        if dofs.len() != mesh.num_dofs() {
            return Err(Error::MeshMismatch(format!(
                "{} dof values for {} dofs",
                dofs.len(),
                mesh.num_dofs()
            )));
        }
        let mut values = dofs.to_vec();
        values.resize(mesh.num_nodes(), ZERO);
        Ok(NodalFunction { mesh, values })
    }

    pub fn from_real_dofs(mesh: Arc<Mesh>, dofs: &[f64]) -> Result<Self> {
        let c: Vec<C64> = dofs.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_dofs(mesh, &c)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Values at the degrees of freedom (lead ends dropped).
    pub fn dofs(&self) -> &[C64] {
        &self.values[..self.mesh.num_dofs()]
    }

    /// Value at node `k` of edge `e`.
    pub fn node_value(&self, e: EdgeId, k: usize) -> C64 {
        self.values[self.mesh.node(e, k)]
    }

    pub fn value(&self, e: EdgeId, t: f64) -> C64 {
        let (k, s) = self.mesh.locate(e, t);
        let h = self.mesh.cell_size(e);
        let (a, b) = (self.node_value(e, k), self.node_value(e, k + 1));
        a + (b - a) * (s / h)
    }

    /// Slope on the cell containing `t`.
    pub fn slope(&self, e: EdgeId, t: f64) -> C64 {
        let (k, _) = self.mesh.locate(e, t);
        self.cell_slope(e, k)
    }

    pub fn cell_slope(&self, e: EdgeId, k: usize) -> C64 {
        (self.node_value(e, k + 1) - self.node_value(e, k)) / self.mesh.cell_size(e)
    }

    /// Node-wise combination with a function on the same mesh.
    pub fn zip_with(
        &self,
        other: &NodalFunction,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<NodalFunction> {
        same_mesh(&self.mesh, &other.mesh)?;
        Ok(NodalFunction {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> NodalFunction {
        NodalFunction {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&a| f(a)).collect(),
        }
    }
}

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::MeshMismatch(
            "nodal functions live on different meshes".into(),
        ))
    }
}

/// Per-edge solution of `-u'' = λu`: `u_e = A_e c_λ + B_e s_λ` with the
/// fundamental pair normalized at `t = 0` (`c(0)=1, c'(0)=0, s(0)=0, s'(0)=1`).
///
/// The stored function equals the seeded solution divided by
/// `exp(log_scale)`; rescaling keeps coefficients representable when the
/// solution grows exponentially.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFunction {
    lambda: f64,
    coeffs: Vec<[C64; 2]>,
    lengths: Vec<f64>,
    log_scale: f64,
    value: Vec<ExpPoly>,
    deriv: Vec<ExpPoly>,
}

/// Below this `√|λ|·ℓ` the fundamental pair is expanded as a Taylor
/// polynomial, avoiding cancellation between `e^{±zt}`.
const TAYLOR_LIMIT: f64 = 0.5;
const TAYLOR_DEGREE: usize = 18;

/// `(c, s)` on an edge of length `l` as exponential polynomials.
pub(crate) fn basis_exp_poly(lambda: f64, l: f64) -> (ExpPoly, ExpPoly) {
    let z = lambda.abs().sqrt();
    if lambda == 0.0 || z * l <= TAYLOR_LIMIT {
        // c = Σ (-λ)^k t^{2k}/(2k)!,  s = Σ (-λ)^k t^{2k+1}/(2k+1)!
        let mut c = vec![ZERO; TAYLOR_DEGREE + 1];
        let mut s = vec![ZERO; TAYLOR_DEGREE + 1];
        let mut fact = 1.0;
        let mut pow = 1.0;
        for j in 0..=TAYLOR_DEGREE {
            if j > 0 {
                fact *= j as f64;
            }
            if j % 2 == 0 {
                c[j] = C64::new(pow / fact, 0.0);
            } else {
                s[j] = C64::new(pow / fact, 0.0);
                pow *= -lambda;
            }
        }
        if lambda == 0.0 {
            c.truncate(1);
            s.truncate(2);
        }
        return (ExpPoly::polynomial(c), ExpPoly::polynomial(s));
    }
    if lambda > 0.0 {
        let iw = C64::new(0.0, z);
        let half = C64::new(0.5, 0.0);
        let c = ExpPoly::exponential(half, iw).add(&ExpPoly::exponential(half, -iw));
        let k = C64::new(0.0, -0.5 / z); // 1/(2iω)
        let s = ExpPoly::exponential(k, iw).add(&ExpPoly::exponential(-k, -iw));
        (c, s)
    } else {
        let kz = C64::new(z, 0.0);
        let half = C64::new(0.5, 0.0);
        let c = ExpPoly::exponential(half, kz).add(&ExpPoly::exponential(half, -kz));
        let k = C64::new(0.5 / z, 0.0);
        let s = ExpPoly::exponential(k, kz).add(&ExpPoly::exponential(-k, -kz));
        (c, s)
    }
}

fn edge_exp_poly(lambda: f64, l: f64, a: C64, b: C64) -> ExpPoly {
    let z = lambda.abs().sqrt();
    if lambda == 0.0 {
        return ExpPoly::linear(a, b);
    }
    if z * l <= TAYLOR_LIMIT {
        let (c, s) = basis_exp_poly(lambda, l);
        return c.scale(a).add(&s.scale(b));
    }
    // Combine into P e^{zt} + Q e^{-zt} directly so that a purely decaying
    // solution has an exactly vanishing growing part.
    if lambda > 0.0 {
        let iw = C64::new(0.0, z);
        let bw = b / iw;
        ExpPoly::exponential((a + bw) * 0.5, iw).add(&ExpPoly::exponential((a - bw) * 0.5, -iw))
    } else {
        let bk = b / z;
        let kz = C64::new(z, 0.0);
        ExpPoly::exponential((a + bk) * 0.5, kz).add(&ExpPoly::exponential((a - bk) * 0.5, -kz))
    }
}

impl ExactFunction {
    /// `coeffs[e] = [A_e, B_e]`, i.e. `u_e(0) = A_e`, `u_e'(0) = B_e`.
    pub fn new(g: &MetricGraph, lambda: f64, coeffs: Vec<[C64; 2]>) -> Result<Self> {
        if coeffs.len() != g.num_edges() {
            return Err(Error::invalid(format!(
                "{} coefficient pairs for {} edges",
                coeffs.len(),
                g.num_edges()
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::invalid("energy must be finite"));
        }
        let lengths: Vec<f64> = g.edge_ids().map(|e| g.effective_length(e)).collect();
        let value: Vec<ExpPoly> = coeffs
            .iter()
            .zip(&lengths)
            .map(|(c, &l)| edge_exp_poly(lambda, l, c[0], c[1]))
            .collect();
        let deriv = value.iter().map(ExpPoly::deriv).collect();
        Ok(ExactFunction {
            lambda,
            coeffs,
            lengths,
            log_scale: 0.0,
            value,
            deriv,
        })
    }

    pub fn with_log_scale(mut self, log_scale: f64) -> Self {
        self.log_scale = log_scale;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn coeffs(&self) -> &[[C64; 2]] {
        &self.coeffs
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn value(&self, e: EdgeId, t: f64) -> C64 {
        self.value[e.0].eval(t)
    }

    pub fn derivative(&self, e: EdgeId, t: f64) -> C64 {
        self.deriv[e.0].eval(t)
    }

    pub fn value_poly(&self, e: EdgeId) -> &ExpPoly {
        &self.value[e.0]
    }

    pub fn deriv_poly(&self, e: EdgeId) -> &ExpPoly {
        &self.deriv[e.0]
    }

    pub fn scaled(&self, c: C64) -> ExactFunction {
        ExactFunction {
            lambda: self.lambda,
            coeffs: self.coeffs.iter().map(|[a, b]| [a * c, b * c]).collect(),
            lengths: self.lengths.clone(),
            log_scale: self.log_scale,
            value: self.value.iter().map(|p| p.scale(c)).collect(),
            deriv: self.deriv.iter().map(|p| p.scale(c)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PiecewiseFunction {
    Nodal(NodalFunction),
    Exact(ExactFunction),
}

impl From<NodalFunction> for PiecewiseFunction {
    fn from(f: NodalFunction) -> Self {
        PiecewiseFunction::Nodal(f)
    }
}

impl From<ExactFunction> for PiecewiseFunction {
    fn from(f: ExactFunction) -> Self {
        PiecewiseFunction::Exact(f)
    }
}

/// A function restricted to one smooth piece `[a, b]` of an edge, in the
/// local variable `s = t - a`.
#[derive(Debug, Clone)]
pub struct Local {
    pub value: ExpPoly,
    pub deriv: ExpPoly,
}

impl PiecewiseFunction {
    pub fn num_edges(&self) -> usize {
        match self {
            PiecewiseFunction::Nodal(f) => f.mesh.num_edges(),
            PiecewiseFunction::Exact(f) => f.coeffs.len(),
        }
    }

    pub fn value(&self, e: EdgeId, t: f64) -> C64 {
        match self {
            PiecewiseFunction::Nodal(f) => f.value(e, t),
            PiecewiseFunction::Exact(f) => f.value(e, t),
        }
    }

    /// Derivative in the edge direction (one-sided from the cell containing
    /// `t` for nodal functions).
    pub fn derivative(&self, e: EdgeId, t: f64) -> C64 {
        match self {
            PiecewiseFunction::Nodal(f) => f.slope(e, t),
            PiecewiseFunction::Exact(f) => f.derivative(e, t),
        }
    }

    pub fn as_nodal(&self) -> Option<&NodalFunction> {
        match self {
            PiecewiseFunction::Nodal(f) => Some(f),
            PiecewiseFunction::Exact(_) => None,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactFunction> {
        match self {
            PiecewiseFunction::Exact(f) => Some(f),
            PiecewiseFunction::Nodal(_) => None,
        }
    }

    /// Nodal interpolant on `mesh`.
    pub fn interpolate(&self, mesh: Arc<Mesh>) -> NodalFunction {
        match self {
            PiecewiseFunction::Nodal(f) if Arc::ptr_eq(&f.mesh, &mesh) || *f.mesh == *mesh => {
                f.clone()
            }
            _ => NodalFunction::interpolate(mesh, |e, t| self.value(e, t)),
        }
    }

    pub fn scaled(&self, c: C64) -> PiecewiseFunction {
        match self {
            PiecewiseFunction::Nodal(f) => PiecewiseFunction::Nodal(f.map(|x| x * c)),
            PiecewiseFunction::Exact(f) => PiecewiseFunction::Exact(f.scaled(c)),
        }
    }

    /// Breakpoints strictly inside `(a, b)` on edge `e`.
    fn push_breaks(&self, e: EdgeId, a: f64, b: f64, out: &mut Vec<f64>) {
        if let PiecewiseFunction::Nodal(f) = self {
            let h = f.mesh.cell_size(e);
            let n = f.mesh.cells(e);
            let first = (a / h).floor().max(0.0) as usize;
            for k in first..=n {
                let t = f.mesh.position(e, k);
                if t >= b {
                    break;
                }
                if t > a {
                    out.push(t);
                }
            }
        }
    }

    fn local(&self, e: EdgeId, a: f64, b: f64) -> Local {
        match self {
            PiecewiseFunction::Nodal(f) => {
                let (k, _) = f.mesh.locate(e, 0.5 * (a + b));
                let slope = f.cell_slope(e, k);
                let va = f.node_value(e, k) + slope * (a - f.mesh.position(e, k));
                Local {
                    value: ExpPoly::linear(va, slope),
                    deriv: ExpPoly::constant(slope),
                }
            }
            PiecewiseFunction::Exact(f) => Local {
                value: f.value[e.0].shifted(a),
                deriv: f.deriv[e.0].shifted(a),
            },
        }
    }
}

fn check_edges(region: &Region, funcs: &[&PiecewiseFunction]) -> Result<()> {
    for f in funcs {
        if f.num_edges() != region.num_edges() {
            return Err(Error::MeshMismatch(format!(
                "function on {} edges, region on {}",
                f.num_edges(),
                region.num_edges()
            )));
        }
    }
    Ok(())
}

/// `∫_region F dm` where on each smooth piece `[a, b]` of edge `e` the
/// integrand is the exponential polynomial (in `s = t - a`) returned by
/// `integrand(e, a, b, locals)`. Pieces are delimited by the region, the
/// breakpoints of every function and the optional per-edge `extra` points.
pub fn integrate_with<F>(
    region: &Region,
    funcs: &[&PiecewiseFunction],
    extra: Option<&[Vec<f64>]>,
    mut integrand: F,
) -> Result<C64>
where
    F: FnMut(EdgeId, f64, f64, &[Local]) -> ExpPoly,
{
    check_edges(region, funcs)?;
    let mut total = ZERO;
    let mut pts = Vec::new();
    let mut locals = Vec::with_capacity(funcs.len());
    for (e, iv) in region.iter() {
        if iv.end <= iv.start {
            continue;
        }
        pts.clear();
        pts.push(iv.start);
        pts.push(iv.end);
        for f in funcs {
            f.push_breaks(e, iv.start, iv.end, &mut pts);
        }
        if let Some(extra) = extra {
            pts.extend(
                extra[e.0]
                    .iter()
                    .copied()
                    .filter(|&t| t > iv.start && t < iv.end),
            );
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            locals.clear();
            locals.extend(funcs.iter().map(|f| f.local(e, a, b)));
            total += integrand(e, a, b, &locals).integrate_from_zero(b - a);
        }
    }
    Ok(total)
}

/// `∫_a |u|² dm`.
pub fn integrate_sq(u: &PiecewiseFunction, a: &Region) -> Result<f64> {
    if let PiecewiseFunction::Nodal(f) = u {
        check_edges(a, &[u])?;
        return Ok(nodal_cells(f, a, |p, q, _, w| {
            w * (p.norm_sqr() + (p * q.conj()).re + q.norm_sqr()) / 3.0
        }));
    }
    Ok(integrate_with(a, &[u], None, |_, _, _, l| {
        l[0].value.mul(&l[0].value.conj())
    })?
    .re
    .max(0.0))
}

/// `∫_a dΓ(u) = ∫_a |u'|² dm`.
pub fn integrate_energy(u: &PiecewiseFunction, a: &Region) -> Result<f64> {
    if let PiecewiseFunction::Nodal(f) = u {
        check_edges(a, &[u])?;
        return Ok(nodal_cells(f, a, |_, _, slope, w| w * slope.norm_sqr()));
    }
    Ok(integrate_with(a, &[u], None, |_, _, _, l| {
        l[0].deriv.mul(&l[0].deriv.conj())
    })?
    .re
    .max(0.0))
}

/// `∫_a dΓ(u, v) = ∫_a u' v̄' dm`.
pub fn mixed_energy(u: &PiecewiseFunction, v: &PiecewiseFunction, a: &Region) -> Result<C64> {
    if let (PiecewiseFunction::Nodal(f), PiecewiseFunction::Nodal(g)) = (u, v) {
        same_mesh(&f.mesh, &g.mesh)?;
    }
    integrate_with(a, &[u, v], None, |_, _, _, l| {
        l[0].deriv.mul(&l[1].deriv.conj())
    })
}

/// `∫_a u v̄ dm`.
pub fn inner_product(u: &PiecewiseFunction, v: &PiecewiseFunction, a: &Region) -> Result<C64> {
    if let (PiecewiseFunction::Nodal(f), PiecewiseFunction::Nodal(g)) = (u, v) {
        same_mesh(&f.mesh, &g.mesh)?;
    }
    integrate_with(a, &[u, v], None, |_, _, _, l| {
        l[0].value.mul(&l[1].value.conj())
    })
}

/// Sum over the mesh cells meeting `region` of `f(p, q, slope, width)`, with
/// `p, q` the values at the ends of each (possibly clipped) piece.
fn nodal_cells(f: &NodalFunction, region: &Region, cell: impl Fn(C64, C64, C64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for (e, iv) in region.iter() {
        if iv.end <= iv.start {
            continue;
        }
        let h = f.mesh.cell_size(e);
        let n = f.mesh.cells(e);
        let (k0, _) = f.mesh.locate(e, iv.start);
        for k in k0..n {
            let t0 = f.mesh.position(e, k);
            let t1 = f.mesh.position(e, k + 1);
            if t0 >= iv.end {
                break;
            }
            let a = t0.max(iv.start);
            let b = t1.min(iv.end);
            if b <= a {
                continue;
            }
            let v0 = f.node_value(e, k);
            let slope = (f.node_value(e, k + 1) - v0) / h;
            let p = v0 + slope * (a - t0);
            let q = v0 + slope * (b - t0);
            total += cell(p, q, slope, b - a);
        }
    }
    total
}

/// `dΓ(u)/dm = |u_e'|²` on each edge.
#[derive(Debug, Clone)]
pub enum EnergyDensity {
    /// `cells[e][k]` is the constant density on cell `k` of edge `e`.
    Cells { mesh: Arc<Mesh>, cells: Vec<Vec<f64>> },
    Exact(Vec<ExpPoly>),
}

impl EnergyDensity {
    pub fn at(&self, e: EdgeId, t: f64) -> f64 {
        match self {
            EnergyDensity::Cells { mesh, cells } => cells[e.0][mesh.locate(e, t).0],
            EnergyDensity::Exact(d) => d[e.0].eval(t).re.max(0.0),
        }
    }
}

pub fn energy_density(u: &PiecewiseFunction) -> EnergyDensity {
    match u {
        PiecewiseFunction::Nodal(f) => {
            let cells = (0..f.mesh.num_edges())
                .map(EdgeId)
                .map(|e| {
                    (0..f.mesh.cells(e))
                        .map(|k| f.cell_slope(e, k).norm_sqr())
                        .collect()
                })
                .collect();
            EnergyDensity::Cells {
                mesh: f.mesh.clone(),
                cells,
            }
        }
        PiecewiseFunction::Exact(f) => {
            EnergyDensity::Exact(f.deriv.iter().map(|d| d.mul(&d.conj())).collect())
        }
    }
}

/// `J(r) = ∫_{B(x₀, r)} |u|² dm` sampled at increasing radii.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    pub center: GraphPoint,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl GrowthProfile {
    /// Profile from given samples (for analysis of externally computed `J`).
    pub fn from_samples(center: GraphPoint, radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::invalid("radii and values differ in length"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("radii must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) || values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("J must be nonnegative and nondecreasing"));
        }
        Ok(GrowthProfile {
            center,
            radii,
            values,
        })
    }
}

pub fn growth_function(
    g: &MetricGraph,
    u: &PiecewiseFunction,
    x0: GraphPoint,
    radii: &[f64],
) -> Result<GrowthProfile> {
    let x0 = g.check_point(x0)?;
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::invalid("radii must be nonnegative and strictly increasing"));
    }
    let field = DistanceField::from_point(g, x0)?;
    let horizon = field.horizon();
    if let Some(&r) = radii.iter().find(|&&r| r > horizon) {
        return Err(Error::BeyondHorizon { radius: r, horizon });
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut prev: f64 = 0.0;
    for &r in radii {
        let j = integrate_sq(u, &field.sublevel(r))?;
        // balls are nested, so J only decreases by rounding
        prev = prev.max(j);
        values.push(prev);
    }
    Ok(GrowthProfile {
        center: x0,
        radii: radii.to_vec(),
        values,
    })
}

/// `‖e^{-α ρ(x₀, ·)} u‖` over the truncated graph.
pub fn weighted_norm(
    g: &MetricGraph,
    u: &PiecewiseFunction,
    x0: GraphPoint,
    alpha: f64,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let field = DistanceField::from_point(g, x0)?;
    let kinks: Vec<Vec<f64>> = g.edge_ids().map(|e| field.kinks(e)).collect();
    let whole = Region::whole(g);
    let total = integrate_with(&whole, &[u], Some(&kinks), |e, a, b, l| {
        let wa = field.at(e, a);
        if !wa.is_finite() {
            return ExpPoly::zero();
        }
        let slope = (field.at(e, b) - wa) / (b - a);
        let weight = ExpPoly::exponential(
            C64::new((-2.0 * alpha * wa).exp(), 0.0),
            C64::new(-2.0 * alpha * slope, 0.0),
        );
        l[0].value.mul(&l[0].value.conj()).mul(&weight)
    })?;
    Ok(total.re.max(0.0).sqrt())
}

/// Convenience: `‖u χ_{B(x₀, r)}‖²`.
pub fn ball_mass(g: &MetricGraph, u: &PiecewiseFunction, x0: GraphPoint, r: f64) -> Result<f64> {
    integrate_sq(u, &ball(g, x0, r)?)
}

/// Table with columns `edge, t, re, im`. Nodal functions are listed at their
/// mesh nodes; exact functions at `samples + 1` equispaced points per edge.
pub fn function_table(g: &MetricGraph, u: &PiecewiseFunction, samples: usize) -> Table {
    let mut table = Table::new(&["edge", "t", "re", "im"]);
    for e in g.edge_ids() {
        let label = &g.edge(e).label;
        let samples_at: Vec<(f64, C64)> = match u {
            PiecewiseFunction::Nodal(f) => (0..=f.mesh.cells(e))
                .map(|k| (f.mesh.position(e, k), f.node_value(e, k)))
                .collect(),
            PiecewiseFunction::Exact(f) => {
                let l = g.effective_length(e);
                let n = samples.max(1);
                (0..=n)
                    .map(|k| if k == n { l } else { l * k as f64 / n as f64 })
                    .map(|t| (t, f.value(e, t)))
                    .collect()
            }
        };
        for (t, v) in samples_at {
            table.push(vec![label.as_str().into(), t.into(), v.re.into(), v.im.into()]);
        }
    }
    table
}

/// Reads a nodal function written by [`function_table`]. Every degree of
/// freedom must be listed; values at shared vertices must agree.
pub fn nodal_from_table(g: &MetricGraph, mesh: Arc<Mesh>, table: &Table) -> Result<NodalFunction> {
    let (ce, ct, cr, ci) = (
        table.column("edge")?,
        table.column("t")?,
        table.column("re")?,
        table.column("im")?,
    );
    let mut values = vec![None::<C64>; mesh.num_nodes()];
    for row in 0..table.rows.len() {
        let label = table.text(row, ce);
        let e = g
            .edge_by_label(&label)
            .ok_or_else(|| Error::invalid(format!("row {}: unknown edge '{label}'", row + 1)))?;
        let t = table.float(row, ct)?;
        let h = mesh.cell_size(e);
        let k = (t / h).round();
        if !(k >= 0.0 && k as usize <= mesh.cells(e)) || (t - k * h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::MeshMismatch(format!(
                "row {}: t = {t} is not a node of edge '{label}'",
                row + 1
            )));
        }
        let node = mesh.node(e, k as usize);
        let v = C64::new(table.float(row, cr)?, table.float(row, ci)?);
        if let Some(old) = values[node] {
            if (old - v).norm() > 1e-12 * (1.0 + old.norm()) {
                return Err(Error::invalid(format!(
                    "row {}: conflicting value at a shared vertex",
                    row + 1
                )));
            }
        }
        values[node] = Some(v);
    }
    let mut out = Vec::with_capacity(values.len());
    for (node, v) in values.into_iter().enumerate() {
        match v {
            Some(v) => out.push(v),
            None if !mesh.is_dof(node) => out.push(ZERO),
            None => return Err(Error::MeshMismatch(format!("no value for node {node}"))),
        }
    }
    NodalFunction::new(mesh, out)
}
