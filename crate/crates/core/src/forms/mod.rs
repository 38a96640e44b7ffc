//! The discretized form `h = ℰ + μ` on continuous piecewise-linear elements,
//! form-boundedness of `μ₋`, and the Caccioppoli constant.
//!
//! Vertex unknowns are shared by all incident edges, so continuity holds by
//! construction and the Kirchhoff/δ conditions are natural: `α_v` enters
//! only as a point mass at `v`.

mod measure;

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

pub use measure::{DensitySpec, EdgeDensity, MeasurePerturbation, MeasureSpec, PointMass, PointMassSpec};

use crate::error::{Error, Result};
use crate::function_space::Mesh;
use crate::linalg::{dense_generalized_eigen, CsrMatrix, Ldl};
use crate::metric_graph::{GraphPoint, MetricGraph};
use crate::table::Table;

/// `μ₋(u) ≤ κ ℰ(u) + c_κ ‖u‖²` on the discrete space, found at shift `c`
/// with `c_κ = κ c`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FormBound {
    pub kappa: f64,
    pub c_kappa: f64,
    /// The shift `c` at which `κ` was evaluated.
    pub shift: f64,
    /// `κ < 1` was found for some admissible shift.
    pub admissible: bool,
}

impl FormBound {
    pub const ZERO: FormBound = FormBound {
        kappa: 0.0,
        c_kappa: 0.0,
        shift: 0.0,
        admissible: true,
    };
}

/// Stiffness, mass and perturbation matrices on the degrees of freedom of a
/// mesh. `P = P₊ − P₋` with both parts nonnegative.
#[derive(Debug)]
pub struct FormMatrices {
    pub mesh: Arc<Mesh>,
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub p_plus: CsrMatrix,
    pub p_minus: CsrMatrix,
    bound: OnceLock<FormBound>,
    norm_factor: OnceLock<Ldl>,
}

impl Clone for FormMatrices {
    fn clone(&self) -> Self {
        FormMatrices {
            mesh: self.mesh.clone(),
            k: self.k.clone(),
            m: self.m.clone(),
            p_plus: self.p_plus.clone(),
            p_minus: self.p_minus.clone(),
            bound: self.bound.clone(),
            norm_factor: self.norm_factor.clone(),
        }
    }
}

impl FormMatrices {
    /// Builds from raw matrices (all of dimension `mesh.num_dofs()`).
    pub fn from_parts(
        mesh: Arc<Mesh>,
        k: CsrMatrix,
        m: CsrMatrix,
        p_plus: CsrMatrix,
        p_minus: CsrMatrix,
    ) -> Result<Self> {
        let n = mesh.num_dofs();
        if [&k, &m, &p_plus, &p_minus].iter().any(|a| a.dim() != n) {
            return Err(Error::MeshMismatch("matrix dimensions differ from the dof count".into()));
        }
        Ok(FormMatrices {
            mesh,
            k,
            m,
            p_plus,
            p_minus,
            bound: OnceLock::new(),
            norm_factor: OnceLock::new(),
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.k.dim()
    }

    pub fn p(&self) -> CsrMatrix {
        self.p_plus.combine(1.0, &self.p_minus, -1.0)
    }

    /// `K + P`.
    pub fn h(&self) -> CsrMatrix {
        self.k
            .combine(1.0, &self.p_plus, 1.0)
            .combine(1.0, &self.p_minus, -1.0)
    }

    /// `K + P − σ M`.
    pub fn shifted(&self, sigma: f64) -> CsrMatrix {
        self.h().combine(1.0, &self.m, -sigma)
    }

    /// Form bound of `P₋`, computed once.
    pub fn form_bound(&self) -> Result<FormBound> {
        if let Some(b) = self.bound.get() {
            return Ok(*b);
        }
        let b = estimate_form_bound(self, &self.p_minus)?;
        Ok(*self.bound.get_or_init(|| b))
    }

    /// `N = K + P₊ + (1 + c_κ) M`, the matrix of the norm dual to the form
    /// norm.
    pub fn norm_matrix(&self) -> Result<CsrMatrix> {
        let b = self.form_bound()?;
        if !b.admissible {
            return Err(Error::Config(format!(
                "μ₋ is not form bounded with bound below one (best κ = {:.6}); the dual norm \
                 is undefined",
                b.kappa
            )));
        }
        Ok(self
            .k
            .combine(1.0, &self.p_plus, 1.0)
            .combine(1.0, &self.m, 1.0 + b.c_kappa))
    }

    pub(crate) fn norm_factor(&self) -> Result<&Ldl> {
        if let Some(f) = self.norm_factor.get() {
            return Ok(f);
        }
        let n = self.norm_matrix()?;
        let f = Ldl::factor(&n, "dual norm matrix").map_err(|_| {
            Error::Config("the norm matrix K + P₊ + (1 + c_κ)M is not positive definite".into())
        })?;
        if f.negative_pivots() > 0 {
            return Err(Error::Config(
                "the norm matrix K + P₊ + (1 + c_κ)M is not positive definite".into(),
            ));
        }
        Ok(self.norm_factor.get_or_init(|| f))
    }

    /// Coordinate listing `row, col, value` of one of the matrices.
    pub fn coordinate_table(a: &CsrMatrix) -> Table {
        let mut t = Table::new(&["row", "col", "value"]);
        for (i, j, v) in a.triplets() {
            t.push(vec![i.into(), j.into(), v.into()]);
        }
        t
    }
}

/// Element matrices on a cell of size `h`.
fn element_stiffness(h: f64) -> [[f64; 2]; 2] {
    [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]]
}

fn element_mass(h: f64) -> [[f64; 2]; 2] {
    [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]]
}

/// `∫ V φ_a φ_b` for `V` linear with end values `v0, v1`.
fn element_density(h: f64, v0: f64, v1: f64) -> [[f64; 2]; 2] {
    let off = h / 12.0 * (v0 + v1);
    [[h / 12.0 * (3.0 * v0 + v1), off], [off, h / 12.0 * (v0 + 3.0 * v1)]]
}

pub fn assemble(g: &MetricGraph, mesh: Arc<Mesh>, mu: &MeasurePerturbation) -> Result<FormMatrices> {
    if mesh.num_edges() != g.num_edges() || mesh.num_vertices() != g.num_vertices() {
        return Err(Error::MeshMismatch("mesh was built for a different graph".into()));
    }
    mu.validate(g)?;
    let n = mesh.num_dofs();
    let total = mu.with_vertex_couplings(g);
    let (plus, minus) = total.split();
    let mut k = Vec::new();
    let mut m = Vec::new();
    let push = |list: &mut Vec<(usize, usize, f64)>, nodes: [usize; 2], el: [[f64; 2]; 2]| {
        for a in 0..2 {
            for b in 0..2 {
                if nodes[a] < n && nodes[b] < n {
                    list.push((nodes[a], nodes[b], el[a][b]));
                }
            }
        }
    };
    for e in g.edge_ids() {
        let h = mesh.cell_size(e);
        for c in 0..mesh.cells(e) {
            let nodes = [mesh.node(e, c), mesh.node(e, c + 1)];
            push(&mut k, nodes, element_stiffness(h));
            push(&mut m, nodes, element_mass(h));
        }
    }
    let perturbation = |part: &MeasurePerturbation| {
        let mut list = Vec::new();
        for p in &part.point_masses {
            match p.point {
                GraphPoint::Vertex(v) => list.push((v.0, v.0, p.weight)),
                GraphPoint::Edge { edge, offset } => {
                    let (c, s) = mesh.locate(edge, offset);
                    let h = mesh.cell_size(edge);
                    let phi = [1.0 - s / h, s / h];
                    let nodes = [mesh.node(edge, c), mesh.node(edge, c + 1)];
                    for a in 0..2 {
                        for b in 0..2 {
                            if nodes[a] < n && nodes[b] < n {
                                list.push((nodes[a], nodes[b], p.weight * phi[a] * phi[b]));
                            }
                        }
                    }
                }
            }
        }
        for d in &part.densities {
            let e = d.edge;
            let h = mesh.cell_size(e);
            let l = mesh.length(e);
            for c in 0..mesh.cells(e) {
                let v0 = d.value_at(l, mesh.position(e, c));
                let v1 = d.value_at(l, mesh.position(e, c + 1));
                let nodes = [mesh.node(e, c), mesh.node(e, c + 1)];
                let el = element_density(h, v0, v1);
                for a in 0..2 {
                    for b in 0..2 {
                        if nodes[a] < n && nodes[b] < n {
                            list.push((nodes[a], nodes[b], el[a][b]));
                        }
                    }
                }
            }
        }
        CsrMatrix::from_triplets(n, list)
    };
    let p_plus = perturbation(&plus);
    let p_minus = perturbation(&minus);
    FormMatrices::from_parts(
        mesh,
        CsrMatrix::from_triplets(n, k),
        CsrMatrix::from_triplets(n, m),
        p_plus,
        p_minus,
    )
}

/// Shifts tried for the form bound: `2^k`, `k = -10..=20`.
const SHIFT_EXPONENTS: std::ops::RangeInclusive<i32> = -10..=20;
/// Shifts above this multiple of the largest element eigenvalue `12/h²`
/// would only resolve the mesh, not the measure, and are not used.
const SHIFT_CAP_FRACTION: f64 = 1e-3;
/// `κ` must stay this far below one to count as a bound "less than one".
const KAPPA_MARGIN: f64 = 1e-2;

/// `κ(c) = max_u P₋(u) / (K(u) + c M(u))`, the smallest sufficient `κ` at
/// shift `c`.
pub fn kappa_at(fm: &FormMatrices, p_minus: &CsrMatrix, c: f64) -> Result<f64> {
    let n = fm.num_dofs();
    let support: Vec<usize> = (0..n).filter(|&i| p_minus.row(i).any(|(_, v)| v != 0.0)).collect();
    if support.is_empty() {
        return Ok(0.0);
    }
    let a = fm.k.combine(1.0, &fm.m, c);
    let f = Ldl::factor(&a, "form-bound shift")?;
    if support.len() <= 200 {
        // κ is the top eigenvalue of G_SS P_SS with G = (K + cM)⁻¹, exactly
        let s = support.len();
        let mut gss = DMatrix::zeros(s, s);
        for (col, &j) in support.iter().enumerate() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let x = f.solve(&e);
            for (row, &i) in support.iter().enumerate() {
                gss[(row, col)] = x[i];
            }
        }
        let gss = (&gss + gss.transpose()) * 0.5;
        let mut pss = DMatrix::zeros(s, s);
        for (row, &i) in support.iter().enumerate() {
            for (col, &j) in support.iter().enumerate() {
                pss[(row, col)] = p_minus.get(i, j);
            }
        }
        let l = gss
            .cholesky()
            .ok_or_else(|| Error::Factorization {
                stage: "form-bound reduction",
                pivot: 0,
                hint: "K + cM is not positive definite on the support of μ₋".into(),
            })?
            .l();
        let reduced = l.transpose() * pss * &l;
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let eig = SymmetricEigen::new(reduced);
        return Ok(eig.eigenvalues.iter().copied().fold(0.0, f64::max));
    }
    // power iteration on (K + cM)⁻¹ P₋
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618).fract()).collect();
    let mut last = 0.0;
    for _ in 0..5000 {
        let y = f.solve(&p_minus.mul_vec(&x));
        let num = p_minus.quad(&y);
        let den = a.quad(&y);
        let rq = if den > 0.0 { num / den } else { 0.0 };
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|v| v / norm).collect();
        if (rq - last).abs() <= 1e-13 * rq.abs() {
            return Ok(rq);
        }
        last = rq;
    }
    Ok(last)
}

/// Scans shifts `c = 2^k` and returns the smallest `c` with `κ(c) ≤ 1/2`,
/// else the smallest with `κ(c) < 1`; if none, the bound is reported as
/// inadmissible with the smallest `κ` seen. `μ₋ = 0` gives `κ = c_κ = 0`.
pub fn estimate_form_bound(fm: &FormMatrices, p_minus: &CsrMatrix) -> Result<FormBound> {
    if p_minus.triplets().all(|(_, _, v)| v == 0.0) {
        return Ok(FormBound::ZERO);
    }
    let h_min = (0..fm.mesh.num_edges())
        .map(|e| fm.mesh.cell_size(crate::metric_graph::EdgeId(e)))
        .fold(f64::INFINITY, f64::min);
    let cap = SHIFT_CAP_FRACTION * 12.0 / (h_min * h_min);
    let mut best: Option<FormBound> = None;
    let mut first_below_one: Option<FormBound> = None;
    for k in SHIFT_EXPONENTS {
        let c = 2f64.powi(k);
        if c > cap && k > *SHIFT_EXPONENTS.start() {
            break;
        }
        let kappa = kappa_at(fm, p_minus, c)?;
        let candidate = FormBound {
            kappa,
            c_kappa: kappa * c,
            shift: c,
            admissible: kappa < 1.0 - KAPPA_MARGIN,
        };
        if kappa <= 0.5 {
            return Ok(candidate);
        }
        if candidate.admissible && first_below_one.is_none() {
            first_below_one = Some(candidate);
        }
        if best.is_none_or(|b| kappa < b.kappa) {
            best = Some(candidate);
        }
    }
    Ok(first_below_one.unwrap_or_else(|| best.expect("at least one shift is tried")))
}

/// Proof constant of the Caccioppoli inequality
/// `∫_E dΓ(u) ≤ (C/b²) ∫_{B_b(E)} |u|²` for `b ≤ 1`, given
/// `μ₋ ≤ q ℰ + C_q ‖·‖²` and spectral parameter `λ ≤ λ₀`:
/// `C = min_S [4(q + (1−q)/S²) + max(λ₀ + C_q, 0)] / ((1−q)(1−S²))` over a
/// grid of `10⁴` points in `(0, 1)`.
pub fn caccioppoli_constant(lambda0: f64, q: f64, c_q: f64) -> Result<f64> {
    Ok(caccioppoli_minimizer(lambda0, q, c_q)?.0)
}

/// The constant together with the minimizing `S`.
pub fn caccioppoli_minimizer(lambda0: f64, q: f64, c_q: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::invalid(format!("q must lie in [0, 1), got {q}")));
    }
    if !lambda0.is_finite() || !c_q.is_finite() {
        return Err(Error::invalid("λ₀ and C_q must be finite"));
    }
    const GRID: usize = 10_000;
    let zeroth = (lambda0 + c_q).max(0.0);
    let mut best = (f64::INFINITY, 0.0);
    for k in 1..=GRID {
        let s = k as f64 / (GRID + 1) as f64;
        let s2 = s * s;
        let c = (4.0 * (q + (1.0 - q) / s2) + zeroth) / ((1.0 - q) * (1.0 - s2));
        if c < best.0 {
            best = (c, s);
        }
    }
    Ok(best)
}

/// Dense reference eigenvalues of `(K + P, M)` (small problems only).
pub fn dense_spectrum(fm: &FormMatrices) -> Result<Vec<f64>> {
    Ok(dense_generalized_eigen(&fm.h().to_dense(), &fm.m.to_dense())?.values)
}

#[cfg(test)]
mod tests;
