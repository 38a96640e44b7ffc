//! Cutoff-based Weyl sequences and certification that `λ` lies in the
//! spectrum, driven by a subexponentially bounded generalized eigenfunction.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::eigensolver::weyl_residual;
use crate::exp_poly::ExpPoly;
use crate::forms::{FormMatrices, MeasurePerturbation};
use crate::function_space::{
    growth_function, integrate_energy, integrate_sq, integrate_with, ExactFunction, GrowthProfile,
    Mesh, NodalFunction, PiecewiseFunction,
};
use crate::metric_graph::{
    ball, collar, neighborhood, DistanceField, GraphPoint, MetricGraph, Region,
};
use crate::table::{Cell, Table};
use crate::{Error, Result};

/// Cells per cutoff width required on every edge meeting the transition zone.
pub const CELLS_PER_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// `ζ(t) = max(0, 1 − t/b)`.
    #[default]
    Linear,
    /// `ζ(t) = 1 − 3τ² + 2τ³`, `τ = t/b`: C¹ with slope at most `3/(2b)`.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub b: f64,
    pub kind: ProfileKind,
}

impl CutoffProfile {
    pub fn new(b: f64, kind: ProfileKind) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!("cutoff width must be positive, got {b}")));
        }
        Ok(CutoffProfile { b, kind })
    }

    pub fn linear(b: f64) -> Result<Self> {
        Self::new(b, ProfileKind::Linear)
    }

    /// `ζ(t)` for `t ≥ 0`.
    pub fn eval(&self, t: f64) -> f64 {
        let tau = (t / self.b).clamp(0.0, 1.0);
        match self.kind {
            ProfileKind::Linear => 1.0 - tau,
            ProfileKind::Smooth => 1.0 - tau * tau * (3.0 - 2.0 * tau),
        }
    }

    pub fn max_slope(&self) -> f64 {
        match self.kind {
            ProfileKind::Linear => 1.0 / self.b,
            ProfileKind::Smooth => 1.5 / self.b,
        }
    }
}

/// `η = ζ ∘ ρ_E` interpolated on `mesh`.
pub fn make_cutoff(
    g: &MetricGraph,
    mesh: &Arc<Mesh>,
    e_set: &Region,
    profile: &CutoffProfile,
) -> Result<NodalFunction> {
    if e_set.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if mesh.num_edges() != g.num_edges() {
        return Err(Error::MeshMismatch("mesh belongs to another graph".into()));
    }
    let zone = collar(g, e_set, profile.b)?;
    let required = profile.b / CELLS_PER_WIDTH;
    for e in g.edge_ids() {
        let h = mesh.cell_size(e);
        if !zone.intervals_on(e).is_empty() && h > required * (1.0 + 1e-12) {
            return Err(Error::MeshTooCoarse {
                edge: g.edge(e).label.clone(),
                cell_size: h,
                required,
            });
        }
    }
    let field = DistanceField::from_region(g, e_set)?;
    Ok(NodalFunction::interpolate(mesh.clone(), |e, t| {
        // exact on the set itself, independent of rounding in ρ_E
        if g.point_on_edge(e, t).is_ok_and(|p| e_set.contains(g, p)) {
            return C64::new(1.0, 0.0);
        }
        let d = field.at(e, t);
        C64::new(if d.is_finite() { profile.eval(d) } else { 0.0 }, 0.0)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Largest admissible final collar/core ratio.
    pub ratio: f64,
    /// Largest admissible final Weyl residual.
    pub residual: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            ratio: 0.2,
            residual: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Inconclusive,
}

/// Relative slack when testing that the ratios do not increase.
const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchnolCertificate {
    pub lambda: f64,
    pub b: f64,
    pub profile: ProfileKind,
    /// Ball radii (`NaN` when the sets were supplied directly).
    pub radii: Vec<f64>,
    /// `‖u χ_{E_n}‖`.
    pub core_masses: Vec<f64>,
    /// `‖u χ_{A_{3b}(E_n)}‖`.
    pub collar_masses: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Form Weyl residual of `u_n = η_n² u / ‖η_n² u‖`.
    pub residuals: Vec<f64>,
    /// `residual / ratio` where the ratio is positive.
    pub quotients: Vec<Option<f64>>,
    /// `max / min` of the quotients.
    pub quotient_spread: Option<f64>,
    /// `J(r_n + 3b) / J(r_n − 3b)`.
    pub growth_ratios: Vec<f64>,
    /// `(J(r_n + 3b) − J(r_n − 3b)) / J(r_n)`.
    pub growth_increments: Vec<f64>,
    pub ratios_monotone: bool,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
    pub horizon: f64,
    pub truncation_note: String,
    pub discretization_note: String,
    pub warnings: Vec<String>,
}

impl SchnolCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Columns `n, r_n, core_mass, collar_mass, ratio, residual`.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "r_n", "core_mass", "collar_mass", "ratio", "residual"]);
        for n in 0..self.ratios.len() {
            t.push(vec![
                Cell::Int(n as i64 + 1),
                self.radii.get(n).copied().unwrap_or(f64::NAN).into(),
                self.core_masses[n].into(),
                self.collar_masses[n].into(),
                self.ratios[n].into(),
                self.residuals[n].into(),
            ]);
        }
        t
    }

    fn decide(&mut self) {
        self.ratios_monotone = self
            .ratios
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + MONOTONE_TOL) + MONOTONE_TOL);
        let positive: Vec<f64> = self.quotients.iter().flatten().copied().collect();
        self.quotient_spread = if positive.is_empty() {
            None
        } else {
            let max = positive.iter().copied().fold(0.0, f64::max);
            let min = positive.iter().copied().fold(f64::INFINITY, f64::min);
            Some(max / min)
        };
        let ok = match (self.ratios.last(), self.residuals.last()) {
            (Some(&ratio), Some(&res)) => {
                self.ratios_monotone
                    && ratio <= self.thresholds.ratio
                    && res <= self.thresholds.residual
            }
            _ => false,
        };
        self.verdict = if ok {
            Verdict::Certified
        } else {
            Verdict::Inconclusive
        };
    }
}

fn nodal_on(fm: &FormMatrices, u: &PiecewiseFunction) -> Result<NodalFunction> {
    match u {
        PiecewiseFunction::Nodal(f) => {
            if f.mesh().num_nodes() != fm.mesh.num_nodes() {
                return Err(Error::MeshMismatch(
                    "nodal function lives on a different mesh".into(),
                ));
            }
            Ok(f.clone())
        }
        PiecewiseFunction::Exact(_) => Ok(u.interpolate(fm.mesh.clone())),
    }
}

/// Weyl sequence `u_n = η_n² u / ‖η_n² u‖_M` for increasing sets `E_n`,
/// with masses, collar ratios and residuals assembled into a certificate.
#[allow(clippy::too_many_arguments)]
pub fn weyl_sequence(
    g: &MetricGraph,
    fm: &FormMatrices,
    u: &PiecewiseFunction,
    lambda: f64,
    e_sets: &[Region],
    profile: &CutoffProfile,
    thresholds: &Thresholds,
) -> Result<SchnolCertificate> {
    Ok(sequence(g, fm, u, lambda, e_sets, profile, thresholds)?.0)
}

/// The certificate and the indices of the sets that were not skipped.
fn sequence(
    g: &MetricGraph,
    fm: &FormMatrices,
    u: &PiecewiseFunction,
    lambda: f64,
    e_sets: &[Region],
    profile: &CutoffProfile,
    thresholds: &Thresholds,
) -> Result<(SchnolCertificate, Vec<usize>)> {
    if u.num_edges() != g.num_edges() {
        return Err(Error::MeshMismatch("function lives on another graph".into()));
    }
    for (k, w) in e_sets.windows(2).enumerate() {
        if !w[0].is_subset_of(&w[1], 1e-12) {
            return Err(Error::invalid(format!("sets {k} and {} are not nested", k + 1)));
        }
    }
    let uh = nodal_on(fm, u)?;
    let mut cert = SchnolCertificate {
        lambda,
        b: profile.b,
        profile: profile.kind,
        radii: Vec::new(),
        core_masses: Vec::new(),
        collar_masses: Vec::new(),
        ratios: Vec::new(),
        residuals: Vec::new(),
        quotients: Vec::new(),
        quotient_spread: None,
        growth_ratios: Vec::new(),
        growth_increments: Vec::new(),
        ratios_monotone: true,
        thresholds: *thresholds,
        verdict: Verdict::Inconclusive,
        horizon: f64::NAN,
        truncation_note: String::new(),
        discretization_note: format!(
            "residuals are measured for the discretized pencil on a mesh with \
             maximal cell size {:.3e}; the continuum residual of u_n differs by \
             the interpolation error of u_n",
            fm.mesh.max_cell_size()
        ),
        warnings: Vec::new(),
    };
    let mut kept = Vec::with_capacity(e_sets.len());
    for (n, e) in e_sets.iter().enumerate() {
        let eta = make_cutoff(g, &fm.mesh, e, profile)?;
        let un = uh.zip_with(&eta, |a, b| a * b * b)?;
        let residual = match weyl_residual(fm, un.dofs(), lambda) {
            Ok(r) => r,
            Err(Error::ZeroSolution) => {
                cert.warnings
                    .push(format!("set {}: η²u vanishes, skipped", n + 1));
                continue;
            }
            Err(err) => return Err(err),
        };
        let core = integrate_sq(u, e)?.sqrt();
        let col = collar(g, e, 3.0 * profile.b)?;
        let collar_mass = if col.is_empty() {
            0.0
        } else {
            integrate_sq(u, &col)?.sqrt()
        };
        let ratio = if core > 0.0 {
            collar_mass / core
        } else {
            cert.warnings
                .push(format!("set {}: u vanishes on the core", n + 1));
            f64::INFINITY
        };
        kept.push(n);
        cert.radii.push(f64::NAN);
        cert.core_masses.push(core);
        cert.collar_masses.push(collar_mass);
        cert.ratios.push(ratio);
        cert.residuals.push(residual);
        cert.quotients.push(
            (ratio > 0.0 && ratio.is_finite()).then(|| residual / ratio),
        );
    }
    cert.decide();
    Ok((cert, kept))
}

/// Sampled radii selected by the growth test.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSelection {
    pub radii: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Linear interpolation of a sampled profile; `None` beyond the samples.
fn interpolate_profile(j: &GrowthProfile, r: f64) -> Option<(f64, bool)> {
    let rs = &j.radii;
    let last = *rs.last()?;
    if r > last * (1.0 + 1e-12) || r < rs[0] {
        return None;
    }
    let i = rs.partition_point(|&x| x < r);
    if i < rs.len() && (rs[i] - r).abs() <= 1e-12 * r.abs().max(1.0) {
        return Some((j.values[i], true));
    }
    if i == rs.len() {
        return Some((*j.values.last()?, true));
    }
    let (r0, r1) = (rs[i - 1], rs[i]);
    let s = (r - r0) / (r1 - r0);
    Some((j.values[i - 1] * (1.0 - s) + j.values[i] * s, false))
}

/// Every sampled `r` with `J(r) > 0` and `J(r + b) ≤ e^δ J(r)`; `J(r + b)`
/// is interpolated linearly when `r + b` is not a sample.
pub fn subexponential_radii(j: &GrowthProfile, b: f64, delta: f64) -> Result<RadiusSelection> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    if !(b > 0.0) {
        return Err(Error::invalid("b must be positive"));
    }
    let factor = delta.exp();
    let mut radii = Vec::new();
    let mut interpolated = false;
    for (&r, &jr) in j.radii.iter().zip(&j.values) {
        let Some((jb, exact)) = interpolate_profile(j, r + b) else {
            continue;
        };
        interpolated |= !exact;
        if jr > 0.0 && jb <= factor * jr {
            radii.push(r);
        }
    }
    let mut warnings = Vec::new();
    if interpolated {
        warnings.push(format!(
            "b = {b} is not a multiple of the sample spacing; J(r + b) was interpolated"
        ));
    }
    if let Some(&last) = j.radii.last() {
        if j.radii.first().is_some_and(|&r0| r0 + b > last) {
            warnings.push(format!("b = {b} exceeds the sampled range"));
        }
    }
    Ok(RadiusSelection { radii, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaccioppoliReport {
    pub lambda: f64,
    pub b: f64,
    pub constant: f64,
    /// `∫_E dΓ(u)`.
    pub lhs: f64,
    /// `(C/b²) ∫_{B_b(E)} |u|²`.
    pub rhs: f64,
    pub pass: bool,
    /// `b² lhs / ∫_{B_b(E)} |u|²`, the smallest constant that works here.
    pub empirical_constant: f64,
}

pub fn caccioppoli_check(
    g: &MetricGraph,
    u: &PiecewiseFunction,
    lambda: f64,
    e_set: &Region,
    b: f64,
    constant: f64,
) -> Result<CaccioppoliReport> {
    if !(b > 0.0) {
        return Err(Error::invalid("b must be positive"));
    }
    let lhs = integrate_energy(u, e_set)?;
    let mass = integrate_sq(u, &neighborhood(g, e_set, b)?)?;
    let rhs = constant / (b * b) * mass;
    Ok(CaccioppoliReport {
        lambda,
        b,
        constant,
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-8),
        empirical_constant: if mass > 0.0 { b * b * lhs / mass } else { 0.0 },
    })
}

/// `q` and `C_q` with `|α| |φ(v)|² ≤ q ℰ(φ) + C_q ‖φ‖²` for a δ-coupling of
/// strength `α` at a vertex where `degree` half-lines meet (these may be
/// truncated leads with a Dirichlet cut). Built from
/// `|φ(0)|² ≤ ε ‖φ'‖² + ‖φ‖²/ε` on each half-line.
pub fn delta_trace_bound(alpha: f64, degree: usize, q: f64) -> Result<f64> {
    if degree == 0 {
        return Err(Error::invalid("degree must be positive"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid("q must lie in (0, 1)"));
    }
    let d = degree as f64;
    Ok(alpha * alpha / (d * d * q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: [f64; 2],
    pub rhs: [f64; 2],
    pub defect: f64,
}

impl IdentityCheck {
    fn new(lhs: C64, rhs: C64) -> Self {
        IdentityCheck {
            lhs: [lhs.re, lhs.im],
            rhs: [rhs.re, rhs.im],
            defect: (lhs - rhs).norm() / (lhs.norm() + rhs.norm() + 1.0),
        }
    }
}

/// The two integral identities behind the Caccioppoli inequality, for a
/// generalized eigenfunction `u` and a real cutoff `η`:
///
/// * `∫ η² dΓ(u) = λ‖ηu‖² − μ(η²|u|²) − 2 ∫ η ū u' η' dm`,
/// * `ℰ(ηu) = ∫ η² dΓ(u) + ∫ |u|² dΓ(η) + 2 Re ∫ η ū u' η' dm`.
///
/// `μ` excludes the δ-couplings of `g`; they are added here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub eigen_identity: IdentityCheck,
    pub product_rule: IdentityCheck,
}

pub fn identity_check(
    g: &MetricGraph,
    u: &ExactFunction,
    lambda: f64,
    mu: &MeasurePerturbation,
    eta: &NodalFunction,
) -> Result<IdentityReport> {
    if eta.values().iter().any(|v| v.im != 0.0) {
        return Err(Error::invalid("cutoff must be real valued"));
    }
    let uf = PiecewiseFunction::Exact(u.clone());
    let ef = PiecewiseFunction::Nodal(eta.clone());
    let whole = Region::whole(g);
    let term = |which: usize| -> Result<C64> {
        integrate_with(&whole, &[&uf, &ef], None, |_, _, _, l| {
            let (u0, du) = (&l[0].value, &l[0].deriv);
            let (e0, de) = (&l[1].value, &l[1].deriv);
            match which {
                // η² |u'|²
                0 => e0.mul(e0).mul(&du.mul(&du.conj())),
                // η² |u|²
                1 => e0.mul(e0).mul(&u0.mul(&u0.conj())),
                // η η' ū u'
                2 => e0.mul(de).mul(&u0.conj()).mul(du),
                // |u|² η'²
                3 => de.mul(de).mul(&u0.mul(&u0.conj())),
                // |(ηu)'|²
                _ => {
                    let d = de.mul(u0).add(&e0.mul(du));
                    d.mul(&d.conj())
                }
            }
        })
    };
    let energy_mass = term(0)?;
    let mass = term(1)?;
    let cross = term(2)?;
    let grad_eta = term(3)?;
    let product = term(4)?;
    let full = mu.with_vertex_couplings(g);
    full.validate(g)?;
    let mu_term = weighted_pairing(g, &full, &uf, &ef)?;
    let two = C64::new(2.0, 0.0);
    Ok(IdentityReport {
        eigen_identity: IdentityCheck::new(energy_mass, mass * lambda - mu_term - two * cross),
        product_rule: IdentityCheck::new(
            product,
            energy_mass + grad_eta + C64::new(2.0 * cross.re, 0.0),
        ),
    })
}

/// `μ(η² |u|²)` with exact point values and closed-form density integrals.
fn weighted_pairing(
    g: &MetricGraph,
    mu: &MeasurePerturbation,
    u: &PiecewiseFunction,
    eta: &PiecewiseFunction,
) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for p in &mu.point_masses {
        let (e, t) = g
            .edge_coordinates(p.point)
            .ok_or_else(|| Error::InvalidPoint("point mass at an isolated vertex".into()))?;
        total += eta.value(e, t).norm_sqr() * u.value(e, t).norm_sqr() * p.weight;
    }
    for d in &mu.densities {
        let l = g.effective_length(d.edge);
        let region = Region::from_intervals(g, [(d.edge, 0.0, l)]);
        let mut extra = vec![Vec::new(); g.num_edges()];
        extra[d.edge.0] = d.knots(l);
        total += integrate_with(&region, &[u, eta], Some(&extra), |_, a, b, loc| {
            let va = d.value_at(l, a);
            let slope = (d.value_at(l, b) - va) / (b - a);
            let v = ExpPoly::linear(C64::new(va, 0.0), C64::new(slope, 0.0));
            let (u0, e0) = (&loc[0].value, &loc[1].value);
            e0.mul(e0).mul(&u0.mul(&u0.conj())).mul(&v)
        })?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchnolConfig {
    pub center: GraphPoint,
    pub b: f64,
    pub delta: f64,
    pub profile: ProfileKind,
    /// Largest ball radius considered; defaults to the truncation horizon.
    pub radius_budget: Option<f64>,
    pub thresholds: Thresholds,
}

impl SchnolConfig {
    pub fn new(center: GraphPoint, b: f64, delta: f64) -> Self {
        SchnolConfig {
            center,
            b,
            delta,
            profile: ProfileKind::Linear,
            radius_budget: None,
            thresholds: Thresholds::default(),
        }
    }
}

/// Consecutive radii grow by at least this factor (besides the `6b` gap).
const RADIUS_GROWTH: f64 = 1.25;

/// Picks increasing radii from the qualifying ones: the first at least
/// `3b`, each next one at least `max(r + 6b, 1.25 r)` and the budget edge
/// `r + 3b ≤ budget` respected throughout; the largest qualifying radius
/// closes the list when it keeps the `6b` gap.
fn thin_radii(candidates: &[f64], b: f64, budget: f64) -> Vec<f64> {
    let usable: Vec<f64> = candidates
        .iter()
        .copied()
        .filter(|&r| r >= 3.0 * b * (1.0 - 1e-12) && r + 3.0 * b <= budget * (1.0 + 1e-12))
        .collect();
    let mut out: Vec<f64> = Vec::new();
    for &r in &usable {
        match out.last() {
            None => out.push(r),
            Some(&prev) if r >= (prev + 6.0 * b).max(RADIUS_GROWTH * prev) * (1.0 - 1e-12) => {
                out.push(r)
            }
            _ => {}
        }
    }
    if let (Some(&last), Some(&prev)) = (usable.last(), out.last()) {
        if last >= (prev + 6.0 * b) * (1.0 - 1e-12) {
            out.push(last);
        }
    }
    out
}

/// Full pipeline: growth profile on a `b/2` grid, subexponential radii with
/// `6b` spacing, balls `E_n = B(x₀, r_n)` and the Weyl sequence.
///
/// On a compact graph a single set, the whole graph, is used.
pub fn certify(
    g: &MetricGraph,
    fm: &FormMatrices,
    u: &PiecewiseFunction,
    lambda: f64,
    config: &SchnolConfig,
) -> Result<SchnolCertificate> {
    let x0 = g.check_point(config.center)?;
    let profile = CutoffProfile::new(config.b, config.profile)?;
    if !(config.delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let b = config.b;
    let field = DistanceField::from_point(g, x0)?;
    let horizon = field.horizon();
    if !horizon.is_finite() {
        let reach = field.max_distance();
        let mut cert = weyl_sequence(
            g,
            fm,
            u,
            lambda,
            &[Region::whole(g)],
            &profile,
            &config.thresholds,
        )?;
        cert.radii = vec![reach; cert.ratios.len()];
        cert.horizon = horizon;
        cert.truncation_note = format!(
            "compact graph: the single set is the whole graph (radius {reach} from x0)"
        );
        return Ok(cert);
    }
    let budget = config.radius_budget.unwrap_or(horizon).min(horizon);
    if !(budget > 0.0) {
        return Err(Error::invalid("radius budget must be positive"));
    }
    let step = b / 2.0;
    let samples = (budget / step * (1.0 + 1e-12)).floor() as usize;
    let grid: Vec<f64> = (0..=samples).map(|k| k as f64 * step).collect();
    let growth = growth_function(g, u, x0, &grid)?;
    let selection = subexponential_radii(&growth, b, config.delta)?;
    let radii = thin_radii(&selection.radii, b, budget);
    let truncation_note = format!(
        "leads are cut at length {} (Dirichlet end); the horizon from x0 is {horizon}; \
         radius budget {budget}; masses beyond the horizon are not represented",
        g.truncation()
    );
    let mut warnings = selection.warnings;
    if radii.is_empty() {
        warnings.push(format!(
            "no radius in [3b, budget − 3b] satisfies J(r + b) ≤ e^δ J(r) within the horizon {horizon}"
        ));
        let mut cert = weyl_sequence(g, fm, u, lambda, &[], &profile, &config.thresholds)?;
        cert.horizon = horizon;
        cert.truncation_note = truncation_note;
        cert.warnings = warnings;
        return Ok(cert);
    }
    let balls: Vec<Region> = radii
        .iter()
        .map(|&r| ball(g, x0, r))
        .collect::<Result<_>>()?;
    let (mut cert, kept) = sequence(g, fm, u, lambda, &balls, &profile, &config.thresholds)?;
    let kept: Vec<f64> = kept.iter().map(|&k| radii[k]).collect();
    cert.radii = kept.clone();
    let j = |r: f64| -> Result<f64> { integrate_sq(u, &field.sublevel(r.max(0.0))) };
    for &r in &kept {
        let (lo, mid, hi) = (j(r - 3.0 * b)?, j(r)?, j(r + 3.0 * b)?);
        cert.growth_ratios
            .push(if lo > 0.0 { hi / lo } else { f64::INFINITY });
        cert.growth_increments
            .push(if mid > 0.0 { (hi - lo) / mid } else { f64::INFINITY });
    }
    let last = kept.last().copied().unwrap_or(0.0);
    let truncation_note = format!(
        "{truncation_note}; the largest cutoff reaches distance {} ({} from the cut)",
        last + b,
        horizon - last - b
    );
    cert.horizon = horizon;
    cert.truncation_note = truncation_note;
    warnings.append(&mut cert.warnings);
    cert.warnings = warnings;
    Ok(cert)
}

#[cfg(test)]
mod tests;
