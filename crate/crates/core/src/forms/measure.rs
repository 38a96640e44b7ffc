use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exp_poly::ExpPoly;
use crate::function_space::{integrate_with, PiecewiseFunction};
use crate::metric_graph::{EdgeId, GraphPoint, MetricGraph, PointSpec, Region};

#[derive(Debug, Clone, PartialEq)]
pub struct PointMass {
    pub point: GraphPoint,
    pub weight: f64,
}

/// Density `V` on one edge, given by equispaced samples over the truncated
/// edge (`[0, ℓ]`) and interpolated linearly; one sample means constant.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDensity {
    pub edge: EdgeId,
    pub samples: Vec<f64>,
}

impl EdgeDensity {
    pub fn value_at(&self, length: f64, t: f64) -> f64 {
        let n = self.samples.len();
        if n == 1 {
            return self.samples[0];
        }
        let x = (t / length * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        let k = (x.floor() as usize).min(n - 2);
        let s = x - k as f64;
        self.samples[k] * (1.0 - s) + self.samples[k + 1] * s
    }

    /// Sample positions (interior ones are the kinks of `V`).
    pub(crate) fn knots(&self, length: f64) -> Vec<f64> {
        let n = self.samples.len();
        if n <= 2 {
            return Vec::new();
        }
        (1..n - 1).map(|k| length * k as f64 / (n - 1) as f64).collect()
    }
}

/// Signed measure `μ = μ₊ − μ₋` made of point masses and edge densities.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurePerturbation {
    pub point_masses: Vec<PointMass>,
    pub densities: Vec<EdgeDensity>,
}

impl MeasurePerturbation {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point_mass(mut self, point: GraphPoint, weight: f64) -> Self {
        self.point_masses.push(PointMass { point, weight });
        self
    }

    pub fn density(mut self, edge: EdgeId, samples: Vec<f64>) -> Self {
        self.densities.push(EdgeDensity { edge, samples });
        self
    }

    pub fn is_zero(&self) -> bool {
        self.point_masses.iter().all(|p| p.weight == 0.0)
            && self.densities.iter().all(|d| d.samples.iter().all(|v| *v == 0.0))
    }

    /// `(μ₊, μ₋)`, both nonnegative. Densities are split sample-wise.
    pub fn split(&self) -> (MeasurePerturbation, MeasurePerturbation) {
        let part = |sign: f64| MeasurePerturbation {
            point_masses: self
                .point_masses
                .iter()
                .filter(|p| sign * p.weight > 0.0)
                .map(|p| PointMass {
                    point: p.point,
                    weight: sign * p.weight,
                })
                .collect(),
            densities: self
                .densities
                .iter()
                .map(|d| EdgeDensity {
                    edge: d.edge,
                    samples: d.samples.iter().map(|v| (sign * v).max(0.0)).collect(),
                })
                .filter(|d| d.samples.iter().any(|v| *v > 0.0))
                .collect(),
        };
        (part(1.0), part(-1.0))
    }

    /// `μ + Σ_v α_v δ_v`: the perturbation together with the δ-couplings.
    pub fn with_vertex_couplings(&self, g: &MetricGraph) -> MeasurePerturbation {
        let mut out = self.clone();
        for v in g.vertex_ids() {
            let alpha = g.vertex(v).alpha;
            if alpha != 0.0 {
                out.point_masses.push(PointMass {
                    point: GraphPoint::Vertex(v),
                    weight: alpha,
                });
            }
        }
        out
    }

    /// Rejects points and densities outside the truncated graph.
    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        for (k, p) in self.point_masses.iter().enumerate() {
            let point = g.check_point(p.point)?;
            if let GraphPoint::Edge { edge, offset } = point {
                if g.edge(edge).is_lead() && offset >= g.truncation() {
                    return Err(Error::InvalidPoint(format!(
                        "point mass {k} at offset {offset} on lead '{}' lies beyond the \
                         truncation length {}",
                        g.edge(edge).label,
                        g.truncation()
                    )));
                }
            }
            if !p.weight.is_finite() {
                return Err(Error::invalid(format!("point mass {k}: weight must be finite")));
            }
        }
        for (k, d) in self.densities.iter().enumerate() {
            if d.edge.0 >= g.num_edges() {
                return Err(Error::invalid(format!("density {k}: unknown edge")));
            }
            if d.samples.is_empty() || d.samples.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "density {k}: samples must be finite and nonempty"
                )));
            }
        }
        Ok(())
    }

    /// `μ(u v̄)` evaluated on the continuum functions: point values for
    /// masses, closed-form integrals for densities.
    pub fn pairing(
        &self,
        g: &MetricGraph,
        u: &PiecewiseFunction,
        v: &PiecewiseFunction,
    ) -> Result<C64> {
        let mut total = C64::new(0.0, 0.0);
        for p in &self.point_masses {
            let (e, t) = g
                .edge_coordinates(p.point)
                .ok_or_else(|| Error::InvalidPoint("point mass at an isolated vertex".into()))?;
            total += u.value(e, t) * v.value(e, t).conj() * p.weight;
        }
        for d in &self.densities {
            let l = g.effective_length(d.edge);
            let region = Region::from_intervals(g, [(d.edge, 0.0, l)]);
            let mut extra = vec![Vec::new(); g.num_edges()];
            extra[d.edge.0] = d.knots(l);
            total += integrate_with(&region, &[u, v], Some(&extra), |_, a, b, loc| {
                let va = d.value_at(l, a);
                let slope = (d.value_at(l, b) - va) / (b - a);
                let vpoly = ExpPoly::linear(C64::new(va, 0.0), C64::new(slope, 0.0));
                loc[0].value.mul(&loc[1].value.conj()).mul(&vpoly)
            })?;
        }
        Ok(total)
    }
}

/// File form of a perturbation:
/// `{"point_masses": [{"at": {"vertex": "o"}, "weight": -1}],
///   "densities": [{"edge": "e", "samples": [0, 1, 0]}]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub point_masses: Vec<PointMassSpec>,
    #[serde(default)]
    pub densities: Vec<DensitySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMassSpec {
    pub at: PointSpec,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub edge: String,
    pub samples: Vec<f64>,
}

impl MeasureSpec {
    pub fn build(&self, g: &MetricGraph) -> Result<MeasurePerturbation> {
        let mut mu = MeasurePerturbation::zero();
        for (k, p) in self.point_masses.iter().enumerate() {
            let point = p
                .at
                .resolve(g)
                .map_err(|e| Error::invalid(format!("point_masses[{k}].at: {e}")))?;
            mu = mu.point_mass(point, p.weight);
        }
        for (k, d) in self.densities.iter().enumerate() {
            let e = g
                .edge_by_label(&d.edge)
                .ok_or_else(|| Error::invalid(format!("densities[{k}].edge: unknown edge '{}'", d.edge)))?;
            mu = mu.density(e, d.samples.clone());
        }
        mu.validate(g)?;
        Ok(mu)
    }
}
