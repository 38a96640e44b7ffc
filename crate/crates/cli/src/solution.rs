//! File form of an exact eigensolution: per-edge coefficients
//! `u_e(0) = a`, `u_e'(0) = b` of the fundamental pair at energy `λ`.

use num_complex::Complex64 as C64;
use qgraph::function_space::ExactFunction;
use qgraph::metric_graph::MetricGraph;
use serde::{Deserialize, Serialize};

use crate::config::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub lambda: f64,
    /// The stored coefficients equal the solution divided by `exp(log_scale)`.
    pub log_scale: f64,
    pub edges: Vec<EdgeCoefficients>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeCoefficients {
    pub edge: String,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl SolutionFile {
    pub fn from_exact(g: &MetricGraph, u: &ExactFunction) -> Self {
        SolutionFile {
            lambda: u.lambda(),
            log_scale: u.log_scale(),
            edges: g
                .edge_ids()
                .zip(u.coeffs())
                .map(|(e, c)| EdgeCoefficients {
                    edge: g.edge(e).label.clone(),
                    a: [c[0].re, c[0].im],
                    b: [c[1].re, c[1].im],
                })
                .collect(),
        }
    }

    /// Rebuilds the function on `g`; every edge must be listed exactly once.
    pub fn to_exact(&self, g: &MetricGraph) -> Result<ExactFunction, Failure> {
        let mut coeffs: Vec<Option<[C64; 2]>> = vec![None; g.num_edges()];
        for (k, c) in self.edges.iter().enumerate() {
            let e = g.edge_by_label(&c.edge).ok_or_else(|| {
                Failure::Input(format!("solution edges[{k}]: unknown edge '{}'", c.edge))
            })?;
            if coeffs[e.0].is_some() {
                return Err(Failure::Input(format!(
                    "solution edges[{k}]: edge '{}' listed twice",
                    c.edge
                )));
            }
            coeffs[e.0] = Some([C64::new(c.a[0], c.a[1]), C64::new(c.b[0], c.b[1])]);
        }
        let coeffs = coeffs
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                c.ok_or_else(|| {
                    Failure::Input(format!(
                        "solution: edge '{}' has no coefficients",
                        g.edges()[k].label
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExactFunction::new(g, self.lambda, coeffs)
            .map_err(|e| Failure::Input(format!("solution: {e}")))?
            .with_log_scale(self.log_scale))
    }
}
