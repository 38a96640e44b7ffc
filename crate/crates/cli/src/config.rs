//! Experiment bundles: one JSON file holding the graph, μ, mesh, truncation
//! and per-command parameters. Command-line flags are laid over the file
//! field by field.

use std::fmt;
use std::path::{Path, PathBuf};

use qgraph::eigensolution::SeedSpec;
use qgraph::forms::MeasureSpec;
use qgraph::metric_graph::{GraphSpec, PointSpec, TruncationSpec};
use qgraph::schnol::{ProfileKind, Thresholds};
use qgraph::table::Format;
use serde::{Deserialize, Serialize};

/// Why a run stopped. Input problems exit with 2, numerical failures with 3.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Stage {
        stage: &'static str,
        error: qgraph::Error,
    },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Stage { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(msg) => write!(f, "invalid input: {msg}"),
            Failure::Stage { stage, error } => write!(f, "stage '{stage}' failed: {error}"),
        }
    }
}

pub fn input(context: impl fmt::Display) -> impl FnOnce(qgraph::Error) -> Failure {
    move |e| Failure::Input(format!("{context}: {e}"))
}

pub fn stage(stage: &'static str) -> impl FnOnce(qgraph::Error) -> Failure {
    move |error| Failure::Stage { stage, error }
}

/// A region `E` in a file: `{"ball": {"center": ..., "radius": 2}}` or
/// `{"intervals": [{"edge": "e", "start": 0, "end": 1}]}`. A ball without
/// a center is taken around the bundle's `center`, else the first vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Ball {
        #[serde(default)]
        center: Option<PointSpec>,
        radius: f64,
    },
    Intervals(Vec<IntervalSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub edge: String,
    pub start: f64,
    pub end: f64,
}

/// Every field is optional; absent fields take command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    pub graph: Option<GraphSpec>,
    pub graph_file: Option<PathBuf>,
    pub measure: Option<MeasureSpec>,
    pub measure_file: Option<PathBuf>,
    pub mesh_h: Option<f64>,
    #[serde(rename = "truncate_L")]
    pub truncate_l: Option<f64>,
    pub lambda: Option<f64>,
    pub seeds: Option<Vec<SeedSpec>>,
    pub seeds_file: Option<PathBuf>,
    pub solution_file: Option<PathBuf>,
    pub count: Option<usize>,
    pub shift: Option<f64>,
    pub probes: Option<usize>,
    pub samples: Option<usize>,
    pub center: Option<PointSpec>,
    pub b: Option<f64>,
    pub delta: Option<f64>,
    pub profile: Option<ProfileKind>,
    pub radius_budget: Option<f64>,
    pub thresholds: Option<Thresholds>,
    pub region: Option<RegionSpec>,
    pub q: Option<f64>,
    pub c_q: Option<f64>,
    pub from: Option<PointSpec>,
    pub to: Option<PointSpec>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        Bundle { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Bundle {
    /// Reads a bundle; relative file references are taken from the bundle's
    /// directory.
    pub fn load(path: &Path) -> Result<Bundle, Failure> {
        let text = read(path)?;
        let mut b: Bundle = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut b.graph_file,
            &mut b.measure_file,
            &mut b.seeds_file,
            &mut b.solution_file,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if b.graph.is_some() && b.graph_file.is_some() {
            return Err(Failure::Input(format!(
                "{}: set either 'graph' or 'graph_file', not both",
                path.display()
            )));
        }
        if b.measure.is_some() && b.measure_file.is_some() {
            return Err(Failure::Input(format!(
                "{}: set either 'measure' or 'measure_file', not both",
                path.display()
            )));
        }
        if b.seeds.is_some() && b.seeds_file.is_some() {
            return Err(Failure::Input(format!(
                "{}: set either 'seeds' or 'seeds_file', not both",
                path.display()
            )));
        }
        Ok(b)
    }

    /// `top` wins field by field; a file reference in `top` also replaces
    /// an inline value below it.
    pub fn overlay(self, top: Bundle) -> Bundle {
        let mut base = self;
        if top.graph_file.is_some() {
            base.graph = None;
        }
        if top.measure_file.is_some() {
            base.measure = None;
        }
        if top.seeds_file.is_some() {
            base.seeds = None;
        }
        overlay_fields!(base, top;
            graph, graph_file, measure, measure_file, mesh_h, truncate_l, lambda, seeds,
            seeds_file, solution_file, count, shift, probes, samples, center, b, delta,
            profile, radius_budget, thresholds, region, q, c_q, from, to, format, seed)
    }

    /// Inlines the graph (with `truncate_L` applied) and returns it.
    pub fn take_graph(&mut self) -> Result<GraphSpec, Failure> {
        let mut spec = match (self.graph.take(), self.graph_file.take()) {
            (Some(g), _) => g,
            (None, Some(path)) => {
                let text = read(&path)?;
                GraphSpec::parse(&text).map_err(input(path.display()))?
            }
            (None, None) => {
                return Err(Failure::Input(
                    "no graph given (use --graph <file> or the 'graph' field of --config)".into(),
                ))
            }
        };
        if let Some(l) = self.truncate_l {
            check_positive("truncate_L", l)?;
            spec.truncation = Some(TruncationSpec { length: l });
        }
        self.graph = Some(spec.clone());
        Ok(spec)
    }

    /// Inlines μ (zero when absent).
    pub fn take_measure(&mut self) -> Result<MeasureSpec, Failure> {
        let spec = match (self.measure.take(), self.measure_file.take()) {
            (Some(m), _) => m,
            (None, Some(path)) => {
                let text = read(&path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
            }
            (None, None) => MeasureSpec::default(),
        };
        self.measure = Some(spec.clone());
        Ok(spec)
    }

    /// Inlines the seeds; the default is the value 1 at `default_vertex`.
    pub fn take_seeds(&mut self, default_vertex: &str) -> Result<Vec<SeedSpec>, Failure> {
        let seeds = match (self.seeds.take(), self.seeds_file.take()) {
            (Some(s), _) => s,
            (None, Some(path)) => {
                let text = read(&path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
            }
            (None, None) => vec![SeedSpec {
                vertex: default_vertex.to_string(),
                value: [1.0, 0.0],
                outgoing: Vec::new(),
            }],
        };
        self.seeds = Some(seeds.clone());
        Ok(seeds)
    }
}

pub fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn check_positive(field: &str, x: f64) -> Result<f64, Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Failure::Input(format!("{field} must be a positive finite number, got {x}")))
    }
}

/// Command-line point syntax: `label` for a vertex, `edge@offset` for a
/// point on an edge.
pub fn parse_point(s: &str) -> Result<PointSpec, String> {
    match s.rsplit_once('@') {
        Some((edge, offset)) => {
            let offset: f64 = offset
                .parse()
                .map_err(|_| format!("bad offset in point '{s}' (expected edge@offset)"))?;
            if edge.is_empty() {
                return Err(format!("missing edge label in point '{s}'"));
            }
            Ok(PointSpec::Edge {
                edge: edge.to_string(),
                offset,
            })
        }
        None if s.is_empty() => Err("empty point".into()),
        None => Ok(PointSpec::Vertex {
            vertex: s.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_prefers_flags() {
        let file = Bundle {
            mesh_h: Some(0.1),
            lambda: Some(1.0),
            graph: Some(GraphSpec {
                vertices: vec![],
                edges: vec![],
                truncation: None,
            }),
            ..Bundle::default()
        };
        let flags = Bundle {
            mesh_h: Some(0.05),
            graph_file: Some("g.json".into()),
            ..Bundle::default()
        };
        let b = file.overlay(flags);
        assert_eq!(b.mesh_h, Some(0.05));
        assert_eq!(b.lambda, Some(1.0));
        assert!(b.graph.is_none());
        assert_eq!(b.graph_file, Some(PathBuf::from("g.json")));
    }

    #[test]
    fn points() {
        assert_eq!(
            parse_point("a").unwrap(),
            PointSpec::Vertex { vertex: "a".into() }
        );
        assert_eq!(
            parse_point("e1@0.25").unwrap(),
            PointSpec::Edge {
                edge: "e1".into(),
                offset: 0.25
            }
        );
        assert!(parse_point("e@x").is_err());
        assert!(parse_point("@1").is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<Bundle>("{\n  \"mesh_h\": 0.1,\n  \"meshh\": 2\n}")
            .unwrap_err();
        assert_eq!(err.line(), 3);
        assert!(err.to_string().contains("meshh"));
    }
}
