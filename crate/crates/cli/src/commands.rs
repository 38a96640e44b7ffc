use std::sync::Arc;

use qgraph::eigensolution::{shoot, verify_eigensolution, Seed};
use qgraph::eigensolver::{default_shift, solve_spectrum_with, SolverOptions, DEFAULT_SEED};
use qgraph::forms::{assemble, caccioppoli_constant, FormMatrices, MeasurePerturbation};
use qgraph::function_space::{function_table, ExactFunction, Mesh, PiecewiseFunction};
use qgraph::metric_graph::{ball, path_distance, GraphPoint, MetricGraph, PointSpec, Region};
use qgraph::schnol::{
    caccioppoli_check, certify, delta_trace_bound, CaccioppoliReport, ProfileKind, SchnolConfig,
    Thresholds,
};
use qgraph::table::{format_float, Format};
use serde::Serialize;

use crate::config::{check_positive, input, stage, Bundle, Failure, RegionSpec};
use crate::solution::SolutionFile;

pub const DEFAULT_MESH_H: f64 = 0.01;
pub const DEFAULT_COUNT: usize = 6;
pub const DEFAULT_PROBES: usize = 32;
pub const DEFAULT_SAMPLES: usize = 16;
pub const DEFAULT_B: f64 = 1.0;
pub const DEFAULT_DELTA: f64 = 0.05;
/// Form-bound parameter used with the δ trace inequality.
const TRACE_Q: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Solve,
    Schnol,
    Caccioppoli,
    Distance,
    Formbound,
}

/// What a run produced: text for stdout and named files for `--out`.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

pub fn run(command: Command, mut bundle: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let ctx = Context::new(&mut bundle)?;
    match command {
        Command::Spectrum => spectrum(ctx, bundle, dry_run),
        Command::Solve => solve(ctx, bundle, dry_run),
        Command::Schnol => schnol(ctx, bundle, dry_run),
        Command::Caccioppoli => caccioppoli(ctx, bundle, dry_run),
        Command::Distance => distance(ctx, bundle, dry_run),
        Command::Formbound => formbound(ctx, bundle, dry_run),
    }
}

struct Context {
    graph: MetricGraph,
    mu: MeasurePerturbation,
    format: Format,
    seed: u64,
}

impl Context {
    fn new(b: &mut Bundle) -> Result<Self, Failure> {
        let spec = b.take_graph()?;
        let graph = spec.build().map_err(input("graph"))?;
        if graph.has_leads() {
            b.truncate_l = Some(graph.truncation());
        }
        let mu = b.take_measure()?.build(&graph).map_err(input("measure"))?;
        Ok(Context {
            graph,
            mu,
            format: *b.format.get_or_insert(Format::Csv),
            seed: *b.seed.get_or_insert(DEFAULT_SEED),
        })
    }

    fn first_vertex(&self) -> String {
        self.graph.vertices()[0].label.clone()
    }

    fn point(&self, field: &str, p: &PointSpec) -> Result<GraphPoint, Failure> {
        p.resolve(&self.graph).map_err(input(field))
    }

    fn mesh(&self, b: &mut Bundle) -> Result<Arc<Mesh>, Failure> {
        let h = check_positive("mesh_h", *b.mesh_h.get_or_insert(DEFAULT_MESH_H))?;
        Mesh::uniform(&self.graph, h).map(Arc::new).map_err(input("mesh_h"))
    }

    fn forms(&self, mesh: Arc<Mesh>) -> Result<FormMatrices, Failure> {
        assemble(&self.graph, mesh, &self.mu).map_err(stage("assemble"))
    }
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Jsonlines => "jsonl",
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn dry(bundle: &Bundle) -> Output {
    Output {
        stdout: json(bundle),
        files: Vec::new(),
    }
}

fn finish(bundle: &Bundle, stdout: String, mut files: Vec<(String, String)>) -> Output {
    files.push(("config.json".into(), json(bundle)));
    Output { stdout, files }
}

fn spectrum(ctx: Context, mut b: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let count = *b.count.get_or_insert(DEFAULT_COUNT);
    if count == 0 {
        return Err(Failure::Input("count must be at least 1".into()));
    }
    let mesh = ctx.mesh(&mut b)?;
    if dry_run {
        return Ok(dry(&b));
    }
    let fm = ctx.forms(mesh)?;
    let shift = match b.shift {
        Some(s) => s,
        None => default_shift(&fm).map_err(stage("form bound"))?,
    };
    b.shift = Some(shift);
    let opts = SolverOptions {
        seed: ctx.seed,
        ..SolverOptions::default()
    };
    let result = solve_spectrum_with(&fm, count, shift, &opts).map_err(stage("eigensolver"))?;
    let table = result.table().render(ctx.format);
    let name = format!("spectrum.{}", extension(ctx.format));
    Ok(finish(&b, table.clone(), vec![(name, table)]))
}

/// `μ` folded into the vertex couplings. Exact shooting sees the vertex
/// conditions only, so other parts of `μ` are rejected.
fn coupled_graph(ctx: &Context) -> Result<MetricGraph, Failure> {
    let g = &ctx.graph;
    if ctx.mu.densities.iter().any(|d| d.samples.iter().any(|v| *v != 0.0)) {
        return Err(Failure::Input(
            "measure: exact solutions support point masses at vertices only (found a density)"
                .into(),
        ));
    }
    let mut vertices = g.vertices().to_vec();
    for (k, p) in ctx.mu.point_masses.iter().enumerate() {
        match g.check_point(p.point).map_err(input("measure"))? {
            GraphPoint::Vertex(v) => vertices[v.0].alpha += p.weight,
            GraphPoint::Edge { .. } => {
                return Err(Failure::Input(format!(
                    "measure.point_masses[{k}]: exact solutions support point masses at \
                     vertices only"
                )))
            }
        }
    }
    MetricGraph::new(vertices, g.edges().to_vec())
        .and_then(|h| h.with_truncation(g.truncation()))
        .map_err(input("measure"))
}

enum Source {
    File(ExactFunction),
    Shoot {
        graph: MetricGraph,
        seeds: Vec<Seed>,
    },
}

impl Source {
    fn resolve(ctx: &Context, b: &mut Bundle, command: &str) -> Result<(Source, f64), Failure> {
        if let Some(path) = b.solution_file.take() {
            let text = crate::config::read(&path)?;
            let file: SolutionFile = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let u = file.to_exact(&ctx.graph)?;
            if let Some(l) = b.lambda {
                if (l - file.lambda).abs() > 1e-12 * file.lambda.abs().max(1.0) {
                    return Err(Failure::Input(format!(
                        "lambda {l} differs from the solution's energy {}",
                        file.lambda
                    )));
                }
            }
            b.lambda = Some(file.lambda);
            b.solution_file = Some(path);
            return Ok((Source::File(u), file.lambda));
        }
        let lambda = b.lambda.ok_or_else(|| {
            Failure::Input(format!("{command}: --lambda (or a solution file) is required"))
        })?;
        if !lambda.is_finite() {
            return Err(Failure::Input("lambda must be finite".into()));
        }
        let graph = coupled_graph(ctx)?;
        let seeds = b
            .take_seeds(&ctx.first_vertex())?
            .iter()
            .enumerate()
            .map(|(k, s)| s.build(&graph).map_err(input(format!("seeds[{k}]"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((Source::Shoot { graph, seeds }, lambda))
    }

    fn solve(self, lambda: f64) -> Result<ExactFunction, Failure> {
        match self {
            Source::File(u) => Ok(u),
            Source::Shoot { graph, seeds } => shoot(&graph, lambda, &seeds).map_err(stage("shoot")),
        }
    }
}

#[derive(Debug, Serialize)]
struct Verification {
    lambda: f64,
    log_scale: f64,
    /// Largest weak residual over the tent probes.
    residual: f64,
    /// Largest `|u|` coefficient, for judging the residual.
    magnitude: f64,
    probes: usize,
}

fn solve(ctx: Context, mut b: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let (source, lambda) = Source::resolve(&ctx, &mut b, "solve")?;
    let probes = *b.probes.get_or_insert(DEFAULT_PROBES);
    let samples = *b.samples.get_or_insert(DEFAULT_SAMPLES);
    if dry_run {
        return Ok(dry(&b));
    }
    let u = source.solve(lambda)?;
    let residual =
        verify_eigensolution(&ctx.graph, &u, lambda, &ctx.mu, probes).map_err(stage("verify"))?;
    let magnitude = u
        .coeffs()
        .iter()
        .flat_map(|c| c.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let report = json(&Verification {
        lambda,
        log_scale: u.log_scale(),
        residual,
        magnitude,
        probes,
    });
    let table = function_table(&ctx.graph, &PiecewiseFunction::Exact(u.clone()), samples)
        .render(ctx.format);
    let files = vec![
        ("solution.json".into(), json(&SolutionFile::from_exact(&ctx.graph, &u))),
        (format!("solution.{}", extension(ctx.format)), table),
        ("verification.json".into(), report.clone()),
    ];
    Ok(finish(&b, report, files))
}

fn schnol(ctx: Context, mut b: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let (source, lambda) = Source::resolve(&ctx, &mut b, "schnol")?;
    let center_spec = b
        .center
        .get_or_insert_with(|| PointSpec::Vertex {
            vertex: ctx.first_vertex(),
        })
        .clone();
    let center = ctx.point("center", &center_spec)?;
    let mut config = SchnolConfig::new(
        center,
        check_positive("b", *b.b.get_or_insert(DEFAULT_B))?,
        check_positive("delta", *b.delta.get_or_insert(DEFAULT_DELTA))?,
    );
    config.profile = *b.profile.get_or_insert(ProfileKind::Linear);
    config.thresholds = *b.thresholds.get_or_insert(Thresholds::default());
    config.radius_budget = b
        .radius_budget
        .map(|r| check_positive("radius_budget", r))
        .transpose()?;
    let mesh = ctx.mesh(&mut b)?;
    if dry_run {
        return Ok(dry(&b));
    }
    let fm = ctx.forms(mesh)?;
    let u = PiecewiseFunction::Exact(source.solve(lambda)?);
    let cert = certify(&ctx.graph, &fm, &u, lambda, &config).map_err(stage("certify"))?;
    let table = cert.table().render(ctx.format);
    let mut text = cert.to_json();
    text.push('\n');
    let files = vec![
        ("certificate.json".into(), text.clone()),
        (format!("schnol.{}", extension(ctx.format)), table),
    ];
    Ok(finish(&b, text, files))
}

#[derive(Debug, Serialize)]
struct CaccioppoliOutput {
    #[serde(flatten)]
    report: CaccioppoliReport,
    q: f64,
    c_q: f64,
    /// Where `(q, C_q)` came from.
    bound_source: String,
    /// `∫_{B_b(E)} |u|²`.
    neighborhood_mass: f64,
}

/// `(q, C_q)` with `μ₋ ≤ q ℰ + C_q ‖·‖²`: given explicitly, zero when
/// `μ₋ = 0`, the trace bound for a single negative δ-vertex, otherwise the
/// discrete estimate on the mesh.
fn negative_part_bound(ctx: &Context, b: &mut Bundle) -> Result<(f64, f64, String), Failure> {
    match (b.q, b.c_q) {
        (Some(q), Some(c)) => return Ok((q, c, "given".into())),
        (None, None) => {}
        _ => return Err(Failure::Input("q and c_q must be given together".into())),
    }
    let (_, minus) = ctx.mu.with_vertex_couplings(&ctx.graph).split();
    let explicit_negative = ctx.mu.split().1;
    let negative_vertices: Vec<_> = ctx
        .graph
        .vertex_ids()
        .filter(|&v| ctx.graph.vertex(v).alpha < 0.0)
        .collect();
    let (q, c, source) = if minus.is_zero() {
        (0.0, 0.0, "μ₋ = 0".to_string())
    } else if explicit_negative.is_zero() && negative_vertices.len() == 1 {
        let v = negative_vertices[0];
        let alpha = ctx.graph.vertex(v).alpha;
        let c = delta_trace_bound(alpha, ctx.graph.degree(v), TRACE_Q).map_err(input("q"))?;
        (
            TRACE_Q,
            c,
            format!("trace bound at vertex '{}'", ctx.graph.vertex(v).label),
        )
    } else {
        let mesh = ctx.mesh(b)?;
        let fb = ctx.forms(mesh)?.form_bound().map_err(stage("form bound"))?;
        if !fb.admissible {
            return Err(Failure::Stage {
                stage: "form bound",
                error: qgraph::Error::Config(format!(
                    "no form bound below one was found (κ = {})",
                    fb.kappa
                )),
            });
        }
        (fb.kappa, fb.c_kappa, "discrete estimate on the mesh".into())
    };
    b.q = Some(q);
    b.c_q = Some(c);
    Ok((q, c, source))
}

fn region(ctx: &Context, spec: &mut RegionSpec, fallback: &PointSpec) -> Result<Region, Failure> {
    match spec {
        RegionSpec::Ball { center, radius } => {
            let center = center.get_or_insert_with(|| fallback.clone());
            let x = ctx.point("region.ball.center", center)?;
            ball(&ctx.graph, x, check_positive("region.ball.radius", *radius)?)
                .map_err(input("region"))
        }
        RegionSpec::Intervals(list) => {
            let mut raw = Vec::with_capacity(list.len());
            for (k, iv) in list.iter().enumerate() {
                let e = ctx.graph.edge_by_label(&iv.edge).ok_or_else(|| {
                    Failure::Input(format!("region.intervals[{k}]: unknown edge '{}'", iv.edge))
                })?;
                if !(iv.start <= iv.end) {
                    return Err(Failure::Input(format!(
                        "region.intervals[{k}]: start must not exceed end"
                    )));
                }
                raw.push((e, iv.start, iv.end));
            }
            let r = Region::from_intervals(&ctx.graph, raw);
            if r.is_empty() {
                return Err(Failure::Input("region is empty".into()));
            }
            Ok(r)
        }
    }
}

fn caccioppoli(ctx: Context, mut b: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let (source, lambda) = Source::resolve(&ctx, &mut b, "caccioppoli")?;
    let fallback = b.center.clone().unwrap_or_else(|| PointSpec::Vertex {
        vertex: ctx.first_vertex(),
    });
    let mut spec = b.region.take().ok_or_else(|| {
        Failure::Input("caccioppoli: a region is required (--radius or the 'region' field)".into())
    })?;
    let e_set = region(&ctx, &mut spec, &fallback)?;
    b.region = Some(spec);
    let width = check_positive("b", *b.b.get_or_insert(DEFAULT_B))?;
    if width > 1.0 {
        return Err(Failure::Input(format!(
            "b = {width}: the Caccioppoli constant is derived for b ≤ 1"
        )));
    }
    let (q, c_q, bound_source) = negative_part_bound(&ctx, &mut b)?;
    let constant = caccioppoli_constant(lambda, q, c_q).map_err(input("q"))?;
    if dry_run {
        return Ok(dry(&b));
    }
    let u = PiecewiseFunction::Exact(source.solve(lambda)?);
    let report = caccioppoli_check(&ctx.graph, &u, lambda, &e_set, width, constant)
        .map_err(stage("caccioppoli"))?;
    let neighborhood_mass = report.rhs * width * width / constant;
    let text = json(&CaccioppoliOutput {
        report,
        q,
        c_q,
        bound_source,
        neighborhood_mass,
    });
    Ok(finish(&b, text.clone(), vec![("caccioppoli.json".into(), text)]))
}

#[derive(Debug, Serialize)]
struct DistanceOutput<'a> {
    from: &'a PointSpec,
    to: &'a PointSpec,
    distance: f64,
}

fn distance(ctx: Context, b: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let (from, to) = match (&b.from, &b.to) {
        (Some(f), Some(t)) => (f, t),
        _ => return Err(Failure::Input("distance: two points are required".into())),
    };
    let x = ctx.point("from", from)?;
    let y = ctx.point("to", to)?;
    if dry_run {
        return Ok(dry(&b));
    }
    let d = path_distance(&ctx.graph, x, y).map_err(stage("distance"))?;
    let text = json(&DistanceOutput { from, to, distance: d });
    Ok(finish(
        &b,
        format!("{}\n", format_float(d)),
        vec![("distance.json".into(), text)],
    ))
}

#[derive(Debug, Serialize)]
struct FormBoundOutput {
    kappa: f64,
    c_kappa: f64,
    shift: f64,
    admissible: bool,
    mesh_h: f64,
    dofs: usize,
}

fn formbound(ctx: Context, mut b: Bundle, dry_run: bool) -> Result<Output, Failure> {
    let mesh = ctx.mesh(&mut b)?;
    if dry_run {
        return Ok(dry(&b));
    }
    let fm = ctx.forms(mesh)?;
    let fb = fm.form_bound().map_err(stage("form bound"))?;
    let text = json(&FormBoundOutput {
        kappa: fb.kappa,
        c_kappa: fb.c_kappa,
        shift: fb.shift,
        admissible: fb.admissible,
        mesh_h: b.mesh_h.unwrap_or(DEFAULT_MESH_H),
        dofs: fm.num_dofs(),
    });
    Ok(finish(&b, text.clone(), vec![("formbound.json".into(), text)]))
}
