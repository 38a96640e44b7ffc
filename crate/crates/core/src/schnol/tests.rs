use std::f64::consts::PI;

use super::*;
use crate::eigensolution::{shoot, Seed};
use crate::eigensolver::{solve_spectrum, weyl_residual_real};
use crate::forms::{assemble, caccioppoli_constant};
use crate::metric_graph::{EdgeId, GraphBuilder};
use proptest::prelude::*;

fn fm_for(g: &MetricGraph, h: f64) -> FormMatrices {
    let mesh = Arc::new(Mesh::uniform(g, h).unwrap());
    assemble(g, mesh, &MeasurePerturbation::zero()).unwrap()
}

fn cosine_on_chain(n: usize, truncation: f64) -> (MetricGraph, ExactFunction) {
    let g = MetricGraph::chain(n).unwrap().with_truncation(truncation).unwrap();
    let v0 = g.vertex_by_label("0").unwrap();
    let u = shoot(&g, 1.0, &[Seed::new(v0, C64::new(1.0, 0.0))]).unwrap();
    (g, u)
}

fn vertex(g: &MetricGraph, label: &str) -> GraphPoint {
    GraphPoint::Vertex(g.vertex_by_label(label).unwrap())
}

#[test]
fn profiles() {
    for kind in [ProfileKind::Linear, ProfileKind::Smooth] {
        let p = CutoffProfile::new(2.0, kind).unwrap();
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(2.0), 0.0);
        assert_eq!(p.eval(5.0), 0.0);
        let slope = (0..2000)
            .map(|k| {
                let t = 2.0 * k as f64 / 2000.0;
                ((p.eval(t + 1e-6) - p.eval(t)) / 1e-6).abs()
            })
            .fold(0.0, f64::max);
        assert!(slope <= p.max_slope() * (1.0 + 1e-4) && p.max_slope() <= 2.0 / 2.0);
    }
    assert!(CutoffProfile::linear(0.0).is_err());
}

#[test]
fn cutoff_of_whole_graph_is_one() {
    let g = MetricGraph::star(&[1.0, 2.0]).unwrap();
    let fm = fm_for(&g, 0.1);
    let eta = make_cutoff(&g, &fm.mesh, &Region::whole(&g), &CutoffProfile::linear(0.5).unwrap())
        .unwrap();
    assert!(eta.values().iter().all(|v| *v == C64::new(1.0, 0.0)));
}

#[test]
fn cutoff_on_interval() {
    let g = MetricGraph::interval(10.0).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.05).unwrap());
    let e = Region::from_intervals(&g, [(EdgeId(0), 0.0, 4.0)]);
    let eta = make_cutoff(&g, &mesh, &e, &CutoffProfile::linear(1.0).unwrap()).unwrap();
    for k in 0..=mesh.cells(EdgeId(0)) {
        let t = mesh.position(EdgeId(0), k);
        let want = if t <= 4.0 {
            1.0
        } else if t >= 5.0 {
            0.0
        } else {
            5.0 - t
        };
        assert!((eta.node_value(EdgeId(0), k).re - want).abs() < 1e-12, "t = {t}");
    }
    let coarse = Arc::new(Mesh::uniform(&g, 0.2).unwrap());
    let err = make_cutoff(&g, &coarse, &e, &CutoffProfile::linear(1.0).unwrap()).unwrap_err();
    assert!(matches!(err, Error::MeshTooCoarse { required, .. } if required == 0.125));
    assert!(matches!(
        make_cutoff(&g, &mesh, &Region::empty(&g), &CutoffProfile::linear(1.0).unwrap()),
        Err(Error::EmptyRegion)
    ));
}

#[test]
fn cutoff_on_star_is_linear_in_distance() {
    let g = MetricGraph::star(&[2.0, 2.5, 3.0]).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.01).unwrap());
    let o = vertex(&g, "o");
    let e = ball(&g, o, 1.0).unwrap();
    let eta = make_cutoff(&g, &mesh, &e, &CutoffProfile::linear(0.5).unwrap()).unwrap();
    for edge in g.edge_ids() {
        for k in 0..=1000 {
            let t = g.effective_length(edge) * k as f64 / 1000.0;
            let want = (1.0 - (t - 1.0).max(0.0) / 0.5).max(0.0);
            assert!((eta.value(edge, t).re - want).abs() < 1e-12);
        }
    }
}

#[test]
fn cutoff_gradients_are_bounded() {
    let g = MetricGraph::chain(3).unwrap().with_truncation(4.0).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.05).unwrap());
    let e = ball(&g, vertex(&g, "0"), 2.3).unwrap();
    for kind in [ProfileKind::Linear, ProfileKind::Smooth] {
        let p = CutoffProfile::new(0.8, kind).unwrap();
        let eta = make_cutoff(&g, &mesh, &e, &p).unwrap();
        let nb = neighborhood(&g, &e, 0.8).unwrap();
        for edge in g.edge_ids() {
            for k in 0..mesh.cells(edge) {
                assert!(eta.cell_slope(edge, k).norm() <= 2.0 / 0.8 * (1.0 + 1e-6));
            }
            for k in 0..=mesh.cells(edge) {
                let t = mesh.position(edge, k);
                let p = g.point_on_edge(edge, t).unwrap();
                let v = eta.node_value(edge, k).re;
                if e.contains(&g, p) {
                    assert_eq!(v, 1.0);
                }
                if !nb.contains(&g, p) {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }
}

#[test]
fn compactly_supported_u_is_its_own_sequence() {
    let g = MetricGraph::interval(10.0).unwrap();
    let fm = fm_for(&g, 0.05);
    let u = NodalFunction::interpolate(fm.mesh.clone(), |_, t| {
        C64::new(((t - 2.0).abs() < 1.0) as u8 as f64 * (1.0 - (t - 2.0).abs()), 0.0)
    });
    let dofs: Vec<f64> = u.dofs().iter().map(|z| z.re).collect();
    let own = weyl_residual_real(&fm, &dofs, 3.0).unwrap();
    let sets: Vec<Region> = [7.0, 9.0]
        .iter()
        .map(|&r| Region::from_intervals(&g, [(EdgeId(0), 0.0, r)]))
        .collect();
    let cert = weyl_sequence(
        &g,
        &fm,
        &u.into(),
        3.0,
        &sets,
        &CutoffProfile::linear(1.0).unwrap(),
        &Thresholds::default(),
    )
    .unwrap();
    for r in &cert.residuals {
        assert!((r - own).abs() < 1e-12 * own);
    }
    assert_eq!(cert.collar_masses, vec![0.0, 0.0]);
}

#[test]
fn growing_solution_has_no_decaying_ratio() {
    // u = e^t on one lead with α = 1 solves the δ condition at λ = −1
    let g = MetricGraph::star_of_leads(1, 1.0).unwrap().with_truncation(30.0).unwrap();
    let o = g.vertex_by_label("o").unwrap();
    let u = shoot(&g, -1.0, &[Seed::new(o, C64::new(1.0, 0.0))]).unwrap();
    assert!((u.value(EdgeId(0), 2.0).re - 2f64.exp()).abs() < 1e-12);
    let fm = fm_for(&g, 0.1);
    let sets: Vec<Region> = [5.0, 10.0, 15.0, 20.0]
        .iter()
        .map(|&r| ball(&g, GraphPoint::Vertex(o), r).unwrap())
        .collect();
    let cert = weyl_sequence(
        &g,
        &fm,
        &u.into(),
        -1.0,
        &sets,
        &CutoffProfile::linear(1.0).unwrap(),
        &Thresholds::default(),
    )
    .unwrap();
    for (k, r) in cert.ratios.iter().enumerate() {
        let r_n = 5.0 * (k + 1) as f64;
        let want = (((2.0 * (r_n + 3.0)).exp() - (2.0 * (r_n - 3.0)).exp())
            / ((2.0 * r_n).exp() - 1.0))
            .sqrt();
        assert!((r / want - 1.0).abs() < 1e-10, "{r} vs {want}");
        assert!(*r > 19.0);
    }
    assert_eq!(cert.verdict, Verdict::Inconclusive);
}

#[test]
fn radii_examples() {
    let x0 = GraphPoint::Vertex(crate::metric_graph::VertexId(0));
    let radii: Vec<f64> = (0..=100).map(|k| k as f64 * 0.5).collect();
    let constant =
        GrowthProfile::from_samples(x0, radii.clone(), vec![3.0; radii.len()]).unwrap();
    let sel = subexponential_radii(&constant, 1.0, 0.1).unwrap();
    assert_eq!(sel.radii, radii[..radii.len() - 2].to_vec());
    assert!(sel.warnings.is_empty());

    let exp = GrowthProfile::from_samples(
        x0,
        radii.clone(),
        radii.iter().map(|r| (2.0 * r).exp()).collect(),
    )
    .unwrap();
    assert!(subexponential_radii(&exp, 1.0, 0.1).unwrap().radii.is_empty());

    let lin = GrowthProfile::from_samples(x0, radii.clone(), radii.clone()).unwrap();
    let sel = subexponential_radii(&lin, 1.0, 0.1).unwrap();
    let threshold = 1.0 / (0.1f64.exp() - 1.0);
    assert!((threshold - 9.508).abs() < 1e-3);
    assert_eq!(sel.radii[0], 10.0);
    assert!(sel.radii.iter().all(|&r| r >= threshold));

    let sel = subexponential_radii(&lin, 0.7, 0.1).unwrap();
    assert_eq!(sel.warnings.len(), 1);
    assert!(subexponential_radii(&lin, 1.0, 0.0).is_err());
}

#[test]
fn caccioppoli_examples() {
    // constant solution at λ = 0
    let g = MetricGraph::star(&[1.0, 2.0]).unwrap();
    let o = g.vertex_by_label("o").unwrap();
    let u = shoot(&g, 0.0, &[Seed::new(o, C64::new(2.0, 0.0))]).unwrap();
    let e = ball(&g, GraphPoint::Vertex(o), 0.5).unwrap();
    let rep = caccioppoli_check(&g, &u.into(), 0.0, &e, 0.3, 1.0).unwrap();
    assert_eq!(rep.lhs, 0.0);
    assert!(rep.pass && rep.rhs > 0.0);

    // cos on the chain
    let (g, u) = cosine_on_chain(8, 10.0);
    let c = caccioppoli_constant(1.0, 0.0, 0.0).unwrap();
    let v0 = g.vertex_by_label("0").unwrap();
    let e = Region::from_intervals(
        &g,
        (0..6).map(|k| (g.edge_by_label(&format!("e{k}")).unwrap(), 0.0, 1.0)),
    )
    .union(
        &Region::from_intervals(&g, [(g.edge_by_label("e6").unwrap(), 0.0, 2.0 * PI - 6.0)]),
        &g,
    );
    let rep = caccioppoli_check(&g, &u.into(), 1.0, &e, 1.0, c).unwrap();
    assert!((rep.lhs - PI).abs() < 1e-12, "{}", rep.lhs);
    let mass = |a: f64, b: f64| (b - a) / 2.0 + ((2.0 * b).sin() - (2.0 * a).sin()) / 4.0;
    assert!((rep.rhs - c * mass(-1.0, 2.0 * PI + 1.0)).abs() < 1e-10);
    assert!(rep.pass && rep.empirical_constant <= c);
    let _ = v0;

    // δ bound state: E = [−1, 1], b = 1
    let g = MetricGraph::star_of_leads(2, -1.0).unwrap().with_truncation(40.0).unwrap();
    let o = g.vertex_by_label("o").unwrap();
    let u = shoot(&g, -0.25, &[Seed::new(o, C64::new(1.0, 0.0))]).unwrap();
    let c_q = delta_trace_bound(-1.0, 2, 0.5).unwrap();
    let c = caccioppoli_constant(-0.25, 0.5, c_q).unwrap();
    let e = ball(&g, GraphPoint::Vertex(o), 1.0).unwrap();
    let rep = caccioppoli_check(&g, &u.into(), -0.25, &e, 1.0, c).unwrap();
    assert!((rep.lhs - (1.0 - (-1f64).exp()) / 2.0).abs() < 1e-13);
    assert!((rep.rhs - c * 2.0 * (1.0 - (-2f64).exp())).abs() < 1e-12);
    assert!(rep.pass);
}

#[test]
fn identities_hold_exactly() {
    let (g, u) = cosine_on_chain(4, 6.0);
    let mesh = Arc::new(Mesh::uniform(&g, 0.25).unwrap());
    let zero = NodalFunction::zeros(mesh.clone());
    let rep = identity_check(&g, &u, 1.0, &MeasurePerturbation::zero(), &zero).unwrap();
    assert_eq!(rep.eigen_identity.lhs, [0.0, 0.0]);
    assert_eq!(rep.eigen_identity.defect, 0.0);
    let tent = NodalFunction::interpolate(mesh, |e, t| {
        let x = match g.edge(e).label.as_str() {
            "lead+" => 4.0 + t,
            "lead-" => -4.0 - t,
            l => l[1..].parse::<f64>().unwrap() + t,
        };
        C64::new((1.0 - (x - 1.0).abs()).max(0.0), 0.0)
    });
    let rep = identity_check(&g, &u, 1.0, &MeasurePerturbation::zero(), &tent).unwrap();
    assert!(rep.eigen_identity.defect <= 1e-10, "{:?}", rep);
    assert!(rep.product_rule.defect <= 1e-10, "{:?}", rep);
    assert!(rep.eigen_identity.lhs[0] > 0.1);
    // at the wrong energy the first identity fails, the product rule does not
    let rep = identity_check(&g, &u, 2.0, &MeasurePerturbation::zero(), &tent).unwrap();
    assert!(rep.eigen_identity.defect > 1e-3);
    assert!(rep.product_rule.defect <= 1e-10);
}

#[test]
fn identities_see_the_delta_coupling() {
    let g = MetricGraph::star_of_leads(2, -1.0).unwrap().with_truncation(10.0).unwrap();
    let o = g.vertex_by_label("o").unwrap();
    let u = shoot(&g, -0.25, &[Seed::new(o, C64::new(1.0, 0.0))]).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.1).unwrap());
    let eta = NodalFunction::interpolate(mesh, |_, t| C64::new((1.0 - t / 2.0).max(0.0), 0.0));
    let rep = identity_check(&g, &u, -0.25, &MeasurePerturbation::zero(), &eta).unwrap();
    assert!(rep.eigen_identity.defect <= 1e-12, "{rep:?}");
    // the same coupling written as a point mass on a Kirchhoff vertex
    let k = MetricGraph::star_of_leads(2, 0.0).unwrap().with_truncation(10.0).unwrap();
    let mu = MeasurePerturbation::zero().point_mass(GraphPoint::Vertex(o), -1.0);
    let rep = identity_check(&k, &u, -0.25, &mu, &eta).unwrap();
    assert!(rep.eigen_identity.defect <= 1e-12);
    let rep = identity_check(&k, &u, -0.25, &MeasurePerturbation::zero(), &eta).unwrap();
    assert!(rep.eigen_identity.defect > 1e-3);
}

#[test]
fn compact_eigenvector_is_certified_with_one_set() {
    let g = MetricGraph::interval(1.0).unwrap();
    let fm = fm_for(&g, 0.01);
    let s = solve_spectrum(&fm, 3, -1.0).unwrap();
    let u = NodalFunction::from_real_dofs(fm.mesh.clone(), &s.eigenvectors[2]).unwrap();
    let config = SchnolConfig::new(vertex(&g, "a"), 0.1, 0.05);
    let cert = certify(&g, &fm, &u.into(), s.eigenvalues[2], &config).unwrap();
    assert_eq!(cert.ratios, vec![0.0]);
    assert!(cert.residuals[0] < 1e-9);
    assert_eq!(cert.verdict, Verdict::Certified);
    assert_eq!(cert.radii, vec![1.0]);
}

#[test]
fn exponential_growth_is_inconclusive() {
    let g = MetricGraph::chain(5).unwrap().with_truncation(60.0).unwrap();
    let v0 = g.vertex_by_label("0").unwrap();
    let e0 = g.edge_by_label("e0").unwrap();
    let em = g.edge_by_label("e-1").unwrap();
    let k = 0.1;
    let seed = Seed::new(v0, C64::new(1.0, 0.0))
        .with_outgoing(crate::metric_graph::EdgeEnd::Start(e0), C64::new(k, 0.0))
        .with_outgoing(crate::metric_graph::EdgeEnd::End(em), C64::new(-k, 0.0));
    let u = shoot(&g, -k * k, &[seed]).unwrap();
    let fm = fm_for(&g, 0.1);
    let cert = certify(&g, &fm, &u.into(), -k * k, &SchnolConfig::new(vertex(&g, "0"), 1.0, 0.05))
        .unwrap();
    assert!(cert.ratios.is_empty());
    assert_eq!(cert.verdict, Verdict::Inconclusive);
    assert!(cert.warnings.iter().any(|w| w.contains("horizon")));
}

#[test]
fn certificate_is_scale_invariant_and_serializes() {
    let (g, u) = cosine_on_chain(10, 50.0);
    let fm = fm_for(&g, 0.1);
    let config = SchnolConfig::new(vertex(&g, "0"), 1.0, 0.05);
    let a = certify(&g, &fm, &u.clone().into(), 1.0, &config).unwrap();
    let c = C64::new(-3.0, 4.0);
    let b = certify(&g, &fm, &u.scaled(c).into(), 1.0, &config).unwrap();
    assert!(!a.ratios.is_empty());
    assert_eq!(a.radii, b.radii);
    assert_eq!(a.verdict, b.verdict);
    for n in 0..a.ratios.len() {
        assert!((a.ratios[n] - b.ratios[n]).abs() <= 1e-12 * a.ratios[n]);
        assert!((a.residuals[n] - b.residuals[n]).abs() <= 1e-12 * a.residuals[n]);
        assert!((b.core_masses[n] / a.core_masses[n] - 5.0).abs() < 1e-12);
    }
    for w in a.radii.windows(2) {
        assert!(w[1] >= w[0] + 6.0);
    }
    let back = SchnolCertificate::from_json(&a.to_json()).unwrap();
    assert_eq!(back.radii, a.radii);
    assert_eq!(back.verdict, a.verdict);
    let csv = a.table().render(crate::table::Format::Csv);
    assert!(csv.starts_with("n,r_n,core_mass,collar_mass,ratio,residual\n1,"));
    assert!(a.to_json().contains("\"verdict\": \""));
}

#[test]
fn radius_thinning() {
    let cands: Vec<f64> = (0..=200).map(|k| k as f64 * 0.5).collect();
    let r = thin_radii(&cands, 1.0, 100.0);
    assert_eq!(r[0], 3.0);
    assert_eq!(r[1], 9.0);
    assert_eq!(*r.last().unwrap(), 97.0);
    for w in r.windows(2) {
        assert!(w[1] >= w[0] + 6.0);
    }
}

fn log_concave_profile() -> impl Strategy<Value = GrowthProfile> {
    (0.1..5.0f64, 0.01..3.0f64, 0.1..2.0f64).prop_map(|(p, a, step)| {
        let radii: Vec<f64> = (0..120).map(|k| k as f64 * step).collect();
        let values = radii.iter().map(|r| (r + a).powf(p)).collect();
        GrowthProfile::from_samples(GraphPoint::Vertex(crate::metric_graph::VertexId(0)), radii, values)
            .unwrap()
    })
}

proptest! {
    #[test]
    fn qualifying_radii_are_upward_closed(j in log_concave_profile(), b in 0.1..4.0f64, delta in 0.01..1.0f64) {
        let sel = subexponential_radii(&j, b, delta).unwrap();
        if let Some(&first) = sel.radii.first() {
            let last = *j.radii.last().unwrap();
            let expected: Vec<f64> = j.radii.iter().copied().filter(|&r| r >= first && r + b <= last * (1.0 + 1e-12)).collect();
            prop_assert_eq!(sel.radii, expected);
        }
    }

    #[test]
    fn identity_defects_on_random_tents(c in 0.5..3.5f64, w in 0.3..1.5f64) {
        let (g, u) = cosine_on_chain(4, 3.0);
        let mesh = Arc::new(Mesh::uniform(&g, 0.05).unwrap());
        let tent = NodalFunction::interpolate(mesh, |e, t| {
            let x = match g.edge(e).label.as_str() {
                "lead+" => 4.0 + t,
                "lead-" => -4.0 - t,
                l => l[1..].parse::<f64>().unwrap() + t,
            };
            C64::new((1.0 - (x - c).abs() / w).max(0.0), 0.0)
        });
        let _ = GraphBuilder::new();
        let rep = identity_check(&g, &u, 1.0, &MeasurePerturbation::zero(), &tent).unwrap();
        prop_assert!(rep.eigen_identity.defect <= 1e-10);
        prop_assert!(rep.product_rule.defect <= 1e-10);
    }
}
