use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qgraph::eigensolution::{shoot, verify_eigensolution, Seed, SeedSpec};
use qgraph::forms::MeasurePerturbation;
use qgraph::function_space::{function_table, integrate_sq, PiecewiseFunction};
use qgraph::metric_graph::{EdgeEnd, GraphBuilder, MetricGraph, Region};
use qgraph::Error;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn star_of_leads_bound_states_for_any_degree() {
    // d leads with coupling α < 0: u = e^{α t/d}, λ = −(α/d)²
    for (d, alpha) in [(1usize, -1.0), (3, -1.5), (4, -0.4)] {
        let g = MetricGraph::star_of_leads(d, alpha).unwrap().with_truncation(30.0).unwrap();
        let o = g.vertex_by_label("o").unwrap();
        let lambda = -(alpha / d as f64).powi(2);
        let u = shoot(&g, lambda, &[Seed::new(o, c(1.0))]).unwrap();
        for e in g.edge_ids() {
            for t in [0.0, 0.5, 3.0, 10.0] {
                let want = (alpha / d as f64 * t).exp();
                assert!((u.value(e, t).re - want).abs() < 1e-12 * want.max(1e-3), "d={d} t={t}");
            }
        }
        let r = verify_eigensolution(&g, &u, lambda, &MeasurePerturbation::zero(), 24).unwrap();
        assert!(r < 1e-12, "d={d}: {r}");
    }
}

#[test]
fn figure_eight_carries_loop_modes() {
    // two loops of length 2π at one vertex; cos t on both is a λ = 1 solution
    let g = GraphBuilder::new()
        .vertex("v", 0.0)
        .edge("a", "v", Some("v"), 2.0 * PI)
        .edge("b", "v", Some("v"), 2.0 * PI)
        .build()
        .unwrap();
    let v = g.vertex_by_label("v").unwrap();
    let u = shoot(&g, 1.0, &[Seed::new(v, c(1.0))]).unwrap();
    let a = g.edge_by_label("a").unwrap();
    for t in [0.0, 1.0, 2.5, 6.0] {
        assert!((u.value(a, t) - c(t.cos())).norm() < 1e-9);
    }
    assert!(verify_eigensolution(&g, &u, 1.0, &MeasurePerturbation::zero(), 16).unwrap() < 1e-9);
    // loops of incommensurate lengths cannot match at λ = 1 with u′ = 0
    let g2 = GraphBuilder::new()
        .vertex("v", 0.0)
        .edge("a", "v", Some("v"), 2.0 * PI)
        .edge("b", "v", Some("v"), 1.0)
        .build()
        .unwrap();
    let v = g2.vertex_by_label("v").unwrap();
    let seed = Seed::new(v, c(1.0))
        .with_outgoing(EdgeEnd::Start(g2.edge_by_label("a").unwrap()), c(0.0))
        .with_outgoing(EdgeEnd::Start(g2.edge_by_label("b").unwrap()), c(0.0));
    assert!(matches!(shoot(&g2, 1.0, &[seed]), Err(Error::Infeasible(_))));
}

#[test]
fn seeds_from_files() {
    let g = MetricGraph::chain(2).unwrap().with_truncation(5.0).unwrap();
    let spec: Vec<SeedSpec> = serde_json::from_str(
        r#"[{"vertex": "0", "value": [0, 0],
             "outgoing": [{"edge": "e0", "end": "start", "derivative": [1, 0]},
                          {"edge": "e-1", "end": "end", "derivative": [-1, 0]}]}]"#,
    )
    .unwrap();
    let seeds: Vec<Seed> = spec.iter().map(|s| s.build(&g).unwrap()).collect();
    let u = shoot(&g, 4.0, &seeds).unwrap();
    // sin(2x)/2 on the line
    let e1 = g.edge_by_label("e1").unwrap();
    assert!((u.value(e1, 0.3).re - (2.0 * 1.3f64).sin() / 2.0).abs() < 1e-13);
    let bad: Vec<SeedSpec> = serde_json::from_str(r#"[{"vertex": "9"}]"#).unwrap();
    assert!(bad[0].build(&g).unwrap_err().to_string().contains("'9'"));
}

#[test]
fn tables_list_sampled_values() {
    let g = MetricGraph::interval(2.0).unwrap();
    let a = g.vertex_by_label("a").unwrap();
    let u = shoot(&g, PI * PI / 4.0, &[Seed::new(a, c(1.0))]).unwrap();
    let t = function_table(&g, &PiecewiseFunction::Exact(u), 4);
    assert_eq!(t.columns, ["edge", "t", "re", "im"]);
    assert_eq!(t.rows.len(), 5);
    assert!((t.float(4, 2).unwrap() - (PI).cos()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // on a tree every seed value gives a solution whose mass scales with |c|²
    #[test]
    fn solutions_are_linear_in_the_seed(lambda in -3.0..30.0f64, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let g = MetricGraph::star(&[1.0, 0.6, 1.7]).unwrap().with_truncation(3.0).unwrap();
        let o = g.vertex_by_label("o").unwrap();
        let one = match shoot(&g, lambda, &[Seed::new(o, c(1.0))]) {
            Ok(u) => u,
            Err(Error::Infeasible(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let z = C64::new(re, im);
        let scaled = shoot(&g, lambda, &[Seed::new(o, z)]).unwrap();
        let whole = Region::whole(&g);
        let m1 = integrate_sq(&PiecewiseFunction::Exact(one.clone()), &whole).unwrap() * (2.0 * one.log_scale()).exp();
        let m2 = integrate_sq(&PiecewiseFunction::Exact(scaled.clone()), &whole).unwrap() * (2.0 * scaled.log_scale()).exp();
        prop_assert!((m2 - z.norm_sqr() * m1).abs() <= 1e-9 * m2.max(1e-300));
    }
}
