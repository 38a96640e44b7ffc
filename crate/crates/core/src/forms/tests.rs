use super::*;
use crate::metric_graph::{EdgeId, GraphBuilder, VertexId};
use proptest::prelude::*;

fn approx(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * (1.0 + b.abs())
}

fn unit_fm(cells: usize, mu: &MeasurePerturbation) -> FormMatrices {
    let g = MetricGraph::interval(1.0).unwrap();
    let mesh = Arc::new(Mesh::with_cells(&g, vec![cells]).unwrap());
    assemble(&g, mesh, mu).unwrap()
}

#[test]
fn single_cell_element_matrices() {
    let fm = unit_fm(1, &MeasurePerturbation::zero());
    let k = fm.k.to_dense();
    let m = fm.m.to_dense();
    assert_eq!(k, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    assert!(approx(m[(0, 0)], 1.0 / 3.0) && approx(m[(0, 1)], 1.0 / 6.0));
    assert!(approx(m[(1, 1)], 1.0 / 3.0) && approx(m[(1, 0)], 1.0 / 6.0));
    assert_eq!(fm.p().nnz(), 0);
}

#[test]
fn vertex_point_mass_is_a_single_entry() {
    let mu = MeasurePerturbation::zero().point_mass(GraphPoint::Vertex(VertexId(1)), 2.5);
    let fm = unit_fm(4, &mu);
    let p: Vec<_> = fm.p().triplets().filter(|t| t.2 != 0.0).collect();
    assert_eq!(p, vec![(1, 1, 2.5)]);
}

#[test]
fn vertex_coupling_enters_as_point_mass() {
    let g = MetricGraph::star_of_leads(2, -1.0).unwrap().with_truncation(3.0).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.5).unwrap());
    let fm = assemble(&g, mesh, &MeasurePerturbation::zero()).unwrap();
    assert_eq!(fm.p_minus.get(0, 0), 1.0);
    assert_eq!(fm.p_plus.nnz(), 0);
}

#[test]
fn kirchhoff_row_sums_both_edges() {
    let g = GraphBuilder::new()
        .vertex("a", 0.0)
        .vertex("v", 0.0)
        .vertex("b", 0.0)
        .edge("l", "a", Some("v"), 1.0)
        .edge("r", "v", Some("b"), 2.0)
        .build()
        .unwrap();
    let mesh = Arc::new(Mesh::with_cells(&g, vec![4, 4]).unwrap());
    let fm = assemble(&g, mesh, &MeasurePerturbation::zero()).unwrap();
    let v = 1;
    // per-edge element sums: 1/h_l + 1/h_r with h_l = 1/4, h_r = 1/2
    assert!(approx(fm.k.get(v, v), 4.0 + 2.0));
    let row_sum: f64 = fm.k.row(v).map(|(_, x)| x).sum();
    assert!(row_sum.abs() < 1e-14);
}

#[test]
fn interior_point_mass_uses_hat_values() {
    let g = MetricGraph::interval(1.0).unwrap();
    let p = g.point_on_edge(EdgeId(0), 0.3).unwrap();
    let mu = MeasurePerturbation::zero().point_mass(p, 2.0);
    let fm = unit_fm(2, &mu);
    // cell [0, 0.5], local s = 0.3: φ = (0.4, 0.6); nodes 0 and interior 2
    let pp = fm.p_plus.to_dense();
    assert!(approx(pp[(0, 0)], 2.0 * 0.16));
    assert!(approx(pp[(0, 2)], 2.0 * 0.24));
    assert!(approx(pp[(2, 2)], 2.0 * 0.36));
}

#[test]
fn density_reproduces_linear_potential_integrals() {
    // V(t) = 1 + t on [0, 1]: P(1, 1) = ∫ V dm = 3/2 for u ≡ 1
    let mu = MeasurePerturbation::zero().density(EdgeId(0), vec![1.0, 2.0]);
    let fm = unit_fm(8, &mu);
    let ones = vec![1.0; fm.num_dofs()];
    assert!(approx(fm.p().quad(&ones), 1.5));
    let (plus, minus) = MeasurePerturbation::zero()
        .density(EdgeId(0), vec![-1.0, 2.0])
        .split();
    assert_eq!(plus.densities[0].samples, vec![0.0, 2.0]);
    assert_eq!(minus.densities[0].samples, vec![1.0, 0.0]);
}

#[test]
fn truncated_away_point_mass_is_rejected() {
    let g = MetricGraph::star_of_leads(1, 0.0).unwrap().with_truncation(5.0).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.5).unwrap());
    let far = GraphPoint::Edge {
        edge: EdgeId(0),
        offset: 7.0,
    };
    let mu = MeasurePerturbation::zero().point_mass(far, 1.0);
    assert!(assemble(&g, mesh, &mu).is_err());
}

#[test]
fn symmetric_and_constants_in_kernel() {
    let g = MetricGraph::star(&[1.0, 0.7, 2.0]).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.1).unwrap());
    let fm = assemble(&g, mesh, &MeasurePerturbation::zero()).unwrap();
    assert!(fm.k.asymmetry() <= 1e-14 && fm.m.asymmetry() <= 1e-14);
    let ones = vec![1.0; fm.num_dofs()];
    assert!(fm.k.mul_vec(&ones).iter().all(|x| x.abs() < 1e-12));
    let eig = dense_spectrum(&fm).unwrap();
    assert!(eig[0].abs() < 1e-10 && eig[1] > 1e-3);
    assert!(approx(fm.m.quad(&ones), 3.7));
}

#[test]
fn zero_perturbation_has_zero_bound() {
    let fm = unit_fm(10, &MeasurePerturbation::zero());
    assert_eq!(fm.form_bound().unwrap(), FormBound::ZERO);
}

#[test]
fn point_mass_trace_bound() {
    let g = MetricGraph::interval(1.0).unwrap();
    let mid = g.point_on_edge(EdgeId(0), 0.5).unwrap();
    let fm = unit_fm(100, &MeasurePerturbation::zero().point_mass(mid, -1.0));
    let k10 = kappa_at(&fm, &fm.p_minus, 10.0).unwrap();
    let k1000 = kappa_at(&fm, &fm.p_minus, 1000.0).unwrap();
    assert!(k10 < 1.0 && k1000 < k10, "{k10} {k1000}");
    let b = fm.form_bound().unwrap();
    assert!(b.admissible && b.kappa <= 0.5);
    // h + c_κ M ≥ 0
    let shifted = fm.h().combine(1.0, &fm.m, b.c_kappa);
    let eig = dense_generalized_eigen(&shifted.to_dense(), &fm.m.to_dense()).unwrap();
    assert!(eig.values[0] > -1e-10);
    // κ(c) from the dense pencil agrees with the reduced computation
    let pencil = fm.k.combine(1.0, &fm.m, 10.0);
    let dense = dense_generalized_eigen(&fm.p_minus.to_dense(), &pencil.to_dense()).unwrap();
    assert!((dense.values.last().unwrap() - k10).abs() < 1e-10);
}

#[test]
fn stiffness_itself_is_inadmissible() {
    let fm = unit_fm(50, &MeasurePerturbation::zero());
    let b = estimate_form_bound(&fm, &fm.k).unwrap();
    assert!(!b.admissible);
    assert!(b.kappa >= 1.0 - KAPPA_MARGIN);
    assert!(kappa_at(&fm, &fm.k, 1e-3).unwrap() > 0.999_999);
}

#[test]
fn bound_holds_on_eigenvector_samples() {
    let g = MetricGraph::star(&[1.0, 2.0, 1.5]).unwrap();
    let mesh = Arc::new(Mesh::uniform(&g, 0.05).unwrap());
    let mu = MeasurePerturbation::zero()
        .density(EdgeId(1), vec![-3.0, -1.0, 0.5, -2.0])
        .point_mass(GraphPoint::Vertex(VertexId(0)), -2.0);
    let fm = assemble(&g, mesh, &mu).unwrap();
    let b = fm.form_bound().unwrap();
    assert!(b.admissible);
    let eig = dense_generalized_eigen(&fm.k.to_dense(), &fm.m.to_dense()).unwrap();
    for col in 0..eig.values.len() {
        let u: Vec<f64> = eig.vectors.column(col).iter().copied().collect();
        let lhs = fm.p_minus.quad(&u);
        let rhs = b.kappa * fm.k.quad(&u) + b.c_kappa * fm.m.quad(&u);
        assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12, "mode {col}: {lhs} > {rhs}");
    }
}

#[test]
fn caccioppoli_examples() {
    let c = caccioppoli_constant(-1.0, 0.0, 0.0).unwrap();
    assert!((c - 16.0).abs() < 1e-6, "{c}");
    let c = caccioppoli_constant(-3.0, 0.0, 2.0).unwrap();
    assert!((c - 16.0).abs() < 1e-6);
    // λ₀ = 1, q = 0: min over S of (4/S² + 1)/(1 − S²); minimizer
    // S² = 2(√5 − 1)/4·... solved numerically by golden section
    let f = |s: f64| (4.0 / (s * s) + 1.0) / (1.0 - s * s);
    let (mut a, mut b) = (0.01f64, 0.99f64);
    for _ in 0..200 {
        let m1 = a + (b - a) * 0.381_966;
        let m2 = a + (b - a) * 0.618_034;
        if f(m1) < f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let oracle = f(0.5 * (a + b));
    let c = caccioppoli_constant(1.0, 0.0, 0.0).unwrap();
    assert!(c >= oracle && c - oracle < 1e-6, "{c} vs {oracle}");
    assert!(caccioppoli_constant(0.0, 1.0, 0.0).is_err());
    let near_one = caccioppoli_constant(0.0, 0.999_999, 0.0).unwrap();
    assert!(near_one > 1e6);
}

#[test]
fn coordinate_export_lists_nonzeros() {
    let fm = unit_fm(1, &MeasurePerturbation::zero());
    let t = FormMatrices::coordinate_table(&fm.k);
    assert_eq!(t.rows.len(), 4);
    assert_eq!(t.columns, vec!["row", "col", "value"]);
}

#[test]
fn relabeling_conjugates_matrices() {
    let a = GraphBuilder::new()
        .vertex("x", 0.5)
        .vertex("y", 0.0)
        .vertex("z", -0.25)
        .edge("p", "x", Some("y"), 1.0)
        .edge("q", "y", Some("z"), 0.5)
        .edge("r", "z", Some("x"), 0.75)
        .build()
        .unwrap();
    let b = GraphBuilder::new()
        .vertex("z", -0.25)
        .vertex("x", 0.5)
        .vertex("y", 0.0)
        .edge("r", "z", Some("x"), 0.75)
        .edge("p", "x", Some("y"), 1.0)
        .edge("q", "y", Some("z"), 0.5)
        .build()
        .unwrap();
    let fa = assemble(&a, Arc::new(Mesh::uniform(&a, 0.125).unwrap()), &MeasurePerturbation::zero()).unwrap();
    let fb = assemble(&b, Arc::new(Mesh::uniform(&b, 0.125).unwrap()), &MeasurePerturbation::zero()).unwrap();
    // map nodes by (edge label, position)
    let key = |g: &MetricGraph, mesh: &Mesh| -> Vec<(String, u64)> {
        mesh.node_locations()
            .into_iter()
            .map(|(e, t)| {
                let edge = g.edge(e);
                if t == 0.0 {
                    (format!("v:{}", g.vertex(edge.from).label), 0)
                } else if t == edge.length {
                    (format!("v:{}", g.vertex(edge.to.unwrap()).label), 0)
                } else {
                    (edge.label.clone(), t.to_bits())
                }
            })
            .collect()
    };
    let ka = key(&a, &fa.mesh);
    let kb = key(&b, &fb.mesh);
    let perm: Vec<usize> = ka.iter().map(|k| kb.iter().position(|x| x == k).unwrap()).collect();
    for (mat_a, mat_b) in [(&fa.k, &fb.k), (&fa.m, &fb.m), (&fa.p_plus, &fb.p_plus), (&fa.p_minus, &fb.p_minus)] {
        for (i, j, v) in mat_a.triplets() {
            assert_eq!(v, mat_b.get(perm[i], perm[j]));
        }
        assert_eq!(mat_a.nnz(), mat_b.nnz());
    }
}

proptest! {
    #[test]
    fn bounded_measures_make_the_shifted_form_positive(w in -4.0..-0.01f64, t in 0.05..0.95f64, v in -2.0..0.0f64) {
        let g = MetricGraph::interval(1.0).unwrap();
        let p = g.point_on_edge(EdgeId(0), t).unwrap();
        let mu = MeasurePerturbation::zero().point_mass(p, w).density(EdgeId(0), vec![v, 0.0, v]);
        let fm = unit_fm(40, &mu);
        let b = fm.form_bound().unwrap();
        prop_assert!(b.admissible);
        let shifted = fm.h().combine(1.0, &fm.m, b.c_kappa);
        let eig = dense_generalized_eigen(&shifted.to_dense(), &fm.m.to_dense()).unwrap();
        prop_assert!(eig.values[0] > -1e-10);
    }
}
