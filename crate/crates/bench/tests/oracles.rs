use alcc::linalg::{DenseMatrix, SymMatrix};
use alcc::problems::L1LmiInstance;
use alcc::sets::{Regularizer, SetKind, SimpleSetProx};
use alcc_bench::oracles::*;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn grid_projection_onto_box_is_clipping() {
    let prox = SimpleSetProx::new(
        2,
        SetKind::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        },
        Regularizer::Zero,
    )
    .unwrap();
    let g = grid_generalized_projection(&prox, &[1.7, 0.3333], 1.0, GRID_STEP);
    assert!(close(&g, &[1.0, 0.333], 1e-12), "{g:?}");
}

#[test]
fn grid_projection_soft_thresholds() {
    // argmin s·λ|x| + (x - c)² on a wide box is the soft threshold at sλ/2
    let prox = SimpleSetProx::new(
        2,
        SetKind::BoundedWhole { radius: 5.0 },
        Regularizer::L1 { weight: 1.0 },
    )
    .unwrap();
    let g = grid_generalized_projection(&prox, &[0.8, -0.2], 1.0, GRID_STEP);
    assert!(close(&g, &[0.3, 0.0], 1e-9), "{g:?}");
}

#[test]
fn grid_projection_onto_l2_ball_is_radial() {
    let prox = SimpleSetProx::new(
        2,
        SetKind::L2Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        },
        Regularizer::Zero,
    )
    .unwrap();
    let g = grid_generalized_projection(&prox, &[3.0, 4.0], 1.0, GRID_STEP);
    assert!(close(&g, &[0.6, 0.8], 1e-3), "{g:?}");
}

#[test]
fn grid_projection_keeps_points_on_diagonal_faces() {
    let prox = SimpleSetProx::new(2, SetKind::L1Ball { radius: 1.2 }, Regularizer::Zero).unwrap();
    let g = grid_generalized_projection(&prox, &[1.6, 1.0], 1.0, GRID_STEP);
    // exact projection (0.9, 0.3) lies on the face x₁ + x₂ = 1.2
    assert!(close(&g, &[0.9, 0.3], 1e-9), "{g:?}");
}

#[test]
fn grid_projection_onto_simplex_edge() {
    let prox = SimpleSetProx::new(2, SetKind::Simplex, Regularizer::Zero).unwrap();
    let g = grid_generalized_projection(&prox, &[2.0, 0.0], 1.0, GRID_STEP);
    assert!(close(&g, &[1.0, 0.0], 1e-12), "{g:?}");
    let g = grid_generalized_projection(&prox, &[0.3, 0.3], 1.0, GRID_STEP);
    assert!(close(&g, &[0.5, 0.5], 1e-12), "{g:?}");
}

#[test]
fn one_dimensional_grid() {
    let prox = SimpleSetProx::new(
        1,
        SetKind::Box {
            lo: vec![-1.0],
            hi: vec![2.0],
        },
        Regularizer::Zero,
    )
    .unwrap();
    assert!(close(&grid_generalized_projection(&prox, &[0.41234], 1.0, GRID_STEP), &[0.412], 1e-12));
}

#[test]
fn box_qp_interior_and_clipped() {
    let q = DenseMatrix::identity(2);
    let (x, f) = box_qp_minimizer(&q, &[-0.5, 3.0], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    assert!(close(&x, &[0.5, -1.0], 1e-12));
    assert!((f - (0.125 - 0.5 * 0.5 + 0.5 - 3.0)).abs() < 1e-12);
}

#[test]
fn box_qp_coupled() {
    // Q = [[2, 1], [1, 2]], q = (-3, 0) on [0, 1]²
    let q = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let (x, _) = box_qp_minimizer(&q, &[-3.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    // unconstrained optimum (2, -1); with the box, x₁ = 1 and x₂ = 0
    assert!(close(&x, &[1.0, 0.0], 1e-12), "{x:?}");
}

#[test]
fn psd2_interval_cases() {
    // diag(t - 1, t + 1) ⪰ 0  ⇔  t >= 1
    let (lo, hi) = psd2_interval([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0]).unwrap();
    assert!((lo - 1.0).abs() < 1e-12 && hi == f64::INFINITY);
    // I + t·0 is always PSD
    assert_eq!(psd2_interval([1.0, 0.0, 1.0], [0.0; 3]), Some((f64::NEG_INFINITY, f64::INFINITY)));
    // diag(t, -t) only at t = 0
    let (lo, hi) = psd2_interval([0.0; 3], [1.0, 0.0, -1.0]).unwrap();
    assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
    // [[1, t], [t, 1]] ⪰ 0  ⇔  |t| <= 1
    let (lo, hi) = psd2_interval([1.0, 0.0, 1.0], [0.0, 1.0, 0.0]).unwrap();
    assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    // -I + t·0 never is
    assert_eq!(psd2_interval([-1.0, 0.0, -1.0], [0.0; 3]), None);
}

#[test]
fn lmi_grid_on_diagonal_instance() {
    // M(x) = diag(x₁ - 0.5, x₂ + x₃ - 0.3): optimum ||x||₁ = 0.8
    let d = |a: f64, b: f64| SymMatrix::diag(&[a, b]);
    let inst = L1LmiInstance::new(
        vec![d(1.0, 0.0), d(0.0, 1.0), d(0.0, 1.0)],
        d(-0.5, -0.3),
        vec![1.0, 1.0, 0.0],
    )
    .unwrap();
    let (v, x) = lmi_grid_minimum(&inst, 0.01).unwrap();
    assert!((v - 0.8).abs() < 1e-9, "{v} at {x:?}");
    assert!((x[0] - 0.5).abs() < 1e-9);
}

#[test]
fn central_difference_of_quadratic_is_exact() {
    let g = central_difference(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[1.0, 2.0], 1e-4);
    assert!(close(&g, &[8.0, 3.0], 1e-8), "{g:?}");
}

#[test]
fn power_iteration_top_eigenvalue() {
    let c = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    assert!((gram_top_eigenvalue(&c, 200) - 9.0).abs() < 1e-10);
}
