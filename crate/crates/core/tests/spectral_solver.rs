use nalgebra::DVector;
use tucker_cross::spectral::{laplacian_tucker, prolongate, Boundary, Laplace1D, PoissonProblem};
use tucker_cross::{rounded_sum, C2DConfig, TuckerTensor};

fn gaussian(ops: &[Laplace1D]) -> TuckerTensor {
    let vecs: Vec<DVector<f64>> = ops
        .iter()
        .enumerate()
        .map(|(m, op)| {
            let c = (m + 1) as f64 / 100.0;
            DVector::from_iterator(op.n(), op.points().into_iter().map(|p| (-36.0 * (p - 1.0 - c).powi(2)).exp()))
        })
        .collect();
    TuckerTensor::rank_one(&vecs).unwrap()
}

#[test]
fn solver_residual_is_within_ten_tolerances() {
    for n in [31, 63] {
        let ops = vec![Laplace1D::new(n, 2.0, Boundary::Dirichlet).unwrap(); 3];
        let f = gaussian(&ops);
        let tol = 1e-6;
        let sol = PoissonProblem::new(ops.clone(), f.clone(), None).unwrap().solve(&C2DConfig::new(tol), None).unwrap();
        // the residual is measured in the scaled norm h²‖Δ_h V − F‖ that matches the solution error scale
        let lap = laplacian_tucker(&sol.solution, &ops).unwrap();
        let res = rounded_sum(&[(1.0, &lap), (-1.0, &f)], 1e-14, None).unwrap().frob_norm();
        let h = ops[0].h();
        assert!(res * h * h <= 10.0 * tol, "n={n}: scaled residual {}", res * h * h);
    }
}

#[test]
fn shifted_neumann_solve_inverts_the_operator() {
    let ops = vec![Laplace1D::new(24, std::f64::consts::TAU, Boundary::Neumann).unwrap(); 3];
    let vecs: Vec<DVector<f64>> = ops.iter().map(|op| DVector::from_iterator(24, op.points().into_iter().map(f64::cos))).collect();
    let f = TuckerTensor::rank_one(&vecs).unwrap();
    let c = 0.3;
    let v = PoissonProblem::new(ops.clone(), f.clone(), Some(c)).unwrap().solve(&C2DConfig::new(1e-10), None).unwrap().solution;
    let lap = laplacian_tucker(&v, &ops).unwrap();
    let back = rounded_sum(&[(1.0, &v), (-c, &lap)], 1e-14, None).unwrap();
    let err = rounded_sum(&[(1.0, &back), (-1.0, &f)], 1e-14, None).unwrap().frob_norm();
    assert!(err < 1e-8 * f.frob_norm(), "{err}");
}

#[test]
fn prolonged_solution_is_a_good_warm_start() {
    let coarse = vec![Laplace1D::new(31, 2.0, Boundary::Dirichlet).unwrap(); 3];
    let fine = vec![Laplace1D::new(63, 2.0, Boundary::Dirichlet).unwrap(); 3];
    let cfg = C2DConfig::new(1e-6);
    let vc = PoissonProblem::new(coarse.clone(), gaussian(&coarse), None).unwrap().solve(&cfg, None).unwrap().solution;
    let p = prolongate(&vc, &coarse, &[63, 63, 63]).unwrap();
    assert_eq!(p.dims(), vec![63, 63, 63]);
    let sol = PoissonProblem::new(fine.clone(), gaussian(&fine), None).unwrap().solve(&cfg, Some(p.factors())).unwrap();
    assert!(sol.stats.converged);
    assert!(sol.stats.iterations <= 4);
}
