use tucker_cross::pde::BratuMap;
use tucker_cross::{rounded_sum, tucker_aa, AAParams, C2DConfig, FixedPointMap, MapValue, Result, Schedule, StopTolerance, TuckerTensor};

/// `H(X) = c X + B` in exact Tucker arithmetic.
struct Affine {
    c: f64,
    b: TuckerTensor,
}

impl FixedPointMap for Affine {
    fn dims(&self) -> Vec<usize> {
        self.b.dims()
    }

    fn apply(&self, x: &TuckerTensor, cfg: &C2DConfig) -> Result<MapValue> {
        let tensor = rounded_sum(&[(self.c, x), (1.0, &self.b)], cfg.tol, None)?;
        Ok(MapValue { tensor, c2d_iterations: 0, precond_iterations: 0 })
    }
}

#[test]
fn acceleration_beats_picard_on_slow_contraction() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
    let b = tucker_cross::tucker::random_tucker(&[10, 9, 8], &[2, 2, 2], &mut rng);
    let map = Affine { c: 0.95, b };
    let x0 = TuckerTensor::zeros(&[10, 9, 8]);
    let mut p = AAParams::new(3, 0.5, StopTolerance::RelativeToInitial(1e-8), 1e-12);
    p.schedule = Schedule::Constant;
    let aa = tucker_aa(&map, &x0, &p).unwrap();
    assert!(aa.converged);
    // Picard needs log(1e-8)/log(0.95) ≈ 360 steps
    assert!(aa.history.len() < 20, "{} iterations", aa.history.len());
    let exact = map.b.scaled(1.0 / (1.0 - map.c));
    let err = rounded_sum(&[(1.0, &aa.solution), (-1.0, &exact)], 1e-14, None).unwrap().frob_norm();
    assert!(err < 1e-6 * exact.frob_norm());
}

#[test]
fn preconditioned_bratu_residual_drops_on_a_small_grid() {
    let map = BratuMap::new(16, 3, 1.0, 0.1, true).unwrap();
    let mut p = AAParams::new(4, 0.9, StopTolerance::RelativeToInitial(1e-6), 1e-9);
    p.schedule = Schedule::Constant;
    let out = tucker_aa(&map, &map.initial_guess().unwrap(), &p).unwrap();
    assert!(out.converged);
    let r = map.residual_dense(&out.solution.to_dense()).unwrap();
    let scale = map.residual_dense(&map.initial_guess().unwrap().to_dense()).unwrap().frob_norm();
    assert!(r.frob_norm() < 1e-4 * scale);
}
