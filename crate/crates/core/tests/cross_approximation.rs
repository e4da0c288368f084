use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tucker_cross::tucker::{cold_start_factors, random_orthonormal, random_tucker};
use tucker_cross::{c2d, c2di, hosvd, C2DConfig, CountingOracle, DenseTensor, FnOracle, Truncation, TuckerOracle};

fn rel_err(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.axpy(-1.0, b).unwrap().frob_norm() / b.frob_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn c2di_recovers_exact_rank_from_generic_guess(seed in 0u64..1000, r1 in 1usize..4, r2 in 1usize..4, r3 in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [14, 11, 9];
        let ranks = [r1, r2, r3];
        let t = random_tucker(&dims, &ranks, &mut rng);
        let guess: Vec<_> = dims.iter().zip(&ranks).map(|(&n, &r)| random_orthonormal(n, r, &mut rng)).collect();
        let approx = c2di(&TuckerOracle::new(&t), &guess).unwrap();
        prop_assert!(rel_err(&approx.to_dense(), &t.to_dense()) < 1e-9);
        prop_assert!(approx.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn c2d_cold_start_meets_tolerance(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tucker(&[20, 18, 16], &[3, 2, 4], &mut rng);
        let oracle = CountingOracle::new(TuckerOracle::new(&t));
        let out = c2d(&oracle, &cold_start_factors(&t.dims(), &mut rng), &C2DConfig::new(1e-9)).unwrap();
        prop_assert!(out.stats.converged);
        prop_assert_eq!(out.tensor.ranks(), vec![3, 2, 4]);
        prop_assert_eq!(out.stats.samples, oracle.count());
        let err = out.tensor.to_dense().axpy(-1.0, &t.to_dense()).unwrap().frob_norm();
        prop_assert!(err < 1e-9);
    }
}

#[test]
fn adaptive_error_tracks_hosvd_on_smooth_function() {
    let dims = vec![30, 30, 30];
    let f = |i: &[usize]| 1.0 / (i[0] + i[1] + i[2] + 3) as f64;
    let x = DenseTensor::from_fn(&dims, f);
    let oracle = FnOracle::new(dims.clone(), f);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in [3, 5, 7] {
        let h = hosvd(&x, Truncation::Ranks(vec![r; 3])).unwrap();
        let eh = h.to_dense().axpy(-1.0, &x).unwrap().frob_norm();
        let out = c2d(&oracle, &cold_start_factors(&dims, &mut rng), &C2DConfig::new(eh)).unwrap();
        let ec = out.tensor.to_dense().axpy(-1.0, &x).unwrap().frob_norm();
        assert!(ec <= 10.0 * eh, "rank {r}: {ec} vs {eh}");
        assert!((out.tensor.average_rank() - r as f64).abs() <= 2.0);
    }
}

#[test]
fn warm_start_from_neighbour_needs_fewer_iterations() {
    let dims = vec![40, 40, 40];
    let field = |shift: f64| {
        move |i: &[usize]| {
            let x = i[0] as f64 / 39.0 + shift;
            let y = i[1] as f64 / 39.0;
            let z = i[2] as f64 / 39.0;
            1.0 / (x * x + y * y + z * z).sqrt()
        }
    };
    let cfg = C2DConfig::new(1e-11);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cold = c2d(&FnOracle::new(dims.clone(), field(3.0)), &cold_start_factors(&dims, &mut rng), &cfg).unwrap();
    let warm = c2d(&FnOracle::new(dims.clone(), field(2.95)), cold.tensor.factors(), &cfg).unwrap();
    assert!(warm.stats.converged);
    assert!(warm.stats.iterations < cold.stats.iterations, "warm {:?} cold {:?}", warm.stats.ranks, cold.stats.ranks);
}
