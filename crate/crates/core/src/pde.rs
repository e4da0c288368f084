//! Finite-difference fixed-point maps for the Bratu and Allen-Cahn problems.
//!
//! Entries of the maps touch only the iterate at a grid point and its
//! nearest neighbours, so blocks are sampled from the Tucker iterate and its
//! per-mode second differences instead of point by point.

use nalgebra::DVector;

use crate::aa::{FixedPointMap, MapValue};
use crate::cross::{c2d, C2DConfig};
use crate::error::{Error, Result};
use crate::oracle::TensorOracle;
use crate::spectral::{laplacian_dense, Boundary, Laplace1D, PoissonProblem};
use crate::tensor::DenseTensor;
use crate::tucker::{rounded_sum, TuckerTensor};

/// Samples `x` and `Δ_h x` on index blocks.
pub struct StencilSampler {
    x: TuckerTensor,
    /// Term `m` carries `−T_m U_m / h_m²` in mode `m`; their sum is `Δ_h x`.
    lap: Vec<TuckerTensor>,
}

impl StencilSampler {
    pub fn new(x: &TuckerTensor, ops: &[Laplace1D]) -> Result<Self> {
        check_grid(&x.dims(), ops)?;
        let lap = ops
            .iter()
            .enumerate()
            .map(|(mode, op)| {
                let mut factors = x.factors().to_vec();
                factors[mode] = op.apply(&factors[mode]) * (-1.0 / (op.h() * op.h()));
                TuckerTensor::from_parts(x.core().clone(), factors)
            })
            .collect();
        Ok(Self { x: x.clone(), lap })
    }

    pub fn values(&self, sets: &[&[usize]]) -> DenseTensor {
        self.x.sample_block(sets).expect("index sets within range")
    }

    pub fn laplacian(&self, sets: &[&[usize]]) -> DenseTensor {
        let mut acc = self.lap[0].sample_block(sets).expect("index sets within range");
        for t in &self.lap[1..] {
            let b = t.sample_block(sets).expect("index sets within range");
            for (a, v) in acc.data_mut().iter_mut().zip(b.data()) {
                *a += v;
            }
        }
        acc
    }
}

/// Values entering a pointwise rule at one grid point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Point {
    pub x: f64,
    pub lap: f64,
    pub old: f64,
}

/// Oracle `f(x, Δ_h x, x_old)` evaluated pointwise on a Tucker iterate.
pub struct StencilOracle<'a, F> {
    dims: Vec<usize>,
    sampler: &'a StencilSampler,
    old: Option<&'a TuckerTensor>,
    needs_lap: bool,
    f: F,
}

impl<'a, F: Fn(Point) -> f64 + Sync> StencilOracle<'a, F> {
    pub fn new(sampler: &'a StencilSampler, old: Option<&'a TuckerTensor>, needs_lap: bool, f: F) -> Self {
        Self { dims: sampler.x.dims(), sampler, old, needs_lap, f }
    }
}

impl<F: Fn(Point) -> f64 + Sync> TensorOracle for StencilOracle<'_, F> {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        let singles: Vec<[usize; 1]> = idx.iter().map(|&i| [i]).collect();
        let sets: Vec<&[usize]> = singles.iter().map(|s| s.as_slice()).collect();
        self.block(&sets).data()[0]
    }

    fn block(&self, sets: &[&[usize]]) -> DenseTensor {
        let mut out = self.sampler.values(sets);
        let lap = self.needs_lap.then(|| self.sampler.laplacian(sets));
        let old = self.old.map(|t| t.sample_block(sets).expect("index sets within range"));
        for (k, v) in out.data_mut().iter_mut().enumerate() {
            let p = Point {
                x: *v,
                lap: lap.as_ref().map_or(0.0, |l| l.data()[k]),
                old: old.as_ref().map_or(0.0, |o| o.data()[k]),
            };
            *v = (self.f)(p);
        }
        out
    }
}

fn check_grid(dims: &[usize], ops: &[Laplace1D]) -> Result<()> {
    if ops.len() != dims.len() || ops.iter().zip(dims).any(|(o, &n)| o.n() != n) {
        return Err(Error::DimensionMismatch(format!(
            "operators {:?} for dims {dims:?}",
            ops.iter().map(|o| o.n()).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

fn value(tensor: TuckerTensor, c2d_iterations: usize, precond_iterations: usize) -> MapValue {
    MapValue { tensor, c2d_iterations, precond_iterations }
}

/// `Δ_h v + λ e^v = 0` on the unit cube with homogeneous Dirichlet data.
///
/// Without preconditioning `H(X) = X + α (Δ_h X + λ e^X)`. With it,
/// `H(X) = X + α (−Δ_h)^{-1}(Δ_h X + λ e^X) = (1 − α) X + α (−Δ_h)^{-1} λ e^X`,
/// where the inverse is the spectral Poisson solver run at a tenth of the
/// current tolerance and warm-started from `X`.
#[derive(Clone, Debug)]
pub struct BratuMap {
    pub ops: Vec<Laplace1D>,
    pub lambda: f64,
    pub alpha: f64,
    pub precond: bool,
}

impl BratuMap {
    pub fn new(n: usize, d: usize, lambda: f64, alpha: f64, precond: bool) -> Result<Self> {
        if n < 3 || d == 0 {
            return Err(Error::InvalidArgument(format!("Bratu grid needs n >= 3 and d >= 1, got n={n}, d={d}")));
        }
        let op = Laplace1D::new(n, 1.0, Boundary::Dirichlet)?;
        Ok(Self { ops: vec![op; d], lambda, alpha, precond })
    }

    pub fn h(&self) -> f64 {
        self.ops[0].h()
    }

    /// `Δ_h X + λ e^X` on a dense grid function.
    pub fn residual_dense(&self, x: &DenseTensor) -> Result<DenseTensor> {
        let mut r = laplacian_dense(x, &self.ops)?;
        for (v, xv) in r.data_mut().iter_mut().zip(x.data()) {
            *v += self.lambda * xv.exp();
        }
        Ok(r)
    }

    /// One-dimensional Bratu solution along the first mode, constant in the
    /// others.
    pub fn initial_guess(&self) -> Result<TuckerTensor> {
        let theta = bratu_theta(self.lambda)?;
        let profile = |x: f64| 2.0 * (theta.cosh() / (theta * (1.0 - 2.0 * x)).cosh()).ln();
        let vecs: Vec<DVector<f64>> = self
            .ops
            .iter()
            .enumerate()
            .map(|(m, op)| {
                if m == 0 {
                    DVector::from_iterator(op.n(), op.points().into_iter().map(profile))
                } else {
                    DVector::from_element(op.n(), 1.0)
                }
            })
            .collect();
        TuckerTensor::rank_one(&vecs)
    }
}

impl FixedPointMap for BratuMap {
    fn dims(&self) -> Vec<usize> {
        self.ops.iter().map(|o| o.n()).collect()
    }

    fn apply(&self, x: &TuckerTensor, cfg: &C2DConfig) -> Result<MapValue> {
        let sampler = StencilSampler::new(x, &self.ops)?;
        let (lambda, alpha) = (self.lambda, self.alpha);
        if !self.precond {
            let oracle = StencilOracle::new(&sampler, None, true, |p: Point| p.x + alpha * (p.lap + lambda * p.x.exp()));
            let out = c2d(&oracle, x.factors(), cfg)?;
            return Ok(value(out.tensor, out.stats.iterations, 0));
        }
        let oracle = StencilOracle::new(&sampler, None, false, |p: Point| lambda * p.x.exp());
        let source = c2d(&oracle, x.factors(), cfg)?;
        let mut inner = cfg.clone();
        inner.tol = 0.1 * cfg.tol;
        let solve = PoissonProblem::new(self.ops.clone(), source.tensor, None)?.solve(&inner, Some(x.factors()))?;
        // Δ_h V = λ e^X, so (−Δ_h)^{-1} λ e^X = −V.
        let h = rounded_sum(&[(1.0 - alpha, x), (-alpha, &solve.solution)], cfg.tol, cfg.r_max.as_deref())?;
        Ok(value(h, source.stats.iterations, solve.stats.iterations))
    }
}

/// Smaller root of `cosh θ = θ √(8/λ)`, the parameter of the one-dimensional
/// solution `2 log(cosh θ / cosh(θ(1 − 2x)))` of `u'' + λ e^u = 0` on `[0, 1]`.
pub fn bratu_theta(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let s = (8.0 / lambda).sqrt();
    let g = |t: f64| t * s - t.cosh();
    let top = s.asinh();
    if g(top) <= 0.0 {
        return Err(Error::InvalidArgument(format!("no one-dimensional Bratu solution for lambda={lambda}")));
    }
    let (mut lo, mut hi) = (0.0, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One backward-Euler step of `v_t = ν Δv + v − v³` with homogeneous Neumann
/// data on a cell-centred grid of `[0, L]^d`.
///
/// The step residual is `R(X) = X − X_old − Δt (ν Δ_h X + X − X³)`. Without
/// preconditioning `H(X) = X − α R(X)`. With it,
/// `H(X) = X − α (I − Δt ν Δ_h)^{-1} R(X) = (1 − α) X + α (I − Δt ν Δ_h)^{-1}(X_old + Δt (X − X³))`,
/// the inverse being the shifted cosine-transform solver at a tenth of the
/// current tolerance.
#[derive(Clone, Debug)]
pub struct AllenCahnMap {
    pub ops: Vec<Laplace1D>,
    pub nu: f64,
    pub dt: f64,
    pub alpha: f64,
    pub precond: bool,
    pub old: TuckerTensor,
}

impl AllenCahnMap {
    pub fn new(ops: Vec<Laplace1D>, nu: f64, dt: f64, alpha: f64, precond: bool, old: TuckerTensor) -> Result<Self> {
        check_grid(&old.dims(), &ops)?;
        if !(dt > 0.0) || !(nu >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad Allen-Cahn step: nu={nu}, dt={dt}")));
        }
        Ok(Self { ops, nu, dt, alpha, precond, old })
    }

    /// Cell-centred Neumann grids of `n` points on `[0, length]` in `d` modes.
    pub fn grid(n: usize, d: usize, length: f64) -> Result<Vec<Laplace1D>> {
        Ok(vec![Laplace1D::new(n, length, Boundary::Neumann)?; d])
    }

    /// `∏_i sin(x_i)` on the grid.
    pub fn sine_initial(ops: &[Laplace1D]) -> Result<TuckerTensor> {
        let vecs: Vec<DVector<f64>> = ops
            .iter()
            .map(|op| DVector::from_iterator(op.n(), op.points().into_iter().map(f64::sin)))
            .collect();
        TuckerTensor::rank_one(&vecs)
    }

    /// The step residual `R(X)` on dense grid functions.
    pub fn residual_dense(&self, x: &DenseTensor, old: &DenseTensor) -> Result<DenseTensor> {
        let mut r = laplacian_dense(x, &self.ops)?;
        for ((v, xv), ov) in r.data_mut().iter_mut().zip(x.data()).zip(old.data()) {
            *v = xv - ov - self.dt * (self.nu * *v + xv - xv * xv * xv);
        }
        Ok(r)
    }
}

impl FixedPointMap for AllenCahnMap {
    fn dims(&self) -> Vec<usize> {
        self.old.dims()
    }

    fn apply(&self, x: &TuckerTensor, cfg: &C2DConfig) -> Result<MapValue> {
        let sampler = StencilSampler::new(x, &self.ops)?;
        let (nu, dt, alpha) = (self.nu, self.dt, self.alpha);
        if !self.precond {
            let oracle = StencilOracle::new(&sampler, Some(&self.old), true, |p: Point| {
                p.x - alpha * (p.x - p.old - dt * (nu * p.lap + p.x - p.x * p.x * p.x))
            });
            let out = c2d(&oracle, x.factors(), cfg)?;
            return Ok(value(out.tensor, out.stats.iterations, 0));
        }
        let oracle = StencilOracle::new(&sampler, Some(&self.old), false, |p: Point| p.old + dt * (p.x - p.x * p.x * p.x));
        let source = c2d(&oracle, x.factors(), cfg)?;
        let mut inner = cfg.clone();
        inner.tol = 0.1 * cfg.tol;
        let solve = PoissonProblem::new(self.ops.clone(), source.tensor, Some(dt * nu))?.solve(&inner, Some(x.factors()))?;
        let h = rounded_sum(&[(1.0 - alpha, x), (alpha, &solve.solution)], cfg.tol, cfg.r_max.as_deref())?;
        Ok(value(h, source.stats.iterations, solve.stats.iterations))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tucker::random_tucker;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampler_matches_dense_laplacian() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for boundary in [Boundary::Dirichlet, Boundary::Neumann] {
            let ops = vec![Laplace1D::new(9, 1.0, boundary).unwrap(), Laplace1D::new(8, 2.0, boundary).unwrap(), Laplace1D::new(7, 1.5, boundary).unwrap()];
            let x = random_tucker(&[9, 8, 7], &[3, 2, 3], &mut rng);
            let dense = laplacian_dense(&x.to_dense(), &ops).unwrap();
            let s = StencilSampler::new(&x, &ops).unwrap();
            let sets: [&[usize]; 3] = [&[0, 4, 8], &[7, 0], &[0, 1, 2, 3, 4, 5, 6]];
            let lap = s.laplacian(&sets);
            for (k, &c) in sets[2].iter().enumerate() {
                for (j, &b) in sets[1].iter().enumerate() {
                    for (i, &a) in sets[0].iter().enumerate() {
                        let want = dense.get(&[a, b, c]).unwrap();
                        assert!((lap.get(&[i, j, k]).unwrap() - want).abs() < 1e-10 * (1.0 + want.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn bratu_residual_at_zero_is_lambda() {
        let map = BratuMap::new(6, 3, 1.0, 0.1, false).unwrap();
        let x = TuckerTensor::zeros(&[6, 6, 6]);
        let s = StencilSampler::new(&x, &map.ops).unwrap();
        let o = StencilOracle::new(&s, None, true, |p: Point| p.lap + p.x.exp());
        let b = o.block(&[&[0, 5], &[2], &[1, 3]]);
        assert!(b.data().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let r = map.residual_dense(&x.to_dense()).unwrap();
        assert!(r.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn sine_mode_is_an_eigenfunction_of_the_stencil() {
        let map = BratuMap::new(10, 3, 0.0, 0.1, false).unwrap();
        let op = &map.ops[0];
        let h = op.h();
        let j = [1usize, 3, 2];
        let vecs: Vec<DVector<f64>> = j
            .iter()
            .map(|&jm| DVector::from_iterator(10, op.points().into_iter().map(|x| (std::f64::consts::PI * jm as f64 * x).sin())))
            .collect();
        let x = TuckerTensor::rank_one(&vecs).unwrap();
        let lam: f64 = j.iter().map(|&jm| op.eigenvalues()[jm - 1]).sum();
        let s = StencilSampler::new(&x, &map.ops).unwrap();
        let all: Vec<usize> = (0..10).collect();
        let sets: [&[usize]; 3] = [&all, &all, &all];
        let lap = s.laplacian(&sets);
        let vals = s.values(&sets);
        for (l, v) in lap.data().iter().zip(vals.data()) {
            assert!((l + lam / (h * h) * v).abs() < 1e-9);
        }
    }

    #[test]
    fn bratu_theta_solves_its_equation() {
        let t = bratu_theta(1.0).unwrap();
        assert!((t.cosh() - t * 8f64.sqrt()).abs() < 1e-12);
        assert!(bratu_theta(4.0).is_err());
        // The profile solves u'' + e^u = 0.
        let u = |x: f64| 2.0 * (t.cosh() / (t * (1.0 - 2.0 * x)).cosh()).ln();
        let (x, e) = (0.3, 1e-4);
        let upp = (u(x + e) - 2.0 * u(x) + u(x - e)) / (e * e);
        assert!((upp + u(x).exp()).abs() < 1e-5);
        assert!(u(0.0).abs() < 1e-14 && u(1.0).abs() < 1e-14);
    }

    #[test]
    fn allen_cahn_stationary_states() {
        let ops = AllenCahnMap::grid(5, 3, 1.0).unwrap();
        for c in [1.0, -1.0] {
            let one = TuckerTensor::rank_one(&vec![DVector::from_element(5, 1.0); 3]).unwrap().scaled(c);
            let map = AllenCahnMap::new(ops.clone(), 0.01, 0.1, 0.2, false, one.clone()).unwrap();
            let r = map.residual_dense(&one.to_dense(), &one.to_dense()).unwrap();
            assert!(r.cheb_norm() < 1e-12);
            let h = map.apply(&one, &C2DConfig::new(1e-10)).unwrap();
            let diff = rounded_sum(&[(1.0, &h.tensor), (-1.0, &one)], 1e-14, None).unwrap();
            assert!(diff.frob_norm() < 1e-9);
        }
    }

    #[test]
    fn allen_cahn_without_diffusion_is_pointwise() {
        let ops = AllenCahnMap::grid(6, 3, 2.0 * std::f64::consts::PI).unwrap();
        let x0 = AllenCahnMap::sine_initial(&ops).unwrap();
        let map = AllenCahnMap::new(ops, 0.0, 0.1, 0.2, false, x0.clone()).unwrap();
        let xd = x0.to_dense().scaled(0.5);
        let r = map.residual_dense(&xd, &x0.to_dense()).unwrap();
        for ((rv, xv), ov) in r.data().iter().zip(xd.data()).zip(x0.to_dense().data()) {
            let want = xv - ov - 0.1 * (xv - xv.powi(3));
            assert!((rv - want).abs() < 1e-14);
        }
    }
}
