//! Anderson acceleration for fixed-point equations `H(X) = X` with every
//! iterate kept in Tucker format.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::cross::C2DConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::tucker::{merge_bases, rounded_sum, TuckerTensor};

/// Relative singular value cutoff of the small least-squares solve.
pub const LS_RTOL: f64 = 1e-12;
/// Lower bound on the scheduled cross-approximation tolerance.
pub const EPS_H_FLOOR: f64 = 1e-14;

/// A fixed-point map whose value at a Tucker iterate is itself approximated
/// in Tucker format.
pub trait FixedPointMap {
    fn dims(&self) -> Vec<usize>;

    /// Approximates `H(x)`. `cfg.tol` is the current truncation level; the
    /// cross approximation is warm-started from the factors of `x`.
    fn apply(&self, x: &TuckerTensor, cfg: &C2DConfig) -> Result<MapValue>;
}

/// `H(x)` together with the work spent approximating it.
#[derive(Clone, Debug)]
pub struct MapValue {
    pub tensor: TuckerTensor,
    /// Iterations of the cross approximation of the nonlinear term.
    pub c2d_iterations: usize,
    /// Iterations of the preconditioner's cross approximation, if any.
    pub precond_iterations: usize,
}

/// How the truncation level `ε_H` evolves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    /// `ε_H = θ ρ_k` after every iteration.
    Residual { theta: f64 },
    /// `ε_H` stays at its initial value.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopTolerance {
    Absolute(f64),
    /// Multiple of the initial residual `ρ_0`.
    RelativeToInitial(f64),
}

#[derive(Clone, Debug)]
pub struct AAParams {
    pub window: usize,
    pub schedule: Schedule,
    pub stop: StopTolerance,
    pub c2d_iter_max: usize,
    pub q: usize,
    pub r_max: Option<Vec<usize>>,
    pub eps_f: f64,
    pub eps_h0: f64,
    pub max_iter: usize,
}

impl AAParams {
    pub fn new(window: usize, theta: f64, stop: StopTolerance, eps_h0: f64) -> Self {
        Self {
            window,
            schedule: Schedule::Residual { theta },
            stop,
            c2d_iter_max: 20,
            q: 4,
            r_max: None,
            eps_f: 1e-12,
            eps_h0,
            max_iter: 1000,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if let Schedule::Residual { theta } = self.schedule {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(Error::InvalidArgument(format!("theta must lie in (0, 1], got {theta}")));
            }
        }
        let stop = match self.stop {
            StopTolerance::Absolute(t) | StopTolerance::RelativeToInitial(t) => t,
        };
        for (name, v) in [("stop tolerance", stop), ("eps_f", self.eps_f), ("eps_h0", self.eps_h0)] {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.c2d_iter_max == 0 {
            return Err(Error::InvalidArgument("c2d_iter_max must be at least 1".into()));
        }
        if let Some(r) = &self.r_max {
            if r.len() != d || r.contains(&0) {
                return Err(Error::InvalidArgument(format!("r_max {r:?} for order {d}")));
            }
        }
        Ok(())
    }

    fn c2d_config(&self, tol: f64) -> C2DConfig {
        C2DConfig::new(tol)
            .with_q(self.q)
            .with_iter_max(self.c2d_iter_max)
            .with_r_max(self.r_max.clone())
    }
}

/// One row of the iteration history.
#[derive(Clone, Debug, PartialEq)]
pub struct AARecord {
    pub k: usize,
    pub rho: f64,
    pub rho_rel: f64,
    /// Ranks of the iterate `X_k` whose residual is `rho`.
    pub ranks: Vec<usize>,
    pub c2d_iters: usize,
    pub precond_iters: usize,
    /// Truncation level used to approximate `H(X_k)`.
    pub eps_h: f64,
}

#[derive(Clone, Debug)]
pub struct AAOutput {
    pub solution: TuckerTensor,
    pub history: Vec<AARecord>,
    pub converged: bool,
    pub rho0: f64,
}

impl AAOutput {
    /// Largest average rank over all iterates.
    pub fn max_average_rank(&self) -> f64 {
        self.history
            .iter()
            .map(|r| r.ranks.iter().sum::<usize>() as f64 / r.ranks.len() as f64)
            .fold(0.0, f64::max)
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().map_or(f64::INFINITY, |r| r.rho)
    }
}

/// Coefficients `γ` minimizing `‖Σ_j γ_j T_j − B‖` using only factor-level
/// operations: the factors of all terms are merged per mode by a pivoted QR,
/// every term and the target are expressed on the merged bases, and the small
/// dense problem is solved with a minimal-norm pseudo-inverse.
pub fn aa_least_squares(terms: &[&TuckerTensor], target: &TuckerTensor) -> Result<Vec<f64>> {
    let Some(first) = terms.first() else {
        return Err(Error::Empty("least squares needs at least one term"));
    };
    let dims = first.dims();
    if terms.iter().any(|t| t.dims() != dims) || target.dims() != dims {
        return Err(Error::DimensionMismatch("least-squares terms differ in dims".into()));
    }
    let d = dims.len();
    let s = terms.len();

    let mut coords: Vec<Vec<Matrix>> = vec![Vec::with_capacity(d); s];
    let mut target_coords = Vec::with_capacity(d);
    for mode in 0..d {
        let blocks: Vec<&Matrix> = terms.iter().map(|t| t.factor(mode)).collect();
        let (q, z) = merge_bases(&blocks);
        let mut offset = 0;
        for (j, b) in blocks.iter().enumerate() {
            coords[j].push(z.columns(offset, b.ncols()).clone_owned());
            offset += b.ncols();
        }
        target_coords.push(q.transpose() * target.factor(mode));
    }

    let b = target.core().multi_mode_product(&target_coords)?;
    let mut a = Matrix::zeros(b.len(), s);
    for (j, (t, w)) in terms.iter().zip(&coords).enumerate() {
        let col = t.core().multi_mode_product(w)?;
        a.column_mut(j).copy_from_slice(col.data());
    }
    let rhs = DVector::from_column_slice(b.data());
    Ok(linalg::lstsq_min_norm(&a, &rhs, LS_RTOL).iter().copied().collect())
}

/// Tucker-format Anderson acceleration.
///
/// `X_1 = H_0 ≈ H(X_0)`; then for `k ≥ 1`: approximate `H_k ≈ H(X_k)`,
/// form `F_k = H_k − X_k` rounded at `eps_f`, solve the windowed least-squares
/// problem on the residual differences and round the extrapolated iterate at
/// the current `ε_H`. Stops when `ρ_k` drops below the stop tolerance and
/// returns `X_{k+1}`. Without convergence after `max_iter` steps the iterate
/// with the smallest residual is returned.
pub fn tucker_aa<M: FixedPointMap + ?Sized>(map: &M, x0: &TuckerTensor, p: &AAParams) -> Result<AAOutput> {
    let dims = map.dims();
    if x0.dims() != dims {
        return Err(Error::DimensionMismatch(format!("initial guess {:?} vs map {:?}", x0.dims(), dims)));
    }
    p.validate(dims.len())?;
    let r_max = p.r_max.as_deref();
    let mut eps_h = p.eps_h0;
    let mut history = Vec::new();

    let h0 = map.apply(x0, &p.c2d_config(eps_h))?;
    let f0 = rounded_sum(&[(1.0, &h0.tensor), (-1.0, x0)], p.eps_f, r_max)?;
    let rho0 = f0.frob_norm();
    history.push(AARecord {
        k: 0,
        rho: rho0,
        rho_rel: 1.0,
        ranks: x0.ranks(),
        c2d_iters: h0.c2d_iterations,
        precond_iters: h0.precond_iterations,
        eps_h,
    });
    let stop = match p.stop {
        StopTolerance::Absolute(t) => t,
        StopTolerance::RelativeToInitial(t) => t * rho0,
    };
    let rel = |rho: f64| if rho0 > 0.0 { rho / rho0 } else { 0.0 };
    if rho0 < stop {
        return Ok(AAOutput { solution: h0.tensor, history, converged: true, rho0 });
    }

    // Windowed history: H_i and F_i for the last window+1 iterates and the
    // differences ΔF_i between consecutive residuals.
    let mut hs: VecDeque<TuckerTensor> = VecDeque::from([h0.tensor.clone()]);
    let mut fs: VecDeque<TuckerTensor> = VecDeque::from([f0]);
    let mut dfs: VecDeque<TuckerTensor> = VecDeque::new();
    let mut x = h0.tensor;
    let mut best: Option<(f64, TuckerTensor)> = None;

    for k in 1..=p.max_iter {
        let hk = map.apply(&x, &p.c2d_config(eps_h))?;
        let fk = rounded_sum(&[(1.0, &hk.tensor), (-1.0, &x)], p.eps_f, r_max)?;
        let rho = fk.frob_norm();
        history.push(AARecord {
            k,
            rho,
            rho_rel: rel(rho),
            ranks: x.ranks(),
            c2d_iters: hk.c2d_iterations,
            precond_iters: hk.precond_iterations,
            eps_h,
        });
        if best.as_ref().is_none_or(|(b, _)| rho < *b) {
            best = Some((rho, x.clone()));
        }

        let prev_f = fs.back().expect("residual history is never empty");
        dfs.push_back(rounded_sum(&[(1.0, &fk), (-1.0, prev_f)], p.eps_f, r_max)?);
        hs.push_back(hk.tensor);
        fs.push_back(fk);
        while dfs.len() > p.window {
            dfs.pop_front();
        }
        while hs.len() > dfs.len() + 1 {
            hs.pop_front();
            fs.pop_front();
        }

        let diffs: Vec<&TuckerTensor> = dfs.iter().collect();
        let gamma = aa_least_squares(&diffs, fs.back().expect("just pushed"))?;

        // H_k − Σ_i γ_i (H_{i+1} − H_i) as one combination of the stored H's.
        let mut coef = vec![0.0; hs.len()];
        coef[hs.len() - 1] = 1.0;
        for (i, g) in gamma.iter().enumerate() {
            coef[i + 1] -= g;
            coef[i] += g;
        }
        let terms: Vec<(f64, &TuckerTensor)> = coef.iter().copied().zip(hs.iter()).collect();
        let next = rounded_sum(&terms, eps_h, r_max)?;

        if let Schedule::Residual { theta } = p.schedule {
            eps_h = (theta * rho).max(EPS_H_FLOOR);
        }
        if rho < stop {
            return Ok(AAOutput { solution: next, history, converged: true, rho0 });
        }
        x = next;
    }

    let (_, solution) = best.expect("at least one iteration ran");
    Ok(AAOutput { solution, history, converged: false, rho0 })
}
