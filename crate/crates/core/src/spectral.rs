//! Fast diagonalization of the finite-difference Laplacian and a Poisson
//! solver whose spectral-space solution is built by one cross approximation.
//!
//! The second-difference matrix `T_n` is diagonalized by the orthogonal sine
//! transform (homogeneous Dirichlet, vertex grid) or by the orthogonal cosine
//! transform (homogeneous Neumann, cell-centered grid with reflecting ghost
//! cells). Both transforms run in `O(n log n)` per column through an FFT of
//! a symmetric extension.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::cross::{c2d, C2DConfig, C2DStats};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::oracle::TensorOracle;
use crate::par;
use crate::tensor::DenseTensor;
use crate::tucker::{merged_sum, TuckerTensor};

/// Spectral coefficients below this magnitude at a zero eigenvalue sum are
/// treated as an exactly mean-free right-hand side.
pub const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Interior nodes `j h`, `j = 1..n`, of a vertex grid with `h = L/(n+1)`.
    Dirichlet,
    /// Cell centers `(j + 1/2) h`, `j = 0..n-1`, with `h = L/n`.
    Neumann,
}

/// Unscaled type-I sine transform of every column:
/// `y_k = Σ_j x_j sin(π (j+1)(k+1) / (n+1))`.
pub fn dst1(x: &Matrix) -> Matrix {
    let n = x.nrows();
    if n == 0 {
        return x.clone();
    }
    let len = 2 * (n + 1);
    let fft = FftPlanner::new().plan_fft_forward(len);
    map_columns(x, |col, out| {
        let mut buf = vec![Complex::new(0.0, 0.0); len];
        for (j, &v) in col.iter().enumerate() {
            buf[j + 1] = Complex::new(v, 0.0);
            buf[len - 1 - j] = Complex::new(-v, 0.0);
        }
        fft.process(&mut buf);
        for (k, o) in out.iter_mut().enumerate() {
            *o = -0.5 * buf[k + 1].im;
        }
    })
}

/// Unscaled type-II cosine transform of every column:
/// `y_j = Σ_k x_k cos(π j (k + 1/2) / n)`.
pub fn dct2(x: &Matrix) -> Matrix {
    let n = x.nrows();
    if n == 0 {
        return x.clone();
    }
    let fft = FftPlanner::new().plan_fft_forward(2 * n);
    map_columns(x, |col, out| {
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * n];
        for (k, &v) in col.iter().enumerate() {
            buf[k] = Complex::new(v, 0.0);
            buf[2 * n - 1 - k] = Complex::new(v, 0.0);
        }
        fft.process(&mut buf);
        for (j, o) in out.iter_mut().enumerate() {
            let phase = -std::f64::consts::PI * j as f64 / (2 * n) as f64;
            *o = 0.5 * (buf[j] * Complex::from_polar(1.0, phase)).re;
        }
    })
}

/// Unscaled type-III cosine transform of every column:
/// `x_k = Σ_j a_j cos(π j (k + 1/2) / n)`.
pub fn dct3(a: &Matrix) -> Matrix {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_inverse(2 * n);
    map_columns(a, |col, out| {
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * n];
        for (j, &v) in col.iter().enumerate() {
            let phase = std::f64::consts::PI * j as f64 / (2 * n) as f64;
            buf[j] = Complex::from_polar(v, phase);
        }
        fft.process(&mut buf);
        for (k, o) in out.iter_mut().enumerate() {
            *o = buf[k].re;
        }
    })
}

fn map_columns(x: &Matrix, f: impl Fn(&[f64], &mut [f64]) + Sync + Send) -> Matrix {
    let (n, m) = x.shape();
    let mut out = Matrix::zeros(n, m);
    par::for_each_chunk(out.as_mut_slice(), n, |c, chunk| {
        let col = x.column(c);
        f(col.as_slice(), chunk);
    });
    out
}

/// One-dimensional second-difference operator `T_n` on a uniform grid, with
/// its eigen-decomposition `T_n = Z Λ Zᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Laplace1D {
    n: usize,
    h: f64,
    boundary: Boundary,
}

impl Laplace1D {
    /// Grid of `n` unknowns on an interval of length `length`.
    pub fn new(n: usize, length: f64, boundary: Boundary) -> Result<Self> {
        if n == 0 || !(length > 0.0) {
            return Err(Error::InvalidArgument(format!("bad grid: n={n}, length={length}")));
        }
        let h = match boundary {
            Boundary::Dirichlet => length / (n + 1) as f64,
            Boundary::Neumann => length / n as f64,
        };
        Ok(Self { n, h, boundary })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Eigenvalues of `T_n` in ascending order: `2(1 − cos(π j/(n+1)))`,
    /// `j = 1..n` (Dirichlet) or `2(1 − cos(π j/n))`, `j = 0..n-1` (Neumann).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.n)
            .map(|j| match self.boundary {
                Boundary::Dirichlet => 2.0 * (1.0 - (std::f64::consts::PI * (j + 1) as f64 / (n + 1.0)).cos()),
                Boundary::Neumann => 2.0 * (1.0 - (std::f64::consts::PI * j as f64 / n).cos()),
            })
            .collect()
    }

    /// Grid coordinates relative to the left end of the interval.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| match self.boundary {
                Boundary::Dirichlet => (j + 1) as f64 * self.h,
                Boundary::Neumann => (j as f64 + 0.5) * self.h,
            })
            .collect()
    }

    /// `Zᵀ x` for every column of `x` (coefficients in the eigenbasis).
    pub fn to_spectral(&self, x: &Matrix) -> Matrix {
        match self.boundary {
            Boundary::Dirichlet => dst1(x) * (2.0 / (self.n + 1) as f64).sqrt(),
            Boundary::Neumann => {
                let mut y = dct2(x);
                self.scale_cosine_rows(&mut y);
                y
            }
        }
    }

    /// `Z a` for every column of `a`.
    pub fn from_spectral(&self, a: &Matrix) -> Matrix {
        match self.boundary {
            Boundary::Dirichlet => dst1(a) * (2.0 / (self.n + 1) as f64).sqrt(),
            Boundary::Neumann => {
                let mut b = a.clone();
                self.scale_cosine_rows(&mut b);
                dct3(&b)
            }
        }
    }

    fn scale_cosine_rows(&self, y: &mut Matrix) {
        let n = self.n as f64;
        for (j, mut row) in y.row_iter_mut().enumerate() {
            let c = if j == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            row *= c;
        }
    }

    /// `T_n x` for every column of `x`.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, x.ncols(), |k, c| {
            let here = x[(k, c)];
            let (left, right) = match self.boundary {
                Boundary::Dirichlet => (
                    if k > 0 { x[(k - 1, c)] } else { 0.0 },
                    if k + 1 < n { x[(k + 1, c)] } else { 0.0 },
                ),
                Boundary::Neumann => (
                    if k > 0 { x[(k - 1, c)] } else { here },
                    if k + 1 < n { x[(k + 1, c)] } else { here },
                ),
            };
            2.0 * here - left - right
        })
    }

    /// Dense `T_n`.
    pub fn matrix(&self) -> Matrix {
        self.apply(&Matrix::identity(self.n, self.n))
    }
}

/// `Δ_h x = −Σ_i (T_i / h_i²) ×_i x` on a dense tensor.
pub fn laplacian_dense(x: &DenseTensor, ops: &[Laplace1D]) -> Result<DenseTensor> {
    check_ops(x.dims(), ops)?;
    let mut acc = DenseTensor::zeros(x.dims());
    for (mode, op) in ops.iter().enumerate() {
        let t = op.matrix() * (-1.0 / (op.h * op.h));
        acc = acc.axpy(1.0, &x.mode_product(&t, mode)?)?;
    }
    Ok(acc)
}

/// `Δ_h x` for a Tucker tensor, kept exact (per-mode ranks at most double).
pub fn laplacian_tucker(x: &TuckerTensor, ops: &[Laplace1D]) -> Result<TuckerTensor> {
    check_ops(&x.dims(), ops)?;
    let (core, factors) = x.clone().into_parts();
    let terms: Vec<TuckerTensor> = ops
        .iter()
        .enumerate()
        .map(|(mode, op)| {
            let tu = op.apply(&factors[mode]) * (-1.0 / (op.h * op.h));
            let (q, r) = linalg::thin_qr(&tu);
            let c = core.mode_product(&r, mode)?;
            let mut f = factors.clone();
            f[mode] = q;
            TuckerTensor::new(c, f)
        })
        .collect::<Result<_>>()?;
    let refs: Vec<(f64, &TuckerTensor)> = terms.iter().map(|t| (1.0, t)).collect();
    merged_sum(&refs)
}

fn check_ops(dims: &[usize], ops: &[Laplace1D]) -> Result<()> {
    if ops.len() != dims.len() || ops.iter().zip(dims).any(|(o, &n)| o.n != n) {
        return Err(Error::DimensionMismatch(format!(
            "operators {:?} for dims {dims:?}",
            ops.iter().map(|o| o.n).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Applies `Zᵀ` (or `Z`) in every mode of a Tucker tensor. The core is left
/// alone because the transforms are orthogonal.
pub fn transform_factors(t: &TuckerTensor, ops: &[Laplace1D], to_spectral: bool) -> Result<TuckerTensor> {
    check_ops(&t.dims(), ops)?;
    let factors = t
        .factors()
        .iter()
        .zip(ops)
        .map(|(u, op)| if to_spectral { op.to_spectral(u) } else { op.from_spectral(u) })
        .collect();
    TuckerTensor::new(t.core().clone(), factors)
}

/// `Δ_h V = F` (no shift) or `(I − c Δ_h) V = F` (shift `c`).
#[derive(Clone, Debug)]
pub struct PoissonProblem {
    pub ops: Vec<Laplace1D>,
    pub rhs: TuckerTensor,
    pub shift: Option<f64>,
}

/// Entries of the spectral-space solution: the transformed right-hand side
/// divided by the operator's eigenvalue at each multi-index.
pub struct SpectralOracle {
    fhat: TuckerTensor,
    dims: Vec<usize>,
    /// `λ_j / h²` per mode.
    scaled: Vec<Vec<f64>>,
    shift: Option<f64>,
}

impl SpectralOracle {
    fn divisor(&self, idx: &[usize]) -> f64 {
        let s: f64 = idx.iter().zip(&self.scaled).map(|(&i, l)| l[i]).sum();
        match self.shift {
            Some(c) => 1.0 + c * s,
            None => -s,
        }
    }

    fn divide(&self, idx: &[usize], v: f64) -> f64 {
        let div = self.divisor(idx);
        if div == 0.0 {
            0.0
        } else {
            v / div
        }
    }
}

impl TensorOracle for SpectralOracle {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        self.divide(idx, self.fhat.eval_entry_unchecked(idx))
    }

    fn block(&self, sets: &[&[usize]]) -> DenseTensor {
        let mut b = self.fhat.sample_block(sets).expect("index sets within range");
        let dims = b.dims().to_vec();
        let mut pos = vec![0; dims.len()];
        let mut idx = vec![0; dims.len()];
        for v in b.data_mut() {
            for (m, p) in pos.iter().enumerate() {
                idx[m] = sets[m][*p];
            }
            *v = self.divide(&idx, *v);
            crate::tensor::increment(&mut pos, &dims);
        }
        b
    }
}

/// Solution and the statistics of its cross approximation.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub solution: TuckerTensor,
    pub stats: C2DStats,
}

impl PoissonProblem {
    pub fn new(ops: Vec<Laplace1D>, rhs: TuckerTensor, shift: Option<f64>) -> Result<Self> {
        check_ops(&rhs.dims(), &ops)?;
        if let Some(c) = shift {
            if !(c >= 0.0) {
                return Err(Error::InvalidArgument(format!("shift must be non-negative, got {c}")));
            }
        }
        Ok(Self { ops, rhs, shift })
    }

    /// The spectral-space oracle. Rejects a right-hand side with a nonzero
    /// component along a zero eigenvalue of a singular operator.
    pub fn spectral_oracle(&self) -> Result<SpectralOracle> {
        let fhat = transform_factors(&self.rhs, &self.ops, true)?;
        let scaled: Vec<Vec<f64>> = self
            .ops
            .iter()
            .map(|op| op.eigenvalues().into_iter().map(|l| l / (op.h * op.h)).collect())
            .collect();
        let oracle = SpectralOracle { dims: fhat.dims(), fhat, scaled, shift: self.shift };
        let zero = vec![0; self.ops.len()];
        if oracle.divisor(&zero) == 0.0 {
            let coefficient = oracle.fhat.eval_entry_unchecked(&zero);
            if coefficient.abs() >= ZERO_MODE_TOL {
                return Err(Error::ZeroMode { coefficient });
            }
        }
        Ok(oracle)
    }

    /// Solves to cross-approximation tolerance `cfg.tol` in spectral space.
    /// `warm` holds physical-space factor guesses (a previous or prolonged
    /// solution); without it the transformed right-hand-side factors are used.
    pub fn solve(&self, cfg: &C2DConfig, warm: Option<&[Matrix]>) -> Result<PoissonSolution> {
        let oracle = self.spectral_oracle()?;
        let guess: Vec<Matrix> = match warm {
            Some(w) => {
                if w.len() != self.ops.len() {
                    return Err(Error::DimensionMismatch(format!("{} warm factors for order {}", w.len(), self.ops.len())));
                }
                w.iter().zip(&self.ops).map(|(u, op)| op.to_spectral(u)).collect()
            }
            None => oracle.fhat.factors().to_vec(),
        };
        let out = c2d(&oracle, &guess, cfg)?;
        let solution = transform_factors(&out.tensor, &self.ops, false)?;
        Ok(PoissonSolution { solution, stats: out.stats })
    }
}

/// Linearly interpolates every factor column from the grids of `coarse` to
/// grids of `n_fine` points of the same kind and interval, extrapolating
/// linearly beyond the outermost coarse points. The interpolated factors are
/// re-orthonormalized with their triangular parts moved into the core.
pub fn prolongate(t: &TuckerTensor, coarse: &[Laplace1D], n_fine: &[usize]) -> Result<TuckerTensor> {
    check_ops(&t.dims(), coarse)?;
    if n_fine.len() != coarse.len() {
        return Err(Error::DimensionMismatch(format!("{} fine sizes for order {}", n_fine.len(), coarse.len())));
    }
    let mut core = t.core().clone();
    let mut factors = Vec::with_capacity(coarse.len());
    for (mode, ((u, op), &nf)) in t.factors().iter().zip(coarse).zip(n_fine).enumerate() {
        if nf < op.n {
            return Err(Error::InvalidArgument(format!("cannot prolongate {} points to {nf}", op.n)));
        }
        let p = interpolation_matrix(op.n, nf, op.boundary);
        let (q, r) = linalg::thin_qr(&(p * u));
        core = core.mode_product(&r, mode)?;
        factors.push(q);
    }
    TuckerTensor::new(core, factors)
}

/// `n_fine × n_coarse` linear interpolation between grids of the same kind.
pub fn interpolation_matrix(n_coarse: usize, n_fine: usize, boundary: Boundary) -> Matrix {
    let mut p = Matrix::zeros(n_fine, n_coarse);
    if n_coarse == 1 {
        p.fill(1.0);
        return p;
    }
    for i in 0..n_fine {
        // fine point in units of coarse grid index
        let t = match boundary {
            Boundary::Dirichlet => (i + 1) as f64 * (n_coarse + 1) as f64 / (n_fine + 1) as f64 - 1.0,
            Boundary::Neumann => (i as f64 + 0.5) * n_coarse as f64 / n_fine as f64 - 0.5,
        };
        let left = (t.floor().max(0.0) as usize).min(n_coarse - 2);
        let w = t - left as f64;
        p[(i, left)] = 1.0 - w;
        p[(i, left + 1)] = w;
    }
    p
}
