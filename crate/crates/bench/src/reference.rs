//! Dense reference solvers at small grid sizes. The one-dimensional stencils
//! are diagonalized with a dense symmetric eigensolver, so these do not share
//! code with the fast transforms under test.

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use tucker_cross::spectral::Boundary;
use tucker_cross::DenseTensor;

/// Largest grid function the dense references will allocate.
pub const MAX_DENSE_LEN: usize = 1 << 24;

/// Separable `Σ_i (T_i / h_i²)` on a tensor grid, diagonalized per mode.
pub struct DenseLaplacian {
    dims: Vec<usize>,
    h: Vec<f64>,
    boundary: Boundary,
    vecs: Vec<DMatrix<f64>>,
    /// `λ_j / h²` per mode.
    vals: Vec<Vec<f64>>,
}

/// Second-difference matrix `T_n` built from the stencil.
pub fn stencil_matrix(n: usize, boundary: Boundary) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(n, n);
    for i in 0..n {
        t[(i, i)] = 2.0;
        if i > 0 {
            t[(i, i - 1)] = -1.0;
        }
        if i + 1 < n {
            t[(i, i + 1)] = -1.0;
        }
    }
    if boundary == Boundary::Neumann {
        t[(0, 0)] = 1.0;
        t[(n - 1, n - 1)] = 1.0;
    }
    t
}

impl DenseLaplacian {
    /// Grid of `n` unknowns per mode on intervals of length `length`.
    pub fn new(dims: &[usize], length: f64, boundary: Boundary) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total > MAX_DENSE_LEN {
            bail!("dense reference of {total} entries exceeds the limit {MAX_DENSE_LEN}");
        }
        let mut vecs = Vec::new();
        let mut vals = Vec::new();
        let mut hs = Vec::new();
        for &n in dims {
            let h = match boundary {
                Boundary::Dirichlet => length / (n + 1) as f64,
                Boundary::Neumann => length / n as f64,
            };
            hs.push(h);
            let eig = stencil_matrix(n, boundary).symmetric_eigen();
            vals.push(eig.eigenvalues.iter().map(|l| l.max(0.0) / (h * h)).collect());
            vecs.push(eig.eigenvectors);
        }
        Ok(Self { dims: dims.to_vec(), h: hs, boundary, vecs, vals })
    }

    /// `Δ_h x` by the point stencil.
    pub fn apply(&self, x: &DenseTensor) -> Result<DenseTensor> {
        if x.dims() != self.dims.as_slice() {
            bail!("tensor dims {:?} vs grid {:?}", x.dims(), self.dims);
        }
        let data = x.data();
        let mut out = vec![0.0; data.len()];
        let mut stride = 1;
        for (&n, &h) in self.dims.iter().zip(&self.h) {
            let w = 1.0 / (h * h);
            for (lin, o) in out.iter_mut().enumerate() {
                let i = (lin / stride) % n;
                let here = data[lin];
                let ghost = match self.boundary {
                    Boundary::Dirichlet => 0.0,
                    Boundary::Neumann => here,
                };
                let left = if i > 0 { data[lin - stride] } else { ghost };
                let right = if i + 1 < n { data[lin + stride] } else { ghost };
                *o += w * (left - 2.0 * here + right);
            }
            stride *= n;
        }
        Ok(DenseTensor::new(self.dims.clone(), out)?)
    }

    /// Applies `g(Σ_i λ_i/h_i²)` as a function of the separable operator.
    pub fn spectral_map(&self, x: &DenseTensor, g: impl Fn(f64) -> f64) -> Result<DenseTensor> {
        let vt: Vec<DMatrix<f64>> = self.vecs.iter().map(|v| v.transpose()).collect();
        let mut y = x.multi_mode_product(&vt)?;
        let mut pos = vec![0; self.dims.len()];
        for v in y.data_mut() {
            let s: f64 = pos.iter().zip(&self.vals).map(|(&i, l)| l[i]).sum();
            *v *= g(s);
            increment(&mut pos, &self.dims);
        }
        Ok(y.multi_mode_product(&self.vecs)?)
    }

    /// Solves `Δ_h v = f`; a zero eigenvalue gets a zero coefficient.
    pub fn solve(&self, f: &DenseTensor) -> Result<DenseTensor> {
        self.spectral_map(f, |s| if s > 1e-12 { -1.0 / s } else { 0.0 })
    }

    /// Solves `(I − c Δ_h) v = f`.
    pub fn solve_shifted(&self, f: &DenseTensor, c: f64) -> Result<DenseTensor> {
        self.spectral_map(f, |s| 1.0 / (1.0 + c * s))
    }
}

fn increment(pos: &mut [usize], dims: &[usize]) {
    for (p, &n) in pos.iter_mut().zip(dims) {
        *p += 1;
        if *p < n {
            return;
        }
        *p = 0;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for an SPD operator.
fn pcg(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let mut x = vec![0.0; b.len()];
    let mut r = b.to_vec();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return x;
    }
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = apply(&p);
        let alpha = rz / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= rtol * bnorm {
            break;
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..p.len() {
            p[i] = z[i] + beta * p[i];
        }
    }
    x
}

fn tensor(dims: &[usize], data: Vec<f64>) -> DenseTensor {
    DenseTensor::new(dims.to_vec(), data).expect("length matches dims")
}

/// Newton's method for `Δ_h u + λ e^u = 0` on the unit cube with homogeneous
/// Dirichlet data, `n` interior points per mode. Linear systems are solved
/// by conjugate gradients preconditioned with the exact Laplacian inverse.
pub fn bratu_newton(n: usize, d: usize, lambda: f64) -> Result<DenseTensor> {
    let dims = vec![n; d];
    let lap = DenseLaplacian::new(&dims, 1.0, Boundary::Dirichlet)?;
    let mut u = DenseTensor::zeros(&dims);
    for _ in 0..50 {
        let mut f = lap.apply(&u)?;
        for (fv, uv) in f.data_mut().iter_mut().zip(u.data()) {
            *fv += lambda * uv.exp();
        }
        let eu: Vec<f64> = u.data().iter().map(|v| lambda * v.exp()).collect();
        // (−Δ_h − λ e^u) δ = F.
        let apply = |v: &[f64]| {
            let t = tensor(&dims, v.to_vec());
            let mut out = lap.apply(&t).expect("dims match").into_data();
            for ((o, vi), e) in out.iter_mut().zip(v).zip(&eu) {
                *o = -*o - e * vi;
            }
            out
        };
        let precond = |v: &[f64]| {
            let t = tensor(&dims, v.to_vec());
            lap.solve(&t).expect("dims match").into_data().into_iter().map(|x| -x).collect()
        };
        let delta = pcg(apply, precond, f.data(), 1e-13, 500);
        let step = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (uv, dv) in u.data_mut().iter_mut().zip(&delta) {
            *uv += dv;
        }
        if step < 1e-13 {
            return Ok(u);
        }
    }
    Ok(u)
}

/// Backward-Euler steps of `v_t = ν Δv + v − v³` with homogeneous Neumann
/// data on the cell-centred grid of `[0, length]^d`. Each step is solved by
/// Newton's method; returns the state after every step.
pub fn allen_cahn_backward_euler(
    u0: &DenseTensor,
    length: f64,
    nu: f64,
    dt: f64,
    steps: usize,
) -> Result<Vec<DenseTensor>> {
    let dims = u0.dims().to_vec();
    let lap = DenseLaplacian::new(&dims, length, Boundary::Neumann)?;
    let mut states = Vec::with_capacity(steps);
    let mut old = u0.clone();
    for _ in 0..steps {
        let mut u = old.clone();
        for _ in 0..50 {
            let lu = lap.apply(&u)?;
            let r: Vec<f64> = u
                .data()
                .iter()
                .zip(old.data())
                .zip(lu.data())
                .map(|((x, o), l)| x - o - dt * (nu * l + x - x * x * x))
                .collect();
            let diag: Vec<f64> = u.data().iter().map(|x| -dt * (1.0 - 3.0 * x * x)).collect();
            // (I − Δt ν Δ_h − Δt (1 − 3u²)) δ = −R.
            let apply = |v: &[f64]| {
                let t = tensor(&dims, v.to_vec());
                let lv = lap.apply(&t).expect("dims match").into_data();
                v.iter().zip(&lv).zip(&diag).map(|((vi, li), g)| vi - dt * nu * li + g * vi).collect()
            };
            let precond = |v: &[f64]| {
                let t = tensor(&dims, v.to_vec());
                lap.solve_shifted(&t, dt * nu).expect("dims match").into_data()
            };
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = pcg(apply, precond, &rhs, 1e-12, 500);
            let step = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (uv, dv) in u.data_mut().iter_mut().zip(&delta) {
                *uv += dv;
            }
            if step < 1e-11 {
                break;
            }
        }
        states.push(u.clone());
        old = u;
    }
    Ok(states)
}
