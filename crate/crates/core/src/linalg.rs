//! Small dense kernels on top of nalgebra: column-pivoted Householder QR with
//! deterministic tie-breaking, sorted thin SVD, and pseudo-inverse solves.

use nalgebra::{DMatrix, DVector};

pub type Matrix = DMatrix<f64>;

/// Column-pivoted QR: `a[:, perm] = q * r`.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    pub q: Matrix,
    pub r: Matrix,
    /// `perm[j]` is the original column placed at position `j`.
    pub perm: Vec<usize>,
}

impl PivotedQr {
    /// Number of leading diagonal entries of `r` above `rtol * |r_00|`.
    pub fn numerical_rank(&self, rtol: f64) -> usize {
        let k = self.r.nrows().min(self.r.ncols());
        if k == 0 {
            return 0;
        }
        let lead = self.r[(0, 0)].abs();
        if lead == 0.0 {
            return 0;
        }
        (0..k)
            .take_while(|&j| self.r[(j, j)].abs() > rtol * lead)
            .count()
    }
}

/// Householder QR with column pivoting on the largest remaining column norm.
/// Exact norm ties go to the lowest original column index, so the pivot order
/// is a deterministic function of the input.
pub fn pivoted_qr(a: &Matrix) -> PivotedQr {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k);

    for j in 0..k {
        // Pivot: recompute trailing norms to avoid downdating drift.
        let mut best = j;
        let mut best_norm = -1.0;
        for c in j..n {
            let nrm = work.view((j, c), (m - j, 1)).norm();
            if nrm > best_norm || (nrm == best_norm && perm[c] < perm[best]) {
                best = c;
                best_norm = nrm;
            }
        }
        if best != j {
            work.swap_columns(j, best);
            perm.swap(j, best);
        }

        let x = work.view((j, j), (m - j, 1)).clone_owned();
        let xnorm = x.norm();
        if xnorm == 0.0 {
            reflectors.push((vec![0.0; m - j], 0.0));
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v: Vec<f64> = x.iter().copied().collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        let beta = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
        apply_reflector(&mut work, j, j, &v, beta);
        reflectors.push((v, beta));
    }

    let mut r = Matrix::zeros(k, n);
    for i in 0..k {
        for c in i..n {
            r[(i, c)] = work[(i, c)];
        }
    }

    let mut q = Matrix::zeros(m, k);
    for i in 0..k {
        q[(i, i)] = 1.0;
    }
    for (j, (v, beta)) in reflectors.iter().enumerate().rev() {
        apply_reflector(&mut q, j, j, v, *beta);
    }

    PivotedQr { q, r, perm }
}

// Applies (I - beta v v^T) to rows row0.. and columns col0.. of `a`.
fn apply_reflector(a: &mut Matrix, row0: usize, col0: usize, v: &[f64], beta: f64) {
    if beta == 0.0 {
        return;
    }
    let ncols = a.ncols();
    for c in col0..ncols {
        let mut dot = 0.0;
        for (t, vt) in v.iter().enumerate() {
            dot += vt * a[(row0 + t, c)];
        }
        let s = beta * dot;
        if s != 0.0 {
            for (t, vt) in v.iter().enumerate() {
                a[(row0 + t, c)] -= s * vt;
            }
        }
    }
}

/// Thin SVD with singular values sorted in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: DVector<f64>,
    pub vt: Matrix,
}

pub fn svd(a: &Matrix) -> Svd {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Svd {
            u: Matrix::zeros(m, 0),
            s: DVector::zeros(0),
            vt: Matrix::zeros(0, n),
        };
    }
    let dec = a.clone().svd(true, true);
    let u = dec.u.expect("left singular vectors requested");
    let vt = dec.v_t.expect("right singular vectors requested");
    let s = dec.singular_values;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]).then(x.cmp(&y)));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return Svd { u, s, vt };
    }
    let mut su = Matrix::zeros(m, k);
    let mut svt = Matrix::zeros(k, n);
    let mut ss = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        svt.set_row(dst, &vt.row(src));
        ss[dst] = s[src];
    }
    Svd { u: su, s: ss, vt: svt }
}

/// Singular values in descending order.
pub fn singular_values(a: &Matrix) -> DVector<f64> {
    let k = a.nrows().min(a.ncols());
    if k == 0 {
        return DVector::zeros(0);
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    DVector::from_vec(s)
}

/// Leading `k` left singular vectors.
pub fn leading_left_singular_vectors(a: &Matrix, k: usize) -> Matrix {
    let dec = svd(a);
    let k = k.min(dec.u.ncols());
    dec.u.columns(0, k).clone_owned()
}

/// Moore-Penrose pseudo-inverse, discarding singular values below
/// `rtol * s_max`.
pub fn pinv(a: &Matrix, rtol: f64) -> Matrix {
    let (m, n) = a.shape();
    let dec = svd(a);
    let mut out = Matrix::zeros(n, m);
    if dec.s.is_empty() || dec.s[0] == 0.0 {
        return out;
    }
    let cut = rtol * dec.s[0];
    for (j, &sj) in dec.s.iter().enumerate() {
        if sj <= cut {
            break;
        }
        let vj = dec.vt.row(j).transpose();
        let uj = dec.u.column(j);
        out += (vj * uj.transpose()) / sj;
    }
    out
}

/// Minimal-norm least-squares solution of `a x ~ b` with a relative singular
/// value cutoff.
pub fn lstsq_min_norm(a: &Matrix, b: &DVector<f64>, rtol: f64) -> DVector<f64> {
    let dec = svd(a);
    let mut x = DVector::zeros(a.ncols());
    if dec.s.is_empty() || dec.s[0] == 0.0 {
        return x;
    }
    let cut = rtol * dec.s[0];
    for (j, &sj) in dec.s.iter().enumerate() {
        if sj <= cut {
            break;
        }
        let coef = dec.u.column(j).dot(b) / sj;
        x += dec.vt.row(j).transpose() * coef;
    }
    x
}

/// Left pseudo-inverse of a tall block through its Householder QR
/// (`R^{-1} Q^T`). Falls back to the SVD pseudo-inverse when `R` is
/// numerically singular.
pub fn left_inverse(a: &Matrix) -> Matrix {
    let (m, n) = a.shape();
    if m >= n && n > 0 {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let diag_min = (0..n).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
        if diag_max > 0.0 && diag_min > 1e-13 * diag_max {
            let qt = qr.q().transpose();
            if let Some(sol) = r.solve_upper_triangular(&qt) {
                return sol;
            }
        }
    }
    pinv(a, 1e-14)
}

/// Thin QR `a = q r` with `q` having orthonormal columns.
pub fn thin_qr(a: &Matrix) -> (Matrix, Matrix) {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return (Matrix::zeros(m, m.min(n)), Matrix::zeros(m.min(n), n));
    }
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// Frobenius norm of `U^T U - I`.
pub fn orthonormality_defect(u: &Matrix) -> f64 {
    let g = u.transpose() * u;
    let mut acc = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            let d = g[(i, j)] - target;
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &Matrix) -> f64 {
    let s = singular_values(a);
    if s.is_empty() {
        0.0
    } else {
        s[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pivoted_qr_reconstructs_permuted_input() {
        let a = Matrix::from_fn(5, 7, |i, j| ((i * 7 + j) as f64).sin() + (j as f64) * 0.1);
        let qr = pivoted_qr(&a);
        let mut ap = Matrix::zeros(5, 7);
        for (j, &p) in qr.perm.iter().enumerate() {
            ap.set_column(j, &a.column(p));
        }
        let rec = &qr.q * &qr.r;
        assert!((rec - ap).norm() < 1e-12);
        assert!(orthonormality_defect(&qr.q) < 1e-13);
        for j in 1..5 {
            assert!(qr.r[(j, j)].abs() <= qr.r[(j - 1, j - 1)].abs() + 1e-12);
        }
    }

    #[test]
    fn pivot_ties_go_to_lowest_index() {
        let a = Matrix::identity(3, 6);
        let qr = pivoted_qr(&a);
        assert_eq!(&qr.perm[..3], &[0, 1, 2]);
    }

    #[test]
    fn svd_is_sorted_and_exact() {
        let a = Matrix::from_fn(6, 4, |i, j| 1.0 / (i + j + 1) as f64);
        let d = svd(&a);
        for j in 1..d.s.len() {
            assert!(d.s[j] <= d.s[j - 1]);
        }
        let rec = &d.u * Matrix::from_diagonal(&d.s) * &d.vt;
        assert!((rec - a).norm() < 1e-13);
    }

    #[test]
    fn minimal_norm_solution_of_rank_deficient_system() {
        // columns b and 2b: minimal-norm coefficients are (1/5, 2/5)
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let a = Matrix::from_columns(&[b.clone(), b.clone() * 2.0]);
        let x = lstsq_min_norm(&a, &b, 1e-12);
        assert!((x[0] - 0.2).abs() < 1e-14);
        assert!((x[1] - 0.4).abs() < 1e-14);
    }

    #[test]
    fn left_inverse_of_tall_block() {
        let a = Matrix::from_fn(7, 3, |i, j| 1.0 / (i + j + 1) as f64 + if i == j { 1.0 } else { 0.0 });
        let li = left_inverse(&a);
        assert!((li * &a - Matrix::identity(3, 3)).norm() < 1e-12);
    }
}
