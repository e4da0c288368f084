//! Row selection on tall orthonormal matrices.
//!
//! [`qdeim`] takes the pivot rows of a column-pivoted QR of `Uᵀ`.
//! [`gpode`] extends a QDEIM selection greedily, each time adding the row that
//! maximizes the smallest singular value of the sampled block. [`increase`]
//! and [`spread_fill`] grow index sets between iterations of the adaptive cross
//! approximation.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// Ordered list of distinct row indices of one mode.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Validates distinctness and range against the mode extent `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::InvalidArgument(format!("index {i} out of range 0..{n}")));
            }
            if seen[i] {
                return Err(Error::InvalidArgument(format!("duplicate index {i}")));
            }
            seen[i] = true;
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl std::ops::Deref for IndexSet {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// QDEIM: the first `r` pivots of a column-pivoted QR of `Uᵀ`.
pub fn qdeim(u: &Matrix) -> Result<IndexSet> {
    let (n, r) = u.shape();
    if r == 0 {
        return Err(Error::Empty("qdeim on a matrix without columns"));
    }
    if r > n {
        return Err(Error::InvalidArgument(format!("qdeim needs r <= n, got r={r}, n={n}")));
    }
    let qr = linalg::pivoted_qr(&u.transpose());
    if qr.numerical_rank(1e-14) < r {
        return Err(Error::RankDeficient(format!(
            "qdeim input of width {r} has numerical rank {}",
            qr.numerical_rank(1e-14)
        )));
    }
    Ok(IndexSet(qr.perm[..r].to_vec()))
}

/// Oversampled selection of `m >= r` rows: QDEIM followed by greedy
/// smallest-singular-value maximization.
pub fn gpode(u: &Matrix, m: usize) -> Result<IndexSet> {
    let (n, r) = u.shape();
    if m < r {
        return Err(Error::InvalidArgument(format!("gpode needs m >= r, got m={m}, r={r}")));
    }
    if m > n {
        return Err(Error::InvalidArgument(format!("gpode needs m <= n, got m={m}, n={n}")));
    }
    let seed = qdeim(u)?;
    extend_oversampled(u, &seed, m)
}

/// Greedily extends `seed` to `m` rows of `u`. Each step adds the row that
/// maximizes `σ_min(u(I, :))`; exact ties go to the lowest row index. The seed
/// must already have at least `u.ncols()` rows.
pub fn extend_oversampled(u: &Matrix, seed: &IndexSet, m: usize) -> Result<IndexSet> {
    let (n, r) = u.shape();
    if seed.len() < r {
        return Err(Error::InvalidArgument(format!(
            "oversampling seed has {} rows, needs at least {r}",
            seed.len()
        )));
    }
    let m = m.min(n);
    let mut chosen = seed.0.clone();
    let mut taken = vec![false; n];
    for &i in &chosen {
        taken[i] = true;
    }
    // Gram matrix of the sampled block, updated by rank-one additions.
    let mut gram = Matrix::zeros(r, r);
    for &i in &chosen {
        let row = u.row(i);
        gram += row.transpose() * row;
    }
    while chosen.len() < m {
        let eig = gram.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let s: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j].max(0.0)).collect();
        let v = Matrix::from_fn(r, r, |i, j| eig.eigenvectors[(i, order[j])]);

        let mut best: Option<(usize, f64)> = None;
        let mut z = DVector::zeros(r);
        for cand in 0..n {
            if taken[cand] {
                continue;
            }
            z.gemv_tr(1.0, &v, &u.row(cand).transpose(), 0.0);
            let lam = smallest_updated_eigenvalue(&s, z.as_slice());
            if best.is_none_or(|(_, b)| lam > b) {
                best = Some((cand, lam));
            }
        }
        let Some((pick, _)) = best else { break };
        taken[pick] = true;
        chosen.push(pick);
        let row = u.row(pick);
        gram += row.transpose() * row;
    }
    Ok(IndexSet(chosen))
}

/// Smallest eigenvalue of `diag(s) + z zᵀ` for ascending `s`, by bisection on
/// the secular equation `1 + Σ z_j² / (s_j − λ) = 0` over `[s_0, s_1]`.
fn smallest_updated_eigenvalue(s: &[f64], z: &[f64]) -> f64 {
    let s0 = s[0];
    let znorm2: f64 = z.iter().map(|v| v * v).sum();
    let mut hi = s0 + znorm2;
    if s.len() > 1 {
        hi = hi.min(s[1]);
    }
    if z[0] == 0.0 || hi <= s0 {
        return s0;
    }
    if s.len() == 1 {
        return hi;
    }
    let mut lo = s0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let mut f = 1.0;
        for (sj, zj) in s.iter().zip(z) {
            f += zj * zj / (sj - mid);
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Appends up to `q` indices of `prev` that are not in `star`, in `prev`'s
/// stored order.
pub fn increase(star: &IndexSet, prev: &IndexSet, n: usize, q: usize) -> IndexSet {
    let mut out = star.0.clone();
    let mut taken = vec![false; n];
    for &i in &out {
        taken[i] = true;
    }
    for &i in prev.iter().filter(|&&i| i < n) {
        if out.len() == star.len() + q {
            break;
        }
        if !taken[i] {
            taken[i] = true;
            out.push(i);
        }
    }
    IndexSet(out)
}

/// Appends up to `count` further indices from `0..n` by farthest-point
/// selection: each new index maximizes the distance to the current set,
/// lowest index on ties.
pub fn spread_fill(set: &IndexSet, n: usize, count: usize) -> IndexSet {
    let mut out = set.0.clone();
    let mut taken = vec![false; n];
    for &i in &out {
        taken[i] = true;
    }
    let mut dist: Vec<usize> = (0..n)
        .map(|i| out.iter().map(|&j| i.abs_diff(j)).min().unwrap_or(usize::MAX))
        .collect();
    for _ in 0..count {
        let mut pick = None;
        let mut far = 0;
        for (i, &di) in dist.iter().enumerate() {
            if !taken[i] && (pick.is_none() || di > far) {
                pick = Some(i);
                far = di;
            }
        }
        let Some(p) = pick else { break };
        taken[p] = true;
        out.push(p);
        for (i, di) in dist.iter_mut().enumerate() {
            *di = (*di).min(i.abs_diff(p));
        }
    }
    IndexSet(out)
}
