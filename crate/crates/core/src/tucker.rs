//! Tucker tensors `G ×₁ U₁ ⋯ ×_d U_d` with orthonormal factors, plus HOSVD,
//! re-truncation and rounded linear combinations.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::tensor::{check_mode, DenseTensor};

/// Factors must satisfy `|U^T U - I|_F <= ORTHO_TOL` on construction.
pub const ORTHO_TOL: f64 = 1e-10;

/// Relative cutoff on the pivoted-QR diagonal when merging factor bases.
const MERGE_RTOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct TuckerTensor {
    core: DenseTensor,
    factors: Vec<Matrix>,
}

/// How HOSVD decides the multilinear rank.
#[derive(Clone, Debug, PartialEq)]
pub enum Truncation {
    /// Absolute Frobenius error budget for the whole tensor.
    Tolerance(f64),
    /// Fixed per-mode ranks.
    Ranks(Vec<usize>),
}

impl TuckerTensor {
    pub fn new(core: DenseTensor, factors: Vec<Matrix>) -> Result<Self> {
        if factors.len() != core.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for a core of order {}",
                factors.len(),
                core.order()
            )));
        }
        for (i, (u, &r)) in factors.iter().zip(core.dims()).enumerate() {
            if u.ncols() != r {
                return Err(Error::DimensionMismatch(format!(
                    "factor {i} has {} columns, core extent is {r}",
                    u.ncols()
                )));
            }
            if r > u.nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "rank {r} exceeds extent {} in mode {i}",
                    u.nrows()
                )));
            }
            let deviation = linalg::orthonormality_defect(u);
            if deviation > ORTHO_TOL {
                return Err(Error::NotOrthonormal { mode: i, deviation });
            }
        }
        Ok(Self { core, factors })
    }

    pub(crate) fn from_parts(core: DenseTensor, factors: Vec<Matrix>) -> Self {
        debug_assert_eq!(core.order(), factors.len());
        Self { core, factors }
    }

    /// Zero tensor stored with rank (1,…,1).
    pub fn zeros(dims: &[usize]) -> Self {
        let factors = dims
            .iter()
            .map(|&n| {
                let mut u = Matrix::zeros(n, 1);
                u[(0, 0)] = 1.0;
                u
            })
            .collect();
        Self {
            core: DenseTensor::zeros(&vec![1; dims.len()]),
            factors,
        }
    }

    /// Outer product of the given vectors, stored with normalized factors.
    pub fn rank_one(vectors: &[DVector<f64>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty("rank-one tensor needs at least one vector"));
        }
        let mut scale = 1.0;
        let mut factors = Vec::with_capacity(vectors.len());
        for v in vectors {
            let nrm = v.norm();
            if nrm == 0.0 {
                let dims: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
                return Ok(Self::zeros(&dims));
            }
            scale *= nrm;
            factors.push(Matrix::from_column_slice(v.len(), 1, (v / nrm).as_slice()));
        }
        let core = DenseTensor::new(vec![1; vectors.len()], vec![scale])?;
        Ok(Self { core, factors })
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|u| u.nrows()).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.core.dims().to_vec()
    }

    pub fn average_rank(&self) -> f64 {
        let r = self.core.dims();
        r.iter().sum::<usize>() as f64 / r.len() as f64
    }

    pub fn core(&self) -> &DenseTensor {
        &self.core
    }

    pub fn factors(&self) -> &[Matrix] {
        &self.factors
    }

    pub fn factor(&self, mode: usize) -> &Matrix {
        &self.factors[mode]
    }

    pub fn into_parts(self) -> (DenseTensor, Vec<Matrix>) {
        (self.core, self.factors)
    }

    /// Largest `|U_i^T U_i - I|_F` over all modes.
    pub fn orthonormality_defect(&self) -> f64 {
        self.factors
            .iter()
            .map(linalg::orthonormality_defect)
            .fold(0.0, f64::max)
    }

    /// Frobenius norm, read off the core.
    pub fn frob_norm(&self) -> f64 {
        self.core.frob_norm()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            core: self.core.clone().scaled(c),
            factors: self.factors.clone(),
        }
    }

    pub fn to_dense(&self) -> DenseTensor {
        self.core
            .multi_mode_product(&self.factors)
            .expect("factor shapes are validated on construction")
    }

    /// Single entry, contracting the core against one factor row per mode.
    pub fn eval_entry(&self, idx: &[usize]) -> Result<f64> {
        let dims = self.dims();
        if idx.len() != dims.len() || idx.iter().zip(&dims).any(|(i, n)| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: idx.to_vec(),
                dims,
            });
        }
        Ok(self.eval_entry_unchecked(idx))
    }

    pub(crate) fn eval_entry_unchecked(&self, idx: &[usize]) -> f64 {
        let mut buf = self.core.data().to_vec();
        let mut len = buf.len();
        for (mode, u) in self.factors.iter().enumerate() {
            let r = u.ncols();
            let row = idx[mode];
            let next = len / r;
            for j in 0..next {
                let mut s = 0.0;
                for k in 0..r {
                    s += buf[k + r * j] * u[(row, k)];
                }
                buf[j] = s;
            }
            len = next;
        }
        buf[0]
    }

    /// The sub-tensor on the Cartesian product of the given row sets.
    pub fn sample_block(&self, sets: &[&[usize]]) -> Result<DenseTensor> {
        if sets.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} index sets for order {}",
                sets.len(),
                self.order()
            )));
        }
        let mut rows = Vec::with_capacity(sets.len());
        for (mode, (u, set)) in self.factors.iter().zip(sets).enumerate() {
            if set.is_empty() {
                return Err(Error::Empty("index set in sample_block"));
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= u.nrows()) {
                let mut index = vec![0; self.order()];
                index[mode] = bad;
                return Err(Error::IndexOutOfRange {
                    index,
                    dims: self.dims(),
                });
            }
            rows.push(u.select_rows(set.iter()));
        }
        self.core.multi_mode_product(&rows)
    }

    /// `self ×_mode m`. The new factor `m U` is re-orthonormalized and its
    /// triangular part is absorbed into the core.
    pub fn mode_product(&self, m: &Matrix, mode: usize) -> Result<Self> {
        check_mode(mode, self.order())?;
        let u = &self.factors[mode];
        if m.ncols() != u.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product needs {} columns, matrix has {}",
                u.nrows(),
                m.ncols()
            )));
        }
        let (q, r) = linalg::thin_qr(&(m * u));
        let core = self.core.mode_product(&r, mode)?;
        let mut factors = self.factors.clone();
        factors[mode] = q;
        Ok(Self { core, factors })
    }

    /// Truncates the core by HOSVD with absolute tolerance `tol` and folds the
    /// rotations into the factors. Ranks never increase; `r_max` caps each
    /// mode after the tolerance test.
    pub fn retruncate(&self, tol: f64, r_max: Option<&[usize]>) -> Self {
        let d = self.order();
        let thresh = tol.max(0.0) / (d as f64).sqrt();
        let mut rots = Vec::with_capacity(d);
        for mode in 0..d {
            let unf = self.core.matricize(mode).expect("mode in range");
            let (u, s) = left_svd(unf.matrix());
            let mut k = truncation_rank(&s, thresh);
            if let Some(cap) = r_max {
                k = k.min(cap[mode].max(1));
            }
            rots.push(u.columns(0, k).clone_owned());
        }
        let rots_t: Vec<Matrix> = rots.iter().map(|p| p.transpose()).collect();
        let core = self
            .core
            .multi_mode_product(&rots_t)
            .expect("rotation shapes match the core");
        let factors = self.factors.iter().zip(&rots).map(|(u, p)| u * p).collect();
        Self { core, factors }
    }

    /// Writes the binary layout: `d`, dims, ranks as little-endian u64, then
    /// the core and each factor (column-major) as little-endian f64.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.order() as u64;
        w.write_all(&d.to_le_bytes())?;
        for n in self.dims() {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        for r in self.ranks() {
            w.write_all(&(r as u64).to_le_bytes())?;
        }
        for v in self.core.data() {
            w.write_all(&v.to_le_bytes())?;
        }
        for u in &self.factors {
            for v in u.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        fn u64_le<R: Read>(r: &mut R) -> Result<u64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(u64::from_le_bytes(b))
        }
        fn f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(n);
            let mut b = [0u8; 8];
            for _ in 0..n {
                r.read_exact(&mut b)?;
                out.push(f64::from_le_bytes(b));
            }
            Ok(out)
        }
        let d = u64_le(&mut r)? as usize;
        if d == 0 || d > 64 {
            return Err(Error::Format(format!("implausible order {d}")));
        }
        let mut dims = Vec::with_capacity(d);
        for _ in 0..d {
            dims.push(u64_le(&mut r)? as usize);
        }
        let mut ranks = Vec::with_capacity(d);
        for _ in 0..d {
            ranks.push(u64_le(&mut r)? as usize);
        }
        if ranks.iter().zip(&dims).any(|(&r, &n)| r == 0 || r > n) {
            return Err(Error::Format(format!("ranks {ranks:?} invalid for dims {dims:?}")));
        }
        let core = DenseTensor::new(ranks.clone(), f64s(&mut r, ranks.iter().product())?)?;
        let mut factors = Vec::with_capacity(d);
        for (&n, &k) in dims.iter().zip(&ranks) {
            factors.push(Matrix::from_vec(n, k, f64s(&mut r, n * k)?));
        }
        Self::new(core, factors)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Smallest rank whose discarded tail has Frobenius norm at most `thresh`;
/// never below one.
pub(crate) fn truncation_rank(s: &DVector<f64>, thresh: f64) -> usize {
    let mut tail = 0.0;
    let mut k = s.len();
    while k > 1 {
        let next = tail + s[k - 1] * s[k - 1];
        if next.sqrt() > thresh {
            break;
        }
        tail = next;
        k -= 1;
    }
    k.max(1)
}

/// Left singular vectors and singular values of a (possibly very wide)
/// matrix. Wide inputs are first reduced by a QR of their transpose.
pub(crate) fn left_svd(a: &Matrix) -> (Matrix, DVector<f64>) {
    let (m, n) = a.shape();
    if n > 2 * m {
        let (_, r) = linalg::thin_qr(&a.transpose());
        let dec = linalg::svd(&r.transpose());
        (dec.u, dec.s)
    } else {
        let dec = linalg::svd(a);
        (dec.u, dec.s)
    }
}

/// Singular values of the mode unfolding of a dense tensor.
pub fn unfolding_singular_values(x: &DenseTensor, mode: usize) -> Result<DVector<f64>> {
    let unf = x.matricize(mode)?;
    Ok(left_svd(unf.matrix()).1)
}

/// Truncated higher-order SVD of a dense tensor.
///
/// With `Truncation::Tolerance(tol)` each mode discards a singular value tail
/// of norm at most `tol/√d`, which bounds the total error by `tol`.
pub fn hosvd(x: &DenseTensor, trunc: Truncation) -> Result<TuckerTensor> {
    let d = x.order();
    let mut factors = Vec::with_capacity(d);
    match &trunc {
        Truncation::Tolerance(tol) if !(*tol > 0.0) => {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        Truncation::Ranks(r) if r.len() != d => {
            return Err(Error::DimensionMismatch(format!("{} ranks for order {d}", r.len())));
        }
        _ => {}
    }
    for mode in 0..d {
        let unf = x.matricize(mode)?;
        let (u, s) = left_svd(unf.matrix());
        let k = match &trunc {
            Truncation::Tolerance(tol) => truncation_rank(&s, tol / (d as f64).sqrt()),
            Truncation::Ranks(r) => {
                if r[mode] == 0 || r[mode] > x.dims()[mode] {
                    return Err(Error::InvalidArgument(format!(
                        "rank {} invalid for extent {}",
                        r[mode],
                        x.dims()[mode]
                    )));
                }
                r[mode].min(u.ncols())
            }
        };
        factors.push(u.columns(0, k).clone_owned());
    }
    let ut: Vec<Matrix> = factors.iter().map(|u| u.transpose()).collect();
    let core = x.multi_mode_product(&ut)?;
    Ok(TuckerTensor { core, factors })
}

/// Truncated linear combination `Σ c_j T_j`.
///
/// The factor bases of all terms are merged per mode with a pivoted QR, the
/// terms are projected onto the merged bases, and the result is re-truncated
/// at absolute tolerance `tol` with the optional per-mode cap `r_max`.
pub fn rounded_sum(
    terms: &[(f64, &TuckerTensor)],
    tol: f64,
    r_max: Option<&[usize]>,
) -> Result<TuckerTensor> {
    let exact = merged_sum(terms)?;
    Ok(exact.retruncate(tol, r_max))
}

/// Exact linear combination on merged orthonormal bases, without truncation.
pub fn merged_sum(terms: &[(f64, &TuckerTensor)]) -> Result<TuckerTensor> {
    let (_, first) = terms.first().ok_or(Error::Empty("rounded_sum needs at least one term"))?;
    let dims = first.dims();
    let d = dims.len();
    for (_, t) in terms {
        if t.dims() != dims {
            return Err(Error::DimensionMismatch(format!(
                "term dims {:?} vs {:?}",
                t.dims(),
                dims
            )));
        }
    }

    // Per mode: merged basis Q and coordinates of every term's factor in it.
    let mut bases = Vec::with_capacity(d);
    let mut coords: Vec<Vec<Matrix>> = vec![Vec::with_capacity(d); terms.len()];
    for mode in 0..d {
        let blocks: Vec<&Matrix> = terms.iter().map(|(_, t)| &t.factors[mode]).collect();
        let (q, z) = merge_bases(&blocks);
        let mut offset = 0;
        for (j, b) in blocks.iter().enumerate() {
            coords[j].push(z.columns(offset, b.ncols()).clone_owned());
            offset += b.ncols();
        }
        bases.push(q);
    }

    let ranks: Vec<usize> = bases.iter().map(|q| q.ncols()).collect();
    let mut core = DenseTensor::zeros(&ranks);
    for ((c, t), w) in terms.iter().zip(&coords) {
        if *c == 0.0 {
            continue;
        }
        let proj = t.core.multi_mode_product(w)?;
        core = core.axpy(*c, &proj)?;
    }
    Ok(TuckerTensor {
        core,
        factors: bases,
    })
}

/// Orthonormal basis `Q` of the concatenated blocks and coordinates `Z`
/// with `[B_1 … B_s] ≈ Q Z`.
pub(crate) fn merge_bases(blocks: &[&Matrix]) -> (Matrix, Matrix) {
    let n = blocks[0].nrows();
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut cat = Matrix::zeros(n, total);
    let mut offset = 0;
    for b in blocks {
        cat.columns_mut(offset, b.ncols()).copy_from(*b);
        offset += b.ncols();
    }
    let qr = linalg::pivoted_qr(&cat);
    let k = qr.numerical_rank(MERGE_RTOL).max(1);
    let q = qr.q.columns(0, k).clone_owned();
    let mut z = Matrix::zeros(k, total);
    for (j, &p) in qr.perm.iter().enumerate() {
        for i in 0..k {
            z[(i, p)] = qr.r[(i, j)];
        }
    }
    (q, z)
}

/// Random matrix with orthonormal columns (QR of a Gaussian-like matrix).
pub fn random_orthonormal<R: rand::Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Matrix {
    let a = Matrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
    linalg::thin_qr(&a).0
}

/// Random unit vectors, one per mode: the cold-start guess for cross
/// approximation.
pub fn cold_start_factors<R: rand::Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Vec<Matrix> {
    dims.iter()
        .map(|&n| {
            let v: DVector<f64> = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let v = &v / v.norm();
            Matrix::from_column_slice(n, 1, v.as_slice())
        })
        .collect()
}

/// Random Tucker tensor with the given ranks and a core of independent
/// uniform entries.
pub fn random_tucker<R: rand::Rng + ?Sized>(dims: &[usize], ranks: &[usize], rng: &mut R) -> TuckerTensor {
    let factors = dims
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| random_orthonormal(n, r, rng))
        .collect();
    let len: usize = ranks.iter().product();
    let core = DenseTensor::new(ranks.to_vec(), (0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
        .expect("core length matches ranks");
    TuckerTensor { core, factors }
}
