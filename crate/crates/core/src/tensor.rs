//! Dense d-way arrays stored with the first index varying fastest.
//!
//! Mode unfoldings follow the same convention: the row index is the chosen
//! mode and the column index runs lexicographically over the remaining modes,
//! lowest remaining mode fastest.

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

/// A tensor flattened along one mode, together with what is needed to fold it
/// back.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnfolding {
    mode: usize,
    dims: Vec<usize>,
    matrix: DMatrix<f64>,
}

pub(crate) fn check_mode(mode: usize, order: usize) -> Result<()> {
    if mode >= order {
        Err(Error::ModeOutOfRange { mode, order })
    } else {
        Ok(())
    }
}

/// Extents to the left and right of `mode`.
pub(crate) fn split_extents(dims: &[usize], mode: usize) -> (usize, usize) {
    let left = dims[..mode].iter().product();
    let right = dims[mode + 1..].iter().product();
    (left, right)
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("a tensor needs at least one mode".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("zero extent in dims {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {dims:?} need {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_fn(dims: &[usize], f: impl Fn(&[usize]) -> f64) -> Self {
        let len: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, dims);
        }
        Self {
            dims: dims.to_vec(),
            data,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.dims.len() || idx.iter().zip(&self.dims).any(|(i, n)| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: idx.to_vec(),
                dims: self.dims.clone(),
            });
        }
        Ok(linear_index_unchecked(idx, &self.dims))
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.linear_index(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let l = self.linear_index(idx)?;
        self.data[l] = value;
        Ok(())
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Entrywise maximum absolute value.
    pub fn cheb_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= c);
        self
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &DenseTensor) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(DenseTensor {
            dims: self.dims.clone(),
            data,
        })
    }

    pub fn matricize(&self, mode: usize) -> Result<ModeUnfolding> {
        check_mode(mode, self.order())?;
        let n = self.dims[mode];
        let (left, right) = split_extents(&self.dims, mode);
        let mut m = DMatrix::zeros(n, left * right);
        for r in 0..right {
            for k in 0..n {
                let src = &self.data[left * (k + n * r)..left * (k + n * r) + left];
                for (l, v) in src.iter().enumerate() {
                    m[(k, l + left * r)] = *v;
                }
            }
        }
        Ok(ModeUnfolding {
            mode,
            dims: self.dims.clone(),
            matrix: m,
        })
    }

    /// `self ×_mode m`, i.e. the tensor whose mode unfolding is `m * X_(mode)`.
    pub fn mode_product(&self, m: &DMatrix<f64>, mode: usize) -> Result<DenseTensor> {
        check_mode(mode, self.order())?;
        let n = self.dims[mode];
        if m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product needs {n} columns, matrix has {}",
                m.ncols()
            )));
        }
        let rows = m.nrows();
        let (left, right) = split_extents(&self.dims, mode);
        let mut dims = self.dims.clone();
        dims[mode] = rows;
        let mut out = vec![0.0; left * rows * right];
        if rows == 0 {
            return Err(Error::InvalidArgument("mode product with an empty matrix".into()));
        }
        if left == 1 {
            let x = DMatrixView::from_slice(&self.data, n, right);
            let mut y = DMatrixViewMut::from_slice(&mut out, rows, right);
            y.gemm(1.0, m, &x, 0.0);
            return Ok(DenseTensor { dims, data: out });
        }
        let mt = m.transpose();
        for r in 0..right {
            let src = &self.data[r * left * n..(r + 1) * left * n];
            let x = DMatrixView::from_slice(src, left, n);
            let dst = &mut out[r * left * rows..(r + 1) * left * rows];
            let mut y = DMatrixViewMut::from_slice(dst, left, rows);
            y.gemm(1.0, &x, &mt, 0.0);
        }
        Ok(DenseTensor { dims, data: out })
    }

    /// Applies `mats[i]` in every mode `i` (a full multilinear product).
    pub fn multi_mode_product(&self, mats: &[DMatrix<f64>]) -> Result<DenseTensor> {
        if mats.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices for a tensor of order {}",
                mats.len(),
                self.order()
            )));
        }
        // Contract the modes that shrink the most first.
        let mut order: Vec<usize> = (0..mats.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = mats[a].nrows() as f64 / mats[a].ncols() as f64;
            let rb = mats[b].nrows() as f64 / mats[b].ncols() as f64;
            ra.total_cmp(&rb).then(a.cmp(&b))
        });
        let mut t = self.clone();
        for i in order {
            t = t.mode_product(&mats[i], i)?;
        }
        Ok(t)
    }
}

impl ModeUnfolding {
    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Rebuilds a unfolding from a matrix and the target dims.
    pub fn from_matrix(matrix: DMatrix<f64>, mode: usize, dims: &[usize]) -> Result<Self> {
        check_mode(mode, dims.len())?;
        let (left, right) = split_extents(dims, mode);
        if matrix.nrows() != dims[mode] || matrix.ncols() != left * right {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot fold into {dims:?} along mode {mode}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            mode,
            dims: dims.to_vec(),
            matrix,
        })
    }

    pub fn fold(&self) -> DenseTensor {
        let n = self.dims[self.mode];
        let (left, right) = split_extents(&self.dims, self.mode);
        let mut data = vec![0.0; left * n * right];
        for r in 0..right {
            for k in 0..n {
                for l in 0..left {
                    data[l + left * (k + n * r)] = self.matrix[(k, l + left * r)];
                }
            }
        }
        DenseTensor {
            dims: self.dims.clone(),
            data,
        }
    }
}

pub(crate) fn linear_index_unchecked(idx: &[usize], dims: &[usize]) -> usize {
    let mut l = 0;
    let mut stride = 1;
    for (i, n) in idx.iter().zip(dims) {
        l += i * stride;
        stride *= n;
    }
    l
}

/// Advances a multi-index in first-fastest order; wraps to zero at the end.
pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) {
    for (i, n) in idx.iter_mut().zip(dims) {
        *i += 1;
        if *i < *n {
            return;
        }
        *i = 0;
    }
}

/// Inverse of `linear_index_unchecked`.
pub(crate) fn unravel(mut lin: usize, dims: &[usize], out: &mut [usize]) {
    for (o, n) in out.iter_mut().zip(dims) {
        *o = lin % n;
        lin /= n;
    }
}
