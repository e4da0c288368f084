//! Black-box entry access to a tensor that is never materialized.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par;
use crate::tensor::{increment, linear_index_unchecked, DenseTensor};
use crate::tucker::TuckerTensor;

const BLOCK_CHUNK: usize = 512;

/// Deterministic, thread-safe entry evaluator.
pub trait TensorOracle: Sync {
    fn dims(&self) -> &[usize];

    /// Entry at a 0-based multi-index. Callers guarantee the index is in range.
    fn entry(&self, idx: &[usize]) -> f64;

    /// The block on the Cartesian product of `sets`, first index fastest.
    fn block(&self, sets: &[&[usize]]) -> DenseTensor {
        let dims: Vec<usize> = sets.iter().map(|s| s.len()).collect();
        let mut out = DenseTensor::zeros(&dims);
        let d = dims.len();
        par::for_each_chunk(out.data_mut(), BLOCK_CHUNK, |c, chunk| {
            let mut pos = vec![0; d];
            crate::tensor::unravel(c * BLOCK_CHUNK, &dims, &mut pos);
            let mut idx = vec![0; d];
            for v in chunk.iter_mut() {
                for m in 0..d {
                    idx[m] = sets[m][pos[m]];
                }
                *v = self.entry(&idx);
                increment(&mut pos, &dims);
            }
        });
        out
    }

    /// Full mode-`mode` fibers through each tuple of the other modes' indices
    /// (tuples list the remaining modes in increasing order). Column `t` of
    /// the result is the fiber through `tuples[t]`.
    fn fibers(&self, mode: usize, tuples: &[Vec<usize>]) -> Matrix {
        let dims = self.dims();
        let n = dims[mode];
        let full: Vec<usize> = (0..n).collect();
        let cols = par::map_range(tuples.len(), |t| {
            let singles: Vec<[usize; 1]> = tuples[t].iter().map(|&i| [i]).collect();
            let mut sets: Vec<&[usize]> = Vec::with_capacity(dims.len());
            let mut rest = singles.iter();
            for m in 0..dims.len() {
                if m == mode {
                    sets.push(&full);
                } else {
                    sets.push(rest.next().expect("tuple has d-1 entries"));
                }
            }
            self.block(&sets).into_data()
        });
        let mut out = Matrix::zeros(n, tuples.len());
        for (t, col) in cols.into_iter().enumerate() {
            out.column_mut(t).copy_from_slice(&col);
        }
        out
    }
}

/// Checks that `sets` fit the oracle's dimensions.
pub fn check_sets(dims: &[usize], sets: &[&[usize]]) -> Result<()> {
    if sets.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} index sets for order {}",
            sets.len(),
            dims.len()
        )));
    }
    for (mode, (set, &n)) in sets.iter().zip(dims).enumerate() {
        if let Some(&bad) = set.iter().find(|&&i| i >= n) {
            let mut index = vec![0; dims.len()];
            index[mode] = bad;
            return Err(Error::IndexOutOfRange { index, dims: dims.to_vec() });
        }
    }
    Ok(())
}

/// Oracle from a closure over multi-indices.
pub struct FnOracle<F> {
    dims: Vec<usize>,
    f: F,
}

impl<F: Fn(&[usize]) -> f64 + Sync> FnOracle<F> {
    pub fn new(dims: Vec<usize>, f: F) -> Self {
        Self { dims, f }
    }
}

impl<F: Fn(&[usize]) -> f64 + Sync> TensorOracle for FnOracle<F> {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        (self.f)(idx)
    }
}

/// Oracle reading a stored dense tensor.
pub struct DenseOracle<'a> {
    tensor: &'a DenseTensor,
}

impl<'a> DenseOracle<'a> {
    pub fn new(tensor: &'a DenseTensor) -> Self {
        Self { tensor }
    }
}

impl TensorOracle for DenseOracle<'_> {
    fn dims(&self) -> &[usize] {
        self.tensor.dims()
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        self.tensor.data()[linear_index_unchecked(idx, self.tensor.dims())]
    }
}

/// Oracle over a Tucker tensor; blocks are contracted mode by mode instead of
/// entry by entry.
pub struct TuckerOracle<'a> {
    tensor: &'a TuckerTensor,
    dims: Vec<usize>,
}

impl<'a> TuckerOracle<'a> {
    pub fn new(tensor: &'a TuckerTensor) -> Self {
        Self { dims: tensor.dims(), tensor }
    }
}

impl TensorOracle for TuckerOracle<'_> {
    fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        self.tensor.eval_entry_unchecked(idx)
    }

    fn block(&self, sets: &[&[usize]]) -> DenseTensor {
        self.tensor.sample_block(sets).expect("index sets within range")
    }
}

/// Wraps an oracle and counts every entry it hands out.
pub struct CountingOracle<O> {
    inner: O,
    count: AtomicU64,
}

impl<O: TensorOracle> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, count: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: TensorOracle> TensorOracle for CountingOracle<O> {
    fn dims(&self) -> &[usize] {
        self.inner.dims()
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.entry(idx)
    }

    fn block(&self, sets: &[&[usize]]) -> DenseTensor {
        let len: usize = sets.iter().map(|s| s.len()).product();
        self.count.fetch_add(len as u64, Ordering::Relaxed);
        self.inner.block(sets)
    }

    fn fibers(&self, mode: usize, tuples: &[Vec<usize>]) -> Matrix {
        let n = self.inner.dims()[mode];
        self.count.fetch_add((n * tuples.len()) as u64, Ordering::Relaxed);
        self.inner.fibers(mode, tuples)
    }
}

impl<O: TensorOracle + ?Sized> TensorOracle for &O {
    fn dims(&self) -> &[usize] {
        (**self).dims()
    }

    fn entry(&self, idx: &[usize]) -> f64 {
        (**self).entry(idx)
    }

    fn block(&self, sets: &[&[usize]]) -> DenseTensor {
        (**self).block(sets)
    }

    fn fibers(&self, mode: usize, tuples: &[Vec<usize>]) -> Matrix {
        (**self).fibers(mode, tuples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tucker::random_tucker;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_fn(idx: &[usize]) -> f64 {
        idx.iter().enumerate().map(|(m, &i)| ((m + 1) * (i + 2)) as f64).product::<f64>().sqrt()
    }

    #[test]
    fn default_block_matches_entries() {
        let o = FnOracle::new(vec![30, 40, 50], sample_fn);
        let sets: [&[usize]; 3] = [&[3, 1, 29], &[0, 39], &(0..25).collect::<Vec<_>>()];
        let b = o.block(&sets);
        assert_eq!(b.dims(), &[3, 2, 25]);
        for (k, &c) in sets[2].iter().enumerate() {
            for (j, &bj) in sets[1].iter().enumerate() {
                for (i, &a) in sets[0].iter().enumerate() {
                    assert_eq!(b.get(&[i, j, k]).unwrap(), sample_fn(&[a, bj, c]));
                }
            }
        }
    }

    #[test]
    fn fibers_are_columns_through_tuples() {
        let o = FnOracle::new(vec![4, 5, 6], sample_fn);
        let f = o.fibers(1, &[vec![2, 3], vec![0, 5]]);
        assert_eq!(f.shape(), (5, 2));
        for j in 0..5 {
            assert_eq!(f[(j, 0)], sample_fn(&[2, j, 3]));
            assert_eq!(f[(j, 1)], sample_fn(&[0, j, 5]));
        }
    }

    #[test]
    fn tucker_oracle_block_matches_entrywise_default() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_tucker(&[7, 8, 9], &[2, 3, 2], &mut rng);
        let fast = TuckerOracle::new(&t);
        let slow = FnOracle::new(t.dims(), |idx: &[usize]| t.eval_entry(idx).unwrap());
        let sets: [&[usize]; 3] = [&[6, 0], &[1, 2, 7], &[8, 3, 4, 0]];
        let a = fast.block(&sets);
        let b = slow.block(&sets);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-13);
        }
        let fa = fast.fibers(2, &[vec![1, 1], vec![0, 7]]);
        let fb = slow.fibers(2, &[vec![1, 1], vec![0, 7]]);
        assert!((fa - fb).norm() < 1e-13);
    }

    #[test]
    fn counting_oracle_counts_samples() {
        let o = CountingOracle::new(FnOracle::new(vec![10, 10, 10], sample_fn));
        o.entry(&[0, 0, 0]);
        o.block(&[&[1, 2], &[3], &[4, 5, 6]]);
        o.fibers(0, &[vec![1, 1], vec![2, 2]]);
        assert_eq!(o.count(), 1 + 6 + 20);
        o.reset();
        assert_eq!(o.count(), 0);
    }

    #[test]
    fn check_sets_rejects_bad_input() {
        assert!(check_sets(&[3, 3], &[&[0], &[2]]).is_ok());
        assert!(check_sets(&[3, 3], &[&[0]]).is_err());
        assert!(check_sets(&[3, 3], &[&[0], &[3]]).is_err());
    }
}
