//! Fiber-sampling cross approximation in Tucker format.
//!
//! [`c2di`] takes factor guesses, picks main index sets by QDEIM, samples the
//! cross tensor on them, and chooses which fibers to sample in each mode by
//! running QDEIM on the right singular vectors of the cross tensor's
//! unfoldings. The sampled fibers become the new factors; the core is a
//! least-squares fit to an oversampled cross tensor. [`c2d`] repeats this with
//! growing index sets until the iterates settle and every core unfolding has a
//! singular value below the tolerance.

use crate::error::{Error, Result};
use crate::index_select::{self, extend_oversampled, gpode, qdeim, IndexSet};
use crate::linalg::{self, Matrix};
use crate::oracle::TensorOracle;
use crate::tensor::{increment, linear_index_unchecked, DenseTensor};
use crate::tucker::{rounded_sum, TuckerTensor};

/// Tolerance of the rounded difference between consecutive iterates.
const DIFF_TOL: f64 = 1e-14;

/// Position of a multi-index `k` in the first-fastest ordering of a block with
/// extents `ranks`.
pub fn linear_order(k: &[usize], ranks: &[usize]) -> Result<usize> {
    if k.len() != ranks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} components for {} extents",
            k.len(),
            ranks.len()
        )));
    }
    if k.iter().zip(ranks).any(|(a, b)| a >= b) {
        return Err(Error::IndexOutOfRange { index: k.to_vec(), dims: ranks.to_vec() });
    }
    let mut j = 0;
    let mut stride = 1;
    for (a, r) in k.iter().zip(ranks) {
        j += a * stride;
        stride *= r;
    }
    Ok(j)
}

/// Inverse of [`linear_order`].
pub fn unrank(j: usize, ranks: &[usize]) -> Result<Vec<usize>> {
    let total: usize = ranks.iter().product();
    if j >= total {
        return Err(Error::InvalidArgument(format!("position {j} beyond block of size {total}")));
    }
    let mut out = vec![0; ranks.len()];
    crate::tensor::unravel(j, ranks, &mut out);
    Ok(out)
}

/// Mode-`mode` unfolding of a cross tensor; column `j` holds the entries
/// whose remaining indices have position `j` in [`linear_order`] over the
/// remaining extents.
pub fn core_reshape(w: &DenseTensor, mode: usize) -> Result<Matrix> {
    Ok(w.matricize(mode)?.into_matrix())
}

/// Picks `count` fibers for mode `mode`: QDEIM on the leading right singular
/// vectors of the unfolded cross tensor `w`, with each selected column mapped
/// back to a tuple of actual indices drawn from the other modes' main sets.
/// Tuples list the remaining modes in increasing order.
pub fn select_complement(
    w: &DenseTensor,
    mode: usize,
    main_sets: &[&[usize]],
    count: usize,
) -> Result<Vec<Vec<usize>>> {
    if main_sets.len() != w.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} main sets for a cross tensor of order {}",
            main_sets.len(),
            w.order()
        )));
    }
    for (m, (set, &n)) in main_sets.iter().zip(w.dims()).enumerate() {
        if set.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "main set {m} has {} indices, cross tensor extent is {n}",
                set.len()
            )));
        }
    }
    let unf = core_reshape(w, mode)?;
    let rest: Vec<usize> = (0..w.order()).filter(|&m| m != mode).collect();
    let rest_ranks: Vec<usize> = rest.iter().map(|&m| w.dims()[m]).collect();
    let count = count.min(unf.nrows()).min(unf.ncols());
    if count == 0 {
        return Err(Error::Empty("complement selection of zero fibers"));
    }
    let dec = linalg::svd(&unf);
    let z = dec.vt.rows(0, count).transpose();
    let cols = qdeim(&z)?;
    cols.iter()
        .map(|&j| {
            let pos = unrank(j, &rest_ranks)?;
            Ok(rest.iter().zip(pos).map(|(&m, p)| main_sets[m][p]).collect())
        })
        .collect()
}

/// Settings of the adaptive cross approximation.
#[derive(Clone, Debug)]
pub struct C2DConfig {
    /// Absolute tolerance of the stopping test and the final truncation.
    pub tol: f64,
    /// Index-set growth per iteration.
    pub q: usize,
    pub iter_max: usize,
    /// Extra rows of the least-squares sets beyond the main sets.
    pub oversample: usize,
    /// Optional per-mode rank cap.
    pub r_max: Option<Vec<usize>>,
}

impl C2DConfig {
    pub fn new(tol: f64) -> Self {
        Self { tol, q: 4, iter_max: 20, oversample: 3, r_max: None }
    }

    pub fn with_q(mut self, q: usize) -> Self {
        self.q = q;
        self
    }

    pub fn with_iter_max(mut self, iter_max: usize) -> Self {
        self.iter_max = iter_max;
        self
    }

    pub fn with_r_max(mut self, r_max: Option<Vec<usize>>) -> Self {
        self.r_max = r_max;
        self
    }

    fn validate(&self, order: usize) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.iter_max == 0 {
            return Err(Error::InvalidArgument("iter_max must be at least 1".into()));
        }
        if let Some(cap) = &self.r_max {
            if cap.len() != order || cap.contains(&0) {
                return Err(Error::InvalidArgument(format!("bad rank cap {cap:?} for order {order}")));
            }
        }
        Ok(())
    }
}

/// Per-call record of the adaptive iteration.
#[derive(Clone, Debug, Default)]
pub struct C2DStats {
    pub iterations: usize,
    /// Multilinear rank of each iterate before the final truncation.
    pub ranks: Vec<Vec<usize>>,
    /// Difference norm to the previous iterate (infinite at the first one).
    pub diffs: Vec<f64>,
    /// Largest of the per-mode smallest core singular values.
    pub sigma_min: Vec<f64>,
    pub final_ranks: Vec<usize>,
    /// Oracle entries requested.
    pub samples: u64,
    pub converged: bool,
}

impl C2DStats {
    pub fn average_ranks(&self) -> Vec<f64> {
        self.ranks.iter().map(|r| mean(r)).collect()
    }

    /// Largest intermediate average rank over the final average rank.
    pub fn max_inflation(&self) -> f64 {
        let peak = self.average_ranks().into_iter().fold(0.0, f64::max);
        peak / mean(&self.final_ranks).max(1.0)
    }
}

fn mean(r: &[usize]) -> f64 {
    if r.is_empty() {
        0.0
    } else {
        r.iter().sum::<usize>() as f64 / r.len() as f64
    }
}

fn check_guess(dims: &[usize], guess: &[Matrix]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument("cross approximation needs order >= 2".into()));
    }
    if guess.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} factor guesses for order {}",
            guess.len(),
            dims.len()
        )));
    }
    for (mode, (u, &n)) in guess.iter().zip(dims).enumerate() {
        if u.nrows() != n || u.ncols() == 0 || u.ncols() > n {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} guess is {}x{}, extent {n}",
                u.nrows(),
                u.ncols()
            )));
        }
    }
    Ok(())
}

/// Where the rows of the core least-squares fit come from.
enum LsRows<'a> {
    /// Fixed in advance; each main set is a prefix of its row set.
    Given(&'a [IndexSet]),
    /// The main set extended by this many rows chosen on the new factors.
    FromNewFactors(usize),
}

/// One sweep of sampling and fitting on the given main sets.
fn cross_sweep<O: TensorOracle + ?Sized>(
    oracle: &O,
    main: &[IndexSet],
    rows: LsRows<'_>,
    samples: &mut u64,
) -> Result<TuckerTensor> {
    let d = main.len();
    let dims = oracle.dims();
    let main_refs: Vec<&[usize]> = main.iter().map(|s| s.as_slice()).collect();
    let main_dims: Vec<usize> = main.iter().map(|s| s.len()).collect();

    let (w, given_os) = match rows {
        LsRows::Given(ls) => {
            let ls_refs: Vec<&[usize]> = ls.iter().map(|s| s.as_slice()).collect();
            let w_os = oracle.block(&ls_refs);
            *samples += w_os.len() as u64;
            let w = DenseTensor::from_fn(&main_dims, |idx| w_os.get(idx).expect("main set is a prefix"));
            (w, Some((ls, w_os)))
        }
        LsRows::FromNewFactors(_) => {
            let w = oracle.block(&main_refs);
            *samples += w.len() as u64;
            (w, None)
        }
    };

    let mut factors = Vec::with_capacity(d);
    for mode in 0..d {
        let tuples = select_complement(&w, mode, &main_refs, main[mode].len())?;
        let fib = oracle.fibers(mode, &tuples);
        *samples += (dims[mode] * tuples.len()) as u64;
        if std::env::var("DBG").is_ok() {
            let sv = linalg::singular_values(&fib);
            eprintln!("mode {mode} fib sv {:?}", sv.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>());
        }
        factors.push(linalg::svd(&fib).u);
    }

    let owned_ls: Vec<IndexSet>;
    let (ls, w_os) = match (given_os, rows) {
        (Some(pair), _) => pair,
        (None, LsRows::FromNewFactors(extra)) => {
            owned_ls = factors
                .iter()
                .zip(main)
                .map(|(u, set)| extend_oversampled(u, set, set.len() + extra))
                .collect::<Result<_>>()?;
            let w_os = sample_extension(oracle, &w, main, &owned_ls, samples);
            (&owned_ls[..], w_os)
        }
        (None, LsRows::Given(_)) => unreachable!("given rows are sampled up front"),
    };

    if std::env::var("DBG").is_ok() {
        for (u, set) in factors.iter().zip(ls) {
            let b = u.select_rows(set.iter());
            let sv = linalg::singular_values(&b);
            eprintln!("ls sv {:?}", sv.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>());
        }
    }
    let inverses: Vec<Matrix> = factors
        .iter()
        .zip(ls)
        .map(|(u, set)| linalg::left_inverse(&u.select_rows(set.iter())))
        .collect();
    let core = w_os.multi_mode_product(&inverses)?;
    TuckerTensor::new(core, factors)
}

/// Samples the block on `ls` (each main set a prefix of its row set) reusing
/// the block `w` already sampled on the main sets. The missing entries split
/// into `d` disjoint Cartesian blocks: in block `m` mode `m` takes only the
/// new rows, earlier modes all rows, later modes the main rows.
fn sample_extension<O: TensorOracle + ?Sized>(
    oracle: &O,
    w: &DenseTensor,
    main: &[IndexSet],
    ls: &[IndexSet],
    samples: &mut u64,
) -> DenseTensor {
    let d = main.len();
    let os_dims: Vec<usize> = ls.iter().map(|s| s.len()).collect();
    let mut out = DenseTensor::zeros(&os_dims);
    let mut idx = vec![0; d];
    for &v in w.data() {
        let l = linear_index_unchecked(&idx, &os_dims);
        out.data_mut()[l] = v;
        increment(&mut idx, w.dims());
    }
    for m in 0..d {
        let start = main[m].len();
        if ls[m].len() == start {
            continue;
        }
        let sets: Vec<&[usize]> = (0..d)
            .map(|j| match j.cmp(&m) {
                std::cmp::Ordering::Less => ls[j].as_slice(),
                std::cmp::Ordering::Equal => &ls[j][start..],
                std::cmp::Ordering::Greater => main[j].as_slice(),
            })
            .collect();
        let blk = oracle.block(&sets);
        *samples += blk.len() as u64;
        let mut pos = vec![0; d];
        for &v in blk.data() {
            let mut target = pos.clone();
            target[m] += start;
            let l = linear_index_unchecked(&target, &os_dims);
            out.data_mut()[l] = v;
            increment(&mut pos, blk.dims());
        }
    }
    out
}

/// Single pass with fixed ranks taken from the factor guesses.
pub fn c2di<O: TensorOracle + ?Sized>(oracle: &O, guess: &[Matrix]) -> Result<TuckerTensor> {
    c2di_oversampled(oracle, guess, 3)
}

/// [`c2di`] with a chosen number of extra least-squares rows per mode.
pub fn c2di_oversampled<O: TensorOracle + ?Sized>(
    oracle: &O,
    guess: &[Matrix],
    oversample: usize,
) -> Result<TuckerTensor> {
    let dims = oracle.dims().to_vec();
    check_guess(&dims, guess)?;
    let mut main = Vec::with_capacity(dims.len());
    let mut ls = Vec::with_capacity(dims.len());
    for (u, &n) in guess.iter().zip(&dims) {
        main.push(qdeim(u)?);
        ls.push(gpode(u, (u.ncols() + oversample).min(n))?);
    }
    let mut samples = 0;
    cross_sweep(oracle, &main, LsRows::Given(&ls), &mut samples)
}

/// Approximation and statistics returned by [`c2d`].
#[derive(Clone, Debug)]
pub struct C2DOutput {
    pub tensor: TuckerTensor,
    pub stats: C2DStats,
}

/// Adaptive cross approximation to absolute tolerance `cfg.tol`, started
/// from the factor guesses (a cold start uses random unit vectors, a warm
/// start the factors of a nearby solution).
///
/// Each iteration takes QDEIM rows of the current factors, adds up to `q`
/// rows of the previous main set, and tops up with well-spread new rows when
/// the previous set has nothing left to add. The least-squares rows for the
/// core extend the main rows greedily on the freshly sampled factors. Without convergence after
/// `iter_max` iterations the truncated last iterate is returned with
/// `converged == false`.
pub fn c2d<O: TensorOracle + ?Sized>(oracle: &O, guess: &[Matrix], cfg: &C2DConfig) -> Result<C2DOutput> {
    let dims = oracle.dims().to_vec();
    let d = dims.len();
    check_guess(&dims, guess)?;
    cfg.validate(d)?;
    let cap = |mode: usize| cfg.r_max.as_ref().map_or(dims[mode], |c| c[mode].min(dims[mode]));

    let mut factors: Vec<Matrix> = guess
        .iter()
        .enumerate()
        .map(|(m, u)| {
            let keep = u.ncols().min(cap(m));
            u.columns(0, keep).clone_owned()
        })
        .collect();
    let mut prev_sets = vec![IndexSet::empty(); d];
    let mut prev: Option<TuckerTensor> = None;
    let mut stats = C2DStats::default();

    for _ in 0..cfg.iter_max {
        let mut main = Vec::with_capacity(d);
        for (mode, u) in factors.iter().enumerate() {
            let n = dims[mode];
            let star = qdeim(u)?;
            let target = (star.len() + cfg.q).min(cap(mode)).max(star.len());
            let mut set = index_select::increase(&star, &prev_sets[mode], n, target - star.len());
            if set.len() < target {
                set = index_select::extend_oversampled(u, &set, target)?;
            }
            main.push(set);
        }

        let x = cross_sweep(oracle, &main, LsRows::FromNewFactors(cfg.oversample), &mut stats.samples)?;
        let sigma = (0..d)
            .map(|mode| {
                let s = linalg::singular_values(x.core().matricize(mode).expect("mode in range").matrix());
                s[s.len() - 1]
            })
            .fold(0.0, f64::max);
        let diff = match &prev {
            Some(p) => rounded_sum(&[(1.0, &x), (-1.0, p)], DIFF_TOL, None)?.frob_norm(),
            None => f64::INFINITY,
        };
        stats.iterations += 1;
        stats.ranks.push(x.ranks());
        stats.diffs.push(diff);
        stats.sigma_min.push(sigma);

        if diff.max(sigma) < cfg.tol {
            stats.converged = true;
            prev = Some(x);
            break;
        }
        factors = x.factors().to_vec();
        prev_sets = main;
        prev = Some(x);
    }

    let last = prev.expect("at least one iteration ran");
    let tensor = last.retruncate(cfg.tol, cfg.r_max.as_deref());
    stats.final_ranks = tensor.ranks();
    Ok(C2DOutput { tensor, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{CountingOracle, DenseOracle, FnOracle, TuckerOracle};
    use crate::tucker::{cold_start_factors, random_orthonormal, random_tucker};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_order_examples() {
        assert_eq!(linear_order(&[0, 0, 0], &[2, 3, 2]).unwrap(), 0);
        assert_eq!(linear_order(&[1, 0, 0], &[2, 3, 2]).unwrap(), 1);
        assert_eq!(linear_order(&[0, 1, 1], &[2, 3, 2]).unwrap(), 8);
        assert!(linear_order(&[2, 0, 0], &[2, 3, 2]).is_err());
        assert!(linear_order(&[0, 0], &[2, 3, 2]).is_err());
    }

    #[test]
    fn linear_order_is_a_bijection() {
        let ranks = [2, 3, 2];
        let mut seen = [false; 12];
        for c in 0..2 {
            for b in 0..3 {
                for a in 0..2 {
                    let j = linear_order(&[a, b, c], &ranks).unwrap();
                    assert!(!seen[j]);
                    seen[j] = true;
                    assert_eq!(unrank(j, &ranks).unwrap(), vec![a, b, c]);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert!(unrank(12, &ranks).is_err());
    }

    #[test]
    fn core_reshape_follows_linear_order() {
        let ranks = [2, 2, 2];
        let w = DenseTensor::from_fn(&ranks, |k| linear_order(k, &ranks).unwrap() as f64);
        for mode in 0..3 {
            let m = core_reshape(&w, mode).unwrap();
            let rest: Vec<usize> = (0..3).filter(|&x| x != mode).collect();
            for ki in 0..2 {
                for j in 0..4 {
                    let pos = unrank(j, &[2, 2]).unwrap();
                    let mut k = [0; 3];
                    k[mode] = ki;
                    k[rest[0]] = pos[0];
                    k[rest[1]] = pos[1];
                    assert_eq!(m[(ki, j)], linear_order(&k, &ranks).unwrap() as f64);
                }
            }
        }
    }

    #[test]
    fn core_reshape_in_two_dimensions() {
        let w = DenseTensor::from_fn(&[3, 4], |k| (10 * k[0] + k[1]) as f64);
        let m0 = core_reshape(&w, 0).unwrap();
        let m1 = core_reshape(&w, 1).unwrap();
        assert_eq!(m0.shape(), (3, 4));
        assert_eq!(m1, m0.transpose());
        assert_eq!(m0[(2, 3)], 23.0);
    }

    #[test]
    fn complement_fibers_span_the_column_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_tucker(&[15, 16, 17], &[3, 3, 3], &mut rng);
        let main: Vec<IndexSet> = t.factors().iter().map(|u| qdeim(u).unwrap()).collect();
        let refs: Vec<&[usize]> = main.iter().map(|s| s.as_slice()).collect();
        let w = t.sample_block(&refs).unwrap();
        let oracle = TuckerOracle::new(&t);
        for mode in 0..3 {
            let tuples = select_complement(&w, mode, &refs, 3).unwrap();
            assert_eq!(tuples.len(), 3);
            for tup in &tuples {
                let rest: Vec<usize> = (0..3).filter(|&m| m != mode).collect();
                for (&m, &i) in rest.iter().zip(tup) {
                    assert!(main[m].contains(i));
                }
            }
            let fib = oracle.fibers(mode, &tuples);
            let q = linalg::svd(&fib).u;
            // projection of the true basis onto the fiber span is lossless
            let u = t.factor(mode);
            let resid = u - &q * (q.transpose() * u);
            assert!(resid.norm() < 1e-8, "mode {mode}: {}", resid.norm());
        }
    }

    #[test]
    fn c2di_recovers_rank_one_tensor() {
        let a: Vec<f64> = (0..9).map(|i| 1.0 + i as f64).collect();
        let b: Vec<f64> = (0..7).map(|i| (i as f64 * 0.3).cos()).collect();
        let c: Vec<f64> = (0..8).map(|i| 2.0 - 0.1 * i as f64).collect();
        let o = FnOracle::new(vec![9, 7, 8], |k: &[usize]| a[k[0]] * b[k[1]] * c[k[2]]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let guess = cold_start_factors(&[9, 7, 8], &mut rng);
        let t = c2di(&o, &guess).unwrap();
        assert_eq!(t.ranks(), vec![1, 1, 1]);
        let dense = DenseTensor::from_fn(&[9, 7, 8], |k| a[k[0]] * b[k[1]] * c[k[2]]);
        let err = t.to_dense().axpy(-1.0, &dense).unwrap().frob_norm();
        assert!(err < 1e-12 * dense.frob_norm());
    }

    #[test]
    fn c2di_is_exact_for_exact_rank_with_warm_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for ranks in [[3, 3, 3], [2, 4, 3]] {
            let t = random_tucker(&[20, 21, 22], &ranks, &mut rng);
            let guess: Vec<Matrix> = t
                .factors()
                .iter()
                .map(|u| {
                    let rot = random_orthonormal(u.ncols(), u.ncols(), &mut rng);
                    u * rot
                })
                .collect();
            let out = c2di(&TuckerOracle::new(&t), &guess).unwrap();
            assert_eq!(out.ranks(), ranks.to_vec());
            let err = out.to_dense().axpy(-1.0, &t.to_dense()).unwrap().frob_norm();
            assert!(err < 1e-10 * t.frob_norm(), "error {err}");
        }
    }

    #[test]
    fn c2di_rejects_bad_guesses() {
        let o = FnOracle::new(vec![4, 4], |_: &[usize]| 1.0);
        assert!(c2di(&o, &[Matrix::identity(4, 1)]).is_err());
        assert!(c2di(&o, &[Matrix::identity(4, 1), Matrix::identity(3, 1)]).is_err());
        let o1 = FnOracle::new(vec![4], |_: &[usize]| 1.0);
        assert!(c2di(&o1, &[Matrix::identity(4, 1)]).is_err());
    }

    #[test]
    fn c2d_finds_exact_rank_from_cold_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let t = random_tucker(&[25, 25, 25], &[2, 2, 2], &mut rng).scaled(10.0);
        let oracle = CountingOracle::new(TuckerOracle::new(&t));
        let guess = cold_start_factors(&t.dims(), &mut rng);
        let out = c2d(&oracle, &guess, &C2DConfig::new(1e-8)).unwrap();
        assert!(out.stats.converged);
        assert_eq!(out.tensor.ranks(), vec![2, 2, 2]);
        let err = out.tensor.to_dense().axpy(-1.0, &t.to_dense()).unwrap().frob_norm();
        assert!(err <= 1e-8, "error {err}");
        assert_eq!(out.stats.samples, oracle.count());
        assert!(out.tensor.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn c2d_handles_smooth_function() {
        let n = 30;
        let x = |i: usize| i as f64 / (n - 1) as f64;
        let f = |k: &[usize]| 1.0 / (1.0 + x(k[0]) + x(k[1]) + x(k[2]));
        let dense = DenseTensor::from_fn(&[n, n, n], f);
        let oracle = DenseOracle::new(&dense);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let guess = cold_start_factors(&[n, n, n], &mut rng);
        let tol = 1e-6;
        let out = c2d(&oracle, &guess, &C2DConfig::new(tol)).unwrap();
        assert!(out.stats.converged);
        let err = out.tensor.to_dense().axpy(-1.0, &dense).unwrap().frob_norm();
        assert!(err < 10.0 * tol, "error {err}");
        // main sets never shrink before the stop
        let avg = out.stats.average_ranks();
        assert!(avg.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn extension_sampling_matches_full_block() {
        let o = FnOracle::new(vec![9, 8, 7], |k: &[usize]| (k[0] * 100 + k[1] * 10 + k[2]) as f64);
        let main = vec![
            IndexSet::new(vec![4, 1], 9).unwrap(),
            IndexSet::new(vec![7], 8).unwrap(),
            IndexSet::new(vec![0, 6, 2], 7).unwrap(),
        ];
        let ls = vec![
            IndexSet::new(vec![4, 1, 8, 0], 9).unwrap(),
            IndexSet::new(vec![7, 3], 8).unwrap(),
            IndexSet::new(vec![0, 6, 2], 7).unwrap(),
        ];
        let refs: Vec<&[usize]> = main.iter().map(|s| s.as_slice()).collect();
        let w = o.block(&refs);
        let mut count = 0;
        let got = sample_extension(&o, &w, &main, &ls, &mut count);
        let ls_refs: Vec<&[usize]> = ls.iter().map(|s| s.as_slice()).collect();
        assert_eq!(got, o.block(&ls_refs));
        assert_eq!(count as usize, 4 * 2 * 3 - 2 * 1 * 3);
    }

    #[test]
    fn c2d_respects_rank_cap() {
        let n = 20;
        let f = |k: &[usize]| ((k[0] + 2 * k[1] + 3 * k[2]) as f64 * 0.05).sin() + 1.0 / (1.0 + (k[0] * k[1] * k[2]) as f64);
        let oracle = FnOracle::new(vec![n, n, n], f);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let guess = cold_start_factors(&[n, n, n], &mut rng);
        let cfg = C2DConfig::new(1e-12).with_r_max(Some(vec![3, 4, 5])).with_iter_max(4);
        let out = c2d(&oracle, &guess, &cfg).unwrap();
        for r in &out.stats.ranks {
            assert!(r[0] <= 3 && r[1] <= 4 && r[2] <= 5);
        }
        let fr = out.tensor.ranks();
        assert!(fr[0] <= 3 && fr[1] <= 4 && fr[2] <= 5);
    }

    #[test]
    fn fixed_rank_iteration_with_zero_growth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_tucker(&[12, 12, 12], &[3, 3, 3], &mut rng);
        let guess: Vec<Matrix> = (0..3).map(|_| random_orthonormal(12, 3, &mut rng)).collect();
        let cfg = C2DConfig::new(1e-9).with_q(0).with_iter_max(5);
        let out = c2d(&TuckerOracle::new(&t), &guess, &cfg).unwrap();
        assert!(out.stats.ranks.iter().all(|r| r == &vec![3, 3, 3]));
        // the smallest core singular value stays O(1) at the exact rank
        assert!(!out.stats.converged);
        assert_eq!(out.stats.iterations, 5);
        let err = out.tensor.to_dense().axpy(-1.0, &t.to_dense()).unwrap().frob_norm();
        assert!(err < 1e-9 * t.frob_norm());
    }
}
