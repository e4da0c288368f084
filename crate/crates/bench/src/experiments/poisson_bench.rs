//! Fast Poisson solves on a sequence of refined grids `n = 2^p − 1`, each
//! warm-started from the prolonged solution of the previous level.

use std::time::Instant;

use anyhow::{bail, Result};
use nalgebra::DVector;
use tucker_cross::spectral::{prolongate, Boundary, Laplace1D, PoissonProblem};
use tucker_cross::{C2DConfig, DenseTensor, TuckerTensor};

use super::{header, mean_rank};
use crate::config::ExperimentConfig;
use crate::output::{int, num, Table};
use crate::reference::{DenseLaplacian, MAX_DENSE_LEN};

/// Dirichlet grids of `n` interior points on `[−1, 1]`.
pub fn grid(n: usize, d: usize) -> Result<Vec<Laplace1D>> {
    Ok(vec![Laplace1D::new(n, 2.0, Boundary::Dirichlet)?; d])
}

/// `f = exp(−36 ρ²)` with `ρ² = Σ_i (x_i − i/100)²`, a rank-one tensor.
pub fn gaussian_rhs(ops: &[Laplace1D]) -> Result<TuckerTensor> {
    let vecs: Vec<DVector<f64>> = ops
        .iter()
        .enumerate()
        .map(|(m, op)| {
            let c = (m + 1) as f64 / 100.0;
            DVector::from_iterator(op.n(), op.points().into_iter().map(|p| (-36.0 * (p - 1.0 - c).powi(2)).exp()))
        })
        .collect();
    Ok(TuckerTensor::rank_one(&vecs)?)
}

#[derive(Clone, Debug)]
pub struct Level {
    pub n: usize,
    pub iterations: usize,
    pub ranks: Vec<usize>,
    pub samples: u64,
    pub converged: bool,
    pub seconds: f64,
    pub solution: TuckerTensor,
}

/// Solves on `n = 2^p − 1` for every `p` in `levels` at absolute tolerance
/// `rms_tol · √(n^d)`.
pub fn refine(d: usize, levels: &[u32], rms_tol: f64, iter_max: usize) -> Result<Vec<Level>> {
    let mut out: Vec<Level> = Vec::new();
    let mut prev: Option<(TuckerTensor, Vec<Laplace1D>)> = None;
    for &p in levels {
        let n = (1usize << p) - 1;
        let ops = grid(n, d)?;
        let tol = rms_tol * (n as f64).powi(d as i32).sqrt();
        let start = Instant::now();
        let problem = PoissonProblem::new(ops.clone(), gaussian_rhs(&ops)?, None)?;
        let warm = match &prev {
            Some((t, coarse)) => Some(prolongate(t, coarse, &vec![n; d])?),
            None => None,
        };
        let cfg = C2DConfig::new(tol).with_iter_max(iter_max);
        let sol = problem.solve(&cfg, warm.as_ref().map(|w| w.factors()))?;
        let seconds = start.elapsed().as_secs_f64();
        out.push(Level {
            n,
            iterations: sol.stats.iterations,
            ranks: sol.solution.ranks(),
            samples: sol.stats.samples,
            converged: sol.stats.converged,
            seconds,
            solution: sol.solution.clone(),
        });
        prev = Some((sol.solution, ops));
    }
    Ok(out)
}

/// Dense direct solve of the same problem.
pub fn dense_solution(n: usize, d: usize) -> Result<DenseTensor> {
    let ops = grid(n, d)?;
    let f = gaussian_rhs(&ops)?.to_dense();
    DenseLaplacian::new(&vec![n; d], 2.0, Boundary::Dirichlet)?.solve(&f)
}

pub fn run(cfg: &mut ExperimentConfig) -> Result<Vec<Table>> {
    let d = *cfg.d.get_or_insert(3);
    let levels = cfg.levels.get_or_insert_with(|| (5..=9).collect()).clone();
    let rms_tol = *cfg.tol.get_or_insert(3e-8);
    let iter_max = *cfg.c2d_max_iters.get_or_insert(20);
    let validate = *cfg.validate_dense.get_or_insert(false);
    if !(2..=5).contains(&d) {
        bail!("poisson-bench supports d = 2..=5, got {d}");
    }
    if let Some(&p) = levels.iter().find(|&&p| !(2..=20).contains(&p)) {
        bail!("level p = {p} outside 2..=20");
    }
    if validate {
        for &p in &levels {
            let len = ((1usize << p) - 1).checked_pow(d as u32).unwrap_or(usize::MAX);
            if len > MAX_DENSE_LEN {
                bail!("dense validation at p = {p}, d = {d} needs {len} entries (limit {MAX_DENSE_LEN})");
            }
        }
    }

    let mut tail = vec!["samples", "n_pow_d", "converged", "rel_error_dense"];
    if cfg.timing {
        tail.push("time_s");
    }
    let mut table = header(&["d", "p", "n", "iterations", "avg_rank"], d, &tail);
    for (lvl, &p) in refine(d, &levels, rms_tol, iter_max)?.iter().zip(&levels) {
        let err = if validate {
            let v = dense_solution(lvl.n, d)?;
            num(lvl.solution.to_dense().axpy(-1.0, &v)?.frob_norm() / v.frob_norm())
        } else {
            String::new()
        };
        let mut row = vec![d.to_string(), p.to_string(), lvl.n.to_string(), lvl.iterations.to_string(), num(mean_rank(&lvl.ranks))];
        row.extend(lvl.ranks.iter().map(|r| r.to_string()));
        row.push(int(lvl.samples));
        row.push(num((lvl.n as f64).powi(d as i32)));
        row.push(lvl.converged.to_string());
        row.push(err);
        if cfg.timing {
            row.push(num(lvl.seconds));
        }
        table.push(row);
    }
    Ok(vec![table])
}
