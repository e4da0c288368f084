//! Cross approximation of the closed-form test tensors against HOSVD.

use anyhow::{bail, Result};
use tucker_cross::tucker::cold_start_factors;
use tucker_cross::{c2d, c2di, hosvd, C2DConfig, CountingOracle, DenseTensor, FnOracle, Truncation, TuckerTensor};

use super::{mean_rank, rng};
use crate::config::ExperimentConfig;
use crate::functions::FunctionId;
use crate::output::{int, num, Table};

fn error(t: &TuckerTensor, x: &DenseTensor) -> f64 {
    t.to_dense().axpy(-1.0, x).expect("same dims").frob_norm()
}

/// Primary table: for each HOSVD rank, the HOSVD error, the error of the
/// interpolatory cross approximation seeded with the HOSVD factors, and a
/// cold-started adaptive run at tolerance equal to the HOSVD error.
/// Secondary table (`tolerance`): cold-started adaptive runs over a list of
/// tolerances.
pub fn run(cfg: &mut ExperimentConfig) -> Result<Vec<Table>> {
    let f = *cfg.function.get_or_insert(FunctionId::X1);
    let n = *cfg.n.get_or_insert(f.default_n());
    if n < 2 {
        bail!("n must be at least 2, got {n}");
    }
    let ranks = cfg.ranks.get_or_insert_with(|| (2..=14).collect()).clone();
    let tolerances = cfg.tolerances.get_or_insert_with(|| (1..=8).map(|k| 10f64.powi(-k)).collect()).clone();
    let q = 4;
    let iter_max = *cfg.c2d_max_iters.get_or_insert(20);
    let dims = f.dims(n);
    let min_dim = *dims.iter().min().expect("three modes");
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > min_dim) {
        bail!("rank {r} outside 1..={min_dim}");
    }

    let x = DenseTensor::from_fn(&dims, |i| f.eval(&dims, i));
    let dims_o = dims.clone();
    let oracle = CountingOracle::new(FnOracle::new(dims.clone(), move |i: &[usize]| f.eval(&dims_o, i)));
    let norm = x.frob_norm();
    let mut rng = rng(cfg.seed);

    let mut sweep = Table::new(&[
        "function",
        "hosvd_rank",
        "hosvd_error",
        "c2di_error",
        "c2d_tol",
        "c2d_error",
        "c2d_avg_rank",
        "c2d_iterations",
        "max_inflation",
        "samples",
        "converged",
        "norm",
    ]);
    for &r in &ranks {
        let h = hosvd(&x, Truncation::Ranks(vec![r; 3]))?;
        let e_h = error(&h, &x);
        let ci = c2di(&oracle, h.factors())?;
        let e_i = error(&ci, &x);
        let tol = e_h.max(f64::MIN_POSITIVE);
        let out = c2d(&oracle, &cold_start_factors(&dims, &mut rng), &C2DConfig::new(tol).with_q(q).with_iter_max(iter_max))?;
        sweep.push(vec![
            format!("{f:?}"),
            r.to_string(),
            num(e_h),
            num(e_i),
            num(tol),
            num(error(&out.tensor, &x)),
            num(mean_rank(&out.tensor.ranks())),
            out.stats.iterations.to_string(),
            num(out.stats.max_inflation()),
            int(out.stats.samples),
            out.stats.converged.to_string(),
            num(norm),
        ]);
    }

    let mut tols = Table::new(&[
        "function",
        "tol",
        "error",
        "avg_rank",
        "iterations",
        "max_inflation",
        "samples",
        "converged",
    ])
    .with_suffix("tolerance");
    for &tol in &tolerances {
        let out = c2d(&oracle, &cold_start_factors(&dims, &mut rng), &C2DConfig::new(tol).with_q(q).with_iter_max(iter_max))?;
        tols.push(vec![
            format!("{f:?}"),
            num(tol),
            num(error(&out.tensor, &x)),
            num(mean_rank(&out.tensor.ranks())),
            out.stats.iterations.to_string(),
            num(out.stats.max_inflation()),
            int(out.stats.samples),
            out.stats.converged.to_string(),
        ]);
    }
    Ok(vec![sweep, tols])
}
