//! Real part of the free-space Helmholtz Green's function sampled on a unit
//! cube whose corner moves towards the singularity along the first axis.

use anyhow::{bail, Result};
use tucker_cross::linalg::Matrix;
use tucker_cross::tucker::cold_start_factors;
use tucker_cross::{c2d, C2DConfig, CountingOracle, FnOracle};

use super::{header, mean_rank, rng};
use crate::config::ExperimentConfig;
use crate::green::green_real;
use crate::output::{int, num, Table};

/// Corner positions from `start` down to `stop` in steps of `step`.
pub fn positions(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((start - stop) / step).round() as usize;
    (0..=count).map(|k| start - k as f64 * step).collect()
}

pub fn run(cfg: &mut ExperimentConfig) -> Result<Vec<Table>> {
    let d = *cfg.d.get_or_insert(3);
    let n = *cfg.n.get_or_insert(100);
    let tol = *cfg.tol.get_or_insert(1e-4);
    let kappas = cfg.kappa.get_or_insert_with(|| vec![1.0, 4.0, 16.0, 64.0]).clone();
    let start = *cfg.x_start.get_or_insert(10.0);
    let stop = *cfg.x_stop.get_or_insert(2.0);
    let step = *cfg.x_step.get_or_insert(0.05);
    let iter_max = *cfg.c2d_max_iters.get_or_insert(20);
    if d != 3 && d != 4 {
        bail!("helmholtz needs d = 3 or 4, got {d}");
    }
    if let Some(k) = kappas.iter().find(|&&k| !(k > 0.0)) {
        bail!("wave number must be positive, got {k}");
    }
    if n < 2 || !(step > 0.0) || !(stop > 0.0) || start < stop {
        bail!("bad sweep: n={n}, x from {start} to {stop} step {step}");
    }
    let c2d_cfg = C2DConfig::new(tol).with_iter_max(iter_max);
    let h = 1.0 / (n - 1) as f64;
    let dims = vec![n; d];
    let mut rng = rng(cfg.seed);

    let mut table = header(&["kappa", "d", "x_star", "iterations", "cumulative_mean_iterations", "avg_rank"], d, &["samples", "converged"]);
    for &kappa in &kappas {
        let mut guess: Vec<Matrix> = cold_start_factors(&dims, &mut rng);
        let mut total_iters = 0;
        for (step_no, xs) in positions(start, stop, step).into_iter().enumerate() {
            let oracle = CountingOracle::new(FnOracle::new(dims.clone(), move |idx: &[usize]| {
                let mut rho2 = 0.0;
                for (m, &i) in idx.iter().enumerate() {
                    let x = i as f64 * h + if m == 0 { xs } else { 0.0 };
                    rho2 += x * x;
                }
                green_real(d, kappa, rho2.sqrt())
            }));
            let out = c2d(&oracle, &guess, &c2d_cfg)?;
            total_iters += out.stats.iterations;
            let ranks = out.tensor.ranks();
            let mut row = vec![
                num(kappa),
                d.to_string(),
                num(xs),
                out.stats.iterations.to_string(),
                num(total_iters as f64 / (step_no + 1) as f64),
                num(mean_rank(&ranks)),
            ];
            row.extend(ranks.iter().map(|r| r.to_string()));
            row.push(int(out.stats.samples));
            row.push(out.stats.converged.to_string());
            table.push(row);
            guess = out.tensor.factors().to_vec();
        }
    }
    Ok(vec![table])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_has_161_positions() {
        let p = positions(10.0, 2.0, 0.05);
        assert_eq!(p.len(), 161);
        assert!((p[160] - 2.0).abs() < 1e-12);
    }
}
