//! Backward-Euler time stepping of the Allen-Cahn equation with one
//! Tucker-AA solve per step.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use tucker_cross::pde::AllenCahnMap;
use tucker_cross::{tucker_aa, AAParams, StopTolerance, TuckerTensor};

use super::{header, mean_rank};
use crate::config::ExperimentConfig;
use crate::output::{num, Table};

pub const LENGTH: f64 = 2.0 * PI;

#[derive(Clone, Debug, PartialEq)]
pub struct AllenCahnSettings {
    pub n: usize,
    pub d: usize,
    pub steps: usize,
    pub dt: f64,
    pub nu: f64,
    pub alpha: f64,
    pub precond: bool,
    pub window: usize,
    pub theta: f64,
    pub eps_h0: f64,
    pub stop_rel: f64,
    pub c2d_max_iters: usize,
    pub max_iter: usize,
}

#[derive(Clone, Debug)]
pub struct Step {
    pub step: usize,
    pub aa_iterations: usize,
    pub converged: bool,
    pub rho0: f64,
    pub final_rho: f64,
    pub mean_c2d_iters: f64,
    pub mean_precond_iters: f64,
    pub state: TuckerTensor,
}

impl AllenCahnSettings {
    pub fn from_config(cfg: &mut ExperimentConfig) -> Result<Self> {
        let s = Self {
            n: *cfg.n.get_or_insert(63),
            d: *cfg.d.get_or_insert(3),
            steps: *cfg.steps.get_or_insert(10),
            dt: *cfg.dt.get_or_insert(0.1),
            nu: *cfg.nu.get_or_insert(0.01),
            alpha: *cfg.alpha.get_or_insert(0.2),
            precond: *cfg.precond.get_or_insert(true),
            window: *cfg.window.get_or_insert(3),
            theta: *cfg.theta.get_or_insert(0.9),
            eps_h0: *cfg.eps_h0.get_or_insert(1e-3),
            stop_rel: *cfg.tol.get_or_insert(5e-2),
            c2d_max_iters: *cfg.c2d_max_iters.get_or_insert(20),
            max_iter: *cfg.max_iter.get_or_insert(1000),
        };
        if cfg.schedule == Some(crate::config::ScheduleKind::Constant) {
            bail!("allen-cahn uses the residual schedule");
        }
        if !(s.alpha > 0.0) || s.d < 2 || s.n < 2 {
            bail!("bad Allen-Cahn settings: alpha={}, d={}, n={}", s.alpha, s.d, s.n);
        }
        Ok(s)
    }

    pub fn params(&self) -> AAParams {
        let mut p = AAParams::new(self.window, self.theta, StopTolerance::RelativeToInitial(self.stop_rel), self.eps_h0);
        p.c2d_iter_max = self.c2d_max_iters;
        p.max_iter = self.max_iter;
        p
    }

    pub fn initial(&self) -> Result<TuckerTensor> {
        Ok(AllenCahnMap::sine_initial(&AllenCahnMap::grid(self.n, self.d, LENGTH)?)?)
    }

    /// Runs all steps from the sine initial state.
    pub fn solve(&self) -> Result<Vec<Step>> {
        let ops = AllenCahnMap::grid(self.n, self.d, LENGTH)?;
        let params = self.params();
        let mut u = AllenCahnMap::sine_initial(&ops)?;
        let mut out = Vec::with_capacity(self.steps);
        for step in 1..=self.steps {
            let map = AllenCahnMap::new(ops.clone(), self.nu, self.dt, self.alpha, self.precond, u.clone())?;
            let aa = tucker_aa(&map, &u, &params)?;
            let calls = aa.history.len() as f64;
            out.push(Step {
                step,
                aa_iterations: aa.history.len() - 1,
                converged: aa.converged,
                rho0: aa.rho0,
                final_rho: aa.final_residual(),
                mean_c2d_iters: aa.history.iter().map(|r| r.c2d_iters as f64).sum::<f64>() / calls,
                mean_precond_iters: aa.history.iter().map(|r| r.precond_iters as f64).sum::<f64>() / calls,
                state: aa.solution.clone(),
            });
            u = aa.solution;
        }
        Ok(out)
    }
}

/// Index of the grid point closest to `x` on the cell-centred grid.
fn nearest(n: usize, x: f64) -> usize {
    let h = LENGTH / n as f64;
    ((x / h - 0.5).round().max(0.0) as usize).min(n - 1)
}

fn slice(table: &mut Table, t: f64, u: &TuckerTensor, n: usize) -> Result<()> {
    let h = LENGTH / n as f64;
    let all: Vec<usize> = (0..n).collect();
    let mut sets: Vec<Vec<usize>> = vec![all.clone(), all];
    let k = nearest(n, PI / 2.0);
    sets.extend((2..u.order()).map(|_| vec![k]));
    let refs: Vec<&[usize]> = sets.iter().map(|s| s.as_slice()).collect();
    let block = u.sample_block(&refs)?;
    for i2 in 0..n {
        for i1 in 0..n {
            table.push(vec![
                num(t),
                i1.to_string(),
                i2.to_string(),
                num((i1 as f64 + 0.5) * h),
                num((i2 as f64 + 0.5) * h),
                num(block.data()[i1 + n * i2]),
            ]);
        }
    }
    Ok(())
}

pub fn run(cfg: &mut ExperimentConfig) -> Result<Vec<Table>> {
    let s = AllenCahnSettings::from_config(cfg)?;
    let steps = s.solve()?;
    let mut table = header(
        &["step", "time", "aa_iterations", "converged", "avg_rank"],
        s.d,
        &["mean_c2d_iters", "mean_precond_iters", "rho0", "final_rho_rel"],
    );
    for st in &steps {
        let ranks = st.state.ranks();
        let mut row = vec![
            st.step.to_string(),
            num(st.step as f64 * s.dt),
            st.aa_iterations.to_string(),
            st.converged.to_string(),
            num(mean_rank(&ranks)),
        ];
        row.extend(ranks.iter().map(|r| r.to_string()));
        row.extend([num(st.mean_c2d_iters), num(st.mean_precond_iters), num(st.rho0), num(st.final_rho / st.rho0)]);
        table.push(row);
    }

    let mut slices = Table::new(&["time", "i1", "i2", "x1", "x2", "value"]).with_suffix("slices");
    slice(&mut slices, 0.0, &s.initial()?, s.n)?;
    if let Some(last) = steps.last() {
        let mid = &steps[(steps.len() - 1) / 2];
        if mid.step != last.step {
            slice(&mut slices, mid.step as f64 * s.dt, &mid.state, s.n)?;
        }
        slice(&mut slices, last.step as f64 * s.dt, &last.state, s.n)?;
    }
    Ok(vec![table, slices])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_cell_centre() {
        // centres at (i + 1/2) 2π/8; π/2 lies between i = 1 and i = 2.
        assert!(nearest(8, PI / 2.0) == 1 || nearest(8, PI / 2.0) == 2);
        assert_eq!(nearest(63, 0.0), 0);
        assert_eq!(nearest(63, LENGTH), 62);
    }
}
