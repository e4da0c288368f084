//! Tucker-format Anderson acceleration on the Bratu problem
//! `Δu + λ e^u = 0` in the unit cube.

use anyhow::{bail, Result};
use tucker_cross::pde::BratuMap;
use tucker_cross::{tucker_aa, AAOutput, AAParams, Schedule, StopTolerance};

use super::{header, mean_rank};
use crate::config::{ExperimentConfig, ScheduleKind};
use crate::output::{num, Table};

#[derive(Clone, Debug, PartialEq)]
pub struct BratuSettings {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub precond: bool,
    pub window: usize,
    pub schedule: ScheduleKind,
    pub theta: f64,
    pub eps_h0: f64,
    pub stop_rel: f64,
    pub c2d_max_iters: usize,
    pub max_iter: usize,
}

impl BratuSettings {
    /// Reads the config, filling unset fields. The preconditioned defaults
    /// are `α = 0.1` with a fixed `ε_H = 10⁻⁹`; without preconditioning
    /// `α = 0.1 h²` and `ε_H = θ ρ_k` starting from `10⁻³`.
    pub fn from_config(cfg: &mut ExperimentConfig) -> Result<Self> {
        let n = *cfg.n.get_or_insert(64);
        let d = *cfg.d.get_or_insert(3);
        let precond = *cfg.precond.get_or_insert(true);
        let h = 1.0 / (n + 1) as f64;
        let s = Self {
            n,
            d,
            lambda: *cfg.lambda.get_or_insert(1.0),
            alpha: *cfg.alpha.get_or_insert(if precond { 0.1 } else { 0.1 * h * h }),
            precond,
            window: *cfg.window.get_or_insert(4),
            schedule: *cfg.schedule.get_or_insert(if precond { ScheduleKind::Constant } else { ScheduleKind::Residual }),
            theta: *cfg.theta.get_or_insert(0.9),
            eps_h0: *cfg.eps_h0.get_or_insert(if precond { 1e-9 } else { 1e-3 }),
            stop_rel: *cfg.tol.get_or_insert(1e-7),
            c2d_max_iters: *cfg.c2d_max_iters.get_or_insert(20),
            max_iter: *cfg.max_iter.get_or_insert(1000),
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            bail!("alpha must be positive, got {}", self.alpha);
        }
        if self.d < 2 {
            bail!("Bratu runs need d >= 2, got {}", self.d);
        }
        Ok(())
    }

    pub fn params(&self) -> AAParams {
        let mut p = AAParams::new(self.window, self.theta, StopTolerance::RelativeToInitial(self.stop_rel), self.eps_h0);
        if self.schedule == ScheduleKind::Constant {
            p.schedule = Schedule::Constant;
        }
        p.c2d_iter_max = self.c2d_max_iters;
        p.max_iter = self.max_iter;
        p
    }

    pub fn solve(&self) -> Result<(BratuMap, AAOutput)> {
        self.check()?;
        let map = BratuMap::new(self.n, self.d, self.lambda, self.alpha, self.precond)?;
        let out = tucker_aa(&map, &map.initial_guess()?, &self.params())?;
        Ok((map, out))
    }
}

/// Iteration history in the layout shared with the Allen-Cahn runner.
pub fn history_table(out: &AAOutput, d: usize) -> Table {
    let mut t = header(&["k", "rho", "rho_rel"], d, &["avg_rank", "c2d_iters", "precond_iters", "eps_h"]);
    for r in &out.history {
        let mut row = vec![r.k.to_string(), num(r.rho), num(r.rho_rel)];
        row.extend(r.ranks.iter().map(|x| x.to_string()));
        row.extend([num(mean_rank(&r.ranks)), r.c2d_iters.to_string(), r.precond_iters.to_string(), num(r.eps_h)]);
        t.push(row);
    }
    t
}

pub fn run(cfg: &mut ExperimentConfig) -> Result<Vec<Table>> {
    let s = BratuSettings::from_config(cfg)?;
    let (_, out) = s.solve()?;
    let mut summary = header(&["iterations", "converged", "rho0", "final_rho_rel", "max_avg_rank"], s.d, &[]).with_suffix("summary");
    let mut row = vec![
        (out.history.len() - 1).to_string(),
        out.converged.to_string(),
        num(out.rho0),
        num(out.final_residual() / out.rho0),
        num(out.max_average_rank()),
    ];
    row.extend(out.solution.ranks().iter().map(|r| r.to_string()));
    summary.push(row);
    Ok(vec![history_table(&out, s.d), summary])
}
