//! Runners for the numerical studies. Each fills in its defaults on the
//! config it is handed and returns the tables to write.

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentId};
use crate::output::Table;

pub mod allen_cahn;
pub mod approx_fn;
pub mod bratu;
pub mod helmholtz;
pub mod poisson_bench;

pub fn run(cfg: &mut ExperimentConfig) -> Result<Vec<Table>> {
    match cfg.id()? {
        ExperimentId::ApproxFn => approx_fn::run(cfg),
        ExperimentId::Helmholtz => helmholtz::run(cfg),
        ExperimentId::PoissonBench => poisson_bench::run(cfg),
        ExperimentId::Bratu => bratu::run(cfg),
        ExperimentId::AllenCahn => allen_cahn::run(cfg),
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn rank_header(d: usize) -> Vec<String> {
    (1..=d).map(|m| format!("rank{m}")).collect()
}

pub(crate) fn mean_rank(r: &[usize]) -> f64 {
    r.iter().sum::<usize>() as f64 / r.len().max(1) as f64
}

/// Header from fixed leading columns, `rank1..rankd`, and trailing columns.
pub(crate) fn header(lead: &[&str], d: usize, tail: &[&str]) -> Table {
    let mut h: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    h.extend(rank_header(d));
    h.extend(tail.iter().map(|s| s.to_string()));
    Table { suffix: None, header: h, rows: Vec::new() }
}
