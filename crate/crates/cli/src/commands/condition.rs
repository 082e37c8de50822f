use clap::Args;
use serde::{Deserialize, Serialize};

use pqvar::young2d::check_series_condition;

use crate::common::{load_config, set, Common, Output};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct ConditionArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of partial sums reported.
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionConfig {
    pub p: f64,
    pub q: f64,
    pub delta: f64,
    pub n_max: usize,
    pub force: bool,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        Self {
            p: 1.4,
            q: 1.0,
            delta: 0.0,
            n_max: 10_000,
            force: false,
        }
    }
}

pub fn run(args: ConditionArgs) -> CliResult<()> {
    let mut cfg: ConditionConfig = load_config(args.common.config.as_deref())?;
    set(&mut cfg.p, args.p);
    set(&mut cfg.q, args.q);
    set(&mut cfg.delta, args.delta);
    set(&mut cfg.n_max, args.n_max);
    cfg.force |= args.common.force;
    let out = Output::create(&args.common.out, "condition-check", &cfg)?;

    let c = check_series_condition(cfg.p, cfg.q, cfg.delta, cfg.n_max)?;
    out.json("condition.json", &c)?;
    let (lo, hi) = c.alpha_interval;
    println!("p = {}, q = {}, delta = {} (used {})", c.p, c.q, c.delta_requested, c.delta);
    println!("alpha interval: ({lo}, {hi})");
    match c.alpha {
        Some(a) => println!("alpha: {a}"),
        None => println!("alpha: none"),
    }
    if let Some(&(n, s)) = c.partial_sums.last() {
        println!("partial sum at {n}: {s}");
    }
    if c.feasible {
        println!("feasible");
        Ok(())
    } else {
        println!("infeasible");
        if cfg.force {
            Ok(())
        } else {
            Err(CliError::Refused(format!(
                "(p, q) = ({}, {}) does not satisfy 2q + 1 > 2pq",
                cfg.p, cfg.q
            )))
        }
    }
}
