use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pqvar::stochastic::{simulate, Simulation};

use crate::common::{load_config, print_table, sci, set, Common, Output, SimArgs, SimulationConfig};
use crate::error::CliResult;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub simulation: SimulationConfig,
    pub seed: u64,
    pub seeds: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            simulation: SimulationConfig::default(),
            seed: 0,
            seeds: 1,
        }
    }
}

#[derive(Serialize)]
struct Summary {
    replicate: u64,
    x_end: f64,
    min: f64,
    max: f64,
    max_increment: f64,
    quadratic_variation: f64,
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let mut cfg: SimulateConfig = load_config(args.common.config.as_deref())?;
    cfg.simulation.apply(&args.sim);
    set(&mut cfg.seed, args.common.seed);
    set(&mut cfg.seeds, args.common.seeds);
    let out = Output::create(&args.common.out, "simulate", &cfg)?;

    let sims = (0..cfg.seeds)
        .into_par_iter()
        .map(|r| simulate(&cfg.simulation.spec(cfg.seed, r)))
        .collect::<pqvar::Result<Vec<Simulation>>>()?;
    let mut summary = Vec::with_capacity(sims.len());
    for (r, sim) in sims.iter().enumerate() {
        out.json(&format!("simulation_{r}.json"), sim)?;
        out.path_csv(&format!("path_{r}.csv"), &sim.x_path()?)?;
        let (min, max) = sim.range();
        summary.push(Summary {
            replicate: r as u64,
            x_end: *sim.x.last().unwrap(),
            min,
            max,
            max_increment: sim.max_abs_increment(),
            quadratic_variation: *sim.qv.last().unwrap(),
        });
    }
    out.json("summary.json", &summary)?;
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.replicate.to_string(),
                sci(s.x_end),
                sci(s.min),
                sci(s.max),
                sci(s.max_increment),
                sci(s.quadratic_variation),
            ]
        })
        .collect();
    print_table(&["replicate", "X_T", "min", "max", "max|dX|", "<M>_T"], &rows);
    Ok(())
}
