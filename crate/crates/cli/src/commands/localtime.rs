use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pqvar::numeric::uniform_grid;
use pqvar::stochastic::{
    local_time_decomposed, local_time_occupation, pvar_exponent_probe, simulate, tanaka_identity_residual,
    LocalTimeField, ProbeReport, DEFAULT_JUMP_THRESHOLD,
};

use crate::common::{load_config, print_table, sci, set, Common, Output, SimArgs, SimulationConfig};
use crate::error::CliResult;

#[derive(Args, Debug)]
pub struct LocaltimeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Number of levels across the padded path range.
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub time_stride: Option<usize>,
    /// Also run the occupation estimator with this bandwidth.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Run the p-variation probe of `L(T, .)` for these exponents.
    #[arg(long, value_delimiter = ',')]
    pub probe: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocaltimeConfig {
    pub simulation: SimulationConfig,
    pub seed: u64,
    pub seeds: u64,
    pub levels: usize,
    /// Fraction of the path range added on both sides of the level grid.
    pub padding: f64,
    pub time_stride: usize,
    pub bandwidth: Option<f64>,
    pub jump_threshold: f64,
    pub probe: Vec<f64>,
    pub probe_levels: Vec<u32>,
}

impl Default for LocaltimeConfig {
    fn default() -> Self {
        Self {
            simulation: SimulationConfig::default(),
            seed: 0,
            seeds: 1,
            levels: 257,
            padding: 0.05,
            time_stride: 64,
            bandwidth: None,
            jump_threshold: DEFAULT_JUMP_THRESHOLD,
            probe: Vec::new(),
            probe_levels: (6..=10).collect(),
        }
    }
}

#[derive(Serialize)]
struct Replicate {
    replicate: u64,
    tanaka: LocalTimeField,
    tanaka_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    occupation: Option<LocalTimeField>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<ProbeReport>,
}

fn one(cfg: &LocaltimeConfig, r: u64) -> pqvar::Result<Replicate> {
    let sim = simulate(&cfg.simulation.spec(cfg.seed, r))?;
    let (lo, hi) = sim.range();
    let pad = cfg.padding * (hi - lo).max(1e-12);
    let levels = uniform_grid(lo - pad, hi + pad, cfg.levels.max(2) - 1);
    let tanaka = local_time_decomposed(&sim, &levels, cfg.time_stride, cfg.jump_threshold)?;
    let tanaka_residual = tanaka_identity_residual(&sim, &tanaka)?;
    let occupation = match cfg.bandwidth {
        Some(eps) => Some(local_time_occupation(&sim, &levels, eps, cfg.time_stride)?),
        None => None,
    };
    let probe = if cfg.probe.is_empty() {
        None
    } else {
        Some(pvar_exponent_probe(&sim, &cfg.probe, &cfg.probe_levels)?)
    };
    Ok(Replicate {
        replicate: r,
        tanaka,
        tanaka_residual,
        occupation,
        probe,
    })
}

pub fn run(args: LocaltimeArgs) -> CliResult<()> {
    let mut cfg: LocaltimeConfig = load_config(args.common.config.as_deref())?;
    cfg.simulation.apply(&args.sim);
    set(&mut cfg.seed, args.common.seed);
    set(&mut cfg.seeds, args.common.seeds);
    set(&mut cfg.levels, args.levels);
    set(&mut cfg.time_stride, args.time_stride);
    if args.bandwidth.is_some() {
        cfg.bandwidth = args.bandwidth;
    }
    set(&mut cfg.probe, args.probe);
    let out = Output::create(&args.common.out, "localtime", &cfg)?;

    let reps = (0..cfg.seeds)
        .into_par_iter()
        .map(|r| one(&cfg, r))
        .collect::<pqvar::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for rep in &reps {
        let r = rep.replicate;
        out.json(&format!("localtime_{r}.json"), rep)?;
        out.field_csv(&format!("localtime_{r}_L.csv"), &rep.tanaka.l)?;
        let slice = rep.tanaka.terminal_slice();
        out.path_csv(&format!("localtime_{r}_LT.csv"), &slice)?;
        let peak = slice.values().iter().fold(0.0f64, |m, v| m.max(*v));
        let mut row = vec![r.to_string(), sci(peak), sci(rep.tanaka_residual)];
        if let Some(occ) = &rep.occupation {
            let o = occ.terminal_slice();
            let mad = slice.values().iter().zip(o.values()).map(|(a, b)| (a - b).abs()).sum::<f64>()
                / slice.len() as f64;
            row.push(sci(mad));
        } else {
            row.push("-".into());
        }
        if let Some(p) = &rep.probe {
            let v: Vec<String> = p
                .rows
                .iter()
                .map(|row| format!("p={}:{}", row.p, serde_json::to_value(row.verdict).unwrap_or_default().as_str().unwrap_or("")))
                .collect();
            row.push(v.join(" "));
        } else {
            row.push("-".into());
        }
        rows.push(row);
    }
    print_table(&["replicate", "max L_T", "tanaka residual", "occupation MAD", "probe"], &rows);
    Ok(())
}
