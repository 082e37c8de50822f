use std::path::Path;
use std::sync::Arc;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pqvar::itocheck::{
    func1, func2, median_refinement, mollified_route_check, mollified_route_check_time_dependent, run_ensemble,
    verify_ito_time_dependent, verify_ito_time_independent, Ensemble, ItoOptions, MollifiedTable, DEFAULT_X0,
};
use pqvar::numeric::median;
use pqvar::pathcore::{MollifierSpec, TestFunction};

use crate::common::{load_config, print_table, sci, set, Common, Output, SimulationConfig};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct ItoArgs {
    #[command(flatten)]
    pub common: Common,
    /// Test function, e.g. `x3cos`, `ramp(0.1)`, `x3t3cos`, `t`.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Step counts, ascending, each dividing the last.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mollification orders for the smoothing-route comparison.
    #[arg(long, value_delimiter = ',')]
    pub mollify: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Auto,
    TimeIndependent,
    TimeDependent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItoCheckConfig {
    pub function: String,
    pub mode: Mode,
    /// `n_steps` is always the last schedule entry.
    pub simulation: SimulationConfig,
    pub seed: u64,
    pub seeds: u64,
    pub options: ItoOptions,
    /// Use the closed-form left derivative; otherwise a left difference quotient.
    pub closed_form_gradient: bool,
    pub mollify: Vec<f64>,
    pub mollify_steps: usize,
    pub mollifier_nodes: usize,
}

impl Default for ItoCheckConfig {
    fn default() -> Self {
        let options = ItoOptions::default();
        Self {
            function: "x3cos".into(),
            mode: Mode::Auto,
            simulation: SimulationConfig {
                x0: DEFAULT_X0,
                n_steps: *options.schedule.last().unwrap(),
                ..Default::default()
            },
            seed: 0,
            seeds: 10,
            options,
            closed_form_gradient: true,
            mollify: Vec::new(),
            mollify_steps: 1 << 11,
            mollifier_nodes: 128,
        }
    }
}

impl ItoCheckConfig {
    pub fn apply(&mut self, a: &ItoArgs) {
        set(&mut self.function, a.name.clone());
        set(&mut self.mode, a.mode);
        set(&mut self.options.schedule, a.schedule.clone());
        set(&mut self.simulation.x0, a.x0);
        set(&mut self.simulation.t_end, a.t_end);
        set(&mut self.options.pq.0, a.p);
        set(&mut self.options.pq.1, a.q);
        set(&mut self.options.delta, a.delta);
        set(&mut self.options.gamma, a.gamma);
        set(&mut self.mollify, a.mollify.clone());
    }
}

enum Target {
    OneD(TestFunction),
    /// `f(t, x) = t`.
    Time,
    TwoD(TestFunction),
    /// A one-parameter function seen as `f(t, x) = f(x)`.
    Lifted(TestFunction),
}

fn target(cfg: &ItoCheckConfig) -> CliResult<Target> {
    if cfg.function == "t" {
        return match cfg.mode {
            Mode::TimeIndependent => Err(CliError::input("`t` needs the time-dependent mode")),
            _ => Ok(Target::Time),
        };
    }
    let f: TestFunction = cfg.function.parse()?;
    match (f.is_two_parameter(), cfg.mode) {
        (true, Mode::TimeIndependent) => Err(CliError::input(format!("`{}` depends on time", cfg.function))),
        (true, _) if f == TestFunction::XySin => Err(CliError::input("`xysin` is not a time-space function")),
        (true, _) => Ok(Target::TwoD(f)),
        (false, Mode::TimeDependent) => Ok(Target::Lifted(f)),
        (false, _) => Ok(Target::OneD(f)),
    }
}

#[derive(Serialize)]
struct Summary {
    function: String,
    time_dependent: bool,
    median_refinement: Vec<(usize, f64)>,
    residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    median_value_gaps: Vec<(f64, f64)>,
}

pub fn run(args: ItoArgs) -> CliResult<()> {
    let mut cfg: ItoCheckConfig = load_config(args.common.config.as_deref())?;
    cfg.apply(&args);
    set(&mut cfg.seed, args.common.seed);
    set(&mut cfg.seeds, args.common.seeds);
    cfg.options.force |= args.common.force;
    execute(cfg, &args.common.out)
}

pub fn execute(mut cfg: ItoCheckConfig, dir: &Path) -> CliResult<()> {
    let finest = *cfg
        .options
        .schedule
        .last()
        .ok_or_else(|| CliError::input("empty schedule"))?;
    cfg.simulation.n_steps = finest;
    let target = target(&cfg)?;
    if let Target::OneD(f) | Target::Lifted(f) | Target::TwoD(f) = &target {
        let sp = &mut cfg.options.singular_points;
        sp.extend(f.singular_points());
        sp.sort_by(f64::total_cmp);
        sp.dedup();
    }
    let out = Output::create(dir, "ito-check", &cfg)?;

    let spec = cfg.simulation.spec(cfg.seed, 0);
    let opts = &cfg.options;
    let closed = cfg.closed_form_gradient;
    let ensemble: Ensemble = match &target {
        Target::OneD(tf) => {
            let f = |x: f64| tf.eval1(x).unwrap_or(f64::NAN);
            let g = |x: f64| tf.grad_minus1(x).unwrap_or(f64::NAN);
            let grad: Option<&(dyn Fn(f64) -> f64 + Sync)> = if closed { Some(&g) } else { None };
            run_ensemble(&spec, cfg.seeds, |s| verify_ito_time_independent(&f, grad, s, opts))?
        }
        _ => {
            let (f, dt, dx) = time_space(&target);
            let f: &(dyn Fn(f64, f64) -> f64 + Sync) = &*f;
            let (dt, dx): (Option<&(dyn Fn(f64, f64) -> f64 + Sync)>, Option<&(dyn Fn(f64, f64) -> f64 + Sync)>) =
                if closed { (Some(&*dt), Some(&*dx)) } else { (None, None) };
            run_ensemble(&spec, cfg.seeds, |s| verify_ito_time_dependent(f, dt, dx, s, opts))?
        }
    };
    for rep in &ensemble.reports {
        out.json(&format!("reports/ito_{}.json", rep.replicate), rep)?;
    }

    let tables = mollified_tables(&cfg, &target)?;
    for (r, t) in tables.iter().enumerate() {
        out.json(&format!("mollified/mollified_{r}.json"), t)?;
    }
    let median_value_gaps: Vec<(f64, f64)> = cfg
        .mollify
        .iter()
        .enumerate()
        .map(|(k, &n)| (n, median(&tables.iter().map(|t| t.rows[k].value_gap).collect::<Vec<_>>())))
        .collect();

    let summary = Summary {
        function: cfg.function.clone(),
        time_dependent: !matches!(target, Target::OneD(_)),
        median_refinement: median_refinement(&ensemble.reports),
        residuals: ensemble.reports.iter().map(|r| r.residual).collect(),
        median_value_gaps,
    };
    out.json("summary.json", &summary)?;
    print_summary(&ensemble, &summary);
    Ok(())
}

type Surface = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

fn time_space(target: &Target) -> (Surface, Surface, Surface) {
    match *target {
        Target::Time => (Box::new(|t, _| t), Box::new(|_, _| 1.0), Box::new(|_, _| 0.0)),
        Target::TwoD(ref tf) => {
            let (a, b, c) = (tf.clone(), tf.clone(), tf.clone());
            (
                Box::new(move |t, x| a.eval2(t, x).unwrap_or(f64::NAN)),
                Box::new(move |t, x| b.dt_minus2(t, x).unwrap_or(f64::NAN)),
                Box::new(move |t, x| c.grad_minus2(t, x).unwrap_or(f64::NAN)),
            )
        }
        Target::Lifted(ref tf) | Target::OneD(ref tf) => {
            let (a, c) = (tf.clone(), tf.clone());
            (
                Box::new(move |_, x| a.eval1(x).unwrap_or(f64::NAN)),
                Box::new(|_, _| 0.0),
                Box::new(move |_, x| c.grad_minus1(x).unwrap_or(f64::NAN)),
            )
        }
    }
}

fn mollified_tables(cfg: &ItoCheckConfig, target: &Target) -> CliResult<Vec<MollifiedTable>> {
    if cfg.mollify.is_empty() {
        return Ok(Vec::new());
    }
    let moll = Arc::new(MollifierSpec::new(cfg.mollifier_nodes)?);
    let mut sim = cfg.simulation.clone();
    sim.n_steps = cfg.mollify_steps;
    let opts = &cfg.options;
    let tables = (0..cfg.seeds)
        .into_par_iter()
        .map(|r| {
            let spec = sim.spec(cfg.seed, r);
            match target {
                Target::OneD(tf) => {
                    let (a, g) = (tf.clone(), tf.clone());
                    let grad = move |x: f64| g.grad_minus1(x).unwrap_or(f64::NAN);
                    let f = func1(move |x| a.eval1(x).unwrap_or(f64::NAN));
                    mollified_route_check(f, Some(&grad), &spec, &cfg.mollify, moll.clone(), opts)
                }
                _ => {
                    let (f, dt, dx) = time_space(target);
                    let f = func2(move |t, x| f(t, x));
                    mollified_route_check_time_dependent(f, Some(&*dt), Some(&*dx), &spec, &cfg.mollify, moll.clone(), opts)
                }
            }
        })
        .collect::<pqvar::Result<Vec<_>>>()?;
    Ok(tables)
}

fn print_summary(ensemble: &Ensemble, summary: &Summary) {
    let rows: Vec<Vec<String>> = ensemble
        .reports
        .iter()
        .take(10)
        .map(|r| {
            let t = &r.terms;
            vec![
                r.replicate.to_string(),
                sci(t.f_end),
                sci(t.f_start),
                t.ds_term.map(sci).unwrap_or_else(|| "-".into()),
                sci(t.stochastic_integral),
                sci(t.local_time_term),
                sci(r.residual),
            ]
        })
        .collect();
    print_table(&["replicate", "f(end)", "f(start)", "ds term", "stochastic", "local time", "residual"], &rows);
    if ensemble.reports.len() > 10 {
        println!("({} more replicates in reports/)", ensemble.reports.len() - 10);
    }
    println!();
    let rows: Vec<Vec<String>> = summary
        .median_refinement
        .iter()
        .map(|(n, r)| vec![n.to_string(), sci(*r)])
        .collect();
    print_table(&["steps", "median residual"], &rows);
    if !summary.median_value_gaps.is_empty() {
        println!();
        let rows: Vec<Vec<String>> = summary
            .median_value_gaps
            .iter()
            .map(|(n, g)| vec![n.to_string(), sci(*g)])
            .collect();
        print_table(&["order", "median value gap"], &rows);
    }
}
