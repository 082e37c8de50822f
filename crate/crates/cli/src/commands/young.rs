use clap::Args;
use serde::{Deserialize, Serialize};

use pqvar::pathcore::TestFunction;
use pqvar::young::{young_integral_1d, IntegralResult, YoungOptions};
use pqvar::young2d::{check_series_condition, young_integral_2d_both, Field2, JumpSets, Young2dOptions};

use crate::common::{load_config, print_table, sci, set, Common, Output};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct Young1dArgs {
    #[command(flatten)]
    pub common: Common,
    /// Integrand, a one-parameter test function name.
    #[arg(long)]
    pub f: Option<String>,
    /// Integrator, a one-parameter test function name.
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Young1dConfig {
    pub f: String,
    pub g: String,
    pub a: f64,
    pub b: f64,
    pub options: YoungOptions,
}

impl Default for Young1dConfig {
    fn default() -> Self {
        Self {
            f: "polynomial(0,1)".into(),
            g: "polynomial(0,0,1)".into(),
            a: 0.0,
            b: 1.0,
            options: YoungOptions {
                levels: (4..=12).collect(),
                tol: 1e-3,
                ..Default::default()
            },
        }
    }
}

fn one_parameter(name: &str) -> CliResult<TestFunction> {
    let f: TestFunction = name.parse()?;
    if f.is_two_parameter() {
        return Err(CliError::input(format!("`{name}` is a two-parameter function")));
    }
    Ok(f)
}

fn exponents(p: Option<f64>, q: Option<f64>, current: Option<(f64, f64)>) -> CliResult<Option<(f64, f64)>> {
    match (p, q) {
        (None, None) => Ok(current),
        (Some(p), Some(q)) => Ok(Some((p, q))),
        _ => Err(CliError::input("--p and --q go together")),
    }
}

fn result_rows(label: &str, r: &IntegralResult) -> Vec<String> {
    vec![
        label.to_string(),
        sci(r.value),
        sci(r.gap),
        if r.converged() { "converged" } else { "not-converged" }.to_string(),
    ]
}

pub fn run_1d(args: Young1dArgs) -> CliResult<()> {
    let mut cfg: Young1dConfig = load_config(args.common.config.as_deref())?;
    set(&mut cfg.f, args.f);
    set(&mut cfg.g, args.g);
    set(&mut cfg.options.tol, args.common.tol);
    cfg.options.exponents = exponents(args.p, args.q, cfg.options.exponents)?;
    cfg.options.force |= args.common.force;
    let (f, g) = (one_parameter(&cfg.f)?, one_parameter(&cfg.g)?);
    let out = Output::create(&args.common.out, "young1d", &cfg)?;

    let mut opts = cfg.options.clone();
    for p in f.singular_points().into_iter().chain(g.singular_points()) {
        if p > cfg.a && p < cfg.b {
            opts.extra_points.push(p);
        }
    }
    let r = young_integral_1d(
        |x| f.eval1(x).unwrap_or(f64::NAN),
        |x| g.eval1(x).unwrap_or(f64::NAN),
        cfg.a,
        cfg.b,
        &opts,
    )?;
    out.json("young1d.json", &r)?;
    print_table(&["integral", "value", "gap", "verdict"], &[result_rows(&format!("{} d {}", cfg.f, cfg.g), &r)]);
    for n in &r.notes {
        println!("note: {n}");
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct Young2dArgs {
    #[command(flatten)]
    pub common: Common,
    /// Integrand: `xy` or a two-parameter test function name.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Young2dConfig {
    pub f: String,
    pub g: String,
    pub options: Young2dOptions,
    pub jumps: JumpSets,
    /// Asserted `(p, q)` of the integrator, checked against the series condition.
    pub exponents: Option<(f64, f64)>,
    pub delta: f64,
    pub force: bool,
}

impl Default for Young2dConfig {
    fn default() -> Self {
        Self {
            f: "xy".into(),
            g: "xy".into(),
            options: Young2dOptions::default(),
            jumps: JumpSets::default(),
            exponents: None,
            delta: 0.0,
            force: false,
        }
    }
}

type Surface = Box<dyn Fn(f64, f64) -> f64 + Sync>;

fn surface(name: &str) -> CliResult<Surface> {
    if name == "xy" {
        return Ok(Box::new(|x, y| x * y));
    }
    let f: TestFunction = name.parse()?;
    if !f.is_two_parameter() {
        return Err(CliError::input(format!("`{name}` is a one-parameter function")));
    }
    Ok(Box::new(move |x, y| f.eval2(x, y).unwrap_or(f64::NAN)))
}

#[derive(Serialize)]
struct Young2dOutput {
    forward: IntegralResult,
    backward: IntegralResult,
    corner_gap: f64,
    notes: Vec<String>,
}

pub fn run_2d(args: Young2dArgs) -> CliResult<()> {
    let mut cfg: Young2dConfig = load_config(args.common.config.as_deref())?;
    set(&mut cfg.f, args.f);
    set(&mut cfg.g, args.g);
    set(&mut cfg.options.tol, args.common.tol);
    set(&mut cfg.delta, args.delta);
    cfg.exponents = exponents(args.p, args.q, cfg.exponents)?;
    cfg.force |= args.common.force;
    let (f, g) = (surface(&cfg.f)?, surface(&cfg.g)?);
    let out = Output::create(&args.common.out, "young2d", &cfg)?;

    let mut notes = Vec::new();
    if let Some((p, q)) = cfg.exponents {
        let c = check_series_condition(p, q, cfg.delta, 10_000)?;
        if !c.feasible {
            let msg = format!("(p, q) = ({p}, {q}) does not satisfy 2q + 1 > 2pq");
            if !cfg.force {
                return Err(CliError::Refused(msg));
            }
            notes.push(format!("forced: {msg}"));
        }
    }
    let (forward, backward) = young_integral_2d_both(Field2::Func(&*f), Field2::Func(&*g), &cfg.jumps, &cfg.options)?;
    let result = Young2dOutput {
        corner_gap: (forward.value - backward.value).abs(),
        forward,
        backward,
        notes,
    };
    out.json("young2d.json", &result)?;
    print_table(
        &["corner", "value", "gap", "verdict"],
        &[result_rows("forward", &result.forward), result_rows("backward", &result.backward)],
    );
    println!("forward/backward gap: {}", sci(result.corner_gap));
    for n in &result.notes {
        println!("note: {n}");
    }
    Ok(())
}
