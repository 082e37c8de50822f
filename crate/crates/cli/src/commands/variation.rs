use std::fs;

use clap::Args;
use serde::{Deserialize, Serialize};

use pqvar::numeric::uniform_grid;
use pqvar::pathcore::io::{read_field_csv, read_path_csv};
use pqvar::pathcore::{SampledField, SampledPath, TestFunction};
use pqvar::variation::{dyadic_bound_from_values, p_variation_exact, pq_variation_grid, DyadicBound, VariationBudget, VariationReport};

use crate::common::{load_config, print_table, sci, set, Common, Output};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct VariationArgs {
    #[command(flatten)]
    pub common: Common,
    /// Test function to sample, e.g. `x3cos` or `xysin`.
    #[arg(long)]
    pub name: Option<String>,
    /// Path or field CSV to read instead of a test function.
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Also report the dyadic control bound with this exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Sample points per axis for test functions.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    pub name: Option<String>,
    pub input: Option<String>,
    /// Sampling interval `[a, b]`, used on both axes for fields.
    pub a: f64,
    pub b: f64,
    pub points: usize,
    pub p: f64,
    pub q: f64,
    pub gamma: Option<f64>,
    pub budget: VariationBudget,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            name: None,
            input: None,
            a: -1.0,
            b: 1.0,
            points: 257,
            p: 2.0,
            q: 1.0,
            gamma: None,
            budget: VariationBudget::default(),
        }
    }
}

enum Source {
    Path(SampledPath),
    Field(SampledField),
}

#[derive(Serialize)]
struct VariationOutput {
    points: Vec<usize>,
    report: VariationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    dyadic: Option<DyadicBound>,
}

fn source(cfg: &VariationConfig) -> CliResult<Source> {
    match (&cfg.name, &cfg.input) {
        (Some(name), None) => {
            let f: TestFunction = name.parse()?;
            if cfg.points < 2 {
                return Err(CliError::input("points must be >= 2"));
            }
            let xs = uniform_grid(cfg.a, cfg.b, cfg.points - 1);
            Ok(if f.is_two_parameter() {
                Source::Field(f.sample_field(xs.clone(), xs)?)
            } else {
                Source::Path(f.sample_path(xs)?)
            })
        }
        (None, Some(file)) => {
            let text = fs::read_to_string(file).map_err(|e| CliError::input(format!("cannot read {file}: {e}")))?;
            if text.starts_with("x\\y") {
                Ok(Source::Field(read_field_csv(text.as_bytes())?))
            } else {
                Ok(Source::Path(read_path_csv(text.as_bytes())?))
            }
        }
        _ => Err(CliError::input("give exactly one of `name` and `input`")),
    }
}

pub fn run(args: VariationArgs) -> CliResult<()> {
    let mut cfg: VariationConfig = load_config(args.common.config.as_deref())?;
    if args.name.is_some() || args.input.is_some() {
        cfg.name = args.name;
        cfg.input = args.input;
    }
    set(&mut cfg.p, args.p);
    set(&mut cfg.q, args.q);
    set(&mut cfg.points, args.points);
    if args.gamma.is_some() {
        cfg.gamma = args.gamma;
    }
    set(&mut cfg.budget.seed, args.common.seed);
    let src = source(&cfg)?;
    let out = Output::create(&args.common.out, "variation", &cfg)?;

    let result = match &src {
        Source::Path(path) => {
            let dyadic = match cfg.gamma {
                Some(g) => Some(dyadic_bound_from_values(path.values(), cfg.p, g, None)?),
                None => None,
            };
            VariationOutput {
                points: vec![path.len()],
                report: p_variation_exact(path, cfg.p)?,
                dyadic,
            }
        }
        Source::Field(field) => {
            let (nx, ny) = field.shape();
            VariationOutput {
                points: vec![nx, ny],
                report: pq_variation_grid(field, cfg.p, cfg.q, &cfg.budget)?,
                dyadic: None,
            }
        }
    };
    out.json("variation.json", &result)?;
    let mut rows = vec![vec![
        "variation".to_string(),
        result.report.exponents.to_string(),
        sci(result.report.value),
        serde_json::to_value(result.report.exactness)?.as_str().unwrap_or("").to_string(),
    ]];
    if let Some(d) = &result.dyadic {
        rows.push(vec![
            "dyadic bound".to_string(),
            format!("p={} gamma={}", d.p, d.gamma),
            sci(d.value),
            "upper-bound".to_string(),
        ]);
    }
    print_table(&["quantity", "exponents", "value", "exactness"], &rows);
    Ok(())
}
