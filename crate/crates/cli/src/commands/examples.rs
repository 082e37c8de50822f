use clap::Args;

use crate::commands::ito::{self, ItoCheckConfig, Mode};
use crate::commands::young::{self, Young2dArgs};
use crate::common::{set, Common};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug)]
pub struct ExamplesArgs {
    #[command(flatten)]
    pub common: Common,
    /// One of `tanaka`, `x3cos`, `x3t3cos`, `product`.
    #[arg(long)]
    pub name: String,
}

/// Built-in worked examples with their standard settings.
pub fn run(args: ExamplesArgs) -> CliResult<()> {
    let c = &args.common;
    if c.config.is_some() {
        return Err(CliError::input("examples take no config file"));
    }
    let ito_example = |function: &str, mode: Mode| {
        let mut cfg = ItoCheckConfig {
            function: function.into(),
            mode,
            ..Default::default()
        };
        set(&mut cfg.seed, c.seed);
        set(&mut cfg.seeds, c.seeds);
        cfg.options.force = c.force;
        ito::execute(cfg, &c.out)
    };
    match args.name.as_str() {
        "tanaka" => ito_example("ramp(0.1)", Mode::TimeIndependent),
        "x3cos" => ito_example("x3cos", Mode::TimeIndependent),
        "x3t3cos" => ito_example("x3t3cos", Mode::TimeDependent),
        "product" => young::run_2d(Young2dArgs {
            common: c.clone(),
            f: Some("xy".into()),
            g: Some("xy".into()),
            p: None,
            q: None,
            delta: None,
        }),
        other => Err(CliError::input(format!(
            "unknown example `{other}`; expected tanaka, x3cos, x3t3cos or product"
        ))),
    }
}
