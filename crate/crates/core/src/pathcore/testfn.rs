use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathcore::{SampledField, SampledPath};

/// The built-in test functions. One-parameter functions are evaluated with
/// `eval1`, two-parameter ones with `eval2(first, second)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestFunction {
    /// `x^3 cos(1/x)`, zero at the origin.
    X3Cos,
    /// `x y sin(1/x + 1/y)`, zero on both axes.
    XySin,
    /// `x^3 t^3 cos(1/t + 1/x)` with arguments `(t, x)`, zero on both axes.
    X3T3Cos,
    /// `(x - a)^+`.
    Ramp(f64),
    /// `|x - a|`.
    Abs(f64),
    /// `c0 + c1 x + c2 x^2 + ...`
    Polynomial(Vec<f64>),
    /// `1{x > x0}`, left continuous.
    IndicatorStep(f64),
}

/// Output of [`make_test_function`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sampled {
    Path(SampledPath),
    Field(SampledField),
}

/// Sample grid handed to [`make_test_function`].
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    OneD(Vec<f64>),
    TwoD(Vec<f64>, Vec<f64>),
}

pub fn make_test_function(name: &str, grid: &Grid) -> Result<Sampled> {
    let f: TestFunction = name.parse()?;
    match grid {
        Grid::OneD(xs) => f.sample_path(xs.clone()).map(Sampled::Path),
        Grid::TwoD(xs, ys) => f.sample_field(xs.clone(), ys.clone()).map(Sampled::Field),
    }
}

fn parse_args(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad numeric argument `{a}`")))
        })
        .collect()
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, args) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], Some(parse_args(&s[open + 1..s.len() - 1])?)),
            Some(_) => return Err(Error::UnknownFunction(s.to_string())),
            None => (s, None),
        };
        let one = |args: Option<Vec<f64>>| -> Result<f64> {
            match args.as_deref() {
                Some([a]) => Ok(*a),
                None => Ok(0.0),
                _ => Err(Error::invalid(format!("`{head}` takes one argument"))),
            }
        };
        let f = match head {
            "x3cos" => TestFunction::X3Cos,
            "xysin" => TestFunction::XySin,
            "x3t3cos" => TestFunction::X3T3Cos,
            "ramp" => TestFunction::Ramp(one(args)?),
            "abs" => TestFunction::Abs(one(args)?),
            "indicator_step" => TestFunction::IndicatorStep(one(args)?),
            "polynomial" => {
                let c = args.unwrap_or_default();
                if c.is_empty() {
                    return Err(Error::invalid("polynomial needs at least one coefficient"));
                }
                TestFunction::Polynomial(c)
            }
            _ => return Err(Error::UnknownFunction(s.to_string())),
        };
        if let Some(v) = f.params().iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {v} of `{s}`")));
        }
        Ok(f)
    }
}

impl TryFrom<String> for TestFunction {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestFunction> for String {
    fn from(f: TestFunction) -> String {
        f.to_string()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::X3Cos => write!(f, "x3cos"),
            TestFunction::XySin => write!(f, "xysin"),
            TestFunction::X3T3Cos => write!(f, "x3t3cos"),
            TestFunction::Ramp(a) => write!(f, "ramp({a})"),
            TestFunction::Abs(a) => write!(f, "abs({a})"),
            TestFunction::IndicatorStep(a) => write!(f, "indicator_step({a})"),
            TestFunction::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "polynomial({})", parts.join(","))
            }
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

impl TestFunction {
    fn params(&self) -> Vec<f64> {
        match self {
            TestFunction::Ramp(a) | TestFunction::Abs(a) | TestFunction::IndicatorStep(a) => vec![*a],
            TestFunction::Polynomial(c) => c.clone(),
            _ => Vec::new(),
        }
    }

    pub fn is_two_parameter(&self) -> bool {
        matches!(self, TestFunction::XySin | TestFunction::X3T3Cos)
    }

    /// Points where the function or its left derivative fails to be smooth.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            TestFunction::X3Cos | TestFunction::XySin | TestFunction::X3T3Cos => vec![0.0],
            TestFunction::Ramp(a) | TestFunction::Abs(a) | TestFunction::IndicatorStep(a) => vec![*a],
            TestFunction::Polynomial(_) => Vec::new(),
        }
    }

    fn require_one(&self) -> Result<()> {
        if self.is_two_parameter() {
            Err(Error::invalid(format!("`{self}` takes two arguments")))
        } else {
            Ok(())
        }
    }

    fn require_two(&self) -> Result<()> {
        if self.is_two_parameter() {
            Ok(())
        } else {
            Err(Error::invalid(format!("`{self}` takes one argument")))
        }
    }

    /// Value of a one-parameter function. Two-parameter functions yield an error.
    pub fn eval1(&self, x: f64) -> Result<f64> {
        self.require_one()?;
        Ok(self.value1(x))
    }

    pub(crate) fn value1(&self, x: f64) -> f64 {
        match self {
            TestFunction::X3Cos => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x * x * (1.0 / x).cos()
                }
            }
            TestFunction::Ramp(a) => (x - a).max(0.0),
            TestFunction::Abs(a) => (x - a).abs(),
            TestFunction::Polynomial(c) => horner(c, x),
            TestFunction::IndicatorStep(a) => {
                if x > *a {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::XySin | TestFunction::X3T3Cos => f64::NAN,
        }
    }

    /// Left derivative `∇⁻f` of a one-parameter function.
    pub fn grad_minus1(&self, x: f64) -> Result<f64> {
        self.require_one()?;
        Ok(match self {
            TestFunction::X3Cos => {
                if x == 0.0 {
                    0.0
                } else {
                    let (s, c) = (1.0 / x).sin_cos();
                    3.0 * x * x * c + x * s
                }
            }
            TestFunction::Ramp(a) => {
                if x > *a {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Abs(a) => {
                if x > *a {
                    1.0
                } else {
                    -1.0
                }
            }
            TestFunction::Polynomial(c) => horner(&poly_derivative(c), x),
            TestFunction::IndicatorStep(_) => 0.0,
            _ => unreachable!(),
        })
    }

    /// Classical second derivative where it exists (`None` away from polynomials and x3cos).
    pub fn second_derivative1(&self, x: f64) -> Option<f64> {
        match self {
            TestFunction::X3Cos if x != 0.0 => {
                let (s, c) = (1.0 / x).sin_cos();
                Some(6.0 * x * c + 4.0 * s - c / x)
            }
            TestFunction::Polynomial(c) => Some(horner(&poly_derivative(&poly_derivative(c)), x)),
            _ => None,
        }
    }

    /// Value of a two-parameter function at `(u, v)`. For `x3t3cos` the
    /// arguments are `(t, x)`.
    pub fn eval2(&self, u: f64, v: f64) -> Result<f64> {
        self.require_two()?;
        Ok(self.value2(u, v))
    }

    pub(crate) fn value2(&self, u: f64, v: f64) -> f64 {
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        match self {
            TestFunction::XySin => u * v * (1.0 / u + 1.0 / v).sin(),
            TestFunction::X3T3Cos => {
                let c = (1.0 / u + 1.0 / v).cos();
                u * u * u * v * v * v * c
            }
            _ => f64::NAN,
        }
    }

    /// `∂f/∂t` of `x3t3cos` at `(t, x)`.
    pub fn dt_minus2(&self, t: f64, x: f64) -> Result<f64> {
        self.require_time_space()?;
        if t == 0.0 || x == 0.0 {
            return Ok(0.0);
        }
        let (s, c) = (1.0 / t + 1.0 / x).sin_cos();
        Ok(x * x * x * (3.0 * t * t * c + t * s))
    }

    /// `∂f/∂x` of `x3t3cos` at `(t, x)`.
    pub fn grad_minus2(&self, t: f64, x: f64) -> Result<f64> {
        self.require_time_space()?;
        if t == 0.0 || x == 0.0 {
            return Ok(0.0);
        }
        let (s, c) = (1.0 / t + 1.0 / x).sin_cos();
        Ok(t * t * t * (3.0 * x * x * c + x * s))
    }

    fn require_time_space(&self) -> Result<()> {
        match self {
            TestFunction::X3T3Cos => Ok(()),
            _ => Err(Error::invalid(format!("`{self}` has no time-space derivatives"))),
        }
    }

    pub fn sample_path(&self, xs: Vec<f64>) -> Result<SampledPath> {
        self.require_one()?;
        if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("grid point {x}")));
        }
        Ok(SampledPath::from_fn(xs, |x| self.value1(x))?.with_label(self.to_string()))
    }

    pub fn sample_field(&self, xs: Vec<f64>, ys: Vec<f64>) -> Result<SampledField> {
        self.require_two()?;
        if let Some(x) = xs.iter().chain(&ys).find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("grid point {x}")));
        }
        Ok(SampledField::from_fn(xs, ys, |u, v| self.value2(u, v))?
            .with_meta("label", self.to_string().into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for name in ["x3cos", "xysin", "x3t3cos", "ramp(0.1)", "abs(-2)", "indicator_step(0.5)", "polynomial(0,1,3)"] {
            let f: TestFunction = name.parse().unwrap();
            assert_eq!(f.to_string(), name);
        }
        assert!(matches!("sinh".parse::<TestFunction>(), Err(Error::UnknownFunction(_))));
        assert!("ramp(1,2)".parse::<TestFunction>().is_err());
        assert!("polynomial()".parse::<TestFunction>().is_err());
    }

    #[test]
    fn defined_values_at_singularities() {
        assert_eq!(TestFunction::X3Cos.eval1(0.0).unwrap(), 0.0);
        for y in [-1.0, 0.3, 2.0] {
            assert_eq!(TestFunction::XySin.eval2(0.0, y).unwrap(), 0.0);
            assert_eq!(TestFunction::XySin.eval2(y, 0.0).unwrap(), 0.0);
        }
        let p: TestFunction = "polynomial(0,1)".parse().unwrap();
        assert_eq!(p.eval1(0.7).unwrap(), 0.7);
    }

    #[test]
    fn left_derivatives_at_kinks() {
        assert_eq!(TestFunction::Ramp(0.1).grad_minus1(0.1).unwrap(), 0.0);
        assert_eq!(TestFunction::Abs(0.0).grad_minus1(0.0).unwrap(), -1.0);
        assert_eq!(TestFunction::IndicatorStep(0.0).eval1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn derivatives_match_differences() {
        let h = 1e-6;
        for x in [0.2, -0.37, 0.9] {
            let f = TestFunction::X3Cos;
            let fd = (f.value1(x + h) - f.value1(x - h)) / (2.0 * h);
            assert!((f.grad_minus1(x).unwrap() - fd).abs() < 1e-6);
            let gd = (f.grad_minus1(x + h).unwrap() - f.grad_minus1(x - h).unwrap()) / (2.0 * h);
            assert!((f.second_derivative1(x).unwrap() - gd).abs() < 1e-4);
        }
        let g = TestFunction::X3T3Cos;
        let (t, x) = (0.6, 0.45);
        let dt = (g.value2(t + h, x) - g.value2(t - h, x)) / (2.0 * h);
        let dx = (g.value2(t, x + h) - g.value2(t, x - h)) / (2.0 * h);
        assert!((g.dt_minus2(t, x).unwrap() - dt).abs() < 1e-6);
        assert!((g.grad_minus2(t, x).unwrap() - dx).abs() < 1e-6);
    }

    #[test]
    fn arity_is_checked() {
        assert!(TestFunction::XySin.eval1(1.0).is_err());
        assert!(TestFunction::X3Cos.eval2(1.0, 1.0).is_err());
        assert!(make_test_function("x3cos", &Grid::OneD(vec![0.0, f64::INFINITY])).is_err());
    }
}
