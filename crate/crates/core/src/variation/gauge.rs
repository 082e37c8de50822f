use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly increasing gauge `Φ` with `Φ(0) = 0` and its inverse `φ`.
#[derive(Clone)]
pub enum ConvexGauge {
    Power(f64),
    Custom {
        name: String,
        phi: ScalarFn,
        inverse: ScalarFn,
        convex: bool,
    },
}

impl fmt::Debug for ConvexGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexGauge::Power(p) => write!(f, "Power({p})"),
            ConvexGauge::Custom { name, convex, .. } => write!(f, "Custom({name}, convex={convex})"),
        }
    }
}

impl ConvexGauge {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Exponent(format!("gauge exponent must be >= 1, got {p}")));
        }
        Ok(ConvexGauge::Power(p))
    }

    /// A user gauge, checked with [`ConvexGauge::validate`] before it is returned.
    pub fn custom(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
        convex: bool,
    ) -> Result<Self> {
        let g = ConvexGauge::Custom {
            name: name.into(),
            phi: Arc::new(phi),
            inverse: Arc::new(inverse),
            convex,
        };
        g.validate()?;
        Ok(g)
    }

    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match self {
            ConvexGauge::Power(p) => {
                if *p == 1.0 {
                    u
                } else if *p == 2.0 {
                    u * u
                } else {
                    u.powf(*p)
                }
            }
            ConvexGauge::Custom { phi, .. } => phi(u),
        }
    }

    pub fn inverse(&self, u: f64) -> f64 {
        match self {
            ConvexGauge::Power(p) => u.powf(1.0 / p),
            ConvexGauge::Custom { inverse, .. } => inverse(u),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, ConvexGauge::Power(p) if *p == 1.0)
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            ConvexGauge::Power(p) => Some(*p),
            ConvexGauge::Custom { .. } => None,
        }
    }

    pub fn descriptor(&self) -> Value {
        match self {
            ConvexGauge::Power(p) => json!(p),
            ConvexGauge::Custom { name, .. } => json!(name),
        }
    }

    /// `Φ(0) = 0`, strict monotonicity and `Φ(φ(u)) = u` on a log-spaced check set.
    pub fn validate(&self) -> Result<()> {
        if self.apply(0.0) != 0.0 {
            return Err(Error::Gauge(format!("{self:?}: Φ(0) = {}", self.apply(0.0))));
        }
        let grid: Vec<f64> = (-24..=24).map(|k| 10f64.powf(k as f64 / 4.0)).collect();
        let mut prev = 0.0;
        for &u in &grid {
            let v = self.apply(u);
            if !v.is_finite() || v <= prev {
                return Err(Error::Gauge(format!("{self:?} is not strictly increasing near {u}")));
            }
            prev = v;
            let back = self.apply(self.inverse(u));
            if (back - u).abs() > 1e-9 * u {
                return Err(Error::Gauge(format!("{self:?}: Φ(φ({u})) = {back}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_gauges() {
        assert!(ConvexGauge::power(0.5).is_err());
        let g = ConvexGauge::power(2.5).unwrap();
        g.validate().unwrap();
        assert!((g.apply(2.0) - 2f64.powf(2.5)).abs() < 1e-14);
    }

    #[test]
    fn custom_gauge_checks() {
        assert!(ConvexGauge::custom("u+u^2", |u| u + u * u, |v| (-1.0 + (1.0 + 4.0 * v).sqrt()) / 2.0, true).is_ok());
        assert!(matches!(
            ConvexGauge::custom("bad", |u| u.sin(), |v| v.asin(), false),
            Err(Error::Gauge(_))
        ));
        assert!(ConvexGauge::custom("shifted", |u| u + 1.0, |v| v - 1.0, true).is_err());
        assert!(ConvexGauge::custom("wrong inverse", |u| u * u, |v| v, true).is_err());
    }
}
