use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::pathcore::Partition1D;

/// Free-form metadata attached to paths and fields.
pub type Meta = BTreeMap<String, Value>;

/// A one-parameter function known on a finite, strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    xs: Vec<f64>,
    values: Vec<f64>,
    meta: Meta,
}

pub(crate) fn check_axis(name: &str, xs: &[f64], min_len: usize) -> Result<()> {
    if xs.len() < min_len {
        return Err(Error::invalid(format!(
            "{name} needs at least {min_len} points, got {}",
            xs.len()
        )));
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{name} contains {x}")));
    }
    if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "{name} must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

impl SampledPath {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("xs", &xs, 2)?;
        if values.len() != xs.len() {
            return Err(Error::invalid(format!(
                "{} abscissae but {} values",
                xs.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("path value {v}")));
        }
        Ok(Self {
            xs,
            values,
            meta: Meta::new(),
        })
    }

    pub fn from_fn(xs: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = xs.iter().map(|&x| f(x)).collect();
        Self::new(xs, values)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.meta.insert("label".into(), Value::String(label.into()));
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: Value) -> Self {
        self.meta.insert(key.into(), value);
        self
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Index of the grid node equal to `x` (relative tolerance 1e-12 of the span).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        node_index(&self.xs, x)
    }

    /// Linear interpolation inside the sampled domain.
    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::OutOfDomain(x, lo, hi));
        }
        let k = self.xs.partition_point(|&g| g <= x);
        if k == 0 {
            return Ok(self.values[0]);
        }
        if k >= self.xs.len() {
            return Ok(self.last());
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let t = (x - x0) / (x1 - x0);
        Ok(self.values[k - 1] + t * (self.values[k] - self.values[k - 1]))
    }

    pub fn restrict(&self, part: &Partition1D) -> SampledPath {
        let xs = part.indices().iter().map(|&i| self.xs[i]).collect();
        let values = part.indices().iter().map(|&i| self.values[i]).collect();
        SampledPath {
            xs,
            values,
            meta: self.meta.clone(),
        }
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<SampledPath> {
        let mut out = Self::new(self.xs.clone(), self.values.iter().map(|&v| f(v)).collect())?;
        out.meta = self.meta.clone();
        Ok(out)
    }
}

pub(crate) fn node_index(grid: &[f64], x: f64) -> Option<usize> {
    let span = grid[grid.len() - 1] - grid[0];
    let tol = 1e-12 * span.max(f64::MIN_POSITIVE);
    let k = grid.partition_point(|&g| g < x - tol);
    (k < grid.len() && (grid[k] - x).abs() <= tol).then_some(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_and_short() {
        assert!(SampledPath::new(vec![0.0], vec![1.0]).is_err());
        assert!(SampledPath::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn interpolation_and_lookup() {
        let p = SampledPath::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(p.interpolate(0.5).unwrap(), 1.0);
        assert_eq!(p.interpolate(2.0).unwrap(), 1.0);
        assert!(p.interpolate(3.5).is_err());
        assert_eq!(p.index_of(1.0), Some(1));
        assert_eq!(p.index_of(1.5), None);
    }
}
