use crate::error::{Error, Result};
use crate::pathcore::path::{check_axis, node_index, Meta};
use crate::pathcore::{Partition2D, SampledPath};

/// A two-parameter function on a rectangular grid. Entry `(i, j)` sits at
/// `(xs[i], ys[j])`; storage is row-major over the first axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    xs: Vec<f64>,
    ys: Vec<f64>,
    values: Vec<f64>,
    meta: Meta,
}

impl SampledField {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_axis("xs", &xs, 2)?;
        check_axis("ys", &ys, 2)?;
        if values.len() != xs.len() * ys.len() {
            return Err(Error::invalid(format!(
                "field is {}x{} but has {} values",
                xs.len(),
                ys.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field value {v}")));
        }
        Ok(Self {
            xs,
            ys,
            values,
            meta: Meta::new(),
        })
    }

    pub fn from_rows(xs: Vec<f64>, ys: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != xs.len() || rows.iter().any(|r| r.len() != ys.len()) {
            return Err(Error::invalid("row matrix does not match axis lengths"));
        }
        Self::new(xs, ys, rows.concat())
    }

    pub fn from_fn(xs: Vec<f64>, ys: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                values.push(f(x, y));
            }
        }
        Self::new(xs, ys, values)
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: serde_json::Value) -> Self {
        self.meta.insert(key.into(), value);
        self
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.xs.len(), self.ys.len())
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let ny = self.ys.len();
        &self.values[i * ny..(i + 1) * ny]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.xs.len()).map(|i| self.row(i).to_vec()).collect()
    }

    /// The slice `y -> G(xs[i], y)`.
    pub fn x_line(&self, i: usize) -> SampledPath {
        SampledPath::new(self.ys.clone(), self.row(i).to_vec()).expect("valid field row")
    }

    /// The slice `x -> G(x, ys[j])`.
    pub fn y_line(&self, j: usize) -> SampledPath {
        let vals = (0..self.xs.len()).map(|i| self.at(i, j)).collect();
        SampledPath::new(self.xs.clone(), vals).expect("valid field column")
    }

    /// Double increment over the cell `[xs[i0], xs[i1]] x [ys[j0], ys[j1]]`.
    #[inline]
    pub fn double_increment(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        self.at(i1, j1) - self.at(i0, j1) - self.at(i1, j0) + self.at(i0, j0)
    }

    pub fn x_index_of(&self, x: f64) -> Option<usize> {
        node_index(&self.xs, x)
    }

    pub fn y_index_of(&self, y: f64) -> Option<usize> {
        node_index(&self.ys, y)
    }

    pub fn restrict(&self, part: &Partition2D) -> SampledField {
        let xi = part.x().indices();
        let yj = part.y().indices();
        let mut values = Vec::with_capacity(xi.len() * yj.len());
        for &i in xi {
            for &j in yj {
                values.push(self.at(i, j));
            }
        }
        SampledField {
            xs: xi.iter().map(|&i| self.xs[i]).collect(),
            ys: yj.iter().map(|&j| self.ys[j]).collect(),
            values,
            meta: self.meta.clone(),
        }
    }

    /// Swap the two axes.
    pub fn transpose(&self) -> SampledField {
        let (nx, ny) = self.shape();
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(self.at(i, j));
            }
        }
        SampledField {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            values,
            meta: self.meta.clone(),
        }
    }

    pub fn zip_with(&self, other: &SampledField, f: impl Fn(f64, f64) -> f64) -> Result<SampledField> {
        if self.xs != other.xs || self.ys != other.ys {
            return Err(Error::invalid("fields live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut out = SampledField::new(self.xs.clone(), self.ys.clone(), values)?;
        out.meta = self.meta.clone();
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
