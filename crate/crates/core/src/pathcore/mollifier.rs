use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::pathcore::SampledPath;

pub type Func1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Func2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub const DEFAULT_NODES: usize = 512;

/// Unnormalized bump `exp(1/((z-1)^2 - 1))` on `(0, 2)`.
pub fn bump(z: f64) -> f64 {
    if z <= 0.0 || z >= 2.0 {
        return 0.0;
    }
    let u = z - 1.0;
    (1.0 / (u * u - 1.0)).exp()
}

fn bump_derivative(z: f64) -> f64 {
    if z <= 0.0 || z >= 2.0 {
        return 0.0;
    }
    let u = z - 1.0;
    let d = u * u - 1.0;
    bump(z) * (-2.0 * u) / (d * d)
}

/// Midpoint quadrature of the normalized mollifier `rho = c * bump`.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    nodes: usize,
    c: f64,
    z: Vec<f64>,
    // rho(z_k) * h and rho'(z_k) * h
    w: Vec<f64>,
    dw: Vec<f64>,
}

impl MollifierSpec {
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::invalid("mollifier needs at least one quadrature node"));
        }
        let h = 2.0 / nodes as f64;
        let z: Vec<f64> = (0..nodes).map(|k| (k as f64 + 0.5) * h).collect();
        let mass: f64 = z.iter().map(|&z| bump(z) * h).collect::<KahanSum>().value();
        let c = 1.0 / mass;
        let w = z.iter().map(|&z| c * bump(z) * h).collect();
        let dw = z.iter().map(|&z| c * bump_derivative(z) * h).collect();
        Ok(Self { nodes, c, z, w, dw })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    pub fn rho(&self, z: f64) -> f64 {
        self.c * bump(z)
    }

    /// Quadrature of `∫ rho`.
    pub fn mass(&self) -> f64 {
        self.w.iter().copied().collect::<KahanSum>().value()
    }

    /// Quadrature of `∫ z rho(z) dz`.
    pub fn first_moment(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.w)
            .map(|(z, w)| z * w)
            .collect::<KahanSum>()
            .value()
    }

    fn convolve(&self, weights: &[f64], g: impl Fn(f64) -> f64, x: f64, n: f64) -> f64 {
        let mut s = KahanSum::new();
        for (z, w) in self.z.iter().zip(weights) {
            if *w != 0.0 {
                s.add(w * g(x - z / n));
            }
        }
        s.value()
    }
}

impl Default for MollifierSpec {
    fn default() -> Self {
        Self::new(DEFAULT_NODES).expect("positive node count")
    }
}

fn check_order(n: f64) -> Result<()> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::invalid(format!("mollifier order must be >= 1, got {n}")));
    }
    Ok(())
}

/// `g_n(x) = ∫ rho(z) g(x - z/n) dz`.
#[derive(Clone)]
pub struct Mollified1D {
    g: Func1,
    n: f64,
    spec: Arc<MollifierSpec>,
    upper: Option<f64>,
}

impl Mollified1D {
    pub fn order(&self) -> f64 {
        self.n
    }

    fn check(&self, x: f64) -> Result<()> {
        match self.upper {
            Some(hi) if x > hi || !x.is_finite() => Err(Error::OutOfDomain(x, f64::NEG_INFINITY, hi)),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.spec.convolve(&self.spec.w, &*self.g, x, self.n))
    }

    /// `g_n'(x) = n ∫ rho'(z) g(x - z/n) dz`; needs only values of `g`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.n * self.spec.convolve(&self.spec.dw, &*self.g, x, self.n))
    }
}

/// Mollify a function defined on the whole line.
pub fn mollify_1d(g: Func1, n: f64, spec: Arc<MollifierSpec>) -> Result<Mollified1D> {
    check_order(n)?;
    Ok(Mollified1D { g, n, spec, upper: None })
}

/// Mollify sampled data: linear interpolation inside the grid, constant
/// continuation below it. Points beyond the last abscissa are rejected.
pub fn mollify_1d_path(path: &SampledPath, n: f64, spec: Arc<MollifierSpec>) -> Result<Mollified1D> {
    check_order(n)?;
    let p = path.clone();
    let (lo, hi) = path.domain();
    let first = path.first();
    let g: Func1 = Arc::new(move |x| {
        if x <= lo {
            first
        } else {
            p.interpolate(x.min(hi)).expect("inside domain")
        }
    });
    Ok(Mollified1D {
        g,
        n,
        spec,
        upper: Some(hi),
    })
}

/// `f_n(s, x) = ∫∫ rho(r) rho(z) f(s - r/n, x - z/n) dr dz` with `f = 0` for `s < 0`.
#[derive(Clone)]
pub struct Mollified2D {
    f: Func2,
    n: f64,
    spec: Arc<MollifierSpec>,
    x_floor: Option<f64>,
}

impl Mollified2D {
    pub fn order(&self) -> f64 {
        self.n
    }

    fn inner(&self, weights_s: &[f64], weights_x: &[f64], s: f64, x: f64) -> f64 {
        let spec = &self.spec;
        let mut total = KahanSum::new();
        for (r, wr) in spec.z.iter().zip(weights_s) {
            let sr = s - r / self.n;
            if *wr == 0.0 || sr < 0.0 {
                continue;
            }
            let mut row = KahanSum::new();
            for (z, wz) in spec.z.iter().zip(weights_x) {
                if *wz == 0.0 {
                    continue;
                }
                let mut xz = x - z / self.n;
                if let Some(lo) = self.x_floor {
                    xz = xz.max(lo);
                }
                row.add(wz * (self.f)(sr, xz));
            }
            total.add(wr * row.value());
        }
        total.value()
    }

    pub fn eval(&self, s: f64, x: f64) -> Result<f64> {
        if !s.is_finite() || !x.is_finite() {
            return Err(Error::NonFinite(format!("({s}, {x})")));
        }
        Ok(self.inner(&self.spec.w, &self.spec.w, s, x))
    }

    /// `∂f_n/∂x`.
    pub fn dx(&self, s: f64, x: f64) -> Result<f64> {
        if !s.is_finite() || !x.is_finite() {
            return Err(Error::NonFinite(format!("({s}, {x})")));
        }
        Ok(self.n * self.inner(&self.spec.w, &self.spec.dw, s, x))
    }

    /// `∂f_n/∂s`.
    pub fn ds(&self, s: f64, x: f64) -> Result<f64> {
        if !s.is_finite() || !x.is_finite() {
            return Err(Error::NonFinite(format!("({s}, {x})")));
        }
        Ok(self.n * self.inner(&self.spec.dw, &self.spec.w, s, x))
    }
}

/// Mollify a two-parameter function. `x_floor`, when given, continues `f`
/// by its value at `x_floor` for smaller `x`.
pub fn mollify_2d(f: Func2, n: f64, spec: Arc<MollifierSpec>, x_floor: Option<f64>) -> Result<Mollified2D> {
    check_order(n)?;
    Ok(Mollified2D { f, n, spec, x_floor })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass_and_first_moment() {
        let spec = MollifierSpec::default();
        assert!((spec.mass() - 1.0).abs() < 1e-10);
        assert!((spec.first_moment() - 1.0).abs() < 1e-12);
        let doubled = MollifierSpec::new(2 * DEFAULT_NODES).unwrap();
        let rel = (doubled.normalization() - spec.normalization()).abs() / spec.normalization();
        assert!(rel < 1e-8, "relative change {rel}");
    }

    #[test]
    fn first_moment_against_fine_quadrature() {
        // Simpson on a much finer grid as an independent oracle.
        let m = 200_000;
        let h = 2.0 / m as f64;
        let (mut mass, mut mom) = (0.0, 0.0);
        for k in 0..=m {
            let z = k as f64 * h;
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            mass += w * bump(z);
            mom += w * z * bump(z);
        }
        assert!((mom / mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constants_and_affine() {
        let spec = Arc::new(MollifierSpec::default());
        let c = mollify_1d(Arc::new(|_| 5.0), 3.0, spec.clone()).unwrap();
        assert!((c.eval(0.4).unwrap() - 5.0).abs() < 1e-9);
        let lin = mollify_1d(Arc::new(|x| x), 10.0, spec.clone()).unwrap();
        for x in [-0.3, 0.0, 0.8] {
            assert!((lin.eval(x).unwrap() - (x - 0.1)).abs() < 1e-6);
            assert!((lin.derivative(x).unwrap() - 1.0).abs() < 1e-8);
        }
        assert!(mollify_1d(Arc::new(|x| x), 0.0, spec).is_err());
    }

    #[test]
    fn sampled_path_domain() {
        let spec = Arc::new(MollifierSpec::new(64).unwrap());
        let p = SampledPath::new(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        let m = mollify_1d_path(&p, 4.0, spec).unwrap();
        assert!((m.eval(0.1).unwrap() - 2.0).abs() < 1e-12);
        assert!(m.eval(1.5).is_err());
    }

    #[test]
    fn two_dimensional_shift() {
        let spec = Arc::new(MollifierSpec::new(128).unwrap());
        let f = mollify_2d(Arc::new(|s, x| s + x), 10.0, spec.clone(), None).unwrap();
        assert!((f.eval(0.7, 0.3).unwrap() - 0.8).abs() < 1e-6);
        assert!((f.dx(0.7, 0.3).unwrap() - 1.0).abs() < 1e-6);
        assert!((f.ds(0.7, 0.3).unwrap() - 1.0).abs() < 1e-6);
        let c = mollify_2d(Arc::new(|_, _| 3.0), 4.0, spec, None).unwrap();
        assert!((c.eval(0.6, -1.0).unwrap() - 3.0).abs() < 1e-9);
        // zero continuation for s < 0 lowers the value near s = 0
        assert!(c.eval(0.1, 0.0).unwrap() < 3.0);
    }
}
