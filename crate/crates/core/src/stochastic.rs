//! Euler simulation of `X = M + V`, local-time estimators and the
//! p-variation probe for local time in the space variable.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::numeric::{median, trapezoid, uniform_grid, KahanSum};
use crate::pathcore::{SampledField, SampledPath};
use crate::rng;
use crate::variation::{phi_variation_values, ConvexGauge};

/// Local time is normalised without the classical factor ½.
pub const CONVENTION: &str = "tanaka-no-half";

/// Drift or volatility coefficient `c(s, x)`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coefficient {
    Constant(f64),
    /// `c0 + cs * s + cx * x`
    Affine { c0: f64, cs: f64, cx: f64 },
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Affine { c0, cs, cx } => write!(f, "Affine({c0} + {cs} s + {cx} x)"),
            Coefficient::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Coefficient {
    #[inline]
    pub fn eval(&self, s: f64, x: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Affine { c0, cs, cx } => c0 + cs * s + cx * x,
            Coefficient::Custom(f) => f(s, x),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SemimartingaleSpec {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub n_steps: usize,
    pub drift: Coefficient,
    pub volatility: Coefficient,
    pub x0: f64,
    pub seed: u64,
    /// Stream index; replicate `k` of a Monte Carlo run uses stream `k`.
    #[serde(default)]
    pub replicate: u64,
}

impl SemimartingaleSpec {
    pub fn brownian(t_end: f64, n_steps: usize, x0: f64, seed: u64, replicate: u64) -> Self {
        Self {
            t_end,
            n_steps,
            drift: Coefficient::Constant(0.0),
            volatility: Coefficient::Constant(1.0),
            x0,
            seed,
            replicate,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::invalid("n_steps must be >= 1"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::invalid(format!("T must be positive, got {}", self.t_end)));
        }
        if !self.x0.is_finite() {
            return Err(Error::NonFinite(format!("x0 = {}", self.x0)));
        }
        Ok(())
    }
}

/// A simulated path with its decomposition on the time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Simulation {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// Martingale part, started at `x0`.
    pub m: Vec<f64>,
    /// Finite-variation part, started at 0.
    pub v: Vec<f64>,
    /// Quadratic variation of `M`.
    pub qv: Vec<f64>,
}

impl Simulation {
    pub fn n_steps(&self) -> usize {
        self.x.len() - 1
    }

    pub fn x_path(&self) -> Result<SampledPath> {
        Ok(SampledPath::new(self.times.clone(), self.x.clone())?.with_label("X"))
    }

    pub fn m_path(&self) -> Result<SampledPath> {
        Ok(SampledPath::new(self.times.clone(), self.m.clone())?.with_label("M"))
    }

    pub fn v_path(&self) -> Result<SampledPath> {
        Ok(SampledPath::new(self.times.clone(), self.v.clone())?.with_label("V"))
    }

    pub fn qv_path(&self) -> Result<SampledPath> {
        Ok(SampledPath::new(self.times.clone(), self.qv.clone())?.with_label("<M>"))
    }

    pub fn range(&self) -> (f64, f64) {
        self.x
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn max_abs_increment(&self) -> f64 {
        self.x.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
    }
}

/// Sum groups of `r` consecutive standard normals into normals for `r`-times coarser steps.
pub fn coarsen_normals(z: &[f64], r: usize) -> Vec<f64> {
    let scale = 1.0 / (r as f64).sqrt();
    z.chunks(r).map(|c| c.iter().sum::<f64>() * scale).collect()
}

pub fn simulate(spec: &SemimartingaleSpec) -> Result<Simulation> {
    spec.validate()?;
    let z = rng::normals(spec.seed, spec.replicate, spec.n_steps);
    simulate_with_normals(spec, &z)
}

/// Euler scheme driven by the given standard normals (one per step).
pub fn simulate_with_normals(spec: &SemimartingaleSpec, z: &[f64]) -> Result<Simulation> {
    spec.validate()?;
    if z.len() != spec.n_steps {
        return Err(Error::invalid(format!("{} normals for {} steps", z.len(), spec.n_steps)));
    }
    let n = spec.n_steps;
    let dt = spec.t_end / n as f64;
    let sdt = dt.sqrt();
    let times = uniform_grid(0.0, spec.t_end, n);
    let mut x = Vec::with_capacity(n + 1);
    let mut m = Vec::with_capacity(n + 1);
    let mut v = Vec::with_capacity(n + 1);
    let mut qv = Vec::with_capacity(n + 1);
    x.push(spec.x0);
    m.push(spec.x0);
    v.push(0.0);
    qv.push(0.0);
    for k in 0..n {
        let (s, xk) = (times[k], x[k]);
        let b = spec.drift.eval(s, xk);
        let sig = spec.volatility.eval(s, xk);
        if !b.is_finite() || !sig.is_finite() {
            return Err(Error::NonFinite(format!("coefficients at (s, x) = ({s}, {xk})")));
        }
        let dv = b * dt;
        let dm = sig * sdt * z[k];
        x.push(xk + dv + dm);
        m.push(m[k] + dm);
        v.push(v[k] + dv);
        qv.push(qv[k] + sig * sig * dt);
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("path value {bad}")));
    }
    Ok(Simulation { times, x, m, v, qv })
}

/// Range of level indices receiving a nonzero contribution from the step
/// `a -> b`, with the contribution at level `x`:
/// `b - x` if `a <= x < b`, `x - b` if `b <= x < a`.
#[inline]
pub(crate) fn step_levels(levels: &[f64], a: f64, b: f64) -> std::ops::Range<usize> {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    levels.partition_point(|&l| l < lo)..levels.partition_point(|&l| l < hi)
}

#[inline]
pub(crate) fn step_contribution(a: f64, b: f64, x: f64) -> f64 {
    if a <= x && x < b {
        b - x
    } else if b <= x && x < a {
        x - b
    } else {
        0.0
    }
}

fn check_levels(sim: &Simulation, levels: &[f64]) -> Result<()> {
    crate::pathcore::SampledPath::new(levels.to_vec(), vec![0.0; levels.len()])?;
    let (lo, hi) = sim.range();
    if levels[0] > lo || levels[levels.len() - 1] < hi {
        return Err(Error::invalid(format!(
            "level grid [{}, {}] does not cover the path range [{lo}, {hi}]",
            levels[0],
            levels[levels.len() - 1]
        )));
    }
    Ok(())
}

/// The local-time field `L(t, x)` on `(times, levels)` plus its decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct LocalTimeField {
    pub times: Vec<f64>,
    pub levels: Vec<f64>,
    pub l: SampledField,
    pub ltilde: SampledField,
    pub h: SampledField,
    pub convention: String,
}

impl LocalTimeField {
    pub fn terminal_slice(&self) -> SampledPath {
        self.l.x_line(self.times.len() - 1)
    }
}

/// `L(T, ·)` only, from the discrete Tanaka sum.
pub fn local_time_terminal(sim: &Simulation, levels: &[f64]) -> Result<Vec<f64>> {
    check_levels(sim, levels)?;
    let mut l = vec![0.0; levels.len()];
    for w in sim.x.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in step_levels(levels, a, b) {
            l[i] += step_contribution(a, b, levels[i]);
        }
    }
    Ok(l)
}

/// Discrete Tanaka local time
/// `L(t_j, x) = (X_{t_j} - x)^+ - (X_0 - x)^+ - Σ_{k<j} 1{X_{t_k} > x}(X_{t_{k+1}} - X_{t_k})`,
/// accumulated step by step as nonnegative contributions, stored every
/// `time_stride` steps (and at `T`). No jump part is extracted.
pub fn local_time_tanaka(sim: &Simulation, levels: &[f64], time_stride: usize) -> Result<LocalTimeField> {
    check_levels(sim, levels)?;
    let stride = time_stride.max(1);
    let n = sim.n_steps();
    let mut row = vec![0.0; levels.len()];
    let mut times = vec![sim.times[0]];
    let mut values = row.clone();
    for k in 0..n {
        let (a, b) = (sim.x[k], sim.x[k + 1]);
        for i in step_levels(levels, a, b) {
            row[i] += step_contribution(a, b, levels[i]);
        }
        if (k + 1) % stride == 0 || k + 1 == n {
            times.push(sim.times[k + 1]);
            values.extend_from_slice(&row);
        }
    }
    let l = SampledField::new(times.clone(), levels.to_vec(), values)?.with_meta("convention", json!(CONVENTION));
    let h = l.zip_with(&l, |_, _| 0.0)?;
    Ok(LocalTimeField {
        times,
        levels: levels.to_vec(),
        ltilde: l.clone(),
        h,
        l,
        convention: CONVENTION.into(),
    })
}

/// Largest `|L(t, x) - [(X_t - x)^+ - (X_0 - x)^+ - M̂ - V̂]|` over the stored grid.
pub fn tanaka_identity_residual(sim: &Simulation, field: &LocalTimeField) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (i, &x) in field.levels.iter().enumerate() {
        let (mut mh, mut vh) = (KahanSum::new(), KahanSum::new());
        let mut k = 0;
        for (j, &t) in field.times.iter().enumerate() {
            let idx = sim
                .times
                .iter()
                .position(|&s| s == t)
                .ok_or_else(|| Error::invalid("field times are not simulation times"))?;
            while k < idx {
                if sim.x[k] > x {
                    mh.add(sim.m[k + 1] - sim.m[k]);
                    vh.add(sim.v[k + 1] - sim.v[k]);
                }
                k += 1;
            }
            let direct = (sim.x[idx] - x).max(0.0) - (sim.x[0] - x).max(0.0) - mh.value() - vh.value();
            worst = worst.max((direct - field.l.at(j, i)).abs());
        }
    }
    Ok(worst)
}

/// `L(t, x) ≈ (1/(4ε)) Σ_{k<j} 1{|X_{t_k} - x| < ε} Δ⟨M⟩_k`.
pub fn local_time_occupation(
    sim: &Simulation,
    levels: &[f64],
    epsilon: f64,
    time_stride: usize,
) -> Result<LocalTimeField> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be positive, got {epsilon}")));
    }
    SampledPath::new(levels.to_vec(), vec![0.0; levels.len()])?;
    let stride = time_stride.max(1);
    let n = sim.n_steps();
    let w = 1.0 / (4.0 * epsilon);
    let mut row = vec![0.0; levels.len()];
    let mut times = vec![sim.times[0]];
    let mut values = row.clone();
    for k in 0..n {
        let dq = sim.qv[k + 1] - sim.qv[k];
        if dq != 0.0 {
            let xk = sim.x[k];
            let lo = levels.partition_point(|&l| l <= xk - epsilon);
            let hi = levels.partition_point(|&l| l < xk + epsilon);
            for i in lo..hi {
                if (xk - levels[i]).abs() < epsilon {
                    row[i] += w * dq;
                }
            }
        }
        if (k + 1) % stride == 0 || k + 1 == n {
            times.push(sim.times[k + 1]);
            values.extend_from_slice(&row);
        }
    }
    let l = SampledField::new(times.clone(), levels.to_vec(), values)?.with_meta("convention", json!(CONVENTION));
    let h = l.zip_with(&l, |_, _| 0.0)?;
    Ok(LocalTimeField {
        times,
        levels: levels.to_vec(),
        ltilde: l.clone(),
        h,
        l,
        convention: CONVENTION.into(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OccupationCheck {
    /// `∫ φ(x) L_T^x dx` (trapezoid).
    pub lhs: f64,
    /// `½ Σ φ(X_k) Δ⟨M⟩_k`.
    pub rhs: f64,
    pub difference: f64,
    pub residual: f64,
}

pub fn occupation_identity_check(
    phi: impl Fn(f64) -> f64,
    slice: &SampledPath,
    sim: &Simulation,
) -> OccupationCheck {
    let ys: Vec<f64> = slice
        .xs()
        .iter()
        .zip(slice.values())
        .map(|(&x, &l)| phi(x) * l)
        .collect();
    let lhs = trapezoid(slice.xs(), &ys);
    let mut rhs = KahanSum::new();
    for k in 0..sim.n_steps() {
        rhs.add(0.5 * phi(sim.x[k]) * (sim.qv[k + 1] - sim.qv[k]));
    }
    let rhs = rhs.value();
    OccupationCheck {
        lhs,
        rhs,
        difference: lhs - rhs,
        residual: (lhs - rhs).abs(),
    }
}

pub const DEFAULT_JUMP_THRESHOLD: f64 = 50.0;

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub ltilde: SampledField,
    pub h: SampledField,
    /// Level indices `i` whose cell `[x_{i-1}, x_i]` carries a detected jump.
    pub jump_cells: Vec<usize>,
}

/// Split `L` into a continuous part and a jump part in `x`.
///
/// Cells of the last time row whose increment exceeds `threshold` times the
/// median nonzero increment are treated as jumps; the jump size at each time
/// is the cell increment minus the mean of its neighbours' increments.
pub fn decompose_local_time(l: &SampledField, threshold: f64) -> Result<Decomposition> {
    let (nt, nx) = l.shape();
    let last = nt - 1;
    let inc = |j: usize, i: usize| -> f64 {
        if i == 0 || i >= nx {
            0.0
        } else {
            l.at(j, i) - l.at(j, i - 1)
        }
    };
    let nonzero: Vec<f64> = (1..nx).map(|i| inc(last, i).abs()).filter(|&d| d > 0.0).collect();
    let scale = median(&nonzero);
    let jump_cells: Vec<usize> = if threshold.is_finite() && !nonzero.is_empty() {
        (1..nx).filter(|&i| inc(last, i).abs() > threshold * scale).collect()
    } else {
        Vec::new()
    };
    let mut h = vec![0.0; nt * nx];
    for j in 0..nt {
        let mut acc = 0.0;
        for i in 0..nx {
            if jump_cells.binary_search(&i).is_ok() {
                acc += inc(j, i) - 0.5 * (inc(j, i - 1) + inc(j, i + 1));
            }
            h[j * nx + i] = acc;
        }
    }
    let h = SampledField::new(l.xs().to_vec(), l.ys().to_vec(), h)?;
    let ltilde = l.zip_with(&h, |a, b| a - b)?;
    Ok(Decomposition { ltilde, h, jump_cells })
}

/// Tanaka field followed by [`decompose_local_time`].
pub fn local_time_decomposed(
    sim: &Simulation,
    levels: &[f64],
    time_stride: usize,
    threshold: f64,
) -> Result<LocalTimeField> {
    let mut f = local_time_tanaka(sim, levels, time_stride)?;
    let d = decompose_local_time(&f.l, threshold)?;
    f.ltilde = d.ltilde;
    f.h = d.h;
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    Stabilizing,
    Growing,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub p: f64,
    pub values: Vec<f64>,
    pub relative_change: f64,
    pub verdict: ProbeVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    /// Cells per level grid.
    pub cells: Vec<usize>,
    pub rows: Vec<ProbeRow>,
}

/// p-variation of `L(T, ·)` on nested uniform level grids over the path range.
/// A relative change above 10% between the two finest grids reads as growing.
pub fn pvar_exponent_probe(sim: &Simulation, ps: &[f64], level_exponents: &[u32]) -> Result<ProbeReport> {
    if level_exponents.len() < 3 {
        return Err(Error::invalid("the probe needs at least 3 refinement levels"));
    }
    let gauges = ps.iter().map(|&p| ConvexGauge::power(p)).collect::<Result<Vec<_>>>()?;
    let (mut lo, mut hi) = sim.range();
    if lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let mut values = vec![Vec::new(); ps.len()];
    let mut cells = Vec::new();
    for &m in level_exponents {
        let levels = uniform_grid(lo, hi, 1 << m);
        let l = local_time_terminal(sim, &levels)?;
        cells.push(1usize << m);
        for (k, g) in gauges.iter().enumerate() {
            values[k].push(phi_variation_values(&l, g).0);
        }
    }
    let rows = ps
        .iter()
        .zip(values)
        .map(|(&p, v)| {
            let (a, b) = (v[v.len() - 2], v[v.len() - 1]);
            let rel = if a == 0.0 && b == 0.0 { 0.0 } else { (b - a).abs() / a.abs().max(f64::MIN_POSITIVE) };
            ProbeRow {
                p,
                values: v,
                relative_change: rel,
                verdict: if rel > 0.1 {
                    ProbeVerdict::Growing
                } else {
                    ProbeVerdict::Stabilizing
                },
            }
        })
        .collect();
    Ok(ProbeReport { cells, rows })
}
