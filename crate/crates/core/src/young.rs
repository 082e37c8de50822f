//! One-parameter Young integrals as limits of left-point Riemann–Stieltjes sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{merge_points, uniform_grid, KahanSum};
use crate::pathcore::SampledPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    /// `(number of cells, sum)` per refinement level.
    pub levels: Vec<(usize, f64)>,
    pub gap: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl IntegralResult {
    /// Build from level sums; converged iff the last two Cauchy gaps are below `tol`.
    pub fn from_levels(levels: Vec<(usize, f64)>, tol: f64) -> Result<Self> {
        let Some(&(_, value)) = levels.last() else {
            return Err(Error::invalid("no refinement levels"));
        };
        if let Some((n, s)) = levels.iter().find(|(_, s)| !s.is_finite()) {
            return Err(Error::NonFinite(format!("sum {s} at level with {n} cells")));
        }
        let gaps: Vec<f64> = levels.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
        let gap = gaps.last().copied().unwrap_or(f64::INFINITY);
        let converged = gaps.len() >= 2 && gaps[gaps.len() - 2..].iter().all(|&g| g < tol);
        Ok(Self {
            value,
            levels,
            gap,
            verdict: if converged { Verdict::Converged } else { Verdict::NotConverged },
            notes: Vec::new(),
        })
    }

    pub fn converged(&self) -> bool {
        self.verdict == Verdict::Converged
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct YoungOptions {
    /// Level `m` uses `2^m` equal cells (plus `extra_points`).
    pub levels: Vec<u32>,
    pub tol: f64,
    /// Asserted variation exponents of `(f, g)`; checked for `1/p + 1/q > 1`.
    pub exponents: Option<(f64, f64)>,
    pub force: bool,
    /// Points inserted into every level, e.g. jump locations.
    pub extra_points: Vec<f64>,
}

impl Default for YoungOptions {
    fn default() -> Self {
        Self {
            levels: (4..=14).collect(),
            tol: 1e-4,
            exponents: None,
            force: false,
            extra_points: Vec::new(),
        }
    }
}

/// Refuse when `1/p + 1/q <= 1`, unless forced (then a note is returned).
pub fn check_young_exponents(p: f64, q: f64, force: bool) -> Result<Option<String>> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(Error::Exponent(format!("p = {p}, q = {q} must both be >= 1")));
    }
    let s = 1.0 / p + 1.0 / q;
    if s > 1.0 {
        return Ok(None);
    }
    let msg = format!("1/p + 1/q = {s} <= 1 for p = {p}, q = {q}");
    if force {
        Ok(Some(format!("forced past failed hypothesis: {msg}")))
    } else {
        Err(Error::Hypothesis(msg))
    }
}

/// `Σ f(x_{i-1}) (g(x_i) - g(x_{i-1}))`.
pub fn left_point_sum(f: &[f64], g: &[f64]) -> f64 {
    let mut s = KahanSum::new();
    for i in 1..f.len() {
        s.add(f[i - 1] * (g[i] - g[i - 1]));
    }
    s.value()
}

fn hypothesis_notes(opts: &YoungOptions) -> Result<Vec<String>> {
    match opts.exponents {
        Some((p, q)) => Ok(check_young_exponents(p, q, opts.force)?.into_iter().collect()),
        None => Ok(Vec::new()),
    }
}

/// `∫_a^b f dg` for closed-form `f`, `g`.
pub fn young_integral_1d(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    opts: &YoungOptions,
) -> Result<IntegralResult> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("need a finite interval a < b, got [{a}, {b}]")));
    }
    if opts.levels.is_empty() || opts.levels.iter().any(|&m| m > 26) {
        return Err(Error::invalid("levels must be nonempty and at most 26"));
    }
    let notes = hypothesis_notes(opts)?;
    let mut levels = Vec::with_capacity(opts.levels.len());
    for &m in &opts.levels {
        let xs = merge_points(&uniform_grid(a, b, 1 << m), &opts.extra_points);
        let fv: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let gv: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        levels.push((xs.len() - 1, left_point_sum(&fv, &gv)));
    }
    let mut r = IntegralResult::from_levels(levels, opts.tol)?;
    r.notes = notes;
    Ok(r)
}

/// Nested index sub-grids of an `n`-point grid: roughly `2^m` cells per level,
/// the last level being the full grid.
pub fn index_levels(n: usize, schedule: &[u32], forced: &[usize]) -> Vec<Vec<usize>> {
    let cells = n - 1;
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &m in schedule {
        let k = 1usize << m.min(40);
        if k >= cells {
            break;
        }
        let mut idx: Vec<usize> = (0..=k).map(|i| (i * cells + k / 2) / k).collect();
        idx.extend_from_slice(forced);
        idx.sort_unstable();
        idx.dedup();
        out.push(idx);
    }
    out.push((0..n).collect());
    out
}

/// `∫ f dg` for two paths on a common grid, on nested sub-grids of that grid.
pub fn young_integral_1d_sampled(f: &SampledPath, g: &SampledPath, opts: &YoungOptions) -> Result<IntegralResult> {
    if f.xs() != g.xs() {
        return Err(Error::invalid("integrand and integrator must share a grid"));
    }
    let notes = hypothesis_notes(opts)?;
    let forced = opts
        .extra_points
        .iter()
        .map(|&x| g.index_of(x).ok_or(Error::NotOnGrid(x)))
        .collect::<Result<Vec<_>>>()?;
    let levels = index_levels(g.len(), &opts.levels, &forced)
        .into_iter()
        .map(|idx| {
            let fv: Vec<f64> = idx.iter().map(|&i| f.values()[i]).collect();
            let gv: Vec<f64> = idx.iter().map(|&i| g.values()[i]).collect();
            (idx.len() - 1, left_point_sum(&fv, &gv))
        })
        .collect();
    let mut r = IntegralResult::from_levels(levels, opts.tol)?;
    r.notes = notes;
    Ok(r)
}

/// Append two zero-valued points beyond each end of a compactly supported slice.
pub fn pad_compact_support(slice: &SampledPath) -> Result<SampledPath> {
    if slice.first() != 0.0 || slice.last() != 0.0 {
        return Err(Error::SupportNotCovered);
    }
    let xs = slice.xs();
    let n = xs.len();
    let (dl, dr) = (xs[1] - xs[0], xs[n - 1] - xs[n - 2]);
    let mut px = vec![xs[0] - 2.0 * dl, xs[0] - dl];
    px.extend_from_slice(xs);
    px.extend([xs[n - 1] + dr, xs[n - 1] + 2.0 * dr]);
    let mut pv = vec![0.0, 0.0];
    pv.extend_from_slice(slice.values());
    pv.extend([0.0, 0.0]);
    SampledPath::new(px, pv)
}

/// `∫ f d_x L = ∫ f d_x L̃ + Σ f(x_k*) Δh(x_k*)` at one time slice.
///
/// The continuous part is a Young sum on nested sub-grids of the slice's grid;
/// the jump part places each jump of `h` at the right end of its cell.
pub fn integrate_f_dl(
    f: impl Fn(f64) -> f64,
    ltilde: &SampledPath,
    h: Option<&SampledPath>,
    opts: &YoungOptions,
) -> Result<IntegralResult> {
    let notes = hypothesis_notes(opts)?;
    let padded = pad_compact_support(ltilde)?;
    let jump_part = match h {
        Some(h) => {
            if h.xs() != ltilde.xs() {
                return Err(Error::invalid("jump part must share the slice grid"));
            }
            let mut s = KahanSum::new();
            for i in 1..h.len() {
                let d = h.values()[i] - h.values()[i - 1];
                if d != 0.0 {
                    s.add(f(h.xs()[i]) * d);
                }
            }
            s.value()
        }
        None => 0.0,
    };
    let fv: Vec<f64> = padded.xs().iter().map(|&x| f(x)).collect();
    let levels = index_levels(padded.len(), &opts.levels, &[])
        .into_iter()
        .map(|idx| {
            let a: Vec<f64> = idx.iter().map(|&i| fv[i]).collect();
            let b: Vec<f64> = idx.iter().map(|&i| padded.values()[i]).collect();
            (idx.len() - 1, left_point_sum(&a, &b) + jump_part)
        })
        .collect();
    let mut r = IntegralResult::from_levels(levels, opts.tol)?;
    r.notes = notes;
    Ok(r)
}

/// `|∫ f d_x L + ∫ L df|` by discrete summation by parts on the common grid
/// (left points for `f`, right points for `L`); exact when `L` vanishes at both ends.
pub fn integration_by_parts_check(f: &SampledPath, l: &SampledPath) -> Result<f64> {
    if f.xs() != l.xs() {
        return Err(Error::invalid("f and L must share a grid"));
    }
    let (fv, lv) = (f.values(), l.values());
    let lhs = left_point_sum(fv, lv);
    let mut rhs = KahanSum::new();
    for i in 1..fv.len() {
        rhs.add(lv[i] * (fv[i] - fv[i - 1]));
    }
    Ok((lhs + rhs.value()).abs())
}
