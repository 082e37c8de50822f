//! Two-parameter Young integrals over product partitions, the series
//! feasibility check, summation by parts and convergence harnesses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{merge_points, uniform_grid, KahanSum};
use crate::pathcore::SampledField;
use crate::variation::{uniform_axis_variation, Axis, ConvexGauge};
use crate::young::{index_levels, IntegralResult};

pub use crate::variation::JumpSets;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesCondition {
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Requested `δ`.
    pub delta_requested: f64,
    /// `δ` actually used; shrunk when the requested one leaves no room for `α`.
    pub delta: f64,
    /// `(2(1 - 1/p), 1/(pq))`, reported even when empty.
    pub alpha_interval: (f64, f64),
    pub alpha: Option<f64>,
    pub feasible: bool,
    /// Exponents `(a, b)` of the factorised series `Σ n^{-a} Σ m^{-b}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<(f64, f64)>,
    pub partial_sums: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

/// Power-gauge feasibility of the double series for exponents `(p, q)`.
pub fn check_series_condition(p: f64, q: f64, delta: f64, n_max: usize) -> Result<SeriesCondition> {
    if !(p >= 1.0) || !(q >= 1.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::Exponent(format!("p = {p}, q = {q} must both be >= 1")));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("delta must be >= 0, got {delta}")));
    }
    if n_max < 100 {
        return Err(Error::invalid(format!("n_max must be at least 100, got {n_max}")));
    }
    let lo = 2.0 * (1.0 - 1.0 / p);
    let hi = 1.0 / (p * q);
    let margin = 2.0 * q + 1.0 - 2.0 * p * q;
    let feasible = margin > 1e-12 * (2.0 * q + 1.0);
    let mut out = SeriesCondition {
        p,
        q,
        gamma: None,
        delta_requested: delta,
        delta,
        alpha_interval: (lo, hi),
        alpha: None,
        feasible,
        exponents: None,
        partial_sums: Vec::new(),
        tail_bound: None,
    };
    if !feasible {
        return Ok(out);
    }
    // α/(2+δ) + 1/p > 1 and 1 - α + 1/(pq) > 1 leave room iff δ < 1/(pq(1-1/p)) - 2.
    let delta = if p > 1.0 {
        let cap = 1.0 / (p * q * (1.0 - 1.0 / p)) - 2.0;
        if delta < cap {
            delta
        } else {
            0.5 * cap
        }
    } else {
        delta
    };
    let alpha_lo = (2.0 + delta) * (1.0 - 1.0 / p);
    let alpha = 0.5 * (alpha_lo + hi);
    let a = alpha / (2.0 + delta) + 1.0 / p;
    let b = 1.0 - alpha + 1.0 / (p * q);
    out.delta = delta;
    out.alpha = Some(alpha);
    out.exponents = Some((a, b));
    out.tail_bound = Some((1.0 + 1.0 / (a - 1.0)) * (1.0 + 1.0 / (b - 1.0)));
    let n_max = n_max.min(10_000_000);
    let (mut sa, mut sb) = (KahanSum::new(), KahanSum::new());
    let mut checkpoint = 10;
    for n in 1..=n_max {
        let x = n as f64;
        sa.add(x.powf(-a));
        sb.add(x.powf(-b));
        if n == checkpoint || n == n_max {
            out.partial_sums.push((n, sa.value() * sb.value()));
            if n == checkpoint {
                checkpoint *= 10;
            }
        }
    }
    out.partial_sums.dedup_by_key(|e| e.0);
    Ok(out)
}

/// Partial sums `Σ_{n,m ≤ N} ϱ[φ(1/n)] σ[ψ(1/m)] φ₁[(1/n) ψ₁(1/m)]` for general gauges,
/// where lower-case letters are the inverses of the given gauges. Evidence only.
pub fn general_series_partial_sums(
    rho: impl Fn(f64) -> f64,
    sigma: impl Fn(f64) -> f64,
    phi: &ConvexGauge,
    psi: &ConvexGauge,
    phi1: &ConvexGauge,
    psi1: &ConvexGauge,
    n_max: usize,
) -> Vec<(usize, f64)> {
    let n_max = n_max.min(5000);
    let mut out = Vec::new();
    let mut total = KahanSum::new();
    let mut checkpoint = 10;
    // Accumulate the square [1, N]^2 shell by shell.
    for n in 1..=n_max {
        for k in 1..=n {
            total.add(term(&rho, &sigma, phi, psi, phi1, psi1, n, k));
            if k < n {
                total.add(term(&rho, &sigma, phi, psi, phi1, psi1, k, n));
            }
        }
        if n == checkpoint || n == n_max {
            out.push((n, total.value()));
            if n == checkpoint {
                checkpoint *= 10;
            }
        }
    }
    out.dedup_by_key(|e| e.0);
    out
}

#[allow(clippy::too_many_arguments)]
fn term(
    rho: &impl Fn(f64) -> f64,
    sigma: &impl Fn(f64) -> f64,
    phi: &ConvexGauge,
    psi: &ConvexGauge,
    phi1: &ConvexGauge,
    psi1: &ConvexGauge,
    n: usize,
    m: usize,
) -> f64 {
    let (un, um) = (1.0 / n as f64, 1.0 / m as f64);
    rho(phi.inverse(un)) * sigma(psi.inverse(um)) * phi1.inverse(un * psi1.inverse(um))
}

/// Integrand or integrator: a closed form or samples.
#[derive(Clone, Copy)]
pub enum Field2<'a> {
    Func(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
    Sampled(&'a SampledField),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Young2dOptions {
    /// Level `m` uses `2^m` cells per axis (plus the jump points).
    pub levels: Vec<u32>,
    pub tol: f64,
    /// `[x', x'', y', y'']`; required for closed-form inputs.
    pub domain: Option<[f64; 4]>,
}

impl Default for Young2dOptions {
    fn default() -> Self {
        Self {
            levels: (4..=10).collect(),
            tol: 1e-3,
            domain: Some([0.0, 1.0, 0.0, 1.0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corner {
    /// `F(x_{i-1}, y_{j-1})`.
    Forward,
    /// `F(x_i, y_j)`.
    Backward,
}

/// Matrices of node values for one level.
struct Level {
    nx: usize,
    ny: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

/// Riemann sum over a product grid given node values (row-major over x).
fn level_sum(nx: usize, ny: usize, f: &[f64], g: &[f64], corner: Corner) -> f64 {
    let rows: Vec<f64> = (1..nx)
        .into_par_iter()
        .map(|i| {
            let mut s = KahanSum::new();
            for j in 1..ny {
                let d = (g[i * ny + j] - g[(i - 1) * ny + j]) - (g[i * ny + j - 1] - g[(i - 1) * ny + j - 1]);
                let fv = match corner {
                    Corner::Forward => f[(i - 1) * ny + j - 1],
                    Corner::Backward => f[i * ny + j],
                };
                s.add(fv * d);
            }
            s.value()
        })
        .collect();
    rows.into_iter().collect::<KahanSum>().value()
}

/// Riemann sum `Σ_i Σ_j F(corner) Δ_iΔ_j G` over the full grid of two matched fields.
pub fn riemann_sum_2d(f: &SampledField, g: &SampledField, corner: Corner) -> Result<f64> {
    if f.xs() != g.xs() || f.ys() != g.ys() {
        return Err(Error::invalid("F and G must share a grid"));
    }
    let (nx, ny) = g.shape();
    Ok(level_sum(nx, ny, f.values(), g.values(), corner))
}

fn build_levels(f: Field2, g: Field2, jumps: &JumpSets, opts: &Young2dOptions) -> Result<Vec<Level>> {
    if opts.levels.is_empty() || opts.levels.iter().any(|&m| m > 13) {
        return Err(Error::invalid("levels must be nonempty and at most 13"));
    }
    match (f, g) {
        (Field2::Sampled(fs), Field2::Sampled(gs)) => {
            if fs.xs() != gs.xs() || fs.ys() != gs.ys() {
                return Err(Error::invalid("F and G must share a grid"));
            }
            let hx = jumps
                .h
                .iter()
                .map(|&x| gs.x_index_of(x).ok_or(Error::NotOnGrid(x)))
                .collect::<Result<Vec<_>>>()?;
            let hy = jumps
                .h_prime
                .iter()
                .map(|&y| gs.y_index_of(y).ok_or(Error::NotOnGrid(y)))
                .collect::<Result<Vec<_>>>()?;
            let lx = index_levels(gs.xs().len(), &opts.levels, &hx);
            let ly = index_levels(gs.ys().len(), &opts.levels, &hy);
            let pick = |src: &SampledField, xi: &[usize], yj: &[usize]| {
                let mut v = Vec::with_capacity(xi.len() * yj.len());
                for &i in xi {
                    for &j in yj {
                        v.push(src.at(i, j));
                    }
                }
                v
            };
            Ok(lx
                .iter()
                .zip(ly.iter())
                .map(|(xi, yj)| Level {
                    nx: xi.len(),
                    ny: yj.len(),
                    f: pick(fs, xi, yj),
                    g: pick(gs, xi, yj),
                })
                .collect())
        }
        _ => {
            let [x0, x1, y0, y1] = opts
                .domain
                .ok_or_else(|| Error::invalid("closed-form inputs need a domain"))?;
            if !(x0 < x1 && y0 < y1) {
                return Err(Error::invalid("empty integration domain"));
            }
            if let Some(&x) = jumps.h.iter().find(|&&x| !(x0..=x1).contains(&x)) {
                return Err(Error::OutOfDomain(x, x0, x1));
            }
            if let Some(&y) = jumps.h_prime.iter().find(|&&y| !(y0..=y1).contains(&y)) {
                return Err(Error::OutOfDomain(y, y0, y1));
            }
            let eval = |src: Field2, x: f64, y: f64| -> Result<f64> {
                match src {
                    Field2::Func(h) => Ok(h(x, y)),
                    Field2::Sampled(_) => Err(Error::invalid("cannot mix sampled and closed-form inputs")),
                }
            };
            opts.levels
                .iter()
                .map(|&m| {
                    let xs = merge_points(&uniform_grid(x0, x1, 1 << m), &jumps.h);
                    let ys = merge_points(&uniform_grid(y0, y1, 1 << m), &jumps.h_prime);
                    let mut fv = Vec::with_capacity(xs.len() * ys.len());
                    let mut gv = Vec::with_capacity(xs.len() * ys.len());
                    for &x in &xs {
                        for &y in &ys {
                            fv.push(eval(f, x, y)?);
                            gv.push(eval(g, x, y)?);
                        }
                    }
                    Ok(Level {
                        nx: xs.len(),
                        ny: ys.len(),
                        f: fv,
                        g: gv,
                    })
                })
                .collect()
        }
    }
}

/// Forward and backward sums on the same levels, computed in one pass.
pub fn young_integral_2d_both(
    f: Field2,
    g: Field2,
    jumps: &JumpSets,
    opts: &Young2dOptions,
) -> Result<(IntegralResult, IntegralResult)> {
    let levels = build_levels(f, g, jumps, opts)?;
    let mut fwd = Vec::with_capacity(levels.len());
    let mut bwd = Vec::with_capacity(levels.len());
    for l in &levels {
        let cells = (l.nx - 1) * (l.ny - 1);
        fwd.push((cells, level_sum(l.nx, l.ny, &l.f, &l.g, Corner::Forward)));
        bwd.push((cells, level_sum(l.nx, l.ny, &l.f, &l.g, Corner::Backward)));
    }
    Ok((
        IntegralResult::from_levels(fwd, opts.tol)?,
        IntegralResult::from_levels(bwd, opts.tol)?,
    ))
}

pub fn young_integral_2d(f: Field2, g: Field2, jumps: &JumpSets, opts: &Young2dOptions) -> Result<IntegralResult> {
    let levels = build_levels(f, g, jumps, opts)?;
    let sums = levels
        .iter()
        .map(|l| ((l.nx - 1) * (l.ny - 1), level_sum(l.nx, l.ny, &l.f, &l.g, Corner::Forward)))
        .collect();
    IntegralResult::from_levels(sums, opts.tol)
}

pub fn young_integral_2d_backward(
    f: Field2,
    g: Field2,
    jumps: &JumpSets,
    opts: &Young2dOptions,
) -> Result<IntegralResult> {
    let levels = build_levels(f, g, jumps, opts)?;
    let sums = levels
        .iter()
        .map(|l| ((l.nx - 1) * (l.ny - 1), level_sum(l.nx, l.ny, &l.f, &l.g, Corner::Backward)))
        .collect();
    IntegralResult::from_levels(sums, opts.tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct SummationByParts {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `cells * max|g| * max|L̃|`, the natural size of either side.
    pub scale: f64,
}

/// Discrete summation by parts on a time-by-space grid (first axis `s`, second `x`).
///
/// `lhs = Σ_{j,i} g(s_{j-1}, x_{i-1}) Δ_jΔ_i L̃` and
/// `rhs = Σ_{j,i} L̃(s_j, x_i) Δ_jΔ_i g - Σ_i L̃(T, x_i) Δ_i g(T, ·) + Σ_i L̃(0, x_i) Δ_i g(0, ·)`.
/// The last term vanishes for local times, which start at zero.
pub fn summation_by_parts_2d(g: &SampledField, ltilde: &SampledField) -> Result<SummationByParts> {
    if g.xs() != ltilde.xs() || g.ys() != ltilde.ys() {
        return Err(Error::invalid("g and L̃ must share a grid"));
    }
    let (ns, nx) = g.shape();
    if (0..ns).any(|j| ltilde.at(j, 0) != 0.0 || ltilde.at(j, nx - 1) != 0.0) {
        return Err(Error::invalid("L̃ must vanish on both x-boundary columns"));
    }
    let dd = |a: &SampledField, j: usize, i: usize| {
        (a.at(j, i) - a.at(j - 1, i)) - (a.at(j, i - 1) - a.at(j - 1, i - 1))
    };
    let (mut lhs, mut rhs) = (KahanSum::new(), KahanSum::new());
    for j in 1..ns {
        for i in 1..nx {
            lhs.add(g.at(j - 1, i - 1) * dd(ltilde, j, i));
            rhs.add(ltilde.at(j, i) * dd(g, j, i));
        }
    }
    for i in 1..nx {
        rhs.add(-ltilde.at(ns - 1, i) * (g.at(ns - 1, i) - g.at(ns - 1, i - 1)));
        rhs.add(ltilde.at(0, i) * (g.at(0, i) - g.at(0, i - 1)));
    }
    let (lhs, rhs) = (lhs.value(), rhs.value());
    let scale = ((ns - 1) * (nx - 1)) as f64 * g.max_abs() * ltilde.max_abs();
    Ok(SummationByParts {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementTrace {
    pub x_sizes: Vec<usize>,
    pub y_sizes: Vec<usize>,
    /// `sums[p][q] = S(E_p, E'_q)`.
    pub sums: Vec<Vec<f64>>,
    /// Mixed differences `S(p+1,q+1) - S(p+1,q) - S(p,q+1) + S(p,q)`.
    pub mixed_differences: Vec<Vec<f64>>,
    /// A quarter of the smallest gap in the finest partitions.
    pub strip_delta: (f64, f64),
}

/// Nested partitions splitting every cell whose mass exceeds `2^{-p}` of the total.
fn equal_mass_partitions(mass: &[f64], levels: usize) -> Vec<Vec<usize>> {
    let n = mass.len() + 1;
    let mut prefix = vec![0.0; n];
    for (k, m) in mass.iter().enumerate() {
        prefix[k + 1] = prefix[k] + m;
    }
    let total = prefix[n - 1];
    let mut parts = vec![vec![0, n - 1]];
    for p in 1..=levels {
        let prev = parts.last().expect("level 0 exists").clone();
        let threshold = total / (1u64 << p.min(62)) as f64;
        let mut next = vec![0];
        for w in prev.windows(2) {
            let (a, b) = (w[0], w[1]);
            let cell = prefix[b] - prefix[a];
            if b - a > 1 && cell > threshold {
                let target = prefix[a] + 0.5 * cell;
                let mut k = (a + 1..b)
                    .min_by(|&u, &v| (prefix[u] - target).abs().total_cmp(&(prefix[v] - target).abs()))
                    .expect("interior point exists");
                k = k.clamp(a + 1, b - 1);
                next.push(k);
            }
            next.push(b);
        }
        parts.push(next);
    }
    parts
}

/// `S(E_p, E'_q)` for `p ≤ pmax`, `q ≤ qmax`, with partitions built by
/// equal-mass insertion from `F`'s largest single-cell `Φ`/`Ψ` increments.
pub fn dyadic_refinement_trace(
    f: &SampledField,
    g: &SampledField,
    pmax: usize,
    qmax: usize,
    phi: &ConvexGauge,
    psi: &ConvexGauge,
) -> Result<RefinementTrace> {
    if f.xs() != g.xs() || f.ys() != g.ys() {
        return Err(Error::invalid("F and G must share a grid"));
    }
    let (nx, ny) = f.shape();
    let xmass: Vec<f64> = (1..nx)
        .map(|i| (0..ny).map(|j| phi.apply((f.at(i, j) - f.at(i - 1, j)).abs())).fold(0.0, f64::max))
        .collect();
    let ymass: Vec<f64> = (1..ny)
        .map(|j| (0..nx).map(|i| psi.apply((f.at(i, j) - f.at(i, j - 1)).abs())).fold(0.0, f64::max))
        .collect();
    // A constant F carries no mass; fall back to uniform mass so the partitions still refine.
    let fallback = |m: Vec<f64>| if m.iter().all(|&v| v == 0.0) { vec![1.0; m.len()] } else { m };
    let ex = equal_mass_partitions(&fallback(xmass), pmax);
    let ey = equal_mass_partitions(&fallback(ymass), qmax);
    let mut sums = vec![vec![0.0; qmax + 1]; pmax + 1];
    for (p, xi) in ex.iter().enumerate() {
        for (q, yj) in ey.iter().enumerate() {
            let mut s = KahanSum::new();
            for a in xi.windows(2) {
                for b in yj.windows(2) {
                    let d = (g.at(a[1], b[1]) - g.at(a[0], b[1])) - (g.at(a[1], b[0]) - g.at(a[0], b[0]));
                    s.add(f.at(a[0], b[0]) * d);
                }
            }
            sums[p][q] = s.value();
        }
    }
    let mixed = (0..pmax)
        .map(|p| {
            (0..qmax)
                .map(|q| sums[p + 1][q + 1] - sums[p + 1][q] - sums[p][q + 1] + sums[p][q])
                .collect()
        })
        .collect();
    let min_gap = |axis: &[f64], idx: &[usize]| {
        idx.windows(2)
            .map(|w| axis[w[1]] - axis[w[0]])
            .fold(f64::INFINITY, f64::min)
    };
    let strip_delta = (
        0.25 * min_gap(f.xs(), ex.last().expect("nonempty")),
        0.25 * min_gap(f.ys(), ey.last().expect("nonempty")),
    );
    Ok(RefinementTrace {
        x_sizes: ex.iter().map(Vec::len).collect(),
        y_sizes: ey.iter().map(Vec::len).collect(),
        sums,
        mixed_differences: mixed,
        strip_delta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub label: String,
    pub value: f64,
    pub difference: f64,
    /// Largest `|F_k - F|` and `|G_k - G|` over the spot-check nodes.
    pub sup_f: f64,
    pub sup_g: f64,
    /// Uniform-in-y `Φ`-variation of `G_k` along x.
    pub variation_x: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
    pub decaying: bool,
}

/// One member of an approximating sequence `(F_k, G_k)`.
pub struct Approximant {
    pub label: String,
    pub f: SampledField,
    pub g: SampledField,
}

/// Compare `∫∫ F_k dG_k` with `∫∫ F dG` on the common grid (full-grid forward sums).
pub fn dominated_convergence_test(
    seq: &[Approximant],
    f: &SampledField,
    g: &SampledField,
    jumps: &JumpSets,
    gauge: &ConvexGauge,
    tol: f64,
) -> Result<ConvergenceTable> {
    if seq.is_empty() {
        return Err(Error::invalid("empty approximating sequence"));
    }
    for x in &jumps.h {
        g.x_index_of(*x).ok_or(Error::NotOnGrid(*x))?;
    }
    for y in &jumps.h_prime {
        g.y_index_of(*y).ok_or(Error::NotOnGrid(*y))?;
    }
    let reference = riemann_sum_2d(f, g, Corner::Forward)?;
    let total = g.values().len();
    let stride = (total / 1000).max(1);
    let sup = |a: &SampledField, b: &SampledField| {
        (0..total)
            .step_by(stride)
            .map(|k| (a.values()[k] - b.values()[k]).abs())
            .fold(0.0, f64::max)
    };
    let mut rows = Vec::with_capacity(seq.len());
    for a in seq {
        let value = riemann_sum_2d(&a.f, &a.g, Corner::Forward)?;
        rows.push(ConvergenceRow {
            label: a.label.clone(),
            value,
            difference: (value - reference).abs(),
            sup_f: sup(&a.f, f),
            sup_g: sup(&a.g, g),
            variation_x: uniform_axis_variation(&a.g, Axis::X, gauge)?,
        });
    }
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    if rows.len() > 1 && (last.sup_f > first.sup_f || last.sup_g > first.sup_g) {
        return Err(Error::UniformConvergence(format!(
            "sup distance grew from ({}, {}) to ({}, {})",
            first.sup_f, first.sup_g, last.sup_f, last.sup_g
        )));
    }
    let decaying = last.difference < first.difference / 10.0 || last.difference < tol;
    Ok(ConvergenceTable {
        reference,
        rows,
        decaying,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_examples() {
        assert!(check_series_condition(1.0, 1.0, 0.0, 1000).unwrap().feasible);
        assert!(!check_series_condition(2.0, 1.0, 0.0, 1000).unwrap().feasible);
        let c = check_series_condition(1.4, 1.0, 0.0, 1000).unwrap();
        assert!(c.feasible);
        assert!((c.alpha_interval.0 - 4.0 / 7.0).abs() < 1e-12);
        assert!((c.alpha_interval.1 - 5.0 / 7.0).abs() < 1e-12);
        let alpha = c.alpha.unwrap();
        assert!(alpha > 4.0 / 7.0 && alpha < 5.0 / 7.0);
        assert!(c.partial_sums.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(c.partial_sums.last().unwrap().1 <= c.tail_bound.unwrap());
        assert!(check_series_condition(0.5, 1.0, 0.0, 1000).is_err());
        assert!(check_series_condition(1.0, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn large_delta_is_shrunk() {
        let c = check_series_condition(1.2, 1.0, 50.0, 1000).unwrap();
        assert!(c.feasible && c.delta < 50.0);
        let (a, b) = c.exponents.unwrap();
        assert!(a > 1.0 && b > 1.0);
    }

    #[test]
    fn additive_and_constant_cases() {
        let opts = Young2dOptions {
            levels: vec![3, 4, 5],
            ..Default::default()
        };
        let none = JumpSets::default();
        let g = |x: f64, y: f64| x.sin() + y * y;
        let f = |x: f64, y: f64| x * y + 1.0;
        let r = young_integral_2d(Field2::Func(&f), Field2::Func(&g), &none, &opts).unwrap();
        assert!(r.levels.iter().all(|(_, s)| s.abs() < 1e-14));
        let one = |_: f64, _: f64| 1.0;
        let g = |x: f64, y: f64| (x * y).exp();
        let exact = 1f64.exp() - 1.0 - 1.0 + 1.0;
        let (fw, bw) = young_integral_2d_both(Field2::Func(&one), Field2::Func(&g), &none, &opts).unwrap();
        for ((_, a), (_, b)) in fw.levels.iter().zip(&bw.levels) {
            assert!((a - exact).abs() < 1e-12 && (b - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn step_integrand_forward_backward_differ() {
        let xs = vec![0.0, 0.5, 1.0];
        let ys = vec![0.0, 1.0];
        let f = SampledField::from_fn(xs.clone(), ys.clone(), |x, _| if x > 0.25 { 1.0 } else { 0.0 }).unwrap();
        let g = SampledField::from_fn(xs, ys, |x, y| x * y).unwrap();
        let fw = riemann_sum_2d(&f, &g, Corner::Forward).unwrap();
        let bw = riemann_sum_2d(&f, &g, Corner::Backward).unwrap();
        // the cell [0, 0.5] carries the discrepancy 1 * 0.5
        assert!((bw - fw - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_jumps_must_be_nodes() {
        let xs = uniform_grid(0.0, 1.0, 16);
        let g = SampledField::from_fn(xs.clone(), xs, |x, y| x * y).unwrap();
        let jumps = JumpSets {
            h: vec![0.3],
            h_prime: vec![],
        };
        let e = young_integral_2d(Field2::Sampled(&g), Field2::Sampled(&g), &jumps, &Young2dOptions::default());
        assert!(matches!(e, Err(Error::NotOnGrid(_))));
    }

    #[test]
    fn summation_by_parts_examples() {
        let s = uniform_grid(0.0, 1.0, 5);
        let x = uniform_grid(-1.0, 1.0, 8);
        let tent = SampledField::from_fn(s.clone(), x.clone(), |s, x| s * (1.0 - x.abs()).max(0.0)).unwrap();
        let g = SampledField::from_fn(s.clone(), x.clone(), |s, x| s * x).unwrap();
        let r = summation_by_parts_2d(&g, &tent).unwrap();
        assert!(r.residual < 1e-12 * r.scale.max(1.0));
        let c = SampledField::from_fn(s.clone(), x.clone(), |_, _| 2.0).unwrap();
        let r = summation_by_parts_2d(&c, &tent).unwrap();
        assert!(r.lhs.abs() < 1e-15 && r.rhs.abs() < 1e-15);
        let bad = SampledField::from_fn(s, x, |s, x| s + x).unwrap();
        assert!(summation_by_parts_2d(&g, &bad).is_err());
    }

    #[test]
    fn trace_shapes() {
        let xs = uniform_grid(0.0, 1.0, 32);
        let f = SampledField::from_fn(xs.clone(), xs.clone(), |x, y| x * y).unwrap();
        let one = ConvexGauge::Power(1.0);
        let t = dyadic_refinement_trace(&f, &f, 0, 0, &one, &one).unwrap();
        assert_eq!(t.sums, vec![vec![0.0]]);
        let t = dyadic_refinement_trace(&f, &f, 4, 4, &one, &one).unwrap();
        assert_eq!(t.x_sizes, vec![2, 3, 5, 9, 17]);
        let zero = SampledField::from_fn(xs.clone(), xs, |_, _| 0.0).unwrap();
        let t = dyadic_refinement_trace(&zero, &f, 3, 3, &one, &one).unwrap();
        assert!(t.sums.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn dominated_convergence_identity_sequence() {
        let xs = uniform_grid(0.0, 1.0, 16);
        let f = SampledField::from_fn(xs.clone(), xs.clone(), |x, y| (x + y).cos()).unwrap();
        let g = SampledField::from_fn(xs.clone(), xs, |x, y| x * y).unwrap();
        let seq: Vec<Approximant> = (0..3)
            .map(|k| Approximant {
                label: k.to_string(),
                f: f.clone(),
                g: g.clone(),
            })
            .collect();
        let t = dominated_convergence_test(&seq, &f, &g, &JumpSets::default(), &ConvexGauge::Power(1.0), 1e-9).unwrap();
        assert!(t.rows.iter().all(|r| r.difference == 0.0));
        assert!(t.decaying);
    }
}
