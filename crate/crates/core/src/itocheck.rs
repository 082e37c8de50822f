//! Pathwise checks of the generalized Itô formulas on simulated paths.
//!
//! Time-independent case:
//! `f(X_T) = f(X_0) + Σ ∇⁻f(X_k) ΔX_k − ∫ ∇⁻f(x) d_x L_T^x`.
//!
//! Time-dependent case:
//! `f(T, X_T) = f(0, X_0) + Σ ∂⁻_s f Δs + Σ ∇⁻f ΔX − ∫∫ ∇⁻f d_{s,x} L`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{median, merge_points, KahanSum};
use crate::pathcore::{mollify_1d, mollify_2d, Func1, Func2, MollifierSpec};
use crate::stochastic::{
    coarsen_normals, local_time_terminal, simulate, simulate_with_normals, step_contribution, step_levels,
    SemimartingaleSpec, Simulation,
};
use crate::variation::{phi_variation_values, ConvexGauge};
use crate::young::left_point_sum;
use crate::young2d::check_series_condition;
use crate::rng;

pub type Fn1<'a> = &'a (dyn Fn(f64) -> f64 + Sync);
pub type Fn2<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ItoOptions {
    /// Step counts, ascending; each must divide the last.
    pub schedule: Vec<usize>,
    /// Level spacing of the time-independent check is `level_factor * T / nSteps`,
    /// capped by the largest path increment.
    pub level_factor: f64,
    /// The time-dependent check, whose cost grows with the number of levels,
    /// uses `level_factor_time_dependent * sqrt(T / nSteps)` instead.
    pub level_factor_time_dependent: f64,
    /// Extra points added to every level grid.
    pub singular_points: Vec<f64>,
    /// Asserted variation exponent of `∇⁻f` in `x` (must be < 2).
    pub gamma: f64,
    /// Asserted exponents `(p, q)` for the two-parameter integral.
    pub pq: (f64, f64),
    pub delta: f64,
    pub force: bool,
}

impl Default for ItoOptions {
    fn default() -> Self {
        Self {
            schedule: vec![1 << 10, 1 << 12, 1 << 14],
            level_factor: 1.0,
            level_factor_time_dependent: 0.5,
            singular_points: Vec::new(),
            gamma: 1.5,
            pq: (1.4, 1.0),
            delta: 0.0,
            force: false,
        }
    }
}

pub const DEFAULT_X0: f64 = 0.2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ItoTerms {
    pub f_end: f64,
    pub f_start: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ds_term: Option<f64>,
    pub stochastic_integral: f64,
    pub local_time_term: f64,
    /// Direct `Σ g ΔΔL` sum, reported next to the summation-by-parts value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_local_time_term: Option<f64>,
}

impl ItoTerms {
    pub fn signed_residual(&self) -> f64 {
        self.f_end - self.f_start - self.ds_term.unwrap_or(0.0) - self.stochastic_integral + self.local_time_term
    }

    pub fn residual(&self) -> f64 {
        self.signed_residual().abs()
    }

    /// Right-hand side of the formula, i.e. the predicted `f` at the end point.
    pub fn predicted_end(&self) -> f64 {
        self.f_start + self.ds_term.unwrap_or(0.0) + self.stochastic_integral - self.local_time_term
    }

    /// Magnitude of the largest term, for relative tolerances.
    pub fn scale(&self) -> f64 {
        [
            self.f_end,
            self.f_start,
            self.ds_term.unwrap_or(0.0),
            self.stochastic_integral,
            self.local_time_term,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItoReport {
    /// Terms at the finest level.
    pub terms: ItoTerms,
    pub residual: f64,
    pub refinement: Vec<(usize, f64)>,
    pub seeds: Vec<u64>,
    pub replicate: u64,
    pub x0: f64,
    /// Level spacing and largest `|ΔX|` at the finest level.
    pub level_spacing: f64,
    pub max_increment: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ensemble {
    pub reports: Vec<ItoReport>,
    pub median_refinement: Vec<(usize, f64)>,
}

/// Simulations at every step count of `schedule`, all driven by the same
/// finest-level normals.
pub fn nested_simulations(spec: &SemimartingaleSpec, schedule: &[usize]) -> Result<Vec<Simulation>> {
    let finest = *schedule.last().ok_or_else(|| Error::invalid("empty refinement schedule"))?;
    if schedule.windows(2).any(|w| w[0] >= w[1]) || schedule.iter().any(|&n| n == 0 || finest % n != 0) {
        return Err(Error::invalid(format!(
            "schedule {schedule:?} must be strictly increasing with every entry dividing the last"
        )));
    }
    let z = rng::normals(spec.seed, spec.replicate, finest);
    schedule
        .iter()
        .map(|&n| {
            let s = SemimartingaleSpec { n_steps: n, ..spec.clone() };
            simulate_with_normals(&s, &coarsen_normals(&z, finest / n))
        })
        .collect()
}

fn level_spacing(sim: &Simulation, factor: f64, power: f64) -> Result<f64> {
    if !(factor > 0.0) {
        return Err(Error::invalid(format!("level factor must be positive, got {factor}")));
    }
    let t_end = sim.times[sim.times.len() - 1];
    let base = factor * (t_end / sim.n_steps() as f64).powf(power);
    let m = sim.max_abs_increment();
    Ok(if m > 0.0 { base.min(m) } else { base })
}

/// Grid `k * dx` covering the path range with two spare levels on each side.
pub fn level_grid(sim: &Simulation, dx: f64, extra: &[f64]) -> Vec<f64> {
    let (lo, hi) = sim.range();
    let k0 = (lo / dx).floor() as i64 - 2;
    let k1 = (hi / dx).ceil() as i64 + 2;
    let grid: Vec<f64> = (k0..=k1).map(|k| k as f64 * dx).collect();
    merge_points(&grid, extra)
}

fn kahan_steps(sim: &Simulation, mut term: impl FnMut(usize) -> f64) -> f64 {
    let mut s = KahanSum::new();
    for k in 0..sim.n_steps() {
        s.add(term(k));
    }
    s.value()
}

struct LevelResult {
    terms: ItoTerms,
    dx: f64,
    levels: Vec<f64>,
}

fn time_independent_level(f: Fn1, grad: Option<Fn1>, sim: &Simulation, opts: &ItoOptions) -> Result<LevelResult> {
    let dx = level_spacing(sim, opts.level_factor, 1.0)?;
    let levels = level_grid(sim, dx, &opts.singular_points);
    let g = |x: f64| match grad {
        Some(g) => g(x),
        None => (f(x) - f(x - dx)) / dx,
    };
    let l = local_time_terminal(sim, &levels)?;
    let gl: Vec<f64> = levels.iter().map(|&x| g(x)).collect();
    let x = &sim.x;
    let terms = ItoTerms {
        f_end: f(x[x.len() - 1]),
        f_start: f(x[0]),
        ds_term: None,
        stochastic_integral: kahan_steps(sim, |k| g(x[k]) * (x[k + 1] - x[k])),
        local_time_term: left_point_sum(&gl, &l),
        direct_local_time_term: None,
    };
    if !terms.signed_residual().is_finite() {
        return Err(Error::NonFinite("Itô terms".into()));
    }
    Ok(LevelResult { terms, dx, levels })
}

fn start_notes(spec: &SemimartingaleSpec, opts: &ItoOptions) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    if !(opts.gamma < 2.0) {
        let msg = format!("asserted variation exponent {} of the gradient is not below 2", opts.gamma);
        if !opts.force {
            return Err(Error::Hypothesis(msg));
        }
        notes.push(format!("forced: {msg}"));
    }
    if opts.singular_points.contains(&spec.x0) {
        notes.push(format!("path starts on the singular point {}", spec.x0));
    }
    Ok(notes)
}

/// Every k-th value (plus the last) so that at most ~512 remain; keeps the DP cheap.
fn thin(values: &[f64]) -> Vec<f64> {
    let k = values.len().div_ceil(512).max(1);
    let mut out: Vec<f64> = values.iter().step_by(k).copied().collect();
    if (values.len() - 1) % k != 0 {
        out.push(values[values.len() - 1]);
    }
    out
}

fn variation_note(values_coarse: &[f64], values_fine: &[f64], gamma: f64) -> Result<Option<String>> {
    let gauge = ConvexGauge::power(gamma.max(1.0))?;
    let a = phi_variation_values(&thin(values_coarse), &gauge).0;
    let b = phi_variation_values(&thin(values_fine), &gauge).0;
    Ok((b > 1.5 * a && b - a > 1e-12).then(|| {
        format!("{gamma}-variation of the gradient grows from {a:.6e} to {b:.6e} under refinement (grid proxy)")
    }))
}

fn report(levels: Vec<(usize, LevelResult)>, sim: &Simulation, spec: &SemimartingaleSpec, notes: Vec<String>) -> ItoReport {
    let refinement = levels.iter().map(|(n, r)| (*n, r.terms.residual())).collect();
    let (_, last) = levels.into_iter().last().expect("nonempty schedule");
    ItoReport {
        residual: last.terms.residual(),
        terms: last.terms,
        refinement,
        seeds: vec![spec.seed],
        replicate: spec.replicate,
        x0: spec.x0,
        level_spacing: last.dx,
        max_increment: sim.max_abs_increment(),
        notes,
    }
}

/// Checks the time-independent formula at every step count of the schedule.
/// Without `grad`, `∇⁻f` is the left difference quotient at the level spacing.
pub fn verify_ito_time_independent(
    f: Fn1,
    grad: Option<Fn1>,
    spec: &SemimartingaleSpec,
    opts: &ItoOptions,
) -> Result<ItoReport> {
    let mut notes = start_notes(spec, opts)?;
    let sims = nested_simulations(spec, &opts.schedule)?;
    let levels = sims
        .iter()
        .map(|sim| Ok((sim.n_steps(), time_independent_level(f, grad, sim, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    if let (Some((_, first)), Some((_, last))) = (levels.first(), levels.last()) {
        let gv = |r: &LevelResult| -> Vec<f64> {
            r.levels
                .iter()
                .map(|&x| match grad {
                    Some(g) => g(x),
                    None => (f(x) - f(x - r.dx)) / r.dx,
                })
                .collect()
        };
        notes.extend(variation_note(&gv(first), &gv(last), opts.gamma)?);
    }
    Ok(report(levels, sims.last().unwrap(), spec, notes))
}

struct TimeDependent<'a> {
    f: Fn2<'a>,
    dt: Option<Fn2<'a>>,
    grad: Option<Fn2<'a>>,
}

impl TimeDependent<'_> {
    fn dt(&self, s: f64, x: f64, h: f64) -> f64 {
        match self.dt {
            Some(d) => d(s, x),
            None if s - h >= 0.0 => ((self.f)(s, x) - (self.f)(s - h, x)) / h,
            None => ((self.f)(s + h, x) - (self.f)(s, x)) / h,
        }
    }

    fn grad(&self, s: f64, x: f64, h: f64) -> f64 {
        match self.grad {
            Some(g) => g(s, x),
            None => ((self.f)(s, x) - (self.f)(s, x - h)) / h,
        }
    }
}

fn time_dependent_level(td: &TimeDependent, sim: &Simulation, opts: &ItoOptions, sbp: bool) -> Result<LevelResult> {
    let dx = level_spacing(sim, opts.level_factor_time_dependent, 0.5)?;
    let levels = level_grid(sim, dx, &opts.singular_points);
    let nl = levels.len();
    let n = sim.n_steps();
    let (t, x) = (&sim.times, &sim.x);
    let mut row = vec![0.0; nl];
    let (mut ds, mut stoch, mut direct, mut sbp_sum) =
        (KahanSum::new(), KahanSum::new(), KahanSum::new(), KahanSum::new());
    let (mut gp, mut gc) = (vec![0.0; nl], vec![0.0; nl]);
    // index range on which `gp` holds g(s_k, ·)
    let (mut pa, mut pb) = (0usize, 0usize);
    let (mut xmin, mut xmax) = (x[0], x[0]);
    let mut local = Vec::new();
    for k in 0..n {
        let (s, a, b) = (t[k], x[k], x[k + 1]);
        let h = t[k + 1] - s;
        ds.add(td.dt(s, a, h) * h);
        stoch.add(td.grad(s, a, dx) * (b - a));
        // Σ_i δ_i (g(s_k, x_{i-1}) - g(s_k, x_i)) with δ the row increment
        let r = step_levels(&levels, a, b);
        if !r.is_empty() {
            local.clear();
            local.extend((r.start - 1..r.end).map(|i| td.grad(s, levels[i], dx)));
            for i in r.clone() {
                let d = step_contribution(a, b, levels[i]);
                row[i] += d;
                let j = i - r.start;
                direct.add(d * (local[j] - local[j + 1]));
            }
        }
        if !sbp {
            continue;
        }
        xmin = xmin.min(b);
        xmax = xmax.max(b);
        let lo = levels.partition_point(|&l| l < xmin);
        let hi = levels.partition_point(|&l| l < xmax);
        if lo >= hi {
            continue;
        }
        let (na, nb) = (lo - 1, hi);
        if pa >= pb {
            for i in na..nb {
                gp[i] = td.grad(s, levels[i], dx);
            }
        } else {
            for i in (na..pa).chain(pb..nb) {
                gp[i] = td.grad(s, levels[i], dx);
            }
        }
        let s1 = t[k + 1];
        for i in na..nb {
            gc[i] = td.grad(s1, levels[i], dx);
        }
        for i in lo..hi {
            sbp_sum.add(row[i] * ((gc[i] - gc[i - 1]) - (gp[i] - gp[i - 1])));
        }
        std::mem::swap(&mut gp, &mut gc);
        (pa, pb) = (na, nb);
    }
    if sbp && pa < pb {
        for i in pa + 1..pb {
            sbp_sum.add(-row[i] * (gp[i] - gp[i - 1]));
        }
    }
    let direct = direct.value();
    let terms = ItoTerms {
        f_end: (td.f)(t[n], x[n]),
        f_start: (td.f)(t[0], x[0]),
        ds_term: Some(ds.value()),
        stochastic_integral: stoch.value(),
        local_time_term: if sbp { sbp_sum.value() } else { direct },
        direct_local_time_term: Some(direct),
    };
    if !terms.signed_residual().is_finite() {
        return Err(Error::NonFinite("Itô terms".into()));
    }
    Ok(LevelResult { terms, dx, levels })
}

/// Checks the time-dependent formula. The local-time term is computed by
/// summation by parts over the running support of `L`; the direct sum is
/// reported alongside. Simulated `L` is continuous in `x`, so there is no
/// jump part.
pub fn verify_ito_time_dependent(
    f: Fn2,
    dt: Option<Fn2>,
    grad: Option<Fn2>,
    spec: &SemimartingaleSpec,
    opts: &ItoOptions,
) -> Result<ItoReport> {
    let mut notes = start_notes(spec, opts)?;
    let (p, q) = opts.pq;
    let cond = check_series_condition(p, q, opts.delta, 10_000)?;
    if !cond.feasible {
        let msg = format!("(p, q) = ({p}, {q}) violates 2q + 1 > 2pq");
        if !opts.force {
            return Err(Error::Hypothesis(msg));
        }
        notes.push(format!("forced: {msg}"));
    }
    let td = TimeDependent { f, dt, grad };
    let sims = nested_simulations(spec, &opts.schedule)?;
    let levels = sims
        .iter()
        .map(|sim| Ok((sim.n_steps(), time_dependent_level(&td, sim, opts, true)?)))
        .collect::<Result<Vec<_>>>()?;
    if let (Some((_, first)), Some((_, last))) = (levels.first(), levels.last()) {
        let t_end = spec.t_end;
        for s in [0.5 * t_end, t_end] {
            let gv = |r: &LevelResult| -> Vec<f64> { r.levels.iter().map(|&x| td.grad(s, x, r.dx)).collect() };
            notes.extend(variation_note(&gv(first), &gv(last), opts.gamma)?);
        }
    }
    Ok(report(levels, sims.last().unwrap(), spec, notes))
}

/// Runs `check` on replicates `0..count` in parallel and takes medians per level.
pub fn run_ensemble<F>(spec: &SemimartingaleSpec, count: u64, check: F) -> Result<Ensemble>
where
    F: Fn(&SemimartingaleSpec) -> Result<ItoReport> + Sync,
{
    if count == 0 {
        return Err(Error::invalid("at least one replicate is required"));
    }
    let reports = (0..count)
        .into_par_iter()
        .map(|r| check(&SemimartingaleSpec { replicate: r, ..spec.clone() }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        median_refinement: median_refinement(&reports),
        reports,
    })
}

pub fn median_refinement(reports: &[ItoReport]) -> Vec<(usize, f64)> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    (0..first.refinement.len())
        .map(|j| {
            let vals: Vec<f64> = reports.iter().map(|r| r.refinement[j].1).collect();
            (first.refinement[j].0, median(&vals))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifiedRow {
    pub n: f64,
    /// Right-hand side of the formula for `f_n`.
    pub mollified_value: f64,
    pub mollified_residual: f64,
    /// `|mollified_value - young_value|`; shrinks as `f_n -> f`.
    pub value_gap: f64,
    /// `|mollified_residual - young_residual|`; removes the shift `f_n - f`
    /// at the end point, so it is at rounding level for polynomials.
    pub residual_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifiedTable {
    pub n_steps: usize,
    /// Right-hand side and signed residual of the formula for `f` itself.
    pub young_value: f64,
    pub young_residual: f64,
    pub rows: Vec<MollifiedRow>,
}

impl MollifiedTable {
    fn new(n_steps: usize, young: &ItoTerms, routes: Vec<(f64, ItoTerms)>) -> Self {
        let (yv, yr) = (young.predicted_end(), young.signed_residual());
        let rows = routes
            .into_iter()
            .map(|(n, t)| {
                let (v, r) = (t.predicted_end(), t.signed_residual());
                MollifiedRow {
                    n,
                    mollified_value: v,
                    mollified_residual: r,
                    value_gap: (v - yv).abs(),
                    residual_gap: (r - yr).abs(),
                }
            })
            .collect();
        Self {
            n_steps,
            young_value: yv,
            young_residual: yr,
            rows,
        }
    }
}

/// Compares the formula for the mollified `f_n` with the one for `f` on a
/// single path of `spec.n_steps` steps and a common level grid.
pub fn mollified_route_check(
    f: Func1,
    grad: Option<Fn1>,
    spec: &SemimartingaleSpec,
    orders: &[f64],
    mollifier: Arc<MollifierSpec>,
    opts: &ItoOptions,
) -> Result<MollifiedTable> {
    let sim = simulate(spec)?;
    let young = time_independent_level(&*f, grad, &sim, opts)?.terms;
    let routes = orders
        .iter()
        .map(|&n| {
            let fnn = mollify_1d(f.clone(), n, mollifier.clone())?;
            let value = |x: f64| fnn.eval(x).unwrap_or(f64::NAN);
            let deriv = |x: f64| fnn.derivative(x).unwrap_or(f64::NAN);
            Ok((n, time_independent_level(&value, Some(&deriv), &sim, opts)?.terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MollifiedTable::new(sim.n_steps(), &young, routes))
}

/// Time-dependent variant; both routes use the direct two-parameter sum.
pub fn mollified_route_check_time_dependent(
    f: Func2,
    dt: Option<Fn2>,
    grad: Option<Fn2>,
    spec: &SemimartingaleSpec,
    orders: &[f64],
    mollifier: Arc<MollifierSpec>,
    opts: &ItoOptions,
) -> Result<MollifiedTable> {
    let sim = simulate(spec)?;
    let td = TimeDependent { f: &*f, dt, grad };
    let young = time_dependent_level(&td, &sim, opts, false)?.terms;
    let routes = orders
        .iter()
        .map(|&n| {
            let fnn = mollify_2d(f.clone(), n, mollifier.clone(), None)?;
            let value = |s: f64, x: f64| fnn.eval(s, x).unwrap_or(f64::NAN);
            let ds = |s: f64, x: f64| fnn.ds(s, x).unwrap_or(f64::NAN);
            let dx = |s: f64, x: f64| fnn.dx(s, x).unwrap_or(f64::NAN);
            let tdn = TimeDependent {
                f: &value,
                dt: Some(&ds),
                grad: Some(&dx),
            };
            Ok((n, time_dependent_level(&tdn, &sim, opts, false)?.terms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MollifiedTable::new(sim.n_steps(), &young, routes))
}

/// `Func1` from a plain closure.
pub fn func1(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Func1 {
    Arc::new(f)
}

/// `Func2` from a plain closure.
pub fn func2(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Func2 {
    Arc::new(f)
}
