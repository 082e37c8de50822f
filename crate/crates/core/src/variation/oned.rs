use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::pathcore::{Partition1D, SampledPath};
use crate::variation::{ConvexGauge, Exactness, VariationReport, Witness};

/// `Σ Φ(|v[i_k] - v[i_{k-1}]|)` over a partition, summed left to right.
///
/// Plain summation on purpose: the dynamic program accumulates along the
/// witness chain in the same order, so the two agree bit for bit.
pub fn partition_sum(values: &[f64], indices: &[usize], gauge: &ConvexGauge) -> f64 {
    let mut s = 0.0;
    for w in indices.windows(2) {
        s += gauge.apply((values[w[1]] - values[w[0]]).abs());
    }
    s
}

/// Supremum of `Σ Φ(|Δ|)` over all partitions of the index range, with the
/// smallest-index predecessor kept on ties. Returns `(value, witness indices)`.
pub fn phi_variation_values(values: &[f64], gauge: &ConvexGauge) -> (f64, Vec<usize>) {
    let n = values.len();
    if n < 2 {
        return (0.0, (0..n).collect());
    }
    let mut best = vec![0.0f64; n];
    let mut pred = vec![0usize; n];
    for j in 1..n {
        let vj = values[j];
        let mut bv = f64::NEG_INFINITY;
        let mut bi = 0;
        for i in 0..j {
            let cand = best[i] + gauge.apply((vj - values[i]).abs());
            if cand > bv {
                bv = cand;
                bi = i;
            }
        }
        best[j] = bv;
        pred[j] = bi;
    }
    let mut witness = vec![n - 1];
    let mut j = n - 1;
    while j > 0 {
        j = pred[j];
        witness.push(j);
    }
    witness.reverse();
    let value = partition_sum(values, &witness, gauge);
    (value, witness)
}

pub fn phi_variation_exact(path: &SampledPath, gauge: &ConvexGauge) -> Result<VariationReport> {
    gauge.validate()?;
    let (value, witness) = phi_variation_values(path.values(), gauge);
    Ok(VariationReport {
        exponents: json!({ "phi": gauge.descriptor() }),
        value,
        witness: Witness::one(witness),
        exactness: Exactness::ExactOnGrid,
    })
}

pub fn p_variation_exact(path: &SampledPath, p: f64) -> Result<VariationReport> {
    let gauge = ConvexGauge::power(p)?;
    let (value, witness) = phi_variation_values(path.values(), &gauge);
    Ok(VariationReport {
        exponents: json!({ "p": p }),
        value,
        witness: Witness::one(witness),
        exactness: Exactness::ExactOnGrid,
    })
}

/// Brute-force supremum over every partition (at most 20 interior points).
pub fn phi_variation_enumerate(values: &[f64], gauge: &ConvexGauge) -> Result<(f64, Partition1D)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("need at least two values"));
    }
    let interior = n - 2;
    if interior > 20 {
        return Err(Error::invalid("enumeration limited to 20 interior points"));
    }
    let mut best = (f64::NEG_INFINITY, Partition1D::full(n));
    for mask in 0..(1u64 << interior) {
        let part = Partition1D::from_interior_mask(mask, n);
        let v = partition_sum(values, part.indices(), gauge);
        if v > best.0 {
            best = (v, part);
        }
    }
    Ok(best)
}

/// Partial sums of `c Σ_{n=1}^{N} n^γ Σ_k |f(a_k^n) - f(a_{k-1}^n)|^p`.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicBound {
    pub p: f64,
    pub gamma: f64,
    pub c: f64,
    /// Partial sums for `N = 1, 2, ...`; the last entry is the bound.
    pub partial_sums: Vec<f64>,
    pub value: f64,
    pub exactness: Exactness,
}

/// Default constant `2^{p-1} (Σ_n n^{-γ/(p-1)})^{p-1}` (`1` when `p = 1`).
pub fn default_dyadic_constant(p: f64, gamma: f64) -> Result<f64> {
    check_dyadic(p, gamma)?;
    if p == 1.0 {
        return Ok(1.0);
    }
    let s = gamma / (p - 1.0);
    // Σ n^{-s}: direct sum plus an integral tail with midpoint correction.
    let m = 100_000usize;
    let mut acc = KahanSum::new();
    for n in 1..=m {
        acc.add((n as f64).powf(-s));
    }
    let tail = (m as f64 + 0.5).powf(1.0 - s) / (s - 1.0);
    acc.add(tail);
    Ok(2f64.powf(p - 1.0) * acc.value().powf(p - 1.0))
}

fn check_dyadic(p: f64, gamma: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::Exponent(format!("p must be >= 1, got {p}")));
    }
    if !(gamma > p - 1.0) {
        return Err(Error::Hypothesis(format!(
            "gamma = {gamma} must exceed p - 1 = {}",
            p - 1.0
        )));
    }
    if p == 1.0 && !(gamma >= 0.0) {
        return Err(Error::Hypothesis("gamma must be >= 0 when p = 1".into()));
    }
    Ok(())
}

/// Dyadic control bound for a function evaluable at `a + k 2^{-n}(b - a)`.
pub fn dyadic_variation_bound(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    p: f64,
    gamma: f64,
    c: Option<f64>,
    n_max: u32,
) -> Result<DyadicBound> {
    check_dyadic(p, gamma)?;
    if n_max > 30 {
        return Err(Error::invalid("n_max above 30 is not supported"));
    }
    let finest = 1usize << n_max;
    let values: Vec<f64> = (0..=finest)
        .map(|k| if k == finest { f(b) } else { f(a + (b - a) * k as f64 / finest as f64) })
        .collect();
    dyadic_bound_from_values(&values, p, gamma, c)
}

/// Same bound from values on `2^N + 1` equally spaced points.
pub fn dyadic_bound_from_values(values: &[f64], p: f64, gamma: f64, c: Option<f64>) -> Result<DyadicBound> {
    check_dyadic(p, gamma)?;
    let cells = values.len().saturating_sub(1);
    if cells == 0 || !cells.is_power_of_two() {
        return Err(Error::invalid("need 2^N + 1 equally spaced values"));
    }
    let c = match c {
        Some(c) if c > 0.0 => c,
        Some(c) => return Err(Error::invalid(format!("constant must be positive, got {c}"))),
        None => default_dyadic_constant(p, gamma)?,
    };
    let n_max = cells.trailing_zeros();
    let gauge = ConvexGauge::power(p)?;
    let mut partial = Vec::with_capacity(n_max as usize);
    let mut acc = 0.0;
    for n in 1..=n_max {
        let stride = cells >> n;
        let level: f64 = (0..(1usize << n))
            .map(|k| gauge.apply((values[(k + 1) * stride] - values[k * stride]).abs()))
            .collect::<KahanSum>()
            .value();
        acc += (n as f64).powf(gamma) * level;
        partial.push(c * acc);
    }
    let value = partial.last().copied().unwrap_or(0.0);
    Ok(DyadicBound {
        p,
        gamma,
        c,
        partial_sums: partial,
        value,
        exactness: Exactness::UpperBound,
    })
}
