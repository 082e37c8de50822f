use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::pathcore::{Partition1D, Partition2D, SampledField};
use crate::rng;
use crate::variation::{phi_variation_values, ConvexGauge, Exactness, VariationReport, Witness};

/// Search controls for two-parameter variations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VariationBudget {
    /// Exhaustive search is used when both axes have at most this many interior points.
    pub max_exhaustive_interior: usize,
    /// Largest interior count on the enumerated axis for the subset-plus-DP exact mode.
    pub max_enumerated_interior: usize,
    pub restarts: usize,
    pub seed: u64,
    pub mode: SearchMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Auto,
    Exhaustive,
    HillClimb,
}

impl Default for VariationBudget {
    fn default() -> Self {
        Self {
            max_exhaustive_interior: 10,
            max_enumerated_interior: 16,
            restarts: 8,
            seed: 0,
            mode: SearchMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            _ => Err(Error::invalid(format!("unknown axis `{s}`"))),
        }
    }
}

/// Points that must be included in every integration partition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpSets {
    pub h: Vec<f64>,
    pub h_prime: Vec<f64>,
}

impl JumpSets {
    pub fn is_empty(&self) -> bool {
        self.h.is_empty() && self.h_prime.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StripVariation {
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpReport {
    pub epsilon: f64,
    pub jumps: JumpSets,
    pub x_strips: Vec<StripVariation>,
    pub y_strips: Vec<StripVariation>,
}

/// Double increment in the one fixed rounding order used by this module.
#[inline]
fn dd(f: &SampledField, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
    (f.at(i1, j1) - f.at(i0, j1)) - (f.at(i1, j0) - f.at(i0, j0))
}

/// `Σ_j Ψ(Σ_i Φ(|Δ_iΔ_j G|))` for one product partition.
pub fn pq_partition_sum(field: &SampledField, part: &Partition2D, phi: &ConvexGauge, psi: &ConvexGauge) -> f64 {
    let xi = part.x().indices();
    let yj = part.y().indices();
    let mut total = 0.0;
    for w in yj.windows(2) {
        let mut inner = 0.0;
        for v in xi.windows(2) {
            inner += phi.apply(dd(field, v[0], v[1], w[0], w[1]).abs());
        }
        total += psi.apply(inner);
    }
    total
}

/// For a fixed x-partition, the best y-partition by dynamic programming.
fn best_y_for_x(field: &SampledField, xi: &[usize], phi: &ConvexGauge, psi: &ConvexGauge) -> (f64, Vec<usize>) {
    let ny = field.ys().len();
    let mut best = vec![0.0f64; ny];
    let mut pred = vec![0usize; ny];
    for j1 in 1..ny {
        let mut bv = f64::NEG_INFINITY;
        let mut bi = 0;
        for j0 in 0..j1 {
            let mut inner = 0.0;
            for v in xi.windows(2) {
                inner += phi.apply(dd(field, v[0], v[1], j0, j1).abs());
            }
            let cand = best[j0] + psi.apply(inner);
            if cand > bv {
                bv = cand;
                bi = j0;
            }
        }
        best[j1] = bv;
        pred[j1] = bi;
    }
    let mut w = vec![ny - 1];
    let mut j = ny - 1;
    while j > 0 {
        j = pred[j];
        w.push(j);
    }
    w.reverse();
    (best[ny - 1], w)
}

fn enumerate_x_dp_y(field: &SampledField, phi: &ConvexGauge, psi: &ConvexGauge) -> Partition2D {
    let nx = field.xs().len();
    let interior = nx - 2;
    let (_, mask, yw) = (0..(1u64 << interior))
        .into_par_iter()
        .map(|mask| {
            let part = Partition1D::from_interior_mask(mask, nx);
            let (v, yw) = best_y_for_x(field, part.indices(), phi, psi);
            (v, mask, yw)
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX, Vec::new()),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    Partition2D::new(
        Partition1D::from_interior_mask(mask, nx),
        Partition1D::from_sorted_unchecked(yw),
    )
}

fn brute_force(field: &SampledField, phi: &ConvexGauge, psi: &ConvexGauge) -> Result<Partition2D> {
    let (nx, ny) = field.shape();
    let (ix, iy) = (nx - 2, ny - 2);
    if ix + iy > 24 {
        return Err(Error::invalid(format!(
            "exhaustive search over {} interior points is too large",
            ix + iy
        )));
    }
    let ((_, xm, ym), _) = (0..(1u64 << ix))
        .into_par_iter()
        .map(|xm| {
            let xp = Partition1D::from_interior_mask(xm, nx);
            let mut best = (f64::NEG_INFINITY, xm, 0u64);
            for ym in 0..(1u64 << iy) {
                let part = Partition2D::new(xp.clone(), Partition1D::from_interior_mask(ym, ny));
                let v = pq_partition_sum(field, &part, phi, psi);
                if v > best.0 {
                    best = (v, xm, ym);
                }
            }
            (best, ())
        })
        .reduce(
            || ((f64::NEG_INFINITY, u64::MAX, u64::MAX), ()),
            |a, b| {
                let (x, y) = (a.0, b.0);
                if y.0 > x.0 || (y.0 == x.0 && (y.1, y.2) < (x.1, x.2)) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(Partition2D::new(
        Partition1D::from_interior_mask(xm, nx),
        Partition1D::from_interior_mask(ym, ny),
    ))
}

fn hill_climb(field: &SampledField, phi: &ConvexGauge, psi: &ConvexGauge, budget: &VariationBudget) -> Partition2D {
    let (nx, ny) = field.shape();
    let eval = |xs: &[bool], ys: &[bool]| {
        let xp: Vec<usize> = (0..nx).filter(|&i| xs[i]).collect();
        let yp: Vec<usize> = (0..ny).filter(|&j| ys[j]).collect();
        let part = Partition2D::new(
            Partition1D::from_sorted_unchecked(xp),
            Partition1D::from_sorted_unchecked(yp),
        );
        (pq_partition_sum(field, &part, phi, psi), part)
    };
    let climb = |mut xs: Vec<bool>, mut ys: Vec<bool>| {
        let (mut cur, mut part) = eval(&xs, &ys);
        for _sweep in 0..10_000 {
            let mut improved = false;
            for i in 1..nx - 1 {
                xs[i] = !xs[i];
                let (v, p) = eval(&xs, &ys);
                if v > cur {
                    cur = v;
                    part = p;
                    improved = true;
                } else {
                    xs[i] = !xs[i];
                }
            }
            for j in 1..ny - 1 {
                ys[j] = !ys[j];
                let (v, p) = eval(&xs, &ys);
                if v > cur {
                    cur = v;
                    part = p;
                    improved = true;
                } else {
                    ys[j] = !ys[j];
                }
            }
            if !improved {
                break;
            }
        }
        (cur, part)
    };
    let mut best = climb(vec![true; nx], vec![true; ny]);
    for r in 0..budget.restarts {
        let mut g = rng::stream(budget.seed, r as u64 + 1);
        let mut xs: Vec<bool> = (0..nx).map(|_| g.random_bool(0.5)).collect();
        let mut ys: Vec<bool> = (0..ny).map(|_| g.random_bool(0.5)).collect();
        xs[0] = true;
        xs[nx - 1] = true;
        ys[0] = true;
        ys[ny - 1] = true;
        let cand = climb(xs, ys);
        if cand.0 > best.0 {
            best = cand;
        }
    }
    best.1
}

/// `Φ₁,Ψ₁`-variation over product partitions drawn from the field's grid.
pub fn phi_psi_variation_grid(
    field: &SampledField,
    phi: &ConvexGauge,
    psi: &ConvexGauge,
    budget: &VariationBudget,
) -> Result<VariationReport> {
    phi.validate()?;
    psi.validate()?;
    let (nx, ny) = field.shape();
    let (ix, iy) = (nx - 2, ny - 2);
    let (witness, exactness) = match budget.mode {
        SearchMode::Exhaustive => (brute_force(field, phi, psi)?, Exactness::ExactOnGrid),
        SearchMode::HillClimb => (hill_climb(field, phi, psi, budget), Exactness::LowerBound),
        SearchMode::Auto => {
            if ix <= budget.max_exhaustive_interior && iy <= budget.max_exhaustive_interior {
                (brute_force(field, phi, psi)?, Exactness::ExactOnGrid)
            } else if ix <= budget.max_enumerated_interior {
                (enumerate_x_dp_y(field, phi, psi), Exactness::ExactOnGrid)
            } else if psi.is_identity() && iy <= budget.max_enumerated_interior {
                // With Ψ linear the objective is a plain sum over cells, symmetric in the axes.
                let t = enumerate_x_dp_y(&field.transpose(), phi, psi);
                (Partition2D::new(t.y().clone(), t.x().clone()), Exactness::ExactOnGrid)
            } else {
                (hill_climb(field, phi, psi, budget), Exactness::LowerBound)
            }
        }
    };
    let value = pq_partition_sum(field, &witness, phi, psi);
    Ok(VariationReport {
        exponents: json!({ "phi": phi.descriptor(), "psi": psi.descriptor() }),
        value,
        witness: Witness::two(witness.x().indices().to_vec(), witness.y().indices().to_vec()),
        exactness,
    })
}

pub fn pq_variation_grid(field: &SampledField, p: f64, q: f64, budget: &VariationBudget) -> Result<VariationReport> {
    let phi = ConvexGauge::power(p)?;
    let psi = ConvexGauge::power(q)?;
    let mut r = phi_psi_variation_grid(field, &phi, &psi, budget)?;
    r.exponents = json!({ "p": p, "q": q });
    Ok(r)
}

/// Largest one-parameter `Φ`-variation along `axis` over the lines of the other axis.
pub fn uniform_axis_variation(field: &SampledField, axis: Axis, gauge: &ConvexGauge) -> Result<f64> {
    gauge.validate()?;
    let (nx, ny) = field.shape();
    let lines: Vec<Vec<f64>> = match axis {
        Axis::X => (0..ny).map(|j| (0..nx).map(|i| field.at(i, j)).collect()).collect(),
        Axis::Y => (0..nx).map(|i| field.row(i).to_vec()).collect(),
    };
    Ok(lines
        .par_iter()
        .map(|l| phi_variation_values(l, gauge).0)
        .reduce(|| 0.0, f64::max))
}

/// Strip variations one cell wide in each direction; cells above `epsilon`
/// contribute both of their endpoints to the jump sets.
pub fn detect_large_jumps(
    field: &SampledField,
    epsilon: f64,
    phi: &ConvexGauge,
    psi: &ConvexGauge,
) -> Result<JumpReport> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    phi.validate()?;
    psi.validate()?;
    let (nx, ny) = field.shape();
    let (xs, ys) = (field.xs(), field.ys());
    // x strip [x_i, x_{i+1}] x [y', y'']: one x cell, so the y partition is a 1d DP
    // with cell cost Ψ(Φ(|ΔΔG|)).
    let x_strips: Vec<StripVariation> = (0..nx - 1)
        .into_par_iter()
        .map(|i| {
            let (v, _) = best_y_for_x(field, &[i, i + 1], phi, psi);
            StripVariation {
                lower: xs[i],
                upper: xs[i + 1],
                value: v,
            }
        })
        .collect();
    // y strip [x', x''] x [y_j, y_{j+1}]: Ψ is increasing, so maximise the inner sum.
    let t = field.transpose();
    let y_strips: Vec<StripVariation> = (0..ny - 1)
        .into_par_iter()
        .map(|j| {
            let (inner, _) = best_y_for_x(&t, &[j, j + 1], phi, &ConvexGauge::Power(1.0));
            StripVariation {
                lower: ys[j],
                upper: ys[j + 1],
                value: psi.apply(inner),
            }
        })
        .collect();
    let collect = |strips: &[StripVariation]| {
        let mut pts: Vec<f64> = strips
            .iter()
            .filter(|s| s.value > epsilon)
            .flat_map(|s| [s.lower, s.upper])
            .collect();
        pts.dedup();
        pts
    };
    Ok(JumpReport {
        epsilon,
        jumps: JumpSets {
            h: collect(&x_strips),
            h_prime: collect(&y_strips),
        },
        x_strips,
        y_strips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::uniform_grid;

    #[test]
    fn additive_field_has_zero_variation() {
        let g = SampledField::from_fn(uniform_grid(0.0, 1.0, 5), uniform_grid(0.0, 1.0, 4), |x, y| x.sin() + y * y)
            .unwrap();
        let r = pq_variation_grid(&g, 1.5, 2.0, &VariationBudget::default()).unwrap();
        assert!(r.value < 1e-28);
    }

    #[test]
    fn product_field_telescopes() {
        let g = SampledField::from_fn(uniform_grid(0.0, 1.0, 6), uniform_grid(0.0, 1.0, 6), |x, y| x * y).unwrap();
        let r = pq_variation_grid(&g, 1.0, 1.0, &VariationBudget::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.exactness, Exactness::ExactOnGrid);
    }

    #[test]
    fn modes_agree_on_small_field() {
        let g = SampledField::from_fn(uniform_grid(0.1, 1.0, 6), uniform_grid(0.1, 1.0, 5), |x, y| {
            (3.0 * x * y).sin() + (x - y).abs()
        })
        .unwrap();
        for (p, q) in [(1.0, 1.0), (1.5, 1.0), (2.0, 1.3)] {
            let exact = pq_variation_grid(&g, p, q, &VariationBudget::default()).unwrap();
            let enumerated = pq_variation_grid(
                &g,
                p,
                q,
                &VariationBudget {
                    max_exhaustive_interior: 0,
                    ..Default::default()
                },
            )
            .unwrap();
            let climb = pq_variation_grid(
                &g,
                p,
                q,
                &VariationBudget {
                    mode: SearchMode::HillClimb,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((exact.value - enumerated.value).abs() <= 1e-12 * exact.value);
            assert!(climb.value <= exact.value + 1e-12);
            assert_eq!(climb.exactness, Exactness::LowerBound);
        }
    }

    #[test]
    fn jump_detection() {
        let xs = uniform_grid(0.0, 1.0, 20);
        let ys = uniform_grid(0.0, 1.0, 20);
        let one = ConvexGauge::Power(1.0);
        let smooth = SampledField::from_fn(xs.clone(), ys.clone(), |x, y| x * y).unwrap();
        assert!(detect_large_jumps(&smooth, 0.5, &one, &one).unwrap().jumps.is_empty());
        let step = SampledField::from_fn(xs, ys, |x, y| if x >= 0.5 { y } else { 0.0 }).unwrap();
        let r = detect_large_jumps(&step, 0.5, &one, &one).unwrap();
        assert_eq!(r.jumps.h.len(), 2);
        assert!((r.jumps.h[0] - 0.45).abs() < 1e-12 && (r.jumps.h[1] - 0.5).abs() < 1e-12);
        assert!(r.jumps.h_prime.is_empty());
        assert!(detect_large_jumps(&step, 1e9, &one, &one).unwrap().jumps.is_empty());
        assert!(detect_large_jumps(&step, 0.0, &one, &one).is_err());
    }

    #[test]
    fn uniform_axis() {
        let g = SampledField::from_fn(uniform_grid(0.0, 1.0, 8), uniform_grid(0.0, 1.0, 3), |x, _| x).unwrap();
        let one = ConvexGauge::Power(1.0);
        assert!((uniform_axis_variation(&g, Axis::X, &one).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(uniform_axis_variation(&g, Axis::Y, &one).unwrap(), 0.0);
        assert!("z".parse::<Axis>().is_err());
    }
}
