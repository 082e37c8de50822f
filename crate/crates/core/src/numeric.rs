//! Small numerical helpers shared across modules.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// `n + 1` equally spaced points from `a` to `b`, endpoints exact.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    let h = (b - a) / n as f64;
    (0..=n)
        .map(|i| if i == n { b } else { a + i as f64 * h })
        .collect()
}

/// Merge extra points into a sorted grid, dropping duplicates and anything
/// outside `[grid[0], grid[last]]`.
pub fn merge_points(grid: &[f64], extra: &[f64]) -> Vec<f64> {
    if grid.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    let mut out: Vec<f64> = grid
        .iter()
        .copied()
        .chain(extra.iter().copied().filter(|&p| p >= lo && p <= hi))
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Trapezoid rule over an arbitrary sorted abscissa.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    compensated_sum(
        xs.windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut terms = vec![1e16, 1.0, -1e16];
        terms.extend(std::iter::repeat(1e-3).take(1000));
        assert!((compensated_sum(terms) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_grid_hits_endpoints() {
        let g = uniform_grid(-1.0, 0.3, 7);
        assert_eq!(g.len(), 8);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[7], 0.3);
    }

    #[test]
    fn merge_keeps_sorted_unique() {
        let g = merge_points(&[0.0, 0.5, 1.0], &[0.25, 0.5, 2.0]);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
