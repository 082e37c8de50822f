//! One- and two-parameter variation on sample grids.

mod gauge;
mod oned;
mod twod;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use gauge::ConvexGauge;
pub use oned::{
    default_dyadic_constant, dyadic_bound_from_values, dyadic_variation_bound, p_variation_exact,
    partition_sum, phi_variation_enumerate, phi_variation_exact, phi_variation_values, DyadicBound,
};
pub use twod::{
    detect_large_jumps, phi_psi_variation_grid, pq_partition_sum, pq_variation_grid, uniform_axis_variation, Axis,
    JumpReport, JumpSets, SearchMode, StripVariation, VariationBudget,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    ExactOnGrid,
    LowerBound,
    UpperBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub xindices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yindices: Option<Vec<usize>>,
}

impl Witness {
    pub fn one(x: Vec<usize>) -> Self {
        Self { xindices: x, yindices: None }
    }

    pub fn two(x: Vec<usize>, y: Vec<usize>) -> Self {
        Self {
            xindices: x,
            yindices: Some(y),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationReport {
    pub exponents: Value,
    pub value: f64,
    pub witness: Witness,
    pub exactness: Exactness,
}
