use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted index list into a sample grid that always keeps both endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition1D {
    indices: Vec<usize>,
}

impl Partition1D {
    pub fn new(indices: Vec<usize>, grid_len: usize) -> Result<Self> {
        if grid_len < 2 {
            return Err(Error::invalid("grid must have at least two points"));
        }
        if indices.first() != Some(&0) || indices.last() != Some(&(grid_len - 1)) {
            return Err(Error::invalid("partition must contain both endpoints"));
        }
        if indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("partition indices must be strictly increasing"));
        }
        Ok(Self { indices })
    }

    /// Every grid point.
    pub fn full(grid_len: usize) -> Self {
        Self {
            indices: (0..grid_len).collect(),
        }
    }

    /// Endpoints plus the interior points selected by `mask` (bit `k` selects index `k + 1`).
    pub fn from_interior_mask(mask: u64, grid_len: usize) -> Self {
        let mut indices = Vec::with_capacity(grid_len);
        indices.push(0);
        for k in 0..grid_len.saturating_sub(2) {
            if mask >> k & 1 == 1 {
                indices.push(k + 1);
            }
        }
        indices.push(grid_len - 1);
        Self { indices }
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.indices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Product partition `E x E'`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition2D {
    #[serde(rename = "xindices")]
    x: Partition1D,
    #[serde(rename = "yindices")]
    y: Partition1D,
}

impl Partition2D {
    pub fn new(x: Partition1D, y: Partition1D) -> Self {
        Self { x, y }
    }

    pub fn x(&self) -> &Partition1D {
        &self.x
    }

    pub fn y(&self) -> &Partition1D {
        &self.y
    }
}
