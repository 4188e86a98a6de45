use std::fmt;

use serde::{Deserialize, Serialize};

use super::ActionSpace;
use crate::error::{Error, Result};

/// Ground distance between two ordinal actions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundDistance {
    /// `|i - j|`.
    Absolute,
    /// `D` between any two distinct actions.
    Fixed { value: f64 },
    /// `|i - j|` plus `penalty` when `i` and `j` lie on opposite sides of
    /// `index` (side is `action >= index`).
    Boundary { index: usize, penalty: f64 },
}

impl GroundDistance {
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let base = i.abs_diff(j) as f64;
        match *self {
            GroundDistance::Absolute => base,
            GroundDistance::Fixed { value } => {
                if i == j {
                    0.0
                } else {
                    value
                }
            }
            GroundDistance::Boundary { index, penalty } => {
                if (i >= index) != (j >= index) {
                    base + penalty
                } else {
                    base
                }
            }
        }
    }

    fn validate(&self, space: &ActionSpace) -> Result<()> {
        match *self {
            GroundDistance::Absolute => Ok(()),
            GroundDistance::Fixed { value } => {
                if value.is_finite() && value >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidCostMatrix(format!(
                        "fixed distance must be nonnegative, got {value}"
                    )))
                }
            }
            GroundDistance::Boundary { index, penalty } => {
                if index >= space.size() {
                    return Err(Error::BoundaryOutOfRange {
                        index,
                        size: space.size(),
                    });
                }
                if !(penalty.is_finite() && penalty >= 0.0) {
                    return Err(Error::InvalidCostMatrix(format!(
                        "boundary penalty must be nonnegative, got {penalty}"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for GroundDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundDistance::Absolute => f.write_str("abs"),
            GroundDistance::Fixed { value } => write!(f, "fixed:{value}"),
            GroundDistance::Boundary { index, penalty } => {
                write!(f, "boundary:{index}:{penalty}")
            }
        }
    }
}

/// Square ground-cost matrix `C[i][j] = d(i, j)^order`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    size: usize,
    order: u32,
    entries: Vec<f64>,
}

pub fn build_cost_matrix(
    space: &ActionSpace,
    distance: GroundDistance,
    order: u32,
) -> Result<CostMatrix> {
    if order == 0 {
        return Err(Error::InvalidOrder);
    }
    distance.validate(space)?;
    let n = space.size();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(distance.distance(i, j).powi(order as i32));
        }
    }
    Ok(CostMatrix {
        size: n,
        order,
        entries,
    })
}

impl CostMatrix {
    /// Wraps raw entries, checking shape, sign, zero diagonal and symmetry.
    pub fn from_entries(size: usize, entries: Vec<f64>, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if size == 0 {
            return Err(Error::EmptyActionSpace);
        }
        if entries.len() != size * size {
            return Err(Error::DimensionMismatch {
                expected: size * size,
                got: entries.len(),
            });
        }
        for i in 0..size {
            if entries[i * size + i] != 0.0 {
                return Err(Error::InvalidCostMatrix(format!("nonzero diagonal at {i}")));
            }
            for j in 0..size {
                let c = entries[i * size + j];
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::InvalidCostMatrix(format!(
                        "entry ({i},{j}) = {c} is not a nonnegative real"
                    )));
                }
                if c != entries[j * size + i] {
                    return Err(Error::InvalidCostMatrix(format!(
                        "asymmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self {
            size,
            order,
            entries,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every entry by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidCostMatrix(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        Ok(Self {
            size: self.size,
            order: self.order,
            entries: self.entries.iter().map(|c| c * factor).collect(),
        })
    }

    /// CSV grid, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size {
            let row: Vec<String> = self.row(i).iter().map(|c| c.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(s: &str, order: u32) -> Result<Self> {
        let mut entries = Vec::new();
        let mut rows = 0;
        for line in s.lines().filter(|l| !l.trim().is_empty()) {
            for t in line.split(',') {
                entries.push(
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse("cost matrix", line, e.to_string()))?,
                );
            }
            rows += 1;
        }
        Self::from_entries(rows, entries, order)
    }
}
