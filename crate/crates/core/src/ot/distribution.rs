use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs whose total mass is within this distance of one are accepted and
/// renormalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// A finite, ordinal action space indexed `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpace {
    size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl ActionSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyActionSpace);
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut space = Self::new(labels.len())?;
        space.labels = Some(labels);
        Ok(space)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Display name of an action, falling back to its index.
    pub fn label(&self, index: usize) -> String {
        self.labels
            .as_ref()
            .and_then(|l| l.get(index).cloned())
            .unwrap_or_else(|| index.to_string())
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.size {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange {
                index,
                size: self.size,
            })
        }
    }
}

/// A probability vector over an ordinal action space.
///
/// Construction validates nonnegativity and normalization, then renormalizes
/// so the stored masses sum to one up to rounding. Zero entries are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct ActionDistribution {
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    size: usize,
    mass: Vec<f64>,
}

impl TryFrom<DistributionRepr> for ActionDistribution {
    type Error = Error;

    fn try_from(repr: DistributionRepr) -> Result<Self> {
        if repr.size != repr.mass.len() {
            return Err(Error::DimensionMismatch {
                expected: repr.size,
                got: repr.mass.len(),
            });
        }
        ActionDistribution::new(repr.mass)
    }
}

impl From<ActionDistribution> for DistributionRepr {
    fn from(d: ActionDistribution) -> Self {
        DistributionRepr {
            size: d.mass.len(),
            mass: d.mass,
        }
    }
}

impl ActionDistribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::EmptyActionSpace);
        }
        for (index, &value) in mass.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidMass { index, value });
            }
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            mass: mass.into_iter().map(|m| m / sum).collect(),
        })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidMass { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::NotNormalized { sum });
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    pub fn uniform(size: usize) -> Result<Self> {
        ActionSpace::new(size)?;
        Ok(Self {
            mass: vec![1.0 / size as f64; size],
        })
    }

    pub fn dirac(size: usize, index: usize) -> Result<Self> {
        ActionSpace::new(size)?.check_index(index)?;
        let mut mass = vec![0.0; size];
        mass[index] = 1.0;
        Ok(Self { mass })
    }

    /// Empirical frequency of the given action indices.
    pub fn empirical(size: usize, actions: &[usize]) -> Result<Self> {
        let space = ActionSpace::new(size)?;
        if actions.is_empty() {
            return Err(Error::EmptyHistory);
        }
        let mut counts = vec![0.0; size];
        for &a in actions {
            space.check_index(a)?;
            counts[a] += 1.0;
        }
        let n = actions.len() as f64;
        Ok(Self {
            mass: counts.into_iter().map(|c| c / n).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.mass.len()
    }

    pub fn space(&self) -> ActionSpace {
        ActionSpace {
            size: self.mass.len(),
            labels: None,
        }
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn get(&self, index: usize) -> f64 {
        self.mass[index]
    }

    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(i, m)| i as f64 * m)
            .sum()
    }

    /// Indices carrying positive mass.
    pub fn support(&self) -> Vec<usize> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.mass
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    /// Total-variation distance, `0.5 * sum |p - q|`.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(0.5
            * self
                .mass
                .iter()
                .zip(&other.mass)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    pub fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One-line CSV row of masses.
    pub fn to_csv_row(&self) -> String {
        self.to_string()
    }

    pub fn from_csv_row(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for ActionDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.mass.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for ActionDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mass = s
            .trim()
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse("distribution", s, e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mass)
    }
}
