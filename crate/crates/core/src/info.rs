//! Information-processing costs `I(pi, q)` and prior-belief constructors.
//!
//! All logarithms are natural. KL may be `+inf`, which is returned as
//! `f64::INFINITY` and written as the literal `inf` by [`format_extended`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ot::{
    build_cost_matrix, wasserstein_1d_closed_form, wasserstein_exact, ActionDistribution,
    ActionSpace, GroundDistance,
};

pub const DEFAULT_KL_STAR_EPSILON: f64 = 1e-6;

/// Ground distance and order for the Wasserstein cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtConfig {
    pub distance: GroundDistance,
    pub order: u32,
    /// Report the `order`-th root instead of the raw transport objective.
    pub root: bool,
}

impl Default for OtConfig {
    fn default() -> Self {
        Self {
            distance: GroundDistance::Absolute,
            order: 1,
            root: false,
        }
    }
}

impl fmt::Display for OtConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.distance, self.order)?;
        if self.root {
            f.write_str(":root")?;
        }
        Ok(())
    }
}

impl FromStr for OtConfig {
    type Err = Error;

    /// `abs[:n]`, `fixed:D[:n]` or `boundary:INDEX:PENALTY[:n]`, each with an
    /// optional trailing `:root`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::parse("transport config", s, reason);
        let mut parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let root = parts.last() == Some(&"root");
        if root {
            parts.pop();
        }
        let num = |t: &str| t.parse::<f64>().map_err(|e| err(&e.to_string()));
        let (distance, rest) = match parts.first().copied() {
            None | Some("") | Some("abs") | Some("absolute") => {
                (GroundDistance::Absolute, parts.get(1..).unwrap_or(&[]))
            }
            Some("fixed") => {
                let value = num(parts.get(1).ok_or_else(|| err("missing fixed distance"))?)?;
                (GroundDistance::Fixed { value }, &parts[2..])
            }
            Some("boundary") => {
                if parts.len() < 3 {
                    return Err(err("expected boundary:INDEX:PENALTY"));
                }
                let index = parts[1].parse::<usize>().map_err(|e| err(&e.to_string()))?;
                let penalty = num(parts[2])?;
                (GroundDistance::Boundary { index, penalty }, &parts[3..])
            }
            Some(other) => return Err(err(&format!("unknown ground distance {other:?}"))),
        };
        let order = match rest {
            [] => 1,
            [n] => n.parse::<u32>().map_err(|e| err(&e.to_string()))?,
            _ => return Err(err("too many fields")),
        };
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        Ok(Self {
            distance,
            order,
            root,
        })
    }
}

/// Which information cost to charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InfoCostKind {
    Entropy,
    Kl,
    KlStar { epsilon: f64 },
    Wasserstein(OtConfig),
}

impl InfoCostKind {
    pub fn validate(&self, size: usize) -> Result<()> {
        if let InfoCostKind::KlStar { epsilon } = *self {
            check_epsilon(epsilon, size)?;
        }
        if let InfoCostKind::Wasserstein(cfg) = self {
            build_cost_matrix(&ActionSpace::new(size)?, cfg.distance, cfg.order)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            InfoCostKind::Entropy => "entropy",
            InfoCostKind::Kl => "kl",
            InfoCostKind::KlStar { .. } => "klstar",
            InfoCostKind::Wasserstein(_) => "wasserstein",
        }
    }
}

impl fmt::Display for InfoCostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfoCostKind::Entropy => f.write_str("entropy"),
            InfoCostKind::Kl => f.write_str("kl"),
            InfoCostKind::KlStar { epsilon } => write!(f, "klstar:{epsilon:e}"),
            InfoCostKind::Wasserstein(cfg) => write!(f, "wasserstein:{cfg}"),
        }
    }
}

impl FromStr for InfoCostKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        match (head.to_ascii_lowercase().as_str(), tail) {
            ("entropy", None) => Ok(InfoCostKind::Entropy),
            ("kl", None) => Ok(InfoCostKind::Kl),
            ("klstar" | "kl*", None) => Ok(InfoCostKind::KlStar {
                epsilon: DEFAULT_KL_STAR_EPSILON,
            }),
            ("klstar" | "kl*", Some(eps)) => {
                let epsilon = eps
                    .parse::<f64>()
                    .map_err(|e| Error::parse("information cost", s, e.to_string()))?;
                if !(epsilon.is_finite() && epsilon > 0.0) {
                    return Err(Error::parse("information cost", s, "epsilon must be positive"));
                }
                Ok(InfoCostKind::KlStar { epsilon })
            }
            ("wasserstein" | "w", None) => Ok(InfoCostKind::Wasserstein(OtConfig::default())),
            ("wasserstein" | "w", Some(cfg)) => Ok(InfoCostKind::Wasserstein(cfg.parse()?)),
            _ => Err(Error::parse(
                "information cost",
                s,
                "expected entropy, kl, klstar[:EPS] or wasserstein[:CFG]",
            )),
        }
    }
}

impl TryFrom<String> for InfoCostKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InfoCostKind> for String {
    fn from(k: InfoCostKind) -> Self {
        k.to_string()
    }
}

/// Source of an agent's prior beliefs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PriorKind {
    Uniform,
    /// Empirical frequency of a supplied action history.
    Historical,
    OptimalDirac(usize),
    Custom(Vec<f64>),
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorKind::Uniform => f.write_str("uniform"),
            PriorKind::Historical => f.write_str("historical"),
            PriorKind::OptimalDirac(i) => write!(f, "dirac:{i}"),
            PriorKind::Custom(mass) => {
                f.write_str("custom:")?;
                let parts: Vec<String> = mass.iter().map(|m| m.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, tail) = match s.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (s, None),
        };
        match (head.to_ascii_lowercase().as_str(), tail) {
            ("uniform", None) => Ok(PriorKind::Uniform),
            ("historical", None) => Ok(PriorKind::Historical),
            ("dirac" | "optimal", None) => Ok(PriorKind::OptimalDirac(0)),
            ("dirac" | "optimal", Some(i)) => i
                .parse::<usize>()
                .map(PriorKind::OptimalDirac)
                .map_err(|e| Error::parse("prior", s, e.to_string())),
            ("custom", Some(mass)) => mass
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::parse("prior", s, e.to_string()))
                })
                .collect::<Result<Vec<_>>>()
                .map(PriorKind::Custom),
            _ => Err(Error::parse(
                "prior",
                s,
                "expected uniform, historical, dirac:INDEX or custom:M0,M1,...",
            )),
        }
    }
}

impl TryFrom<String> for PriorKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PriorKind> for String {
    fn from(k: PriorKind) -> Self {
        k.to_string()
    }
}

pub(crate) fn check_epsilon(epsilon: f64, size: usize) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 / size as f64 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon { epsilon, size })
    }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(p: &ActionDistribution) -> f64 {
    let h: f64 = -p
        .mass()
        .iter()
        .filter(|&&m| m > 0.0)
        .map(|&m| m * m.ln())
        .sum::<f64>();
    if h <= 0.0 {
        // Also maps the -0.0 that an all-zero float sum produces.
        return 0.0;
    }
    h.min((p.size() as f64).ln())
}

/// `KL(p || q)`; `+inf` exactly when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &ActionDistribution, q: &ActionDistribution) -> Result<f64> {
    p.check_same_space(q)?;
    let mut total = 0.0;
    for (&pi, &qi) in p.mass().iter().zip(q.mass()) {
        if pi > 0.0 {
            if qi == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += pi * (pi / qi).ln();
        }
    }
    Ok(total.max(0.0))
}

/// The prior with every entry raised to at least `epsilon`, renormalized.
pub fn smooth_prior(q: &ActionDistribution, epsilon: f64) -> Result<ActionDistribution> {
    check_epsilon(epsilon, q.size())?;
    let raised: Vec<f64> = q.mass().iter().map(|&m| m.max(epsilon)).collect();
    ActionDistribution::from_weights(&raised)
}

/// `KL(p || smooth(q))`, always finite. Only the prior is smoothed.
pub fn kl_star(p: &ActionDistribution, q: &ActionDistribution, epsilon: f64) -> Result<f64> {
    p.check_same_space(q)?;
    kl_divergence(p, &smooth_prior(q, epsilon)?)
}

/// Transport cost from prior to policy, via the CDF closed form for
/// first-order absolute distance and the exact simplex otherwise.
pub fn wasserstein_cost(
    p: &ActionDistribution,
    q: &ActionDistribution,
    cfg: &OtConfig,
) -> Result<f64> {
    p.check_same_space(q)?;
    if cfg.distance == GroundDistance::Absolute && cfg.order == 1 {
        return wasserstein_1d_closed_form(p, q);
    }
    let cost = build_cost_matrix(&p.space(), cfg.distance, cfg.order)?;
    let sol = wasserstein_exact(p, q, &cost)?;
    Ok(if cfg.root {
        sol.rooted_distance()
    } else {
        sol.distance
    })
}

pub fn make_prior(
    kind: &PriorKind,
    space: &ActionSpace,
    history: Option<&[usize]>,
) -> Result<ActionDistribution> {
    match kind {
        PriorKind::Uniform => ActionDistribution::uniform(space.size()),
        PriorKind::OptimalDirac(i) => ActionDistribution::dirac(space.size(), *i),
        PriorKind::Historical => match history {
            Some(h) if !h.is_empty() => ActionDistribution::empirical(space.size(), h),
            _ => Err(Error::EmptyHistory),
        },
        PriorKind::Custom(mass) => {
            if mass.len() != space.size() {
                return Err(Error::DimensionMismatch {
                    expected: space.size(),
                    got: mass.len(),
                });
            }
            ActionDistribution::new(mass.clone())
        }
    }
}

/// Dispatches to the cost named by `kind`. `Entropy` ignores the prior.
pub fn info_cost(kind: &InfoCostKind, p: &ActionDistribution, q: &ActionDistribution) -> Result<f64> {
    p.check_same_space(q)?;
    match kind {
        InfoCostKind::Entropy => Ok(entropy(p)),
        InfoCostKind::Kl => kl_divergence(p, q),
        InfoCostKind::KlStar { epsilon } => kl_star(p, q, *epsilon),
        InfoCostKind::Wasserstein(cfg) => wasserstein_cost(p, q, cfg),
    }
}

/// Writes `+inf` as `inf`, everything else as the shortest round-trip form.
pub fn format_extended(value: f64) -> String {
    if value == f64::INFINITY {
        "inf".to_string()
    } else {
        value.to_string()
    }
}

/// Serde helper: finite floats as numbers, `+inf` as the string `inf`.
pub fn serialize_extended<S: serde::Serializer>(value: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_finite() {
        serializer.serialize_f64(*value)
    } else {
        serializer.serialize_str(&format_extended(*value))
    }
}

pub fn parse_extended(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| Error::parse("extended real", s, e.to_string())),
    }
}
