use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::panel::{ContributionPanel, PanelRecord, DEFAULT_ENDOWMENT};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub const DEFAULT_DECAY_RATE: f64 = 0.1;
pub const DEFAULT_STEP_SCALE: f64 = 1.5;

/// Seats per group in generated panels.
pub const GROUP_SIZE: usize = 4;

/// Synthetic contribution-panel generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Generator {
    /// Everyone plays the dominant contribution 0.
    Rational,
    /// Independent uniform contributions every round.
    IidUniform,
    /// Uniform first round, then `c + round(-decay_rate * c + step_scale * Z)`
    /// clamped to the endowment, with `Z` standard normal.
    StickyDrift { decay_rate: f64, step_scale: f64 },
}

impl Generator {
    pub fn sticky_drift() -> Self {
        Self::StickyDrift {
            decay_rate: DEFAULT_DECAY_RATE,
            step_scale: DEFAULT_STEP_SCALE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Self::StickyDrift {
            decay_rate,
            step_scale,
        } = *self
        {
            if !(0.0..=1.0).contains(&decay_rate) {
                return Err(Error::InvalidGenerator(format!(
                    "decay rate must lie in [0, 1], got {decay_rate}"
                )));
            }
            if !(step_scale.is_finite() && step_scale >= 0.0) {
                return Err(Error::InvalidGenerator(format!(
                    "step scale must be nonnegative and finite, got {step_scale}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rational => f.write_str("rational"),
            Self::IidUniform => f.write_str("iidUniform"),
            Self::StickyDrift {
                decay_rate,
                step_scale,
            } => write!(f, "stickyDrift:{decay_rate}:{step_scale}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let head = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let g = match (head, rest.as_slice()) {
            ("rational", []) => Self::Rational,
            ("iidUniform" | "iid", []) => Self::IidUniform,
            ("stickyDrift" | "sticky", []) => Self::sticky_drift(),
            ("stickyDrift" | "sticky", [d, k]) => {
                let num = |t: &str| t.parse::<f64>().map_err(|e| Error::parse("generator", s, e.to_string()));
                Self::StickyDrift {
                    decay_rate: num(d)?,
                    step_scale: num(k)?,
                }
            }
            _ => {
                return Err(Error::parse(
                    "generator",
                    s,
                    "expected rational, iidUniform or stickyDrift[:decay:step]",
                ))
            }
        };
        g.validate()?;
        Ok(g)
    }
}

impl TryFrom<String> for Generator {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Generator> for String {
    fn from(g: Generator) -> Self {
        g.to_string()
    }
}

/// Panel of `subjects` players over rounds `1..=rounds`, in groups of four.
/// Subject `k` draws from its own random stream, so panels are reproducible
/// from `seed` and prefix-stable in `subjects`.
pub fn synth_panel(generator: Generator, subjects: usize, rounds: u32, seed: u64) -> Result<ContributionPanel> {
    generator.validate()?;
    if subjects == 0 || rounds == 0 {
        return Err(Error::InvalidGenerator("subjects and rounds must be positive".into()));
    }
    let e = DEFAULT_ENDOWMENT;
    let mut records = Vec::with_capacity(subjects * rounds as usize);
    for k in 0..subjects {
        let mut rng = stream_rng(seed, k as u64);
        let subject = (k + 1).to_string();
        let group = (k / GROUP_SIZE + 1).to_string();
        let mut c: u32 = match generator {
            Generator::Rational => 0,
            _ => rng.random_range(0..=e),
        };
        for round in 1..=rounds {
            if round > 1 {
                c = match generator {
                    Generator::Rational => 0,
                    Generator::IidUniform => rng.random_range(0..=e),
                    Generator::StickyDrift {
                        decay_rate,
                        step_scale,
                    } => {
                        let z: f64 = if step_scale > 0.0 {
                            Normal::new(0.0, step_scale)
                                .expect("validated scale")
                                .sample(&mut rng)
                        } else {
                            0.0
                        };
                        let next = c as f64 - decay_rate * c as f64 + z;
                        next.round().clamp(0.0, e as f64) as u32
                    }
                };
            }
            records.push(PanelRecord {
                subject: subject.clone(),
                group: group.clone(),
                round,
                contribution: c,
            });
        }
    }
    ContributionPanel::new(records, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::changes::change_stats;

    #[test]
    fn rational_is_all_zero() {
        let p = synth_panel(Generator::Rational, 8, 20, 1).unwrap();
        assert_eq!(p.len(), 160);
        assert!(p.records().iter().all(|r| r.contribution == 0));
        assert_eq!(p.records()[4 * 20].group, "2");
    }

    #[test]
    fn deterministic_and_prefix_stable() {
        let g = Generator::sticky_drift();
        let a = synth_panel(g, 6, 20, 9).unwrap();
        assert_eq!(a, synth_panel(g, 6, 20, 9).unwrap());
        let b = synth_panel(g, 3, 20, 9).unwrap();
        assert_eq!(&a.records()[..60], b.records());
        assert_ne!(a, synth_panel(g, 6, 20, 10).unwrap());
    }

    #[test]
    fn sticky_drift_is_sticky_and_decreasing() {
        let p = synth_panel(Generator::sticky_drift(), 200, 20, 3).unwrap();
        let stats = change_stats(&p).unwrap();
        assert!(stats.stickiness_fraction() > 0.8);
        let mean = |round: u32| {
            let v: Vec<f64> = p
                .records()
                .iter()
                .filter(|r| r.round == round)
                .map(|r| r.contribution as f64)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(20) < mean(1) / 2.0);
        // Increases occur as well as decreases.
        assert!((1..=40).map(|d| stats.delta_count(d)).sum::<u64>() > 0);
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!("iidUniform".parse::<Generator>().unwrap(), Generator::IidUniform);
        let g: Generator = "stickyDrift:0.2:3".parse().unwrap();
        assert_eq!(g.to_string().parse::<Generator>().unwrap(), g);
        assert!("stickyDrift:2:1".parse::<Generator>().is_err());
        assert!("stickyDrift:0.1:-1".parse::<Generator>().is_err());
        assert!("brownian".parse::<Generator>().is_err());
        assert!(synth_panel(Generator::Rational, 0, 20, 0).is_err());
    }
}
