use std::io::{Read, Write};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ot::ActionDistribution;
use crate::rng::stream_rng;

/// Repeated linear public goods game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct PggConfig {
    pub endowment: u32,
    pub multiplier: f64,
    pub group_size: usize,
    pub rounds: usize,
    /// Token step between adjacent actions.
    pub granularity: u32,
}

impl Default for PggConfig {
    fn default() -> Self {
        Self {
            endowment: 40,
            multiplier: 1.6,
            group_size: 4,
            rounds: 20,
            granularity: 1,
        }
    }
}

impl PggConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_size == 0 {
            return Err(Error::InvalidConfig("group size must be positive".into()));
        }
        if self.rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be positive".into()));
        }
        if self.granularity == 0 || self.endowment % self.granularity != 0 {
            return Err(Error::InvalidConfig(format!(
                "endowment {} is not divisible by granularity {}",
                self.endowment, self.granularity
            )));
        }
        if !(self.multiplier.is_finite() && self.multiplier >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "multiplier must be nonnegative, got {}",
                self.multiplier
            )));
        }
        Ok(())
    }

    /// Marginal per-capita return of one contributed token.
    pub fn mpcr(&self) -> f64 {
        self.multiplier / self.group_size as f64
    }

    /// Whether contributing nothing is strictly dominant (`mpcr < 1`).
    pub fn zero_is_dominant(&self) -> bool {
        self.mpcr() < 1.0
    }

    pub fn action_count(&self) -> usize {
        (self.endowment / self.granularity) as usize + 1
    }

    pub fn contribution(&self, action: usize) -> u32 {
        action as u32 * self.granularity
    }

    pub fn action_of(&self, contribution: u32) -> Result<usize> {
        if contribution > self.endowment || contribution % self.granularity != 0 {
            return Err(Error::ContributionOutOfRange {
                contribution,
                endowment: self.endowment,
            });
        }
        Ok((contribution / self.granularity) as usize)
    }

    /// Own payoff for each action given the opponents' total contribution.
    pub fn action_utilities(&self, others_total: f64) -> Vec<f64> {
        (0..self.action_count())
            .map(|a| {
                let c = self.contribution(a) as f64;
                (self.endowment as f64 - c) + self.mpcr() * (c + others_total)
            })
            .collect()
    }
}

/// `payoff_i = (endowment - c_i) + (multiplier / group_size) * sum_j c_j`.
pub fn pgg_payoff(contributions: &[u32], cfg: &PggConfig) -> Result<Vec<f64>> {
    if contributions.len() != cfg.group_size {
        return Err(Error::DimensionMismatch {
            expected: cfg.group_size,
            got: contributions.len(),
        });
    }
    for &c in contributions {
        if c > cfg.endowment {
            return Err(Error::ContributionOutOfRange {
                contribution: c,
                endowment: cfg.endowment,
            });
        }
    }
    let pot = cfg.mpcr() * contributions.iter().map(|&c| c as f64).sum::<f64>();
    Ok(contributions
        .iter()
        .map(|&c| (cfg.endowment - c) as f64 + pot)
        .collect())
}

/// What a player sees of the previous round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMode {
    #[default]
    Individual,
    GroupTotal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// Opponents' last contributions, in player order.
    Individual(Vec<u32>),
    /// Sum of the opponents' last contributions.
    GroupTotal(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PggState {
    /// Completed rounds.
    pub round: usize,
    pub last_contributions: Vec<u32>,
    pub cumulative_payoffs: Vec<f64>,
}

impl PggState {
    fn new(group_size: usize) -> Self {
        Self {
            round: 0,
            last_contributions: vec![0; group_size],
            cumulative_payoffs: vec![0.0; group_size],
        }
    }

    pub fn observe(&self, player: usize, mode: ObservationMode) -> Observation {
        let others = self
            .last_contributions
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .map(|(_, &c)| c);
        match mode {
            ObservationMode::Individual => Observation::Individual(others.collect()),
            ObservationMode::GroupTotal => Observation::GroupTotal(others.sum()),
        }
    }
}

/// One game instance; simultaneous moves, full revelation after each round.
#[derive(Debug, Clone)]
pub struct PggGame {
    cfg: PggConfig,
    state: PggState,
}

impl PggGame {
    pub fn new(cfg: PggConfig) -> Result<Self> {
        cfg.validate()?;
        let state = PggState::new(cfg.group_size);
        Ok(Self { cfg, state })
    }

    pub fn config(&self) -> &PggConfig {
        &self.cfg
    }

    pub fn state(&self) -> &PggState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.round >= self.cfg.rounds
    }

    pub fn reset(&mut self) {
        self.state = PggState::new(self.cfg.group_size);
    }

    pub fn step(&mut self, contributions: &[u32]) -> Result<Vec<f64>> {
        if self.is_done() {
            return Err(Error::InvalidConfig("episode already finished".into()));
        }
        let payoffs = pgg_payoff(contributions, &self.cfg)?;
        self.state.round += 1;
        self.state.last_contributions = contributions.to_vec();
        for (acc, p) in self.state.cumulative_payoffs.iter_mut().zip(&payoffs) {
            *acc += p;
        }
        Ok(payoffs)
    }
}

/// Maps the current state to a mixed action for one player.
pub trait Strategy {
    fn policy(&mut self, state: &PggState, player: usize) -> ActionDistribution;
}

/// A fixed distribution is a stationary strategy.
impl Strategy for ActionDistribution {
    fn policy(&mut self, _state: &PggState, _player: usize) -> ActionDistribution {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PggRecord {
    pub episode: usize,
    /// 1-indexed.
    pub round: usize,
    pub player: usize,
    pub contribution: u32,
    pub payoff: f64,
}

/// Per-round, per-player contribution and payoff records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PggHistory {
    pub records: Vec<PggRecord>,
}

impl PggHistory {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory csv");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let records = r.deserialize().collect::<std::result::Result<Vec<PggRecord>, _>>()?;
        Ok(Self { records })
    }

    pub fn contributions_of(&self, episode: usize, player: usize) -> Vec<u32> {
        self.records
            .iter()
            .filter(|r| r.episode == episode && r.player == player)
            .map(|r| r.contribution)
            .collect()
    }
}

/// Samples a full episode of simultaneous rounds.
///
/// The random stream is `(seed, episode)`, so episodes are reproducible
/// individually.
pub fn pgg_episode<S: Strategy>(
    strategies: &mut [S],
    cfg: &PggConfig,
    episode: usize,
    seed: u64,
) -> Result<PggHistory> {
    if strategies.len() != cfg.group_size {
        return Err(Error::DimensionMismatch {
            expected: cfg.group_size,
            got: strategies.len(),
        });
    }
    let mut game = PggGame::new(cfg.clone())?;
    let mut rng = stream_rng(seed, episode as u64);
    let mut history = PggHistory::default();
    while !game.is_done() {
        let mut contributions = Vec::with_capacity(cfg.group_size);
        for (player, s) in strategies.iter_mut().enumerate() {
            let pi = s.policy(game.state(), player);
            if pi.size() != cfg.action_count() {
                return Err(Error::DimensionMismatch {
                    expected: cfg.action_count(),
                    got: pi.size(),
                });
            }
            let action = WeightedIndex::new(pi.mass())
                .expect("valid distribution has positive total")
                .sample(&mut rng);
            contributions.push(cfg.contribution(action));
        }
        let payoffs = game.step(&contributions)?;
        let round = game.state().round;
        for (player, (&contribution, &payoff)) in contributions.iter().zip(&payoffs).enumerate() {
            history.records.push(PggRecord {
                episode,
                round,
                player,
                contribution,
                payoff,
            });
        }
    }
    Ok(history)
}
