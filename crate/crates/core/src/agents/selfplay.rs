use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{regularized_best_response, PenaltyConfig, PriorSchedule};
use crate::envs::{PggConfig, PggGame, PggHistory, PggRecord};
use crate::error::{Error, Result};
use crate::info::{serialize_extended, InfoCostKind, PriorKind};
use crate::ot::ActionDistribution;
use crate::rng::stream_rng;

/// Who the bounded-rational agents play against.
#[derive(Debug, Clone, PartialEq)]
pub enum Opponents {
    /// Every seat is an agent with its own prior and history.
    SelfPlay,
    /// Seat 0 is the agent; seats `1..` sample from these fixed strategies.
    Fixed(Vec<ActionDistribution>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfPlayRound {
    pub episode: usize,
    /// 1-indexed.
    pub round: usize,
    pub player: usize,
    pub prior: ActionDistribution,
    pub policy: ActionDistribution,
    /// Expected contribution under the policy, in tokens.
    pub mean_contribution: f64,
    pub info_cost: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelfPlayRun {
    pub rounds: Vec<SelfPlayRound>,
    pub history: PggHistory,
}

impl SelfPlayRun {
    /// Mean of `mean_contribution` over agents and episodes, per round.
    pub fn mean_contribution_by_round(&self) -> Vec<f64> {
        let rounds = self.rounds.iter().map(|r| r.round).max().unwrap_or(0);
        let mut sum = vec![0.0; rounds];
        let mut count = vec![0usize; rounds];
        for r in &self.rounds {
            sum[r.round - 1] += r.mean_contribution;
            count[r.round - 1] += 1;
        }
        sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect()
    }
}

struct Agent {
    seat: usize,
    initial_prior: ActionDistribution,
    actions: Vec<usize>,
}

impl Agent {
    fn prior(&self, schedule: PriorSchedule, size: usize) -> Result<ActionDistribution> {
        match schedule {
            PriorSchedule::PreviousPolicy if !self.actions.is_empty() => {
                ActionDistribution::empirical(size, &self.actions)
            }
            _ => Ok(self.initial_prior.clone()),
        }
    }
}

/// Repeated public goods game where agents best-respond each round, under
/// the penalty, to the empirical mean of each opponent's past contributions
/// (no contributions are expected before the first round is observed).
pub fn pgg_selfplay(
    cfg: &PggConfig,
    penalty: &PenaltyConfig,
    opponents: &Opponents,
    episodes: usize,
    seed: u64,
) -> Result<SelfPlayRun> {
    cfg.validate()?;
    penalty.validate()?;
    let size = cfg.action_count();
    penalty.cost.validate(size)?;
    let space = crate::ot::ActionSpace::new(size)?;
    let initial_prior = crate::info::make_prior(&penalty.prior, &space, None)?;

    let agent_seats: Vec<usize> = match opponents {
        Opponents::SelfPlay => (0..cfg.group_size).collect(),
        Opponents::Fixed(strategies) => {
            if strategies.len() + 1 != cfg.group_size {
                return Err(Error::DimensionMismatch {
                    expected: cfg.group_size - 1,
                    got: strategies.len(),
                });
            }
            for s in strategies {
                if s.size() != size {
                    return Err(Error::DimensionMismatch {
                        expected: size,
                        got: s.size(),
                    });
                }
            }
            vec![0]
        }
    };

    let mut run = SelfPlayRun::default();
    for episode in 0..episodes {
        let mut rng = stream_rng(seed, episode as u64);
        let mut game = PggGame::new(cfg.clone())?;
        let mut agents: Vec<Agent> = agent_seats
            .iter()
            .map(|&seat| Agent {
                seat,
                initial_prior: initial_prior.clone(),
                actions: Vec::new(),
            })
            .collect();
        let mut totals = vec![0.0; cfg.group_size];
        let mut played = 0usize;

        while !game.is_done() {
            let round = game.state().round + 1;
            let mut policies: Vec<ActionDistribution> = match opponents {
                Opponents::SelfPlay => Vec::with_capacity(cfg.group_size),
                Opponents::Fixed(strategies) => {
                    let mut v = vec![initial_prior.clone()];
                    v.extend(strategies.iter().cloned());
                    v
                }
            };
            for agent in &agents {
                let others: f64 = if played == 0 {
                    0.0
                } else {
                    (0..cfg.group_size)
                        .filter(|&j| j != agent.seat)
                        .map(|j| totals[j] / played as f64)
                        .sum()
                };
                let utilities = cfg.action_utilities(others);
                let prior = agent.prior(penalty.schedule, size)?;
                let br = regularized_best_response(&utilities, &prior, penalty)?;
                run.rounds.push(SelfPlayRound {
                    episode,
                    round,
                    player: agent.seat,
                    mean_contribution: br.policy.mean() * cfg.granularity as f64,
                    info_cost: br.info_cost,
                    objective: br.objective,
                    prior,
                    policy: br.policy.clone(),
                });
                match opponents {
                    Opponents::SelfPlay => policies.push(br.policy),
                    Opponents::Fixed(_) => policies[agent.seat] = br.policy,
                }
            }

            let actions: Vec<usize> = policies
                .iter()
                .map(|pi| {
                    WeightedIndex::new(pi.mass())
                        .expect("valid distribution has positive total")
                        .sample(&mut rng)
                })
                .collect();
            let contributions: Vec<u32> = actions.iter().map(|&a| cfg.contribution(a)).collect();
            let payoffs = game.step(&contributions)?;
            for agent in &mut agents {
                agent.actions.push(actions[agent.seat]);
            }
            for (t, &c) in totals.iter_mut().zip(&contributions) {
                *t += c as f64;
            }
            played += 1;
            for (player, (&contribution, &payoff)) in contributions.iter().zip(&payoffs).enumerate() {
                run.history.records.push(PggRecord {
                    episode,
                    round,
                    player,
                    contribution,
                    payoff,
                });
            }
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepConfig {
    #[serde(default)]
    pub game: PggConfig,
    pub cost: InfoCostKind,
    pub lambdas: Vec<f64>,
    pub prior: PriorKind,
    #[serde(default)]
    pub schedule: PriorSchedule,
    pub seeds: Vec<u64>,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
}

fn default_episodes() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub lambda: f64,
    pub cost_kind: String,
    pub prior: String,
    pub schedule: String,
    pub seed: u64,
    pub round: usize,
    pub mean_contribution: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub info_cost: f64,
    pub penalized_objective: f64,
}

/// Self-play for every `(lambda, seed)` cell, averaged over agents and
/// episodes per round. Cells run in parallel; rows come back ordered by
/// `(lambda index, seed index, round)`.
pub fn lambda_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.lambdas.is_empty() {
        return Err(Error::InvalidConfig("lambda grid is empty".into()));
    }
    if let Some(&bad) = cfg.lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidLambda(bad));
    }
    if cfg.seeds.is_empty() {
        return Err(Error::InvalidConfig("no seeds given".into()));
    }
    if cfg.episodes == 0 {
        return Err(Error::InvalidConfig("episodes must be positive".into()));
    }
    let cells: Vec<(f64, u64)> = cfg
        .lambdas
        .iter()
        .flat_map(|&l| cfg.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(lambda, seed)| {
            let penalty = PenaltyConfig {
                lambda,
                cost: cfg.cost,
                prior: cfg.prior.clone(),
                schedule: cfg.schedule,
            };
            let run = pgg_selfplay(&cfg.game, &penalty, &Opponents::SelfPlay, cfg.episodes, seed)?;
            let rounds = cfg.game.rounds;
            let mut sums = vec![(0.0, 0.0, 0.0, 0usize); rounds];
            for r in &run.rounds {
                let s = &mut sums[r.round - 1];
                s.0 += r.mean_contribution;
                s.1 += r.info_cost;
                s.2 += r.objective;
                s.3 += 1;
            }
            Ok(sums
                .into_iter()
                .enumerate()
                .map(|(k, (m, c, o, n))| {
                    let n = n as f64;
                    SweepRow {
                        lambda,
                        cost_kind: cfg.cost.to_string(),
                        prior: cfg.prior.to_string(),
                        schedule: cfg.schedule.to_string(),
                        seed,
                        round: k + 1,
                        mean_contribution: m / n,
                        info_cost: c / n,
                        penalized_objective: o / n,
                    }
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
