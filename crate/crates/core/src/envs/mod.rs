//! Environments: the repeated public goods game and a finite MDP container.

mod mdp;
mod pgg;

pub use mdp::{evaluate_policy, mdp_expected_return, FiniteMdp, DEFAULT_EVALUATION_TOLERANCE};
pub use pgg::{
    pgg_episode, pgg_payoff, Observation, ObservationMode, PggConfig, PggGame, PggHistory,
    PggRecord, PggState, Strategy,
};
