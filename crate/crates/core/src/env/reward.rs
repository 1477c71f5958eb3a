use serde::{Deserialize, Serialize};

use super::config::{RewardParams, TaskMode};
use crate::action::Action;
use crate::soilcrop::DailyFluxes;

/// Daily return: a scalar for single-objective tasks, `[fertilization,
/// irrigation]` for the mixed task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Reward {
    Scalar(f64),
    Vector([f64; 2]),
}

impl Reward {
    pub fn zero_for(task: TaskMode) -> Reward {
        match task {
            TaskMode::Mixed => Reward::Vector([0.0, 0.0]),
            _ => Reward::Scalar(0.0),
        }
    }

    pub fn components(&self) -> Vec<f64> {
        match *self {
            Reward::Scalar(r) => vec![r],
            Reward::Vector(v) => v.to_vec(),
        }
    }
}

impl std::ops::Add for Reward {
    type Output = Reward;

    fn add(self, rhs: Reward) -> Reward {
        match (self, rhs) {
            (Reward::Scalar(a), Reward::Scalar(b)) => Reward::Scalar(a + b),
            (Reward::Vector(a), Reward::Vector(b)) => Reward::Vector([a[0] + b[0], a[1] + b[1]]),
            (a, b) => panic!("cannot add rewards of different shapes: {a:?} + {b:?}"),
        }
    }
}

/// Nitrogen uptake over the transition minus the penalized fertilizer amount.
pub fn reward_fertilization(trnu: f64, anfer: f64, penalty: f64) -> f64 {
    trnu - penalty * anfer
}

/// Above-ground biomass gain over the transition minus the penalized water amount.
pub fn reward_irrigation(delta_topwt: f64, amir: f64, penalty: f64) -> f64 {
    delta_topwt - penalty * amir
}

pub fn reward_mixed(fluxes: &DailyFluxes, action: &Action, params: &RewardParams) -> [f64; 2] {
    [
        reward_fertilization(fluxes.trnu, action.anfer, params.fertilization_penalty),
        reward_irrigation(fluxes.delta_topwt, action.amir, params.irrigation_penalty),
    ]
}

/// Reward for `task` given the transition fluxes and the agent's own action.
pub fn task_reward(task: TaskMode, fluxes: &DailyFluxes, action: &Action, params: &RewardParams) -> Reward {
    match task {
        TaskMode::Fertilization => Reward::Scalar(reward_fertilization(
            fluxes.trnu,
            action.anfer,
            params.fertilization_penalty,
        )),
        TaskMode::Irrigation => Reward::Scalar(reward_irrigation(
            fluxes.delta_topwt,
            action.amir,
            params.irrigation_penalty,
        )),
        TaskMode::Mixed => Reward::Vector(reward_mixed(fluxes, action, params)),
    }
}
