use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::policy::Policy;
use crate::action::Action;
use crate::env::{EnvError, EnvInstance, Info, Observation, Reward, StepResult, TaskConfig, TaskMode};
use crate::error::ConfigError;
use crate::seed::derive_seed;
use crate::soilcrop::{DailyFluxes, Stage, TerminalCause};

/// One transition: the action taken on `day` and its consequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub day: u32,
    /// Days after planting when the action was chosen.
    pub dap: u32,
    pub action: Action,
    /// Agent action plus background schedule.
    pub applied: Action,
    pub reward: Reward,
    /// Observation after the transition.
    pub observation: Observation,
    pub fluxes: DailyFluxes,
    pub istage: u8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FinalIndicators {
    pub grnwt: f64,
    pub topwt: f64,
    pub pcngrn: f64,
    pub cumsumfert: f64,
    pub totir: f64,
    pub fertilizations: u32,
    pub irrigations: u32,
    pub cleach: f64,
    pub runoff: f64,
    /// Number of daily steps in the episode.
    pub length: u32,
    pub planting_day: Option<u32>,
    pub maturity_day: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub index: usize,
    pub seed: u64,
    pub task: TaskMode,
    pub days: Vec<DayRecord>,
    pub terminal: TerminalCause,
    pub indicators: FinalIndicators,
}

impl EpisodeLog {
    /// Builds a log incrementally from observed transitions.
    pub(crate) fn start(index: usize, seed: u64, task: TaskMode) -> Self {
        Self {
            index,
            seed,
            task,
            days: Vec::new(),
            terminal: TerminalCause::LengthGuard,
            indicators: FinalIndicators::default(),
        }
    }

    pub(crate) fn record(&mut self, before: &Info, action: Action, result: &StepResult) {
        let info = &result.info;
        if info.planted && self.indicators.planting_day.is_none() {
            self.indicators.planting_day = Some(if before.planted { before.day } else { info.day });
        }
        if info.istage == Stage::Maturity.code() && self.indicators.maturity_day.is_none() {
            self.indicators.maturity_day = Some(info.day);
        }
        self.days.push(DayRecord {
            day: before.day,
            dap: before.dap,
            action,
            applied: info.applied,
            reward: result.reward,
            observation: result.observation.clone(),
            fluxes: info.fluxes,
            istage: info.istage,
        });
        if let Some(t) = info.terminal {
            self.terminal = t;
        }
        let ind = &mut self.indicators;
        ind.grnwt = info.grnwt;
        ind.topwt = info.topwt;
        ind.pcngrn = info.pcngrn;
        ind.cumsumfert = info.cumsumfert;
        ind.totir = info.totir;
        ind.fertilizations = info.fertilizations;
        ind.irrigations = info.irrigations;
        ind.cleach = info.cleach;
        ind.runoff = info.runoff;
        ind.length = self.days.len() as u32;
    }

    /// Day on which each stage was first observed, in order of appearance.
    pub fn stage_days(&self) -> Vec<(u8, u32)> {
        let mut out: Vec<(u8, u32)> = Vec::new();
        for d in &self.days {
            if out.last().map(|s| s.0) != Some(d.istage) {
                out.push((d.istage, d.day + 1));
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("episode {index} (seed {seed}), day {day}: {source}")]
    Env {
        index: usize,
        seed: u64,
        day: u32,
        source: EnvError,
    },
    #[error("batch must contain at least one episode")]
    Empty,
}

/// Run one episode to termination.
pub fn run_episode(config: &TaskConfig, policy: &dyn Policy, index: usize, seed: u64) -> Result<EpisodeLog, EvalError> {
    let mut env = EnvInstance::new(config.clone())?;
    let mut observation = env.reset(Some(seed));
    let mut log = EpisodeLog::start(index, seed, config.task);
    if env.info().is_some_and(|i| i.planted) {
        log.indicators.planting_day = Some(0);
    }
    loop {
        let before = env.info().expect("episode open");
        let action = policy.act(&observation, &before);
        let result = env.step(&action).map_err(|source| EvalError::Env {
            index,
            seed,
            day: before.day,
            source,
        })?;
        log.record(&before, action, &result);
        if result.done {
            return Ok(log);
        }
        observation = result.observation;
    }
}

/// Run `n` episodes in parallel. Episode `i` uses seed `derive_seed(seed, i)`;
/// logs come back in episode order.
pub fn run_episodes(
    config: &TaskConfig,
    policy: &dyn Policy,
    n: usize,
    seed: u64,
) -> Result<Vec<EpisodeLog>, EvalError> {
    if n == 0 {
        return Err(EvalError::Empty);
    }
    config.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| run_episode(config, policy, i, derive_seed(seed, i as u64)))
        .collect()
}
