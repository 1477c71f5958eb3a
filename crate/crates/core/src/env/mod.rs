//! The decision problems on top of the soil–crop surrogate.
//!
//! An [`EnvInstance`] runs one growing season per episode. Each [`step`]
//! takes the agent's action for the current day, merges it with the task's
//! background schedule, advances the field one day and returns the next
//! observation together with the reward for that transition.
//!
//! [`step`]: EnvInstance::step

mod catalogue;
mod config;
mod reward;
mod validate;

pub use catalogue::{
    default_observations, lookup, ActionDim, ObservationDim, Spaces, VarKind, VarSpec, CATALOGUE,
    FERTILIZATION_OBSERVATIONS, IRRIGATION_OBSERVATIONS,
};
pub use config::{
    ActionBounds, Background, BackgroundOverrides, BoundOverrides, ConfigOverrides, PlantingMode, RewardOverrides,
    RewardParams, TaskConfig, TaskMode, DEFAULT_IRRIGATION_PLANTING_DAY, EXPERT_FERTILIZATION, EXPERT_IRRIGATION,
};
pub use reward::{reward_fertilization, reward_irrigation, reward_mixed, task_reward, Reward};
pub use validate::{check_typed_action, validate_action, ActionError, RawAction};

use std::collections::VecDeque;

use indexmap::IndexMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::action::Action;
use crate::error::ConfigError;
use crate::seed::{derive_seed, INIT_STREAM, NOISE_STREAM, WEATHER_STREAM};
use crate::soilcrop::{
    advance_day, auto_plant_check, check_terminal, init_field, CropState, DailyFluxes, SoilState, TerminalCause,
};
use crate::weather::{WeatherDay, WeatherState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObsValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl ObsValue {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            ObsValue::Scalar(v) => Some(*v),
            ObsValue::Vector(_) => None,
        }
    }
}

/// Observed variables in configured order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Observation(pub IndexMap<String, ObsValue>);

impl Observation {
    pub fn get(&self, name: &str) -> Option<&ObsValue> {
        self.0.get(name)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(ObsValue::as_scalar)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Diagnostics delivered with every transition, including state the agent
/// does not observe.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Info {
    /// Simulation day of the state the observation describes.
    pub day: u32,
    pub dap: u32,
    pub istage: u8,
    pub planted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<TerminalCause>,
    /// Total inputs applied on the transition (agent plus background).
    pub applied: Action,
    /// Weather of the transition.
    pub weather: WeatherDay,
    pub fluxes: DailyFluxes,
    pub cumsumfert: f64,
    pub totir: f64,
    pub fertilizations: u32,
    pub irrigations: u32,
    pub topwt: f64,
    pub grnwt: f64,
    pub pcngrn: f64,
    pub cleach: f64,
    pub runoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: Reward,
    pub done: bool,
    pub info: Info,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("no episode is open; call reset first")]
    NotReset,
    #[error("episode is finished; call reset to start a new one")]
    EpisodeDone,
    #[error(transparent)]
    Action(#[from] ActionError),
}

#[derive(Debug, Clone)]
struct Episode {
    seed: u64,
    weather: WeatherState,
    soil: SoilState,
    crop: CropState,
    day: u32,
    recent: VecDeque<WeatherDay>,
    last_weather: WeatherDay,
    last_fluxes: DailyFluxes,
    last_applied: Action,
    cumsumfert: f64,
    totir: f64,
    fertilizations: u32,
    irrigations: u32,
    terminal: Option<TerminalCause>,
    noise: ChaCha8Rng,
}

/// One environment: a task configuration plus the current episode.
#[derive(Debug, Clone)]
pub struct EnvInstance {
    config: TaskConfig,
    spaces: Spaces,
    unseeded_resets: u64,
    episode: Option<Episode>,
}

impl EnvInstance {
    /// Build an environment. It must be [`reset`](Self::reset) before stepping.
    pub fn new(config: TaskConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let spaces = Spaces::for_config(&config);
        Ok(Self {
            config,
            spaces,
            unseeded_resets: 0,
            episode: None,
        })
    }

    pub fn config(&self) -> &TaskConfig {
        &self.config
    }

    pub fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    pub fn action_space(&self) -> &[ActionDim] {
        &self.spaces.action_space
    }

    pub fn observation_space(&self) -> &[ObservationDim] {
        &self.spaces.observation_space
    }

    /// Seed of the current episode.
    pub fn episode_seed(&self) -> Option<u64> {
        self.episode.as_ref().map(|e| e.seed)
    }

    pub fn is_open(&self) -> bool {
        self.episode.as_ref().is_some_and(|e| e.terminal.is_none())
    }

    pub fn soil(&self) -> Option<&SoilState> {
        self.episode.as_ref().map(|e| &e.soil)
    }

    pub fn crop(&self) -> Option<&CropState> {
        self.episode.as_ref().map(|e| &e.crop)
    }

    /// Start a new episode. Without a seed, the next seed of the
    /// environment's master stream is used.
    pub fn reset(&mut self, seed: Option<u64>) -> Observation {
        let seed = seed.unwrap_or_else(|| {
            let s = derive_seed(self.config.seed, self.unseeded_resets);
            self.unseeded_resets += 1;
            s
        });
        let weather = WeatherState::init(
            self.config.weather.clone(),
            derive_seed(seed, WEATHER_STREAM),
            self.config.start_doy,
        )
        .expect("validated weather parameters");
        let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, INIT_STREAM));
        let (soil, crop) = init_field(&self.config.model, &mut init_rng).expect("validated model parameters");
        self.episode = Some(Episode {
            seed,
            weather,
            soil,
            crop,
            day: 0,
            recent: VecDeque::new(),
            last_weather: WeatherDay::default(),
            last_fluxes: DailyFluxes::default(),
            last_applied: Action::NOTHING,
            cumsumfert: 0.0,
            totir: 0.0,
            fertilizations: 0,
            irrigations: 0,
            terminal: None,
            noise: ChaCha8Rng::seed_from_u64(derive_seed(seed, NOISE_STREAM)),
        });
        self.maybe_plant();
        self.observe()
    }

    /// Validate a raw agent action and step with it.
    pub fn step_raw(&mut self, raw: &RawAction) -> Result<StepResult, EnvError> {
        let action = validate_action(&self.config, raw)?;
        self.step(&action)
    }

    pub fn step(&mut self, action: &Action) -> Result<StepResult, EnvError> {
        check_typed_action(&self.config, action)?;
        let cfg = &self.config;
        let ep = self.episode.as_mut().ok_or(EnvError::NotReset)?;
        if ep.terminal.is_some() {
            return Err(EnvError::EpisodeDone);
        }

        let mut applied = *action;
        for &(day, amount) in &cfg.background.irrigation {
            if day == ep.day {
                applied.amir += amount;
            }
        }
        if ep.crop.is_planted() {
            for &(dap, amount) in &cfg.background.fertilization {
                if dap == ep.crop.dap {
                    applied.anfer += amount;
                }
            }
        }

        let weather = ep.weather.generate_day();
        let fluxes = advance_day(&mut ep.soil, &mut ep.crop, &weather, &applied, &cfg.model);

        ep.cumsumfert += applied.anfer;
        ep.totir += applied.amir;
        if applied.anfer > 0.0 {
            ep.fertilizations += 1;
        }
        if applied.amir > 0.0 {
            ep.irrigations += 1;
        }
        let reward = task_reward(cfg.task, &fluxes, action, &cfg.rewards);

        ep.day += 1;
        ep.recent.push_back(weather);
        while ep.recent.len() > cfg.model.planting.window_days {
            ep.recent.pop_front();
        }
        ep.last_weather = weather;
        ep.last_fluxes = fluxes;
        ep.last_applied = applied;

        ep.terminal = check_terminal(&ep.crop, &ep.soil, ep.day, &cfg.model);
        if ep.terminal.is_none() && ep.day >= cfg.max_episode_days {
            ep.terminal = Some(TerminalCause::LengthGuard);
        }
        if ep.terminal.is_none() {
            self.maybe_plant();
        }

        let observation = self.observe();
        let info = self.info().expect("episode exists");
        Ok(StepResult {
            observation,
            reward,
            done: info.terminal.is_some(),
            info,
        })
    }

    fn maybe_plant(&mut self) {
        let cfg = &self.config;
        let Some(ep) = self.episode.as_mut() else {
            return;
        };
        if ep.crop.is_planted() {
            return;
        }
        let plant = match cfg.planting {
            PlantingMode::Fixed { day } => ep.day >= day,
            PlantingMode::Auto => {
                let recent: Vec<WeatherDay> = ep.recent.iter().copied().collect();
                auto_plant_check(&ep.soil, &recent, ep.day, &cfg.model.planting)
            }
        };
        if plant {
            ep.crop.plant(&cfg.model);
        }
    }

    /// Diagnostics for the current state.
    pub fn info(&self) -> Option<Info> {
        let ep = self.episode.as_ref()?;
        Some(Info {
            day: ep.day,
            dap: ep.crop.dap,
            istage: ep.crop.stage.code(),
            planted: ep.crop.is_planted(),
            terminal: ep.terminal,
            applied: ep.last_applied,
            weather: ep.last_weather,
            fluxes: ep.last_fluxes,
            cumsumfert: ep.cumsumfert,
            totir: ep.totir,
            fertilizations: ep.fertilizations,
            irrigations: ep.irrigations,
            topwt: ep.crop.topwt,
            grnwt: ep.crop.grnwt,
            pcngrn: ep.crop.pcngrn,
            cleach: ep.soil.cleach,
            runoff: ep.soil.runoff,
        })
    }

    /// Project the current state onto the configured observation list,
    /// adding configured observation noise. Empty if no episode was started.
    pub fn observe(&mut self) -> Observation {
        let mut obs = self.observe_clean();
        let Some(ep) = self.episode.as_mut() else {
            return obs;
        };
        for (name, value) in obs.0.iter_mut() {
            let sd = self.config.noise.get(name).copied().unwrap_or(0.0);
            if sd <= 0.0 {
                continue;
            }
            let normal = Normal::new(0.0, sd).expect("validated noise level");
            match value {
                ObsValue::Scalar(v) => *v += normal.sample(&mut ep.noise),
                ObsValue::Vector(vs) => vs.iter_mut().for_each(|v| *v += normal.sample(&mut ep.noise)),
            }
        }
        obs
    }

    /// Noise-free projection of the current state.
    pub fn observe_clean(&self) -> Observation {
        let Some(ep) = self.episode.as_ref() else {
            return Observation::default();
        };
        let values = self
            .config
            .observations
            .iter()
            .map(|name| (name.clone(), state_variable(ep, name)))
            .collect();
        Observation(values)
    }
}

fn state_variable(ep: &Episode, name: &str) -> ObsValue {
    let c = &ep.crop;
    let s = &ep.soil;
    let v = match name {
        "istage" => c.stage.code() as f64,
        "vstage" => c.vstage,
        "topwt" => c.topwt,
        "grnwt" => c.grnwt,
        "swfac" => c.swfac,
        "nstres" => c.nstres,
        "xlai" => c.xlai,
        "dtt" => c.dtt,
        "dap" => c.dap as f64,
        "cumsumfert" => ep.cumsumfert,
        "rain" => ep.last_weather.rain,
        "ep" => ep.last_fluxes.ep,
        "tmax" => ep.last_weather.tmax,
        "tmin" => ep.last_weather.tmin,
        "srad" => ep.last_weather.srad,
        "sw" => return ObsValue::Vector(s.sw()),
        "wtdep" => s.wtdep,
        "rtdep" => c.rtdep,
        "totir" => ep.totir,
        "es" => ep.last_fluxes.es,
        "runoff" => s.runoff,
        "cleach" => s.cleach,
        "trnu" => ep.last_fluxes.trnu,
        "pcngrn" => c.pcngrn,
        other => unreachable!("observation `{other}` passed validation but has no accessor"),
    };
    ObsValue::Scalar(v)
}
