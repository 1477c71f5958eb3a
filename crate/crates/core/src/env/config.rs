use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalogue;
use crate::error::ConfigError;
use crate::soilcrop::ModelParams;
use crate::weather::WeatherParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    Fertilization,
    Irrigation,
    Mixed,
}

impl TaskMode {
    pub fn allows_fertilization(self) -> bool {
        matches!(self, TaskMode::Fertilization | TaskMode::Mixed)
    }

    pub fn allows_irrigation(self) -> bool {
        matches!(self, TaskMode::Irrigation | TaskMode::Mixed)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskMode::Fertilization => "fertilization",
            TaskMode::Irrigation => "irrigation",
            TaskMode::Mixed => "mixed",
        }
    }
}

impl std::str::FromStr for TaskMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fertilization" => Ok(TaskMode::Fertilization),
            "irrigation" => Ok(TaskMode::Irrigation),
            "mixed" => Ok(TaskMode::Mixed),
            other => Err(format!(
                "unknown task `{other}` (expected fertilization, irrigation or mixed)"
            )),
        }
    }
}

impl std::fmt::Display for TaskMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub fertilization_penalty: f64,
    pub irrigation_penalty: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            fertilization_penalty: 0.5,
            irrigation_penalty: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionBounds {
    /// kg/ha
    pub anfer: [f64; 2],
    /// L/m²
    pub amir: [f64; 2],
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            anfer: [0.0, 200.0],
            amir: [0.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PlantingMode {
    /// Sow when the soil is moist and warm enough inside the planting window.
    Auto,
    /// Sow on a fixed simulation day.
    Fixed { day: u32 },
}

/// Deterministic inputs applied on top of the agent's actions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Background {
    /// (simulation day, L/m²) irrigations.
    #[serde(default)]
    pub irrigation: Vec<(u32, f64)>,
    /// (days after planting, kg/ha) fertilizations.
    #[serde(default)]
    pub fertilization: Vec<(u32, f64)>,
}

pub const DEFAULT_IRRIGATION_PLANTING_DAY: u32 = 26;

/// Expert fertilization schedule of the reference field experiment (DAP, kg N/ha).
pub const EXPERT_FERTILIZATION: [(u32, f64); 3] = [(40, 27.0), (45, 35.0), (80, 54.0)];

/// Expert irrigation schedule (DAP, L/m²).
pub const EXPERT_IRRIGATION: [(u32, f64); 16] = [
    (6, 13.0),
    (20, 10.0),
    (37, 10.0),
    (50, 13.0),
    (54, 18.0),
    (65, 25.0),
    (69, 25.0),
    (72, 13.0),
    (75, 15.0),
    (77, 19.0),
    (80, 20.0),
    (84, 20.0),
    (91, 15.0),
    (101, 19.0),
    (104, 4.0),
    (105, 25.0),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskConfig {
    pub task: TaskMode,
    pub observations: Vec<String>,
    pub rewards: RewardParams,
    pub bounds: ActionBounds,
    pub planting: PlantingMode,
    pub background: Background,
    /// Master seed; episodes reset without an explicit seed draw from it.
    pub seed: u64,
    pub max_episode_days: u32,
    /// Day of year of simulation day 0.
    pub start_doy: u32,
    /// Per-variable Gaussian observation noise standard deviations.
    pub noise: indexmap::IndexMap<String, f64>,
    pub model: ModelParams,
    pub weather: WeatherParams,
}

impl TaskConfig {
    pub fn new(task: TaskMode) -> Self {
        let mut cfg = TaskConfig {
            task,
            observations: Vec::new(),
            rewards: RewardParams::default(),
            bounds: ActionBounds::default(),
            planting: PlantingMode::Auto,
            background: Background::default(),
            seed: 0,
            max_episode_days: 365,
            start_doy: 50,
            noise: indexmap::IndexMap::new(),
            model: ModelParams::default(),
            weather: WeatherParams::default(),
        };
        cfg.apply_task_defaults(task);
        cfg
    }

    /// Switch task, resetting the task-dependent fields (observation list,
    /// planting mode, background schedules) to that task's defaults.
    pub fn with_task(mut self, task: TaskMode) -> Self {
        self.apply_task_defaults(task);
        self
    }

    fn apply_task_defaults(&mut self, task: TaskMode) {
        self.task = task;
        self.observations = catalogue::default_observations(task)
            .iter()
            .map(|s| s.to_string())
            .collect();
        match task {
            TaskMode::Fertilization => {
                self.planting = PlantingMode::Auto;
                self.background = Background {
                    irrigation: vec![(5, 20.0)],
                    fertilization: vec![],
                };
            }
            TaskMode::Irrigation => {
                self.planting = PlantingMode::Fixed {
                    day: DEFAULT_IRRIGATION_PLANTING_DAY,
                };
                self.background = Background {
                    irrigation: vec![],
                    fertilization: EXPERT_FERTILIZATION.to_vec(),
                };
            }
            TaskMode::Mixed => {
                self.planting = PlantingMode::Fixed {
                    day: DEFAULT_IRRIGATION_PLANTING_DAY,
                };
                self.background = Background::default();
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.rewards;
        for (name, v) in [
            ("rewards.fertilization_penalty", r.fertilization_penalty),
            ("rewards.irrigation_penalty", r.irrigation_penalty),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        for (name, [lo, hi]) in [("actions.anfer", self.bounds.anfer), ("actions.amir", self.bounds.amir)] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(ConfigError::invalid(
                    name,
                    format!("bounds must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"),
                ));
            }
        }
        if self.observations.is_empty() {
            return Err(ConfigError::invalid(
                "observations",
                "at least one variable is required",
            ));
        }
        for (i, name) in self.observations.iter().enumerate() {
            catalogue::lookup(name)?;
            if self.observations[..i].contains(name) {
                return Err(ConfigError::invalid("observations", format!("`{name}` listed twice")));
            }
        }
        for (name, sd) in &self.noise {
            catalogue::lookup(name)?;
            if !(sd.is_finite() && *sd >= 0.0) {
                return Err(ConfigError::invalid(
                    format!("noise.{name}"),
                    "standard deviation must be >= 0",
                ));
            }
        }
        if self.max_episode_days == 0 {
            return Err(ConfigError::invalid("max_episode_days", "must be >= 1"));
        }
        if !(1..=365).contains(&self.start_doy) {
            return Err(ConfigError::invalid("start_doy", "must lie in 1..=365"));
        }
        for (field, table) in [
            ("background.irrigation", &self.background.irrigation),
            ("background.fertilization", &self.background.fertilization),
        ] {
            for (day, amount) in table {
                if !(amount.is_finite() && *amount >= 0.0) {
                    return Err(ConfigError::invalid(field, format!("amount on day {day} must be >= 0")));
                }
            }
        }
        self.model.validate()?;
        self.weather.validate()?;
        Ok(())
    }

    /// Load a configuration file. `model_file` / `weather_file` entries are
    /// resolved relative to the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = read(path)?;
        let mut overrides = ConfigOverrides::from_toml_str(&text)?;
        overrides.resolve_files(path.parent().unwrap_or(Path::new(".")))?;
        let task = overrides.task.unwrap_or(TaskMode::Fertilization);
        TaskConfig::new(task).with_overrides(&overrides)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let overrides = ConfigOverrides::from_toml_str(text)?;
        let task = overrides.task.unwrap_or(TaskMode::Fertilization);
        TaskConfig::new(task).with_overrides(&overrides)
    }

    /// Apply partial overrides (from a config file or a wire `init` payload).
    pub fn with_overrides(&self, o: &ConfigOverrides) -> Result<Self, ConfigError> {
        let mut cfg = match o.task {
            Some(task) if task != self.task => self.clone().with_task(task),
            _ => self.clone(),
        };
        if let Some(obs) = &o.observations {
            cfg.observations = obs.clone();
        }
        if let Some(r) = &o.rewards {
            if let Some(v) = r.fertilization_penalty {
                cfg.rewards.fertilization_penalty = v;
            }
            if let Some(v) = r.irrigation_penalty {
                cfg.rewards.irrigation_penalty = v;
            }
        }
        if let Some(a) = &o.actions {
            if let Some(v) = a.anfer {
                cfg.bounds.anfer = v;
            }
            if let Some(v) = a.amir {
                cfg.bounds.amir = v;
            }
        }
        if let Some(p) = o.planting {
            cfg.planting = p;
        }
        if let Some(b) = &o.background {
            if let Some(v) = &b.irrigation {
                cfg.background.irrigation = v.clone();
            }
            if let Some(v) = &b.fertilization {
                cfg.background.fertilization = v.clone();
            }
        }
        if let Some(v) = o.seed {
            cfg.seed = v;
        }
        if let Some(v) = o.max_episode_days {
            cfg.max_episode_days = v;
        }
        if let Some(v) = o.start_doy {
            cfg.start_doy = v;
        }
        if let Some(n) = &o.noise {
            cfg.noise = n.clone();
        }
        if let Some(m) = &o.model {
            cfg.model = merge_into(&cfg.model, m, "model")?;
        }
        if let Some(w) = &o.weather {
            cfg.weather = merge_into(&cfg.weather, w, "weather")?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn merge_into<T>(base: &T, patch: &Value, section: &str) -> Result<T, ConfigError>
where
    T: Serialize + serde::de::DeserializeOwned,
{
    let mut value = serde_json::to_value(base).map_err(|e| ConfigError::Parse(e.to_string()))?;
    merge_json(&mut value, patch);
    serde_json::from_value(value).map_err(|e| ConfigError::invalid(section, e.to_string()))
}

/// Recursively overlay `patch` on `base`; objects merge, everything else replaces.
fn merge_json(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardOverrides {
    pub fertilization_penalty: Option<f64>,
    pub irrigation_penalty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundOverrides {
    pub anfer: Option<[f64; 2]>,
    pub amir: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundOverrides {
    pub irrigation: Option<Vec<(u32, f64)>>,
    pub fertilization: Option<Vec<(u32, f64)>>,
}

/// Partial configuration. Every field is optional; absent fields keep the
/// base configuration's value. The same shape is read from TOML files and
/// from the `config` object of a wire `init` message.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub task: Option<TaskMode>,
    pub observations: Option<Vec<String>>,
    pub rewards: Option<RewardOverrides>,
    pub actions: Option<BoundOverrides>,
    pub planting: Option<PlantingMode>,
    pub background: Option<BackgroundOverrides>,
    pub seed: Option<u64>,
    pub max_episode_days: Option<u32>,
    pub start_doy: Option<u32>,
    pub noise: Option<indexmap::IndexMap<String, f64>>,
    /// Partial model parameters merged over the base model.
    pub model: Option<Value>,
    pub weather: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weather_file: Option<String>,
}

impl ConfigOverrides {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Inline the parameter files named by `model_file` / `weather_file`.
    /// Inline `model` / `weather` tables are applied on top of the files.
    pub fn resolve_files(&mut self, base_dir: &Path) -> Result<(), ConfigError> {
        if let Some(file) = self.model_file.take() {
            let from_file = load_table(&base_dir.join(file))?;
            self.model = Some(layer(from_file, self.model.take()));
        }
        if let Some(file) = self.weather_file.take() {
            let from_file = load_table(&base_dir.join(file))?;
            self.weather = Some(layer(from_file, self.weather.take()));
        }
        Ok(())
    }
}

fn load_table(path: &Path) -> Result<Value, ConfigError> {
    let text = read(path)?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
}

fn layer(mut base: Value, top: Option<Value>) -> Value {
    if let Some(top) = top {
        merge_json(&mut base, &top);
    }
    base
}
