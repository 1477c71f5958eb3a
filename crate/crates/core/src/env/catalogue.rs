//! Observable state variables and space descriptors.

use serde::{Deserialize, Serialize};

use super::config::{TaskConfig, TaskMode};
use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub unit: &'static str,
    pub low: f64,
    pub high: f64,
    pub kind: VarKind,
    /// One value per soil layer.
    pub per_layer: bool,
}

const fn var(name: &'static str, description: &'static str, unit: &'static str, low: f64, high: f64) -> VarSpec {
    VarSpec {
        name,
        description,
        unit,
        low,
        high,
        kind: VarKind::Continuous,
        per_layer: false,
    }
}

pub const CATALOGUE: &[VarSpec] = &[
    VarSpec {
        kind: VarKind::Discrete,
        ..var("istage", "maize growing stage code (0 = not sown)", "", 0.0, 9.0)
    },
    var(
        "vstage",
        "vegetative growth stage (number of leaves)",
        "leaves",
        0.0,
        30.0,
    ),
    var("topwt", "above the ground population biomass", "kg/ha", 0.0, 60_000.0),
    var("grnwt", "grain weight dry matter", "kg/ha", 0.0, 30_000.0),
    var("swfac", "index of plant water stress (1 = none)", "", 0.0, 1.0),
    var("nstres", "index of plant nitrogen stress (1 = none)", "", 0.0, 1.0),
    var("xlai", "plant population leaf area index", "m2 leaf/m2 soil", 0.0, 10.0),
    var("dtt", "growing degree days for current day", "degC/day", 0.0, 100.0),
    VarSpec {
        kind: VarKind::Discrete,
        ..var("dap", "days after planting", "day", 0.0, 366.0)
    },
    var(
        "cumsumfert",
        "cumulative nitrogen fertilizer applications",
        "kg/ha",
        0.0,
        20_000.0,
    ),
    var("rain", "rainfall for the current day", "L/m2/day", 0.0, 500.0),
    var("ep", "actual plant transpiration rate", "L/m2/day", 0.0, 50.0),
    var("tmax", "maximum temperature for current day", "degC", -60.0, 60.0),
    var("tmin", "minimum temperature for current day", "degC", -60.0, 60.0),
    var("srad", "solar radiation during the current day", "MJ/m2/day", 0.0, 50.0),
    VarSpec {
        per_layer: true,
        ..var(
            "sw",
            "volumetric soil water content in soil layers",
            "cm3/cm3",
            0.0,
            1.0,
        )
    },
    var("wtdep", "depth to water table", "cm", 0.0, 10_000.0),
    var("rtdep", "root depth", "cm", 0.0, 1_000.0),
    var("totir", "total irrigated water", "L/m2", 0.0, 20_000.0),
    var("es", "actual soil evaporation rate", "L/m2/day", 0.0, 50.0),
    var("runoff", "cumulative surface runoff", "L/m2", 0.0, 100_000.0),
    var("cleach", "cumulative nitrate leaching", "kg/ha", 0.0, 100_000.0),
    var("trnu", "daily plant nitrogen uptake", "kg/ha/day", 0.0, 100.0),
    var("pcngrn", "massic fraction of nitrogen in grains", "", 0.0, 1.0),
];

pub const FERTILIZATION_OBSERVATIONS: [&str; 12] = [
    "istage",
    "vstage",
    "topwt",
    "grnwt",
    "swfac",
    "nstres",
    "xlai",
    "dtt",
    "dap",
    "cumsumfert",
    "rain",
    "ep",
];

pub const IRRIGATION_OBSERVATIONS: [&str; 14] = [
    "istage", "vstage", "grnwt", "topwt", "xlai", "tmax", "srad", "dtt", "dap", "sw", "ep", "wtdep", "rtdep", "totir",
];

pub fn default_observations(task: TaskMode) -> Vec<&'static str> {
    match task {
        TaskMode::Fertilization => FERTILIZATION_OBSERVATIONS.to_vec(),
        TaskMode::Irrigation => IRRIGATION_OBSERVATIONS.to_vec(),
        TaskMode::Mixed => {
            let mut v = FERTILIZATION_OBSERVATIONS.to_vec();
            for name in IRRIGATION_OBSERVATIONS {
                if !v.contains(&name) {
                    v.push(name);
                }
            }
            v
        }
    }
}

pub fn lookup(name: &str) -> Result<&'static VarSpec, ConfigError> {
    CATALOGUE
        .iter()
        .find(|v| v.name == name)
        .ok_or_else(|| ConfigError::UnknownVariable {
            name: name.to_string(),
            valid: CATALOGUE.iter().map(|v| v.name).collect::<Vec<_>>().join(", "),
        })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDim {
    pub name: String,
    pub low: f64,
    pub high: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationDim {
    pub name: String,
    /// Empty for scalars, `[layers]` for per-layer vectors.
    pub shape: Vec<usize>,
    pub low: f64,
    pub high: f64,
    pub kind: VarKind,
    pub unit: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spaces {
    pub task: TaskMode,
    pub action_space: Vec<ActionDim>,
    pub observation_space: Vec<ObservationDim>,
}

impl Spaces {
    pub fn for_config(config: &TaskConfig) -> Self {
        let mut action_space = Vec::new();
        if config.task.allows_fertilization() {
            action_space.push(ActionDim {
                name: "anfer".into(),
                low: config.bounds.anfer[0],
                high: config.bounds.anfer[1],
                unit: "kg/ha".into(),
            });
        }
        if config.task.allows_irrigation() {
            action_space.push(ActionDim {
                name: "amir".into(),
                low: config.bounds.amir[0],
                high: config.bounds.amir[1],
                unit: "L/m2".into(),
            });
        }
        let layers = config.model.layers.len();
        let observation_space = config
            .observations
            .iter()
            .map(|name| {
                let spec = lookup(name).expect("validated observation list");
                ObservationDim {
                    name: spec.name.into(),
                    shape: if spec.per_layer { vec![layers] } else { vec![] },
                    low: spec.low,
                    high: spec.high,
                    kind: spec.kind,
                    unit: spec.unit.into(),
                    description: spec.description.into(),
                }
            })
            .collect();
        Spaces {
            task: config.task,
            action_space,
            observation_space,
        }
    }
}
