use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

const DEFAULT_MODEL: &str = include_str!("../../configs/model.toml");

/// Cumulative thermal time since planting (°C·day) at which each stage
/// after sowing is entered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageThresholds {
    pub germination: f64,
    pub emergence: f64,
    pub end_juvenile: f64,
    pub floral_initiation: f64,
    pub silking: f64,
    pub grain_fill_start: f64,
    pub grain_fill_end: f64,
    pub maturity: f64,
}

impl StageThresholds {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.germination,
            self.emergence,
            self.end_juvenile,
            self.floral_initiation,
            self.silking,
            self.grain_fill_start,
            self.grain_fill_end,
            self.maturity,
        ]
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        Self {
            germination: v[0],
            emergence: v[1],
            end_juvenile: v[2],
            floral_initiation: v[3],
            silking: v[4],
            grain_fill_start: v[5],
            grain_fill_end: v[6],
            maturity: v[7],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantingParams {
    /// First simulation day on which planting may happen.
    pub window_open: u32,
    /// Planting is forced on this day if it has not happened yet.
    pub window_close: u32,
    /// Topsoil water content must reach this fraction of DUL.
    pub moisture_fraction: f64,
    /// Minimum mean air temperature over the recent window, °C.
    pub min_temperature: f64,
    pub window_days: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    /// cm
    pub thickness: f64,
    pub ll: f64,
    pub dul: f64,
    pub sat: f64,
    /// Initial water as a fraction of the LL..DUL range, drawn uniformly.
    pub init_water: [f64; 2],
    /// Initial mineral N, kg/ha, drawn uniformly.
    pub init_n: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub tbase: f64,
    pub topt: f64,
    pub phyllochron: f64,

    /// g dry matter per MJ of incident solar radiation.
    pub rue: f64,
    pub extinction: f64,
    pub max_lai: f64,
    pub lai_per_leaf: f64,
    pub lai_at_emergence: f64,
    /// LAI lost per °C·day once grain filling starts.
    pub senescence_rate: f64,
    pub biomass_at_emergence: f64,

    pub grain_partition: f64,
    /// kg/ha/day moved from vegetative mass to grain during grain fill.
    pub translocation_rate: f64,
    /// Upper bound on translocation as a fraction of vegetative mass per day.
    pub translocation_max_fraction: f64,
    /// Maximum grain N mass fraction.
    pub grain_n_max: f64,
    pub grain_n_uptake_fraction: f64,
    pub grain_n_remobilization: f64,

    /// Critical N (%) = a · W^-b, W in t/ha, floored at `n_dilution_floor_t`.
    pub n_dilution_a: f64,
    pub n_dilution_b: f64,
    pub n_dilution_floor_t: f64,
    pub max_n_uptake: f64,
    pub uptake_efficiency: f64,

    pub mineralization_rate: f64,
    pub mineralization_tbase: f64,
    pub mineralization_tref: f64,

    /// Curve-number retention S, mm.
    pub runoff_retention: f64,
    pub pet_coefficient: f64,
    /// Fraction of water above DUL that drains out of a layer per day.
    pub drainage_coefficient: f64,
    /// Fraction of root-zone plant-available water extractable per day.
    pub root_uptake_rate: f64,
    /// cm of root depth per °C·day.
    pub root_growth_rate: f64,
    pub max_root_depth: f64,
    pub seed_depth: f64,
    pub wtdep: f64,

    pub failure_stress: f64,
    pub failure_days: u32,
    pub emergence_deadline: u32,

    pub thresholds: StageThresholds,
    pub planting: PlantingParams,
    pub layers: Vec<LayerSpec>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_MODEL).expect("bundled model parameters are valid")
    }
}

impl ModelParams {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let params: ModelParams = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("model params serialize")
    }

    // `!(a > b)` on purpose: NaN must fail too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let non_negative = [
            ("tbase", self.tbase),
            ("phyllochron", self.phyllochron),
            ("rue", self.rue),
            ("extinction", self.extinction),
            ("max_lai", self.max_lai),
            ("lai_per_leaf", self.lai_per_leaf),
            ("lai_at_emergence", self.lai_at_emergence),
            ("senescence_rate", self.senescence_rate),
            ("biomass_at_emergence", self.biomass_at_emergence),
            ("grain_partition", self.grain_partition),
            ("translocation_rate", self.translocation_rate),
            ("translocation_max_fraction", self.translocation_max_fraction),
            ("grain_n_max", self.grain_n_max),
            ("grain_n_uptake_fraction", self.grain_n_uptake_fraction),
            ("grain_n_remobilization", self.grain_n_remobilization),
            ("n_dilution_a", self.n_dilution_a),
            ("n_dilution_b", self.n_dilution_b),
            ("max_n_uptake", self.max_n_uptake),
            ("uptake_efficiency", self.uptake_efficiency),
            ("mineralization_rate", self.mineralization_rate),
            ("runoff_retention", self.runoff_retention),
            ("pet_coefficient", self.pet_coefficient),
            ("drainage_coefficient", self.drainage_coefficient),
            ("root_uptake_rate", self.root_uptake_rate),
            ("root_growth_rate", self.root_growth_rate),
            ("max_root_depth", self.max_root_depth),
            ("seed_depth", self.seed_depth),
            ("wtdep", self.wtdep),
            ("failure_stress", self.failure_stress),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.topt > self.tbase) {
            return Err(ConfigError::invalid("topt", "must exceed tbase"));
        }
        if self.phyllochron <= 0.0 {
            return Err(ConfigError::invalid("phyllochron", "must be > 0"));
        }
        if !(self.mineralization_tref > self.mineralization_tbase) {
            return Err(ConfigError::invalid(
                "mineralization_tref",
                "must exceed mineralization_tbase",
            ));
        }
        for (name, v) in [
            ("uptake_efficiency", self.uptake_efficiency),
            ("drainage_coefficient", self.drainage_coefficient),
            ("root_uptake_rate", self.root_uptake_rate),
            ("translocation_max_fraction", self.translocation_max_fraction),
            ("grain_partition", self.grain_partition),
            ("grain_n_remobilization", self.grain_n_remobilization),
        ] {
            if v > 1.0 {
                return Err(ConfigError::invalid(name, "must be <= 1"));
            }
        }
        let th = self.thresholds.as_array();
        const NAMES: [&str; 8] = [
            "germination",
            "emergence",
            "end_juvenile",
            "floral_initiation",
            "silking",
            "grain_fill_start",
            "grain_fill_end",
            "maturity",
        ];
        let mut prev = 0.0;
        for (i, v) in th.iter().enumerate() {
            if !(v.is_finite() && *v > prev) {
                return Err(ConfigError::invalid(
                    format!("thresholds.{}", NAMES[i]),
                    "thresholds must be positive and strictly increasing along the stage sequence",
                ));
            }
            prev = *v;
        }
        let pl = &self.planting;
        if pl.window_close < pl.window_open {
            return Err(ConfigError::invalid("planting.window_close", "must be >= window_open"));
        }
        if !(pl.moisture_fraction.is_finite() && pl.moisture_fraction >= 0.0) {
            return Err(ConfigError::invalid("planting.moisture_fraction", "must be >= 0"));
        }
        if pl.window_days == 0 {
            return Err(ConfigError::invalid("planting.window_days", "must be >= 1"));
        }
        if self.layers.is_empty() {
            return Err(ConfigError::invalid("layers", "at least one soil layer is required"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.thickness.is_finite() && l.thickness > 0.0) {
                return Err(ConfigError::invalid(format!("layers[{i}].thickness"), "must be > 0"));
            }
            if !(l.ll >= 0.0 && l.ll < l.dul) {
                return Err(ConfigError::invalid(
                    format!("layers[{i}].ll"),
                    format!("need 0 <= LL < DUL, got LL={} DUL={}", l.ll, l.dul),
                ));
            }
            if !(l.dul < l.sat && l.sat <= 1.0) {
                return Err(ConfigError::invalid(
                    format!("layers[{i}].sat"),
                    format!("need DUL < SAT <= 1, got DUL={} SAT={}", l.dul, l.sat),
                ));
            }
            let [lo, hi] = l.init_water;
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(ConfigError::invalid(
                    format!("layers[{i}].init_water"),
                    "need 0 <= lo <= hi <= 1",
                ));
            }
            let [lo, hi] = l.init_n;
            if !(lo.is_finite() && 0.0 <= lo && lo <= hi && hi.is_finite()) {
                return Err(ConfigError::invalid(
                    format!("layers[{i}].init_n"),
                    "need 0 <= lo <= hi",
                ));
            }
        }
        Ok(())
    }

    pub fn profile_depth(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }
}
