use super::params::{ModelParams, PlantingParams};
use super::state::{CropState, SoilState, Stage, TerminalCause};
use crate::weather::WeatherDay;

/// Daily thermal time with the mean temperature capped at `topt`.
pub fn compute_gdd(tmax: f64, tmin: f64, params: &ModelParams) -> f64 {
    let mean = 0.5 * (tmax + tmin);
    (mean.min(params.topt) - params.tbase).max(0.0)
}

/// Accumulate thermal time and move to the next stage once its threshold is
/// reached. At most one transition happens per day, and a day without
/// thermal time brings no development.
pub fn update_phenology(crop: &mut CropState, dtt: f64, params: &ModelParams) {
    if !crop.is_planted() || crop.stage == Stage::Maturity || dtt <= 0.0 {
        return;
    }
    if crop.stage.is_vegetative() {
        crop.vstage += dtt / params.phyllochron;
    }
    crop.gdd += dtt;
    let Some(next) = crop.stage.next() else {
        return;
    };
    let reached = next.threshold(params).is_some_and(|theta| crop.gdd >= theta);
    if reached {
        crop.stage = next;
        if next == Stage::Emergence {
            crop.xlai = params.lai_at_emergence;
            crop.topwt = params.biomass_at_emergence;
            crop.plant_n = crate::soilcrop::critical_n_fraction(crop.topwt, params) * crop.topwt;
        }
    }
}

pub fn check_terminal(
    crop: &CropState,
    _soil: &SoilState,
    day_of_simulation: u32,
    params: &ModelParams,
) -> Option<TerminalCause> {
    if crop.stage == Stage::Maturity {
        return Some(TerminalCause::Maturity);
    }
    if crop.is_emerged() {
        if crop.stress_days >= params.failure_days {
            return Some(TerminalCause::StressFailure);
        }
    } else if day_of_simulation >= params.emergence_deadline {
        return Some(TerminalCause::NoEmergence);
    }
    None
}

/// Whether an unplanted field should be sown on `day_of_simulation`, given the
/// most recent days of weather (oldest first).
pub fn auto_plant_check(
    soil: &SoilState,
    recent_weather: &[WeatherDay],
    day_of_simulation: u32,
    planting: &PlantingParams,
) -> bool {
    if day_of_simulation < planting.window_open || day_of_simulation > planting.window_close {
        return false;
    }
    if day_of_simulation == planting.window_close {
        return true;
    }
    let top = &soil.layers[0];
    let moist = top.sw >= planting.moisture_fraction * top.dul;
    let window = &recent_weather[recent_weather.len().saturating_sub(planting.window_days)..];
    let warm = !window.is_empty()
        && window.iter().map(WeatherDay::tmean).sum::<f64>() / window.len() as f64 >= planting.min_temperature;
    moist && warm
}
