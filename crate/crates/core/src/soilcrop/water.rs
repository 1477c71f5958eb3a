use super::params::ModelParams;
use super::state::{CropState, SoilState};
use crate::weather::WeatherDay;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaterFluxes {
    pub ep: f64,
    pub es: f64,
    pub runoff: f64,
    /// Water leaving the bottom of the profile, mm.
    pub drainage: f64,
    /// Outflow from each layer to the one below (the last entry is `drainage`).
    pub percolation: Vec<f64>,
    pub pet: f64,
    pub swfac: f64,
}

/// Priestley–Taylor style potential evapotranspiration, mm/day.
pub fn potential_et(weather: &WeatherDay, params: &ModelParams) -> f64 {
    const ALBEDO: f64 = 0.2;
    let td = 0.6 * weather.tmax + 0.4 * weather.tmin;
    let eeq = weather.srad * (4.88e-3 - 4.37e-3 * ALBEDO) * (td + 29.0);
    (params.pet_coefficient * eeq).max(0.0)
}

/// Curve-number runoff for `p` mm of water reaching the surface.
pub(crate) fn scs_runoff(p: f64, retention: f64) -> f64 {
    let ia = 0.2 * retention;
    if p > ia {
        (p - ia).powi(2) / (p + 0.8 * retention)
    } else {
        0.0
    }
}

/// Daily soil water balance: runoff, top-down infiltration with cascading
/// drainage, then soil evaporation from the top layer and root water uptake.
pub fn water_balance(
    soil: &mut SoilState,
    crop: &CropState,
    weather: &WeatherDay,
    amir: f64,
    params: &ModelParams,
) -> WaterFluxes {
    let input = weather.rain + amir;
    let runoff = scs_runoff(input, params.runoff_retention);

    let mut carry = input - runoff;
    let mut percolation = Vec::with_capacity(soil.layers.len());
    for layer in &mut soil.layers {
        let unit = layer.mm_per_unit();
        let mut w = layer.water_mm() + carry;
        let dul = layer.dul * unit;
        let sat = layer.sat * unit;
        let mut out = 0.0;
        if w > dul {
            out = params.drainage_coefficient * (w - dul);
            if w - out > sat {
                out = w - sat;
            }
        }
        w -= out;
        if carry != 0.0 || out != 0.0 {
            layer.set_water_mm(w);
        }
        percolation.push(out);
        carry = out;
    }
    let drainage = carry;

    let pet = potential_et(weather, params);
    let cover = 1.0 - (-params.extinction * crop.xlai).exp();
    let pot_ep = pet * cover;
    let pot_es = pet * (1.0 - cover);

    let top = &mut soil.layers[0];
    let es = (pot_es * top.available_fraction()).min(top.available_mm());
    if es > 0.0 {
        let w = top.water_mm() - es;
        top.set_water_mm(w);
    }

    let roots = soil.root_fractions(crop.rtdep);
    let supplies: Vec<f64> = soil
        .layers
        .iter()
        .zip(&roots)
        .map(|(l, f)| f * params.root_uptake_rate * l.available_mm())
        .collect();
    let supply: f64 = supplies.iter().sum();

    let ep = if pot_ep > 0.0 && supply > 0.0 {
        pot_ep.min(supply)
    } else {
        0.0
    };
    if ep > 0.0 {
        let share = ep / supply;
        for (layer, s) in soil.layers.iter_mut().zip(&supplies) {
            if *s > 0.0 {
                let w = layer.water_mm() - s * share;
                layer.set_water_mm(w);
            }
        }
    }

    let swfac = if pot_ep > 0.0 { (supply / pot_ep).min(1.0) } else { 1.0 };

    WaterFluxes {
        ep,
        es,
        runoff,
        drainage,
        percolation,
        pet,
        swfac,
    }
}
