//! Daily-step maize and soil surrogate.
//!
//! [`advance_day`] composes the sub-models in a fixed order: thermal time,
//! soil water, soil nitrogen, biomass growth, then phenology. Both soil
//! balances close exactly: the change in stored water equals inputs minus
//! runoff, drainage and evapotranspiration, and the change in stored mineral
//! N equals fertilizer plus mineralization minus uptake and leaching.

mod growth;
mod nitrogen;
mod params;
mod phenology;
mod state;
mod water;

pub use growth::{grow_biomass, grow_roots};
pub use nitrogen::{critical_n_fraction, nitrogen_balance, NitrogenFluxes};
pub use params::{LayerSpec, ModelParams, PlantingParams, StageThresholds};
pub use phenology::{auto_plant_check, check_terminal, compute_gdd, update_phenology};
pub use state::{CropState, SoilLayer, SoilState, Stage, TerminalCause};
pub use water::{potential_et, water_balance, WaterFluxes};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::action::Action;
use crate::error::ConfigError;
use crate::weather::WeatherDay;

/// Magnitudes of one day's flows. Units: water mm, nitrogen and biomass kg/ha.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DailyFluxes {
    pub ep: f64,
    pub es: f64,
    pub runoff: f64,
    pub drainage: f64,
    pub trnu: f64,
    pub mineralization: f64,
    pub leach: f64,
    pub delta_topwt: f64,
}

/// Draw an unplanted field with initial water and mineral N sampled from
/// the configured per-layer ranges.
pub fn init_field<R: Rng + ?Sized>(params: &ModelParams, rng: &mut R) -> Result<(SoilState, CropState), ConfigError> {
    params.validate()?;
    let layers = params
        .layers
        .iter()
        .map(|spec| {
            let frac = uniform(rng, spec.init_water);
            let n = uniform(rng, spec.init_n);
            SoilLayer {
                thickness: spec.thickness,
                sw: spec.ll + frac * (spec.dul - spec.ll),
                ll: spec.ll,
                dul: spec.dul,
                sat: spec.sat,
                no3: n,
            }
        })
        .collect();
    let soil = SoilState {
        layers,
        wtdep: params.wtdep,
        cleach: 0.0,
        runoff: 0.0,
    };
    Ok((soil, CropState::unplanted()))
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    // Always consume one draw so the stream layout does not depend on the ranges.
    let u: f64 = rng.random();
    lo + u * (hi - lo)
}

/// Advance the field by one day under `weather` and the already-validated
/// total inputs `action` (agent plus background schedule).
///
/// An unplanted field still runs its water and nitrogen balances.
pub fn advance_day(
    soil: &mut SoilState,
    crop: &mut CropState,
    weather: &WeatherDay,
    action: &Action,
    params: &ModelParams,
) -> DailyFluxes {
    let growing = crop.is_planted() && crop.stage != Stage::Maturity;
    let dtt = if growing {
        compute_gdd(weather.tmax, weather.tmin, params)
    } else {
        0.0
    };
    crop.dtt = dtt;

    let water = water_balance(soil, crop, weather, action.amir, params);
    let n = nitrogen_balance(soil, crop, action.anfer, weather, &water.percolation, params);

    let mut delta_topwt = 0.0;
    if crop.is_planted() {
        crop.plant_n += n.trnu;
        crop.swfac = water.swfac;
        crop.nstres = n.nstres;
        delta_topwt = grow_biomass(crop, weather.srad, water.swfac, n.nstres, dtt, n.trnu, params);
        update_phenology(crop, dtt, params);
        grow_roots(crop, dtt, params);
        crop.dap += 1;
        if crop.is_emerged() && crop.stage != Stage::Maturity {
            if water.swfac.min(n.nstres) < params.failure_stress {
                crop.stress_days += 1;
            } else {
                crop.stress_days = 0;
            }
        }
    }

    soil.cleach += n.leach;
    soil.runoff += water.runoff;

    DailyFluxes {
        ep: water.ep,
        es: water.es,
        runoff: water.runoff,
        drainage: water.drainage,
        trnu: n.trnu,
        mineralization: n.mineralization,
        leach: n.leach,
        delta_topwt,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn zero_width_ranges_give_identical_fields() {
        let mut p = params();
        for l in &mut p.layers {
            l.init_water = [0.5, 0.5];
            l.init_n = [7.0, 7.0];
        }
        let a = init_field(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = init_field(&p, &mut ChaCha8Rng::seed_from_u64(999)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeds_change_initial_topsoil_n() {
        let p = params();
        let (a, _) = init_field(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let (b, _) = init_field(&p, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_ne!(a.layers[0].no3, b.layers[0].no3);
    }

    #[test]
    fn inverted_hydrology_is_rejected() {
        let mut p = params();
        p.layers[0].ll = 0.3;
        p.layers[0].dul = 0.2;
        let err = init_field(&p, &mut ChaCha8Rng::seed_from_u64(1)).unwrap_err();
        assert_eq!(err.field(), Some("layers[0].ll"));
    }

    #[test]
    fn unplanted_field_still_evolves() {
        let p = params();
        let (mut soil, mut crop) = init_field(&p, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let before = soil.clone();
        let w = WeatherDay {
            rain: 15.0,
            tmax: 25.0,
            tmin: 12.0,
            srad: 15.0,
        };
        let f = advance_day(&mut soil, &mut crop, &w, &Action::NOTHING, &p);
        assert_ne!(soil, before);
        assert_eq!(f.trnu, 0.0);
        assert_eq!(f.delta_topwt, 0.0);
        assert_eq!(crop, CropState::unplanted());
    }

    #[test]
    fn advance_day_is_pure() {
        let p = params();
        let (soil, mut crop) = init_field(&p, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        crop.plant(&p);
        let w = WeatherDay {
            rain: 3.0,
            tmax: 29.0,
            tmin: 17.0,
            srad: 21.0,
        };
        let a = Action { anfer: 12.0, amir: 4.0 };
        let (mut s1, mut c1) = (soil.clone(), crop.clone());
        let (mut s2, mut c2) = (soil, crop);
        let f1 = advance_day(&mut s1, &mut c1, &w, &a, &p);
        let f2 = advance_day(&mut s2, &mut c2, &w, &a, &p);
        assert_eq!((s1, c1, f1), (s2, c2, f2));
    }

    #[test]
    fn dry_season_with_dry_soil_fails_before_emergence_deadline() {
        let mut p = params();
        for l in &mut p.layers {
            l.init_water = [0.0, 0.0];
        }
        let (mut soil, mut crop) = init_field(&p, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let w = WeatherDay {
            rain: 0.0,
            tmax: 28.0,
            tmin: 15.0,
            srad: 20.0,
        };
        let mut outcome = None;
        for day in 0..p.emergence_deadline {
            if !crop.is_planted() && day == p.planting.window_close {
                crop.plant(&p);
            }
            advance_day(&mut soil, &mut crop, &w, &Action::NOTHING, &p);
            if let Some(cause) = check_terminal(&crop, &soil, day + 1, &p) {
                outcome = Some((day + 1, cause));
                break;
            }
        }
        let (day, cause) = outcome.expect("episode must terminate");
        assert_eq!(cause, TerminalCause::StressFailure);
        assert!(day < p.emergence_deadline, "failed on day {day}");
    }
}
