#![allow(dead_code)]

use cropgym::soilcrop::{CropState, ModelParams, SoilLayer, SoilState, Stage};
use cropgym::weather::WeatherDay;
use cropgym::Action;
use rand::Rng;

pub const CLOSURE_TOL: f64 = 1e-9;

/// An arbitrary but type-valid field state.
pub fn random_field<R: Rng>(rng: &mut R, params: &ModelParams) -> (SoilState, CropState) {
    let layers = params
        .layers
        .iter()
        .map(|spec| SoilLayer {
            thickness: spec.thickness,
            sw: rng.random_range(spec.ll..=spec.sat),
            ll: spec.ll,
            dul: spec.dul,
            sat: spec.sat,
            no3: if rng.random_bool(0.1) {
                0.0
            } else {
                rng.random_range(0.0..150.0)
            },
        })
        .collect();
    let soil = SoilState {
        layers,
        wtdep: params.wtdep,
        cleach: rng.random_range(0.0..50.0),
        runoff: rng.random_range(0.0..50.0),
    };

    let stages = [Stage::Unplanted]
        .into_iter()
        .chain(Stage::PLANTED_SEQUENCE)
        .collect::<Vec<_>>();
    let stage = stages[rng.random_range(0..stages.len())];
    let mut crop = CropState::unplanted();
    if stage == Stage::Unplanted {
        return (soil, crop);
    }
    crop.plant(params);
    crop.stage = stage;
    let lo = stage.threshold(params).unwrap_or(0.0);
    let hi = stage.next().and_then(|s| s.threshold(params)).unwrap_or(lo + 50.0);
    crop.gdd = rng.random_range(lo..hi.max(lo + 1e-6));
    crop.dap = rng.random_range(0..200);
    crop.rtdep = rng.random_range(params.seed_depth..=params.max_root_depth);
    if crop.is_emerged() {
        crop.topwt = rng.random_range(params.biomass_at_emergence..20_000.0);
        crop.xlai = rng.random_range(0.0..6.0);
        crop.vstage = rng.random_range(0.0..20.0);
        crop.potential_growth = rng.random_range(0.0..400.0);
        crop.stress_days = rng.random_range(0..params.failure_days);
        if stage.is_grain_filling() || stage == Stage::Maturity {
            crop.grnwt = crop.topwt * rng.random_range(0.0..0.6);
            crop.grain_n = crop.grnwt * rng.random_range(0.0..0.03);
            crop.pcngrn = if crop.grnwt > 0.0 {
                crop.grain_n / crop.grnwt
            } else {
                0.0
            };
        }
        crop.plant_n = crop.grain_n + crop.topwt * rng.random_range(0.0..0.04);
        crop.swfac = rng.random_range(0.0..=1.0);
        crop.nstres = rng.random_range(0.0..=1.0);
    }
    (soil, crop)
}

pub fn random_weather<R: Rng>(rng: &mut R) -> WeatherDay {
    let tmax = rng.random_range(-5.0..42.0);
    WeatherDay {
        rain: if rng.random_bool(0.5) {
            0.0
        } else {
            rng.random_range(0.0..150.0)
        },
        tmax,
        tmin: tmax - rng.random_range(0.0..20.0),
        srad: rng.random_range(0.0..32.0),
    }
}

pub fn random_action<R: Rng>(rng: &mut R) -> Action {
    Action {
        anfer: if rng.random_bool(0.7) {
            0.0
        } else {
            rng.random_range(0.0..=200.0)
        },
        amir: if rng.random_bool(0.7) {
            0.0
        } else {
            rng.random_range(0.0..=50.0)
        },
    }
}

/// (water residual mm, nitrogen residual kg/ha) of one day's balance.
pub fn closure_residuals(
    before: &SoilState,
    after: &SoilState,
    weather: &WeatherDay,
    action: &Action,
    f: &cropgym::soilcrop::DailyFluxes,
) -> (f64, f64) {
    let dw = after.total_water_mm() - before.total_water_mm();
    let water = dw - (weather.rain + action.amir - f.runoff - f.drainage - f.ep - f.es);
    let dn = after.total_n() - before.total_n();
    let nitrogen = dn - (action.anfer + f.mineralization - f.trnu - f.leach);
    (water, nitrogen)
}
