use super::params::ModelParams;
use super::state::{CropState, SoilState, Stage};
use crate::weather::WeatherDay;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NitrogenFluxes {
    pub trnu: f64,
    pub mineralization: f64,
    /// Nitrate carried below the profile today, kg/ha.
    pub leach: f64,
    pub demand: f64,
    pub supply: f64,
    pub nstres: f64,
}

/// Critical plant N mass fraction for above-ground biomass `topwt` (kg/ha).
pub fn critical_n_fraction(topwt: f64, params: &ModelParams) -> f64 {
    let t_ha = (topwt / 1000.0).max(params.n_dilution_floor_t);
    params.n_dilution_a * t_ha.powf(-params.n_dilution_b) / 100.0
}

/// Daily soil mineral-N balance.
///
/// Fertilizer and mineralized N enter the top layer; nitrate then moves down
/// with each layer's percolation (well-mixed layers), the outflow of the last
/// layer being leaching; finally the crop takes up N from rooted layers.
pub fn nitrogen_balance(
    soil: &mut SoilState,
    crop: &CropState,
    anfer: f64,
    weather: &WeatherDay,
    percolation: &[f64],
    params: &ModelParams,
) -> NitrogenFluxes {
    let top = &soil.layers[0];
    let f_temp = ((weather.tmean() - params.mineralization_tbase)
        / (params.mineralization_tref - params.mineralization_tbase))
        .clamp(0.0, 2.0);
    let f_moist = top.available_fraction();
    let mineralization = params.mineralization_rate * f_temp * f_moist;
    soil.layers[0].no3 += anfer + mineralization;

    let mut incoming = 0.0;
    for (layer, &out) in soil.layers.iter_mut().zip(percolation) {
        layer.no3 += incoming;
        let held = layer.water_mm();
        let moved = if out > 0.0 {
            layer.no3 * (out / (held + out))
        } else {
            0.0
        };
        layer.no3 -= moved;
        incoming = moved;
    }
    let leach = incoming;

    let uptaking = crop.is_emerged() && crop.stage < Stage::Maturity;
    let demand = if uptaking {
        let future = crop.topwt + crop.potential_growth;
        (critical_n_fraction(future, params) * future - crop.plant_n).clamp(0.0, params.max_n_uptake)
    } else {
        0.0
    };

    let roots = soil.root_fractions(crop.rtdep);
    let supplies: Vec<f64> = soil
        .layers
        .iter()
        .zip(&roots)
        .map(|(l, f)| f * l.no3 * params.uptake_efficiency * l.available_fraction())
        .collect();
    let supply: f64 = if uptaking { supplies.iter().sum() } else { 0.0 };

    let trnu = demand.min(supply);
    if trnu > 0.0 {
        let share = trnu / supply;
        for (layer, s) in soil.layers.iter_mut().zip(&supplies) {
            layer.no3 = (layer.no3 - s * share).max(0.0);
        }
    }

    let nstres = if demand > 0.0 { (supply / demand).min(1.0) } else { 1.0 };

    NitrogenFluxes {
        trnu,
        mineralization,
        leach,
        demand,
        supply,
        nstres,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soilcrop::state::SoilLayer;

    fn soil(no3: f64) -> SoilState {
        let p = ModelParams::default();
        SoilState {
            layers: p
                .layers
                .iter()
                .map(|s| SoilLayer {
                    thickness: s.thickness,
                    sw: s.dul,
                    ll: s.ll,
                    dul: s.dul,
                    sat: s.sat,
                    no3,
                })
                .collect(),
            wtdep: 200.0,
            cleach: 0.0,
            runoff: 0.0,
        }
    }

    const WARM: WeatherDay = WeatherDay {
        rain: 0.0,
        tmax: 30.0,
        tmin: 18.0,
        srad: 20.0,
    };

    #[test]
    fn unplanted_field_takes_no_n() {
        let p = ModelParams::default();
        let mut s = soil(5.0);
        let before = s.layers[0].no3;
        let perc = vec![0.0; 3];
        let f = nitrogen_balance(&mut s, &CropState::unplanted(), 50.0, &WARM, &perc, &p);
        assert_eq!(f.trnu, 0.0);
        assert_eq!(f.nstres, 1.0);
        assert!((s.layers[0].no3 - (before + 50.0 + f.mineralization - f.leach)).abs() < 1e-12);
    }

    #[test]
    fn empty_pool_gives_nothing() {
        let p = ModelParams {
            mineralization_rate: 0.0,
            ..ModelParams::default()
        };
        let mut s = soil(0.0);
        let mut crop = CropState::unplanted();
        crop.plant(&p);
        crop.stage = Stage::EndJuvenile;
        crop.topwt = 800.0;
        crop.xlai = 1.0;
        crop.rtdep = 40.0;
        let perc = vec![2.0, 2.0, 2.0];
        let f = nitrogen_balance(&mut s, &crop, 0.0, &WARM, &perc, &p);
        assert_eq!((f.trnu, f.leach), (0.0, 0.0));
        assert!(f.demand > 0.0);
        assert_eq!(f.nstres, 0.0);
    }

    #[test]
    fn percolation_moves_nitrate_down() {
        let p = ModelParams::default();
        let mut s = soil(10.0);
        let before = s.total_n();
        let perc = vec![30.0, 25.0, 20.0];
        let f = nitrogen_balance(&mut s, &CropState::unplanted(), 0.0, &WARM, &perc, &p);
        assert!(f.leach > 0.0);
        let residual = (s.total_n() - before) - (f.mineralization - f.trnu - f.leach);
        assert!(residual.abs() <= 1e-9);
    }

    #[test]
    fn dilution_curve_declines_with_biomass() {
        let p = ModelParams::default();
        assert!((critical_n_fraction(0.0, &p) - 0.034).abs() < 1e-12);
        assert!(critical_n_fraction(10_000.0, &p) < critical_n_fraction(2_000.0, &p));
    }
}
