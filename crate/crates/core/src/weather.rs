//! Seeded daily weather generator.
//!
//! Rain occurrence is a two-state Markov chain with monthly transition
//! probabilities; wet-day amounts are drawn from an exponential (or gamma)
//! law with the configured monthly mean. Maximum temperature and solar
//! radiation are a seasonal cosine, an additive wet-day shift and an AR(1)
//! standardized residual. Minimum temperature is maximum temperature minus
//! a seasonal diurnal range.
//!
//! The random stream is ChaCha8 seeded with `seed_from_u64`. Per generated
//! day the draws are, in order: one uniform `f64` for occurrence, one
//! amount sample on wet days only, then two standard normals (tmax, srad).

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const DAYS_PER_YEAR: u32 = 365;
const MONTH_LENGTHS: [u32; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

const DEFAULT_WEATHER: &str = include_str!("../configs/weather.toml");

/// Month (1..=12) of a day of year (1..=365) in a 365-day calendar.
pub fn month_of(doy: u32) -> u32 {
    let mut left = (doy.clamp(1, DAYS_PER_YEAR)) - 1;
    for (i, len) in MONTH_LENGTHS.iter().enumerate() {
        if left < *len {
            return i as u32 + 1;
        }
        left -= len;
    }
    12
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RainLaw {
    Exponential,
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherParams {
    pub p_ww: [f64; 12],
    pub p_wd: [f64; 12],
    /// Mean wet-day rainfall, mm.
    pub rain_mean: [f64; 12],
    pub rain_law: RainLaw,
    /// Gamma shape; ignored by the exponential law.
    #[serde(default = "one")]
    pub rain_shape: f64,

    pub tmax_mean: f64,
    pub tmax_amplitude: f64,
    pub tmax_peak_doy: f64,
    pub range_mean: f64,
    pub range_amplitude: f64,
    pub range_peak_doy: f64,
    pub srad_mean: f64,
    pub srad_amplitude: f64,
    pub srad_peak_doy: f64,

    pub tmax_wet_offset: f64,
    pub srad_wet_offset: f64,

    pub rho: f64,
    pub tmax_sd: f64,
    pub srad_sd: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for WeatherParams {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_WEATHER).expect("bundled weather parameters are valid")
    }
}

impl WeatherParams {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let params: WeatherParams = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        for m in 0..12 {
            check_probability(&format!("p_ww[{m}]"), self.p_ww[m])?;
            check_probability(&format!("p_wd[{m}]"), self.p_wd[m])?;
            let mean = self.rain_mean[m];
            if !(mean.is_finite() && mean > 0.0) {
                return Err(ConfigError::invalid(
                    format!("rain_mean[{m}]"),
                    format!("must be > 0, got {mean}"),
                ));
            }
        }
        if self.rain_law == RainLaw::Gamma && !(self.rain_shape.is_finite() && self.rain_shape > 0.0) {
            return Err(ConfigError::invalid("rain_shape", "must be > 0"));
        }
        for (name, sd) in [("tmax_sd", self.tmax_sd), ("srad_sd", self.srad_sd)] {
            if !(sd.is_finite() && sd >= 0.0) {
                return Err(ConfigError::invalid(name, format!("must be >= 0, got {sd}")));
            }
        }
        if !(self.rho.is_finite() && (0.0..1.0).contains(&self.rho)) {
            return Err(ConfigError::invalid(
                "rho",
                format!("must lie in [0, 1), got {}", self.rho),
            ));
        }
        if !(self.range_mean - self.range_amplitude.abs() >= 0.0) {
            return Err(ConfigError::invalid(
                "range_amplitude",
                "diurnal range would go negative (need range_mean >= |range_amplitude|)",
            ));
        }
        let scalars = [
            ("tmax_mean", self.tmax_mean),
            ("tmax_amplitude", self.tmax_amplitude),
            ("tmax_peak_doy", self.tmax_peak_doy),
            ("range_peak_doy", self.range_peak_doy),
            ("srad_mean", self.srad_mean),
            ("srad_amplitude", self.srad_amplitude),
            ("srad_peak_doy", self.srad_peak_doy),
            ("tmax_wet_offset", self.tmax_wet_offset),
            ("srad_wet_offset", self.srad_wet_offset),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(ConfigError::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Seasonal maximum temperature for a day of year, before shifts and residuals.
    pub fn seasonal_tmax(&self, doy: u32) -> f64 {
        seasonal(self.tmax_mean, self.tmax_amplitude, self.tmax_peak_doy, doy)
    }

    pub fn seasonal_range(&self, doy: u32) -> f64 {
        seasonal(self.range_mean, self.range_amplitude, self.range_peak_doy, doy)
    }

    pub fn seasonal_srad(&self, doy: u32) -> f64 {
        seasonal(self.srad_mean, self.srad_amplitude, self.srad_peak_doy, doy)
    }

    /// Variance of a single wet-day amount in `month` (1..=12).
    pub fn rain_variance(&self, month: u32) -> f64 {
        let mean = self.rain_mean[(month - 1) as usize];
        match self.rain_law {
            RainLaw::Exponential => mean * mean,
            RainLaw::Gamma => mean * mean / self.rain_shape,
        }
    }
}

fn check_probability(field: &str, p: f64) -> Result<(), ConfigError> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            field,
            format!("probability must lie in [0, 1], got {p}"),
        ))
    }
}

fn seasonal(mean: f64, amplitude: f64, peak: f64, doy: u32) -> f64 {
    let phase = 2.0 * std::f64::consts::PI * (doy as f64 - peak) / DAYS_PER_YEAR as f64;
    mean + amplitude * phase.cos()
}

/// One day of exogenous forcing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeatherDay {
    /// mm/day, equivalently L/m²/day.
    pub rain: f64,
    pub tmax: f64,
    pub tmin: f64,
    /// MJ/m²/day.
    pub srad: f64,
}

impl WeatherDay {
    pub fn tmean(&self) -> f64 {
        0.5 * (self.tmax + self.tmin)
    }
}

/// Draw one wet-day rainfall amount (mm) for `month` (1..=12). Always > 0.
pub fn sample_rain_amount<R: RngCore + ?Sized>(params: &WeatherParams, month: u32, rng: &mut R) -> f64 {
    let mean = params.rain_mean[(month.clamp(1, 12) - 1) as usize];
    let x: f64 = match params.rain_law {
        RainLaw::Exponential => Exp::new(1.0 / mean).expect("positive rate").sample(rng),
        RainLaw::Gamma => Gamma::new(params.rain_shape, mean / params.rain_shape)
            .expect("positive shape and scale")
            .sample(rng),
    };
    if x > 0.0 {
        x
    } else {
        f64::MIN_POSITIVE
    }
}

/// The generator's full memory: rng stream, yesterday's wet flag and
/// residuals, and the day of year of the next generated day.
#[derive(Debug, Clone)]
pub struct WeatherState {
    params: WeatherParams,
    rng: ChaCha8Rng,
    prev_wet: bool,
    tmax_resid: f64,
    srad_resid: f64,
    doy: u32,
}

impl WeatherState {
    /// Start a generator whose first generated day is `start_doy` (1..=365).
    pub fn init(params: WeatherParams, seed: u64, start_doy: u32) -> Result<Self, ConfigError> {
        params.validate()?;
        if !(1..=DAYS_PER_YEAR).contains(&start_doy) {
            return Err(ConfigError::invalid(
                "start_doy",
                format!("must lie in 1..=365, got {start_doy}"),
            ));
        }
        Ok(Self {
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
            prev_wet: false,
            tmax_resid: 0.0,
            srad_resid: 0.0,
            doy: start_doy,
        })
    }

    pub fn params(&self) -> &WeatherParams {
        &self.params
    }

    /// Day of year of the next day to be generated.
    pub fn doy(&self) -> u32 {
        self.doy
    }

    pub fn prev_wet(&self) -> bool {
        self.prev_wet
    }

    pub fn generate_day(&mut self) -> WeatherDay {
        let p = &self.params;
        let doy = self.doy;
        let m = (month_of(doy) - 1) as usize;

        let p_wet = if self.prev_wet { p.p_ww[m] } else { p.p_wd[m] };
        let wet = self.rng.random::<f64>() < p_wet;
        let rain = if wet {
            sample_rain_amount(p, m as u32 + 1, &mut self.rng)
        } else {
            0.0
        };

        let innovation = (1.0 - p.rho * p.rho).sqrt();
        let z_t: f64 = StandardNormal.sample(&mut self.rng);
        let z_s: f64 = StandardNormal.sample(&mut self.rng);
        self.tmax_resid = p.rho * self.tmax_resid + innovation * z_t;
        self.srad_resid = p.rho * self.srad_resid + innovation * z_s;

        let wet_t = if wet { p.tmax_wet_offset } else { 0.0 };
        let wet_s = if wet { p.srad_wet_offset } else { 0.0 };
        let tmax = p.seasonal_tmax(doy) + wet_t + p.tmax_sd * self.tmax_resid;
        let tmin = tmax - p.seasonal_range(doy).max(0.0);
        let srad = (p.seasonal_srad(doy) + wet_s + p.srad_sd * self.srad_resid).max(0.0);

        self.prev_wet = wet;
        self.doy = doy % DAYS_PER_YEAR + 1;
        WeatherDay { rain, tmax, tmin, srad }
    }

    pub fn generate(&mut self, days: usize) -> Vec<WeatherDay> {
        (0..days).map(|_| self.generate_day()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_params() -> WeatherParams {
        WeatherParams {
            tmax_sd: 0.0,
            srad_sd: 0.0,
            tmax_wet_offset: 0.0,
            srad_wet_offset: 0.0,
            ..WeatherParams::default()
        }
    }

    #[test]
    fn month_boundaries() {
        assert_eq!(month_of(1), 1);
        assert_eq!(month_of(31), 1);
        assert_eq!(month_of(32), 2);
        assert_eq!(month_of(59), 2);
        assert_eq!(month_of(60), 3);
        assert_eq!(month_of(334), 11);
        assert_eq!(month_of(335), 12);
        assert_eq!(month_of(365), 12);
    }

    #[test]
    fn same_seed_same_sequence() {
        let mut a = WeatherState::init(WeatherParams::default(), 42, 1).unwrap();
        let mut b = WeatherState::init(WeatherParams::default(), 42, 1).unwrap();
        assert_eq!(a.generate(1000), b.generate(1000));
    }

    #[test]
    fn different_seeds_diverge_within_30_days() {
        let mut a = WeatherState::init(WeatherParams::default(), 42, 1).unwrap();
        let mut b = WeatherState::init(WeatherParams::default(), 43, 1).unwrap();
        assert_ne!(a.generate(30), b.generate(30));
    }

    #[test]
    fn rejects_out_of_range_probability() {
        let mut p = WeatherParams::default();
        p.p_ww[0] = 1.2;
        let err = WeatherState::init(p, 1, 1).unwrap_err();
        assert_eq!(err.field(), Some("p_ww[0]"));
    }

    #[test]
    fn rejects_non_positive_rain_mean() {
        let mut p = WeatherParams::default();
        p.rain_mean[5] = 0.0;
        assert_eq!(WeatherState::init(p, 1, 1).unwrap_err().field(), Some("rain_mean[5]"));
    }

    #[test]
    fn rejects_bad_rho() {
        let p = WeatherParams {
            rho: 1.0,
            ..WeatherParams::default()
        };
        assert_eq!(WeatherState::init(p, 1, 1).unwrap_err().field(), Some("rho"));
    }

    #[test]
    fn dry_chain_with_zero_wet_after_dry_never_rains() {
        let p = WeatherParams {
            p_wd: [0.0; 12],
            ..WeatherParams::default()
        };
        let mut w = WeatherState::init(p, 9, 1).unwrap();
        assert!(w.generate(2000).iter().all(|d| d.rain == 0.0));
    }

    #[test]
    fn always_wet_chain_mean_amount() {
        let p = WeatherParams {
            p_ww: [1.0; 12],
            p_wd: [1.0; 12],
            rain_mean: [8.0; 12],
            ..WeatherParams::default()
        };
        let mut w = WeatherState::init(p, 5, 1).unwrap();
        let n = 100_000;
        let days = w.generate(n);
        assert!(days.iter().all(|d| d.rain > 0.0));
        let mean = days.iter().map(|d| d.rain).sum::<f64>() / n as f64;
        // exponential: sd = mean
        let se = 8.0 / (n as f64).sqrt();
        assert!((mean - 8.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn zero_noise_tracks_seasonal_curve() {
        let p = quiet_params();
        let mut w = WeatherState::init(p.clone(), 3, 1).unwrap();
        for doy in 1..=730u32 {
            let d = w.generate_day();
            let doy = (doy - 1) % 365 + 1;
            assert_eq!(d.tmax, p.seasonal_tmax(doy));
            assert!((d.tmax - d.tmin - p.seasonal_range(doy).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn doy_wraps_at_year_end() {
        let mut w = WeatherState::init(WeatherParams::default(), 3, 365).unwrap();
        w.generate_day();
        assert_eq!(w.doy(), 1);
    }

    #[test]
    fn rain_sample_mean_and_variance() {
        let p = WeatherParams {
            rain_mean: [10.0; 12],
            ..WeatherParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_rain_amount(&p, 4, &mut rng)).collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 10.0).abs() < 3.0 * 10.0 / (n as f64).sqrt());
        assert!((var - 100.0).abs() / 100.0 < 0.05, "variance {var}");
    }

    #[test]
    fn gamma_law_keeps_monthly_mean() {
        let p = WeatherParams {
            rain_mean: [10.0; 12],
            rain_law: RainLaw::Gamma,
            rain_shape: 0.7,
            ..WeatherParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_rain_amount(&p, 1, &mut rng)).sum::<f64>() / n as f64;
        let se = p.rain_variance(1).sqrt() / (n as f64).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * se);
    }
}
