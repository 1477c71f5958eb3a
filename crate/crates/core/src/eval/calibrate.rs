use rayon::prelude::*;
use serde::Serialize;

use super::policy::Policy;
use super::runner::{run_episodes, EvalError};
use crate::action::Action;
use crate::env::{EnvInstance, TaskConfig};
use crate::seed::{derive_seed, WEATHER_STREAM};
use crate::soilcrop::{compute_gdd, Stage, StageThresholds};
use crate::weather::WeatherState;

/// Mean simulation day on which each stage after sowing (germination through
/// maturity) is reached in the fertilization task's reference runs.
pub const FERTILIZATION_STAGE_DAYS: [f64; 8] = [22.0, 23.0, 34.0, 60.0, 65.0, 107.0, 117.0, 155.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub episodes: usize,
    pub targets: [f64; 8],
    pub thresholds: StageThresholds,
    /// Mean day each stage was reached when re-running with the new
    /// thresholds (`None` if no episode reached it).
    pub achieved: [Option<f64>; 8],
    pub mean_length: f64,
}

/// Fit stage thresholds so that stages are reached on the target simulation
/// days on average.
///
/// For each episode the planting day `p` is found by running the
/// environment with no agent input, and the episode's weather is replayed
/// from its seed. A stage targeted at day `d` is reached when the thermal
/// time accumulated over days `p..d` crosses its threshold, so the fitted
/// threshold is the mean of that sum over episodes. The result is checked by
/// rerunning `policy` with the fitted thresholds.
pub fn calibrate(
    config: &TaskConfig,
    policy: &dyn Policy,
    targets: [f64; 8],
    episodes: usize,
    seed: u64,
) -> Result<CalibrationReport, EvalError> {
    if episodes == 0 {
        return Err(EvalError::Empty);
    }
    config.validate()?;
    let horizon = targets.iter().fold(0.0f64, |a, &b| a.max(b)).ceil() as usize;
    let sums: Vec<[f64; 8]> = (0..episodes)
        .into_par_iter()
        .map(|i| {
            let episode_seed = derive_seed(seed, i as u64);
            let planting = planting_day(config, episode_seed) as usize;
            let mut weather = WeatherState::init(
                config.weather.clone(),
                derive_seed(episode_seed, WEATHER_STREAM),
                config.start_doy,
            )
            .expect("validated weather parameters");
            let dtt: Vec<f64> = weather
                .generate(horizon)
                .iter()
                .map(|w| compute_gdd(w.tmax, w.tmin, &config.model))
                .collect();
            targets.map(|t| {
                let end = (t.round() as usize).min(dtt.len());
                dtt.get(planting..end).map_or(0.0, |s| s.iter().sum())
            })
        })
        .collect();
    let mut fitted = [0.0; 8];
    for s in &sums {
        for (f, v) in fitted.iter_mut().zip(s) {
            *f += v / episodes as f64;
        }
    }
    // Strictly increasing, and at least a sliver of thermal time per stage.
    for k in 0..8 {
        let floor = if k == 0 { 0.5 } else { fitted[k - 1] + 0.5 };
        fitted[k] = (fitted[k].max(floor) * 10.0).round() / 10.0;
    }
    let thresholds = StageThresholds::from_array(fitted);

    let mut check = config.clone();
    check.model.thresholds = thresholds;
    let logs = run_episodes(&check, policy, episodes, seed)?;
    let mut achieved = [None; 8];
    for (k, stage) in Stage::PLANTED_SEQUENCE[1..].iter().enumerate() {
        let days: Vec<f64> = logs
            .iter()
            .filter_map(|l| {
                l.stage_days()
                    .iter()
                    .find(|(code, _)| *code == stage.code())
                    .map(|&(_, d)| d as f64)
            })
            .collect();
        if !days.is_empty() {
            achieved[k] = Some(days.iter().sum::<f64>() / days.len() as f64);
        }
    }
    let mean_length = logs.iter().map(|l| l.indicators.length as f64).sum::<f64>() / logs.len() as f64;
    Ok(CalibrationReport {
        episodes,
        targets,
        thresholds,
        achieved,
        mean_length,
    })
}

/// Simulation day on which the field is sown when no input is applied.
fn planting_day(config: &TaskConfig, seed: u64) -> u32 {
    let mut env = EnvInstance::new(config.clone()).expect("validated configuration");
    env.reset(Some(seed));
    loop {
        let info = env.info().expect("episode open");
        if info.planted {
            return info.day;
        }
        match env.step(&Action::NOTHING) {
            Ok(r) if !r.done => {}
            _ => return info.day,
        }
    }
}
