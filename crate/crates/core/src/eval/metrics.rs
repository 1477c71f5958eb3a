use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::runner::EpisodeLog;
use crate::env::{Reward, TaskMode};

/// Multiplier in the water-use-efficiency definition. The evaluation tables
/// are reproduced with 1.0.
pub const WUE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("the reference (null policy) batch is empty")]
    EmptyReference,
    #[error("the evaluated batch is empty")]
    EmptyBatch,
}

/// Agronomic nitrogen efficiency from batch means, kg grain per kg N.
/// `None` when no fertilizer was applied.
pub fn ane_from_means(grnwt: f64, grnwt_null: f64, cumsumfert: f64) -> Option<f64> {
    (cumsumfert > 0.0).then(|| (grnwt - grnwt_null) / cumsumfert)
}

/// Water use efficiency from batch means. `None` when no water was applied.
pub fn wue_from_means(grnwt: f64, grnwt_null: f64, totir: f64, factor: f64) -> Option<f64> {
    (totir > 0.0).then(|| factor * (grnwt - grnwt_null) / totir)
}

/// An efficiency computed per episode against the reference batch's mean,
/// summarized both as a mean of ratios and as a ratio of means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub per_episode: Vec<Option<f64>>,
    /// Mean and population std over the defined per-episode values.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub ratio_of_means: Option<f64>,
    /// Per-episode values against the reference episode with the same index,
    /// when both batches have the same length.
    pub paired: Option<Vec<Option<f64>>>,
    pub paired_mean: Option<f64>,
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn efficiency(
    logs: &[EpisodeLog],
    reference: &[EpisodeLog],
    input: impl Fn(&EpisodeLog) -> f64,
    ratio: impl Fn(f64, f64, f64) -> Option<f64>,
) -> Result<Efficiency, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    if logs.is_empty() {
        return Err(MetricError::EmptyBatch);
    }
    let grn_ref = reference.iter().map(|l| l.indicators.grnwt).sum::<f64>() / reference.len() as f64;
    let per_episode: Vec<Option<f64>> = logs
        .iter()
        .map(|l| ratio(l.indicators.grnwt, grn_ref, input(l)))
        .collect();
    let defined: Vec<f64> = per_episode.iter().flatten().copied().collect();
    let stats = mean_std(&defined);
    let n = logs.len() as f64;
    let grn = logs.iter().map(|l| l.indicators.grnwt).sum::<f64>() / n;
    let inp = logs.iter().map(&input).sum::<f64>() / n;
    let paired = (logs.len() == reference.len()).then(|| {
        logs.iter()
            .zip(reference)
            .map(|(l, r)| ratio(l.indicators.grnwt, r.indicators.grnwt, input(l)))
            .collect::<Vec<_>>()
    });
    let paired_mean = paired.as_ref().and_then(|p| {
        let d: Vec<f64> = p.iter().flatten().copied().collect();
        mean_std(&d).map(|s| s.0)
    });
    Ok(Efficiency {
        per_episode,
        mean: stats.map(|s| s.0),
        std: stats.map(|s| s.1),
        ratio_of_means: ratio(grn, grn_ref, inp),
        paired,
        paired_mean,
    })
}

/// Agronomic nitrogen efficiency of `logs` relative to the null batch.
pub fn ane(logs: &[EpisodeLog], null: &[EpisodeLog]) -> Result<Efficiency, MetricError> {
    efficiency(logs, null, |l| l.indicators.cumsumfert, ane_from_means)
}

/// Water use efficiency of `logs` relative to the null batch.
pub fn wue(logs: &[EpisodeLog], null: &[EpisodeLog], factor: f64) -> Result<Efficiency, MetricError> {
    efficiency(
        logs,
        null,
        |l| l.indicators.totir,
        |g, g0, t| wue_from_means(g, g0, t, factor),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorStat {
    pub name: String,
    /// `None` when undefined for the batch.
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub episodes: usize,
    pub indicators: Vec<IndicatorStat>,
}

impl MetricsSummary {
    pub fn get(&self, name: &str) -> Option<&IndicatorStat> {
        self.indicators.iter().find(|i| i.name == name)
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.get(name).and_then(|i| i.mean)
    }

    /// Append an efficiency as `<name>` (mean of ratios) and
    /// `<name>_ratio_of_means` / `<name>_paired` rows.
    pub fn push_efficiency(&mut self, name: &str, e: &Efficiency) {
        self.indicators.push(IndicatorStat {
            name: name.to_string(),
            mean: e.mean,
            std: e.std,
        });
        self.indicators.push(IndicatorStat {
            name: format!("{name}_ratio_of_means"),
            mean: e.ratio_of_means,
            std: None,
        });
        self.indicators.push(IndicatorStat {
            name: format!("{name}_paired"),
            mean: e.paired_mean,
            std: None,
        });
    }
}

fn stat(name: &str, logs: &[EpisodeLog], f: impl Fn(&EpisodeLog) -> Option<f64>) -> IndicatorStat {
    let values: Vec<f64> = logs.iter().filter_map(f).collect();
    let s = mean_std(&values);
    IndicatorStat {
        name: name.to_string(),
        mean: s.map(|s| s.0),
        std: s.map(|s| s.1),
    }
}

/// Mean and population standard deviation of the task's indicators.
pub fn summarize(logs: &[EpisodeLog]) -> MetricsSummary {
    let task = logs.first().map_or(TaskMode::Fertilization, |l| l.task);
    let mut names = vec!["grnwt"];
    if task.allows_fertilization() {
        names.extend(["pcngrn", "cumsumfert", "fertilizations"]);
    }
    if task.allows_irrigation() {
        names.extend(["totir", "irrigations", "runoff"]);
    }
    names.extend(["cleach", "topwt", "length", "planting_day", "maturity_day"]);
    let indicators = names
        .into_iter()
        .map(|name| {
            stat(name, logs, |l| {
                let i = &l.indicators;
                match name {
                    "grnwt" => Some(i.grnwt),
                    "pcngrn" => Some(i.pcngrn),
                    "cumsumfert" => Some(i.cumsumfert),
                    "fertilizations" => Some(i.fertilizations as f64),
                    "totir" => Some(i.totir),
                    "irrigations" => Some(i.irrigations as f64),
                    "runoff" => Some(i.runoff),
                    "cleach" => Some(i.cleach),
                    "topwt" => Some(i.topwt),
                    "length" => Some(i.length as f64),
                    "planting_day" => i.planting_day.map(f64::from),
                    "maturity_day" => i.maturity_day.map(f64::from),
                    _ => unreachable!(),
                }
            })
        })
        .collect();
    MetricsSummary {
        episodes: logs.len(),
        indicators,
    }
}

/// Undiscounted return of an episode.
pub fn objective_j(log: &EpisodeLog) -> Reward {
    log.days
        .iter()
        .fold(Reward::zero_for(log.task), |acc, d| acc + d.reward)
}
