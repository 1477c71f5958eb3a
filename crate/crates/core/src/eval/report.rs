use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::Serialize;

use super::metrics::MetricsSummary;
use super::policy::Resource;
use super::runner::EpisodeLog;
use crate::env::{ObsValue, Reward};

const DAY_BIN: u32 = 5;
const FERTILIZER_BIN: f64 = 10.0;
const WATER_BIN: f64 = 5.0;

fn writer(path: &Path) -> io::Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(into_io)
}

fn into_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n.a.".to_string(), num)
}

/// One row per simulated day across all episodes, in episode then day order.
pub fn write_trajectory_csv(logs: &[EpisodeLog], path: &Path) -> io::Result<()> {
    let mut w = writer(path)?;
    let vector_reward = logs.first().is_some_and(|l| l.task == crate::env::TaskMode::Mixed);
    let mut header: Vec<String> = [
        "episode",
        "seed",
        "day",
        "dap",
        "istage",
        "anfer",
        "amir",
        "applied_anfer",
        "applied_amir",
    ]
    .map(String::from)
    .to_vec();
    if vector_reward {
        header.extend(["reward_fertilization".into(), "reward_irrigation".into()]);
    } else {
        header.push("reward".into());
    }
    header.extend(
        [
            "trnu",
            "delta_topwt",
            "ep",
            "es",
            "runoff",
            "drainage",
            "leach",
            "mineralization",
        ]
        .map(String::from),
    );
    if let Some(first) = logs.iter().find_map(|l| l.days.first()) {
        for (name, value) in &first.observation.0 {
            match value {
                ObsValue::Scalar(_) => header.push(format!("obs_{name}")),
                ObsValue::Vector(v) => header.extend((1..=v.len()).map(|i| format!("obs_{name}_{i}"))),
            }
        }
    }
    w.write_record(&header).map_err(into_io)?;
    for log in logs {
        for d in &log.days {
            let mut row = vec![
                log.index.to_string(),
                log.seed.to_string(),
                d.day.to_string(),
                d.dap.to_string(),
                d.istage.to_string(),
                num(d.action.anfer),
                num(d.action.amir),
                num(d.applied.anfer),
                num(d.applied.amir),
            ];
            match d.reward {
                Reward::Scalar(r) => row.push(num(r)),
                Reward::Vector([a, b]) => row.extend([num(a), num(b)]),
            }
            let f = &d.fluxes;
            row.extend(
                [
                    f.trnu,
                    f.delta_topwt,
                    f.ep,
                    f.es,
                    f.runoff,
                    f.drainage,
                    f.leach,
                    f.mineralization,
                ]
                .map(num),
            );
            for value in d.observation.0.values() {
                match value {
                    ObsValue::Scalar(v) => row.push(num(*v)),
                    ObsValue::Vector(vs) => row.extend(vs.iter().copied().map(num)),
                }
            }
            w.write_record(&row).map_err(into_io)?;
        }
    }
    w.flush()
}

/// One row per indicator: `indicator,mean,std,episodes`.
pub fn write_summary_csv(summary: &MetricsSummary, path: &Path) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["indicator", "mean", "std", "episodes"])
        .map_err(into_io)?;
    for i in &summary.indicators {
        w.write_record([i.name.clone(), opt(i.mean), opt(i.std), summary.episodes.to_string()])
            .map_err(into_io)?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub resource: &'static str,
    pub day_start: u32,
    pub day_end: u32,
    pub amount_start: f64,
    pub amount_end: f64,
    pub count: u64,
}

/// Counts of the agent's nonzero applications by (simulation day, amount)
/// bin. Only occupied bins are returned, sorted by day then amount.
pub fn histogram(logs: &[EpisodeLog], resource: Resource) -> Vec<HistogramBin> {
    let (name, width) = match resource {
        Resource::Fertilizer => ("anfer", FERTILIZER_BIN),
        Resource::Water => ("amir", WATER_BIN),
    };
    let mut counts: BTreeMap<(u32, u64), u64> = BTreeMap::new();
    for d in logs.iter().flat_map(|l| &l.days) {
        let amount = match resource {
            Resource::Fertilizer => d.action.anfer,
            Resource::Water => d.action.amir,
        };
        if amount > 0.0 {
            let key = (d.day / DAY_BIN, (amount / width).floor() as u64);
            *counts.entry(key).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|((day, amt), count)| HistogramBin {
            resource: name,
            day_start: day * DAY_BIN,
            day_end: (day + 1) * DAY_BIN,
            amount_start: amt as f64 * width,
            amount_end: (amt + 1) as f64 * width,
            count,
        })
        .collect()
}

/// Application histogram for both resources. Bins are `[start, end)`.
pub fn write_histogram_csv(logs: &[EpisodeLog], path: &Path) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "resource",
        "day_start",
        "day_end",
        "amount_start",
        "amount_end",
        "count",
    ])
    .map_err(into_io)?;
    for resource in [Resource::Fertilizer, Resource::Water] {
        for b in histogram(logs, resource) {
            w.write_record([
                b.resource.to_string(),
                b.day_start.to_string(),
                b.day_end.to_string(),
                num(b.amount_start),
                num(b.amount_end),
                b.count.to_string(),
            ])
            .map_err(into_io)?;
        }
    }
    w.flush()
}
