//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use common::*;
use cropgym::env::{
    reward_fertilization, reward_irrigation, task_reward, EnvInstance, RawAction, Reward, StepResult, TaskConfig,
    TaskMode,
};
use cropgym::eval::{
    ane_from_means, expert_fertilization, expert_irrigation, run_episodes, summarize, write_histogram_csv,
    write_summary_csv, write_trajectory_csv, wue_from_means, EpisodeLog, NullPolicy, Policy,
};
use cropgym::soilcrop::{advance_day, DailyFluxes, ModelParams, Stage, TerminalCause};
use cropgym::weather::{month_of, WeatherParams, WeatherState};
use cropgym::wire::{Client, Server};
use cropgym::Action;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(started: Instant, budget: Duration) -> Result<(), String> {
    let t = started.elapsed();
    ensure(t < budget, || format!("took {t:.2?}, budget {budget:?}"))
}

fn reward_exactness() -> Check {
    let started = Instant::now();
    let cfg = TaskConfig::new(TaskMode::Mixed);
    let (pf, pi) = (cfg.rewards.fertilization_penalty, cfg.rewards.irrigation_penalty);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let trnu = rng.random_range(0.0..10.0);
        let anfer = rng.random_range(cfg.bounds.anfer[0]..=cfg.bounds.anfer[1]);
        let dtop = rng.random_range(-50.0..400.0);
        let amir = rng.random_range(cfg.bounds.amir[0]..=cfg.bounds.amir[1]);
        worst = worst.max((reward_fertilization(trnu, anfer, pf) - (trnu - pf * anfer)).abs());
        worst = worst.max((reward_irrigation(dtop, amir, pi) - (dtop - pi * amir)).abs());
        let fluxes = DailyFluxes {
            trnu,
            delta_topwt: dtop,
            ..Default::default()
        };
        let Reward::Vector([a, b]) = task_reward(TaskMode::Mixed, &fluxes, &Action { anfer, amir }, &cfg.rewards)
        else {
            return Err("mixed reward is not a vector".into());
        };
        worst = worst
            .max((a - (trnu - pf * anfer)).abs())
            .max((b - (dtop - pi * amir)).abs());
    }
    ensure(worst <= 1e-12, || format!("max |error| {worst:e}"))?;
    let spot_f = reward_fertilization(0.0, cfg.bounds.anfer[1], pf);
    let spot_i = reward_irrigation(0.0, cfg.bounds.amir[1], pi);
    ensure(spot_f == -100.0 && spot_i == -750.0, || {
        format!("spot values {spot_f}, {spot_i}")
    })?;
    within_budget(started, Duration::from_secs(1))?;
    Ok(format!(
        "max |error| {worst:e} over 2x10^4 pairs; r(anfer=200) = {spot_f}, r(amir=50) = {spot_i}"
    ))
}

fn max_dap(log: &EpisodeLog) -> u32 {
    log.days.iter().map(|d| d.dap).max().unwrap_or(0) + 1
}

fn expert_totals() -> Check {
    let started = Instant::now();
    let fert = run_episodes(
        &TaskConfig::new(TaskMode::Fertilization),
        &expert_fertilization(),
        100,
        11,
    )
    .map_err(|e| e.to_string())?;
    let reaching = fert.iter().filter(|l| max_dap(l) >= 80).collect::<Vec<_>>();
    for l in &reaching {
        ensure(
            l.indicators.cumsumfert == 116.0 && l.indicators.fertilizations == 3,
            || {
                format!(
                    "episode {}: {} kg/ha in {} applications",
                    l.index, l.indicators.cumsumfert, l.indicators.fertilizations
                )
            },
        )?;
    }
    ensure(!reaching.is_empty(), || "no episode reached dap 80".into())?;
    let irr = run_episodes(&TaskConfig::new(TaskMode::Irrigation), &expert_irrigation(), 100, 12)
        .map_err(|e| e.to_string())?;
    for l in &irr {
        ensure(l.indicators.totir == 264.0 && l.indicators.irrigations == 16, || {
            format!(
                "episode {}: {} mm in {} applications",
                l.index, l.indicators.totir, l.indicators.irrigations
            )
        })?;
    }
    within_budget(started, Duration::from_secs(30))?;
    Ok(format!(
        "fertilization: {}/100 reached dap 80, all 116 kg/ha in 3; irrigation: 100/100 at 264 mm in 16",
        reaching.len()
    ))
}

fn random_agent(task: TaskMode, seed: u64) -> impl FnMut() -> Action {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    move || {
        let a = random_action(&mut rng);
        Action {
            anfer: if task.allows_fertilization() {
                a.anfer * 0.2
            } else {
                0.0
            },
            amir: if task.allows_irrigation() { a.amir * 0.5 } else { 0.0 },
        }
    }
}

fn conservation() -> Check {
    let started = Instant::now();
    let params = ModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_w, mut worst_n) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let (mut soil, mut crop) = random_field(&mut rng, &params);
        let weather = random_weather(&mut rng);
        let action = random_action(&mut rng);
        let before = soil.clone();
        let f = advance_day(&mut soil, &mut crop, &weather, &action, &params);
        let (w, n) = closure_residuals(&before, &soil, &weather, &action, &f);
        worst_w = worst_w.max(w.abs());
        worst_n = worst_n.max(n.abs());
    }
    let fuzz = (worst_w, worst_n);
    let mut days = 0usize;
    for task in [TaskMode::Fertilization, TaskMode::Irrigation, TaskMode::Mixed] {
        for ep in 0..100u64 {
            let mut env = EnvInstance::new(TaskConfig::new(task)).map_err(|e| e.to_string())?;
            env.reset(Some(ep));
            let mut agent = random_agent(task, ep);
            loop {
                let before = env.soil().cloned().ok_or("no soil")?;
                let r = env.step(&agent()).map_err(|e| e.to_string())?;
                let after = env.soil().ok_or("no soil")?;
                let (w, n) = closure_residuals(&before, after, &r.info.weather, &r.info.applied, &r.info.fluxes);
                worst_w = worst_w.max(w.abs());
                worst_n = worst_n.max(n.abs());
                days += 1;
                if r.done {
                    break;
                }
            }
        }
    }
    ensure(worst_w <= CLOSURE_TOL && worst_n <= CLOSURE_TOL, || {
        format!("worst residuals water {worst_w:e} mm, nitrogen {worst_n:e} kg/ha")
    })?;
    within_budget(started, Duration::from_secs(60))?;
    Ok(format!(
        "10^4 fuzzed days (water {:.1e}, N {:.1e}) + {days} episode days; worst residual water {worst_w:.1e} mm, N {worst_n:.1e} kg/ha",
        fuzz.0, fuzz.1
    ))
}

fn weather_statistics() -> Check {
    let started = Instant::now();
    let params = WeatherParams::default();
    let mut w = WeatherState::init(params.clone(), 3, 1).map_err(|e| e.to_string())?;
    // per month: [after-wet count, after-wet wet, after-dry count, after-dry wet]
    let mut trans = [[0u64; 4]; 12];
    let mut amounts = [(0u64, 0.0f64); 12];
    let mut prev = None;
    for _ in 0..100_000 {
        let m = (month_of(w.doy()) - 1) as usize;
        let d = w.generate_day();
        let wet = d.rain > 0.0;
        if let Some(p) = prev {
            let k = if p { 0 } else { 2 };
            trans[m][k] += 1;
            trans[m][k + 1] += u64::from(wet);
        }
        if wet {
            amounts[m].0 += 1;
            amounts[m].1 += d.rain;
        }
        prev = Some(wet);
    }
    let mut worst = 0.0f64;
    for m in 0..12 {
        for (k, p) in [(0, params.p_ww[m]), (2, params.p_wd[m])] {
            let n = trans[m][k] as f64;
            let se = (p * (1.0 - p) / n).sqrt();
            let z = (trans[m][k + 1] as f64 / n - p).abs() / se;
            worst = worst.max(z);
            ensure(z <= 3.0, || format!("month {} transition {k}: {z:.2} SE", m + 1))?;
        }
        let (n, sum) = amounts[m];
        let se = (params.rain_variance(m as u32 + 1) / n as f64).sqrt();
        let z = (sum / n as f64 - params.rain_mean[m]).abs() / se;
        worst = worst.max(z);
        ensure(z <= 3.0, || format!("month {} wet-day mean: {z:.2} SE", m + 1))?;
    }
    within_budget(started, Duration::from_secs(10))?;
    Ok(format!(
        "10^5 days; 36 monthly statistics, largest deviation {worst:.2} SE"
    ))
}

fn stage_sequence_ok(log: &EpisodeLog) -> bool {
    let seen: Vec<u8> = log.stage_days().iter().map(|s| s.0).filter(|&c| c != 0).collect();
    let full: Vec<u8> = Stage::PLANTED_SEQUENCE.iter().map(|s| s.code()).collect();
    let prefix = seen.len() <= full.len() && seen[..] == full[..seen.len()];
    prefix && (log.terminal != TerminalCause::Maturity || seen == full)
}

fn stage_timing() -> Check {
    let cfg = TaskConfig::new(TaskMode::Fertilization);
    let mut parts = Vec::new();
    for (name, policy) in [
        ("expert", &expert_fertilization() as &dyn Policy),
        ("null", &NullPolicy),
    ] {
        let logs = run_episodes(&cfg, policy, 1000, 1).map_err(|e| e.to_string())?;
        let s = summarize(&logs);
        let maturity = s.mean("maturity_day").ok_or("no episode matured")?;
        let length = s.mean("length").unwrap_or(0.0);
        let failed = logs.iter().filter(|l| l.terminal != TerminalCause::Maturity).count();
        ensure((maturity - 155.0).abs() <= 10.0, || {
            format!("{name}: mean maturity day {maturity:.1}")
        })?;
        ensure((140.0..=170.0).contains(&length), || {
            format!("{name}: mean length {length:.1}")
        })?;
        if let Some(l) = logs.iter().find(|l| !stage_sequence_ok(l)) {
            return Err(format!(
                "{name}: episode {} stage sequence {:?}",
                l.index,
                l.stage_days()
            ));
        }
        parts.push(format!(
            "{name}: maturity day {maturity:.1}, length {length:.1}, {failed} early failures"
        ));
    }
    Ok(format!(
        "1000 episodes each; {}; stage order 7..6 respected",
        parts.join("; ")
    ))
}

fn scripted_action(step: u32) -> RawAction {
    let mut a = RawAction::new();
    if step % 9 == 3 {
        a.insert("anfer".into(), 12.5);
    }
    if step % 5 == 1 {
        a.insert("amir".into(), 6.0 + (step % 4) as f64);
    }
    a
}

fn wire_equivalence() -> Check {
    let mut base = TaskConfig::new(TaskMode::Mixed);
    base.seed = 4;
    let server = Server::bind(&"127.0.0.1:0".parse().unwrap(), base.clone()).map_err(|e| e.to_string())?;
    let endpoint = server.local_endpoint();
    let stop = server.shutdown_handle();
    let handle = thread::spawn(move || server.run());
    let mut client = Client::connect(&endpoint).map_err(|e| e.to_string())?;
    client.init(None, None).map_err(|e| e.to_string())?;
    let mut local = EnvInstance::new(base).map_err(|e| e.to_string())?;
    let (mut steps, mut wire_time) = (0u32, Duration::ZERO);
    for ep in 0..50u64 {
        let seed = 1000 + ep;
        let remote_obs = client.reset(Some(seed)).map_err(|e| e.to_string())?;
        let local_obs = local.reset(Some(seed));
        ensure(remote_obs.observation == local_obs, || {
            format!("episode {ep}: reset observation differs")
        })?;
        for step in 0.. {
            let action = scripted_action(step);
            let t = Instant::now();
            let remote: StepResult = client.step(action.clone()).map_err(|e| e.to_string())?;
            wire_time += t.elapsed();
            steps += 1;
            let here = local.step_raw(&action).map_err(|e| e.to_string())?;
            ensure(remote == here, || format!("episode {ep} step {step}: results differ"))?;
            if here.done {
                break;
            }
        }
    }
    client.close().map_err(|e| e.to_string())?;
    stop.shutdown();
    handle
        .join()
        .map_err(|_| "server panicked")?
        .map_err(|e| e.to_string())?;
    let mean_ms = wire_time.as_secs_f64() * 1e3 / steps as f64;
    ensure(mean_ms <= 5.0, || format!("mean step round trip {mean_ms:.3} ms"))?;
    Ok(format!(
        "50 episodes, {steps} steps identical; mean step round trip {mean_ms:.3} ms"
    ))
}

fn metric_oracles() -> Check {
    let ane = ane_from_means(3686.5, 1141.1, 115.8).ok_or("ane undefined")?;
    let wue1 = wue_from_means(8306.6, 3734.8, 264.0, 1.0).ok_or("wue undefined")?;
    let wue10 = wue_from_means(8306.6, 3734.8, 264.0, 10.0).ok_or("wue undefined")?;
    ensure((ane - 22.0).abs() <= 0.1, || format!("ANE {ane}"))?;
    ensure((wue1 - 17.3).abs() <= 0.1, || format!("WUE(1) {wue1}"))?;
    ensure((wue10 - 173.2).abs() < 0.05, || format!("WUE(10) {wue10}"))?;
    ensure(ane_from_means(1141.1, 1141.1, 115.8) == Some(0.0), || {
        "zero response".into()
    })?;
    ensure(ane_from_means(1141.1, 1141.1, 0.0).is_none(), || {
        "null policy must be n.a.".into()
    })?;
    Ok(format!(
        "ANE {ane:.2}; WUE factor 1 {wue1:.2}; WUE factor 10 {wue10:.1}"
    ))
}

struct Scripted(TaskMode);

impl Policy for Scripted {
    fn name(&self) -> &str {
        "scripted"
    }

    fn act(&self, _: &cropgym::env::Observation, info: &cropgym::env::Info) -> Action {
        let raw = scripted_action(info.day);
        Action {
            anfer: if self.0.allows_fertilization() {
                raw.get("anfer").copied().unwrap_or(0.0)
            } else {
                0.0
            },
            amir: if self.0.allows_irrigation() {
                raw.get("amir").copied().unwrap_or(0.0)
            } else {
                0.0
            },
        }
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for task in [TaskMode::Fertilization, TaskMode::Irrigation, TaskMode::Mixed] {
        let cfg = TaskConfig::new(task);
        let mut runs = Vec::new();
        for run in 0..2 {
            let logs = run_episodes(&cfg, &Scripted(task), 20, 5).map_err(|e| e.to_string())?;
            let json = serde_json::to_string(&logs).map_err(|e| e.to_string())?;
            let out = dir.path().join(format!("{task}-{run}"));
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            write_trajectory_csv(&logs, &out.join("trajectory.csv")).map_err(|e| e.to_string())?;
            write_summary_csv(&summarize(&logs), &out.join("summary.csv")).map_err(|e| e.to_string())?;
            write_histogram_csv(&logs, &out.join("histogram.csv")).map_err(|e| e.to_string())?;
            runs.push((logs, json, out));
        }
        let (a, b) = (&runs[0], &runs[1]);
        ensure(a.0 == b.0 && a.1 == b.1, || format!("{task}: logs differ"))?;
        for name in ["trajectory.csv", "summary.csv", "histogram.csv"] {
            let x = std::fs::read(a.2.join(name)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.2.join(name)).map_err(|e| e.to_string())?;
            ensure(x == y && !x.is_empty(), || format!("{task}: {name} differs"))?;
            files += 1;
        }
    }
    Ok(format!(
        "3 tasks x 20 episodes: logs bit-identical, {files} CSV pairs byte-identical"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("reward exactness", reward_exactness),
        ("expert schedule totals", expert_totals),
        ("conservation", conservation),
        ("weather statistics", weather_statistics),
        ("stage timing", stage_timing),
        ("wire equivalence", wire_equivalence),
        ("metric oracles", metric_oracles),
        ("determinism", determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<24} {secs:>7.2}s  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<24} {secs:>7.2}s  {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
