use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tracing::info;

use cropgym::env::{TaskConfig, TaskMode};
use cropgym::eval::{
    ane, calibrate, expert_policy, run_episodes, serve_remote_batch, summarize, write_histogram_csv, write_summary_csv,
    write_trajectory_csv, wue, EpisodeLog, NullPolicy, FERTILIZATION_STAGE_DAYS, WUE_FACTOR,
};
use cropgym::weather::{WeatherParams, WeatherState};
use cropgym::wire::{Endpoint, Listener, Server};

#[derive(Parser)]
#[command(
    name = "cropgym",
    version,
    about = "Crop-management RL environment: server, batch evaluation, tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve environments over the line-delimited JSON protocol.
    Serve {
        #[arg(long, env = "CROPGYM_ENDPOINT", default_value = "127.0.0.1:7878")]
        endpoint: String,
        /// Environment config applied before each session's init overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write JSON session logs to this file instead of stderr.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Run a batch of episodes and write trajectory, summary and histogram CSVs.
    Run {
        #[arg(long)]
        task: TaskMode,
        #[arg(long, value_enum, default_value_t = PolicyKind::Null)]
        policy: PolicyKind,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where a remote agent connects (`--policy remote`).
        #[arg(long, env = "CROPGYM_ENDPOINT", default_value = "127.0.0.1:7878")]
        endpoint: String,
        /// Seconds to wait for a remote agent.
        #[arg(long, default_value_t = 300)]
        accept_timeout: u64,
        /// Multiplier in the water use efficiency.
        #[arg(long, default_value_t = WUE_FACTOR)]
        wue_factor: f64,
    },
    /// Generate a daily weather series as CSV.
    Weather {
        #[arg(long)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Weather parameter file (TOML); defaults to the built-in climate.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        start_doy: u32,
    },
    /// Fit stage thresholds to the reference stage days and write a model file.
    Calibrate {
        #[arg(long, default_value_t = 1000)]
        episodes: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output model parameter file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyKind {
    Null,
    Expert,
    Remote,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn init_logging(json_file: Option<&Path>, json: bool) -> Result<()> {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let builder = tracing_subscriber::fmt().with_env_filter(filter);
    match json_file {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("cannot open log file {}", path.display()))?;
            builder.json().with_writer(Mutex::new(file)).init();
        }
        None if json => builder.json().with_writer(std::io::stderr).init(),
        None => builder.with_writer(std::io::stderr).init(),
    }
    Ok(())
}

fn load_config(path: Option<&Path>, task: Option<TaskMode>) -> Result<TaskConfig> {
    let cfg = match path {
        Some(p) => TaskConfig::from_file(p).with_context(|| format!("loading {}", p.display()))?,
        None => TaskConfig::new(task.unwrap_or(TaskMode::Fertilization)),
    };
    Ok(match task {
        Some(t) if t != cfg.task => cfg.with_task(t),
        _ => cfg,
    })
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Serve { endpoint, config, log } => {
            init_logging(log.as_deref(), true)?;
            let endpoint: Endpoint = endpoint.parse()?;
            let base = load_config(config.as_deref(), None)?;
            let server = Server::bind(&endpoint, base)?;
            let stop = server.shutdown_handle();
            ctrlc::set_handler(move || stop.shutdown()).context("installing signal handler")?;
            eprintln!("listening on {}", server.local_endpoint());
            server.run()?;
            Ok(())
        }
        Command::Run {
            task,
            policy,
            episodes,
            seed,
            out,
            config,
            endpoint,
            accept_timeout,
            wue_factor,
        } => {
            init_logging(None, false)?;
            if episodes == 0 {
                bail!("--episodes must be at least 1");
            }
            let cfg = load_config(config.as_deref(), Some(task))?;
            let logs = match policy {
                PolicyKind::Null => run_episodes(&cfg, &NullPolicy, episodes, seed)?,
                PolicyKind::Expert => run_episodes(&cfg, expert_policy(task).as_ref(), episodes, seed)?,
                PolicyKind::Remote => {
                    let listener = Listener::bind(&endpoint.parse()?)?;
                    eprintln!("waiting for an agent on {}", listener.local_endpoint());
                    serve_remote_batch(
                        &listener,
                        &cfg,
                        episodes,
                        seed,
                        Some(Duration::from_secs(accept_timeout)),
                    )?
                }
            };
            let null = match policy {
                PolicyKind::Null => None,
                _ => Some(run_episodes(&cfg, &NullPolicy, episodes, seed)?),
            };
            write_outputs(&logs, null.as_deref(), &out, wue_factor)
        }
        Command::Weather {
            days,
            seed,
            out,
            params,
            start_doy,
        } => {
            let params = match params {
                Some(p) => {
                    let text = fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    WeatherParams::from_toml_str(&text)?
                }
                None => WeatherParams::default(),
            };
            let mut state = WeatherState::init(params, seed, start_doy)?;
            let mut w = csv::Writer::from_path(&out).with_context(|| format!("writing {}", out.display()))?;
            w.write_record(["day", "doy", "rain", "tmax", "tmin", "srad"])?;
            for day in 0..days {
                let doy = state.doy();
                let d = state.generate_day();
                w.write_record([
                    day.to_string(),
                    doy.to_string(),
                    d.rain.to_string(),
                    d.tmax.to_string(),
                    d.tmin.to_string(),
                    d.srad.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Calibrate {
            episodes,
            seed,
            config,
            out,
        } => {
            init_logging(None, false)?;
            let cfg = load_config(config.as_deref(), Some(TaskMode::Fertilization))?;
            let policy = expert_policy(TaskMode::Fertilization);
            let report = calibrate(&cfg, policy.as_ref(), FERTILIZATION_STAGE_DAYS, episodes, seed)?;
            let mut model = cfg.model.clone();
            model.thresholds = report.thresholds;
            fs::write(&out, model.to_toml_string()).with_context(|| format!("writing {}", out.display()))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn write_outputs(logs: &[EpisodeLog], null: Option<&[EpisodeLog]>, out: &Path, wue_factor: f64) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = summarize(logs);
    if let Some(null) = null {
        let task = logs[0].task;
        if task.allows_fertilization() {
            summary.push_efficiency("ane", &ane(logs, null)?);
        }
        if task.allows_irrigation() {
            summary.push_efficiency("wue", &wue(logs, null, wue_factor)?);
        }
    }
    write_trajectory_csv(logs, &out.join("trajectory.csv"))?;
    write_summary_csv(&summary, &out.join("summary.csv"))?;
    write_histogram_csv(logs, &out.join("histogram.csv"))?;
    info!(episodes = logs.len(), out = %out.display(), "wrote results");
    for i in &summary.indicators {
        let fmt = |v: Option<f64>| v.map_or("n.a.".to_string(), |v| format!("{v:.3}"));
        println!("{:<28} {:>12} ({})", i.name, fmt(i.mean), fmt(i.std));
    }
    Ok(())
}
