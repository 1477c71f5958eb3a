use std::path::PathBuf;

use cropgym::env::{TaskConfig, TaskMode};
use cropgym::soilcrop::ModelParams;
use cropgym::weather::WeatherParams;

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

#[test]
fn task_files_match_builtin_defaults() {
    for (file, task) in [
        ("fertilization.toml", TaskMode::Fertilization),
        ("irrigation.toml", TaskMode::Irrigation),
        ("mixed.toml", TaskMode::Mixed),
    ] {
        let loaded = TaskConfig::from_file(shipped(file)).unwrap();
        assert_eq!(loaded, TaskConfig::new(task), "{file}");
    }
}

#[test]
fn model_and_weather_files_match_defaults() {
    let model: ModelParams = toml::from_str(&std::fs::read_to_string(shipped("model.toml")).unwrap()).unwrap();
    assert_eq!(model, ModelParams::default());
    let weather: WeatherParams = toml::from_str(&std::fs::read_to_string(shipped("weather.toml")).unwrap()).unwrap();
    assert_eq!(weather, WeatherParams::default());
}
