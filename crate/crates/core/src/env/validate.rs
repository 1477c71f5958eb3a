use indexmap::IndexMap;
use thiserror::Error;

use super::config::{TaskConfig, TaskMode};
use crate::action::Action;

/// An action as received from an agent: component name to amount.
pub type RawAction = IndexMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("{component}={value} outside [{low}, {high}]")]
    OutOfRange {
        component: String,
        value: f64,
        low: f64,
        high: f64,
    },
    #[error("component `{component}` is not available in the {task} task")]
    NotAllowed { component: String, task: TaskMode },
    #[error("unknown action component `{0}` (expected anfer or amir)")]
    Unknown(String),
}

impl ActionError {
    pub fn bound(&self) -> Option<[f64; 2]> {
        match self {
            ActionError::OutOfRange { low, high, .. } => Some([*low, *high]),
            _ => None,
        }
    }
}

/// Check a raw action against the task's components and bounds. Missing
/// components mean "do nothing"; out-of-range values are rejected, never
/// clamped.
pub fn validate_action(config: &TaskConfig, raw: &RawAction) -> Result<Action, ActionError> {
    let mut action = Action::NOTHING;
    for (key, &value) in raw {
        match key.as_str() {
            "anfer" => action.anfer = value,
            "amir" => action.amir = value,
            other => return Err(ActionError::Unknown(other.to_string())),
        }
    }
    check_action(config, &action, raw.contains_key("anfer"), raw.contains_key("amir"))?;
    Ok(action)
}

/// Bounds and task-mode check for an already-typed action. A zero component
/// is always acceptable, whatever the task.
pub fn check_typed_action(config: &TaskConfig, action: &Action) -> Result<(), ActionError> {
    check_action(config, action, action.anfer != 0.0, action.amir != 0.0)
}

fn check_action(config: &TaskConfig, action: &Action, has_anfer: bool, has_amir: bool) -> Result<(), ActionError> {
    let task = config.task;
    if has_anfer {
        if !task.allows_fertilization() {
            return Err(ActionError::NotAllowed {
                component: "anfer".into(),
                task,
            });
        }
        in_bounds("anfer", action.anfer, config.bounds.anfer)?;
    }
    if has_amir {
        if !task.allows_irrigation() {
            return Err(ActionError::NotAllowed {
                component: "amir".into(),
                task,
            });
        }
        in_bounds("amir", action.amir, config.bounds.amir)?;
    }
    Ok(())
}

fn in_bounds(component: &str, value: f64, [low, high]: [f64; 2]) -> Result<(), ActionError> {
    if value.is_finite() && low <= value && value <= high {
        Ok(())
    } else {
        Err(ActionError::OutOfRange {
            component: component.into(),
            value,
            low,
            high,
        })
    }
}
