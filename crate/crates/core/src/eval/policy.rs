use thiserror::Error;

use crate::action::Action;
use crate::env::{Info, Observation, TaskMode, EXPERT_FERTILIZATION, EXPERT_IRRIGATION};

/// Decides the agent's action from what it observes. `info` is passed for
/// policies that need the day counter when `dap` is not observed.
pub trait Policy: Sync {
    fn name(&self) -> &str;
    fn act(&self, observation: &Observation, info: &Info) -> Action;
}

/// Never applies anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullPolicy;

impl Policy for NullPolicy {
    fn name(&self) -> &str {
        "null"
    }

    fn act(&self, _: &Observation, _: &Info) -> Action {
        Action::NOTHING
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resource {
    Fertilizer,
    Water,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TableError {
    #[error("row {index}: dap {dap} does not increase")]
    NotIncreasing { index: usize, dap: u32 },
    #[error("row {index}: amount {amount} must be positive and finite")]
    BadAmount { index: usize, amount: f64 },
}

/// Fixed schedule keyed on days after planting.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    name: String,
    resource: Resource,
    rows: Vec<(u32, f64)>,
}

impl PolicyTable {
    pub fn new(name: impl Into<String>, resource: Resource, rows: Vec<(u32, f64)>) -> Result<Self, TableError> {
        for (index, w) in rows.iter().enumerate() {
            if !(w.1.is_finite() && w.1 > 0.0) {
                return Err(TableError::BadAmount { index, amount: w.1 });
            }
            if index > 0 && rows[index - 1].0 >= w.0 {
                return Err(TableError::NotIncreasing { index, dap: w.0 });
            }
        }
        Ok(Self {
            name: name.into(),
            resource,
            rows,
        })
    }

    pub fn rows(&self) -> &[(u32, f64)] {
        &self.rows
    }

    pub fn resource(&self) -> Resource {
        self.resource
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.1).sum()
    }

    pub fn amount_at(&self, dap: u32) -> f64 {
        self.rows
            .binary_search_by_key(&dap, |r| r.0)
            .map_or(0.0, |i| self.rows[i].1)
    }

    pub fn action_at(&self, dap: u32) -> Action {
        let amount = self.amount_at(dap);
        match self.resource {
            Resource::Fertilizer => Action::fertilize(amount),
            Resource::Water => Action::irrigate(amount),
        }
    }
}

fn current_dap(observation: &Observation, info: &Info) -> Option<u32> {
    if !info.planted {
        return None;
    }
    Some(observation.scalar("dap").map_or(info.dap, |d| d as u32))
}

impl Policy for PolicyTable {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&self, observation: &Observation, info: &Info) -> Action {
        current_dap(observation, info).map_or(Action::NOTHING, |d| self.action_at(d))
    }
}

pub fn expert_fertilization() -> PolicyTable {
    PolicyTable::new("expert", Resource::Fertilizer, EXPERT_FERTILIZATION.to_vec()).expect("valid table")
}

pub fn expert_irrigation() -> PolicyTable {
    PolicyTable::new("expert", Resource::Water, EXPERT_IRRIGATION.to_vec()).expect("valid table")
}

/// Both expert schedules at once, for the mixed task.
#[derive(Debug, Clone)]
pub struct ExpertBoth {
    pub fertilization: PolicyTable,
    pub irrigation: PolicyTable,
}

impl Default for ExpertBoth {
    fn default() -> Self {
        Self {
            fertilization: expert_fertilization(),
            irrigation: expert_irrigation(),
        }
    }
}

impl Policy for ExpertBoth {
    fn name(&self) -> &str {
        "expert"
    }

    fn act(&self, observation: &Observation, info: &Info) -> Action {
        self.fertilization
            .act(observation, info)
            .merged(self.irrigation.act(observation, info))
    }
}

/// The expert baseline appropriate for a task.
pub fn expert_policy(task: TaskMode) -> Box<dyn Policy> {
    match task {
        TaskMode::Fertilization => Box::new(expert_fertilization()),
        TaskMode::Irrigation => Box::new(expert_irrigation()),
        TaskMode::Mixed => Box::new(ExpertBoth::default()),
    }
}
