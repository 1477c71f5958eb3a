use serde::{Deserialize, Serialize};

/// Daily management inputs. A zero component means "do nothing" for that
/// resource; which components an agent may set depends on the task.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    /// Nitrogen fertilizer, kg/ha.
    #[serde(default)]
    pub anfer: f64,
    /// Irrigation water, L/m² (= mm).
    #[serde(default)]
    pub amir: f64,
}

impl Action {
    pub const NOTHING: Action = Action { anfer: 0.0, amir: 0.0 };

    pub fn fertilize(anfer: f64) -> Self {
        Action { anfer, amir: 0.0 }
    }

    pub fn irrigate(amir: f64) -> Self {
        Action { anfer: 0.0, amir }
    }

    pub fn merged(self, other: Action) -> Action {
        Action {
            anfer: self.anfer + other.anfer,
            amir: self.amir + other.amir,
        }
    }
}
