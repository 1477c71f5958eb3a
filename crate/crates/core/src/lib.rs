//! Crop-management reinforcement-learning environment built on a daily-step
//! maize surrogate with stochastic weather.
//!
//! * [`weather`]: seeded Markov-chain daily weather generator.
//! * [`soilcrop`]: soil water / nitrogen balances and crop growth.
//! * [`env`]: the decision problems: episodes, actions, observations, rewards.
//! * [`wire`]: newline-delimited JSON protocol, sessions and the socket server.
//! * [`eval`]: baseline policies, batch runner, agronomic metrics and CSV output.

pub mod action;
pub mod env;
pub mod error;
pub mod eval;
pub mod seed;
pub mod soilcrop;
pub mod weather;
pub mod wire;

pub use action::Action;
pub use error::ConfigError;
