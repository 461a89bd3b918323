//! Simulation, pricing and small-maturity asymptotics for a stochastic-volatility
//! model whose volatility is reset by Poisson shocks and then decays as a power law.

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod numerics;
pub mod pricing;
pub mod rng;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use model::{derive_constants, DerivedConstants, JumpTimes, ModelParams, QueryPoint};
