//! Stochastic-geometry model of IoT data harvesting by a fleet of UAVs:
//! analytic evaluation of interference, coverage, rate and harvested data,
//! and a Monte Carlo simulator of the same model.

pub mod analytic;
pub mod model;
pub mod optimize;
pub mod quadrature;
pub mod sim;
pub mod stats;
pub mod transport;

pub use model::{FadingModel, Mode, ModulationRule, NetworkConfig, WindowGeom};
