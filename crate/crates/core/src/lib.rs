//! Discrete-time wildfire mitigation testbed.
//!
//! A partially observed fire-spread environment, the drone's belief engine,
//! helicopter and drone decision policies, and a seeded batch experiment
//! harness.

pub mod belief;
pub mod drone;
pub mod error;
pub mod fire;
pub mod footprint;
pub mod harness;
pub mod heli;
pub mod linalg;
pub mod par;
pub mod region;
pub mod sampler;

pub use error::{Error, Result};
pub use region::{FuelParams, RegionGrid, WindModelParams, WindState, ZoneId};
