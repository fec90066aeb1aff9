//! Ground-truth fire environment.

pub mod env;
pub mod rothermel;

pub use env::{
    apply_extinguish, apply_extinguish_zones, observe, sample_adjacency, sample_kernel_adjacency, sample_spotting,
    spread_length_m, step_cost, step_env, Adjacency, EnvState, HeliDecision, Observation, SpreadParams,
};
pub use rothermel::{head_ros_ft_per_min, rothermel_ros, EllipseCoeffs};
