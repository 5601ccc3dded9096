//! Downlink NOMA over a pinching-antenna waveguide with soft blockage and
//! bounded CSI error, and a robust max-min SINR design by particle swarm.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.
//!
//! ```
//! use pinching_noma::{generate_scenario, optimize, ConfigF64, PsoParams};
//!
//! let config = ConfigF64::default();
//! let scenario = generate_scenario(&config, 7).unwrap();
//! let params = PsoParams { num_particles: 10, max_iters: 20, ..Default::default() };
//! let result = optimize(&scenario, &config, &params, 1, true).unwrap();
//! assert!(result.best_min_sinr > 0.0);
//! ```

pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod noma;
pub mod pso;
pub mod scalar;
pub mod scenario;
pub mod seeding;

pub use channel::{
    apply_csi_error, blockage_factor, effective_channel, min_obstacle_distance,
    waveguide_attenuation, ChannelSet, LinkModel, PaLayout,
};
pub use error::{Error, Result};
pub use geometry::{Point3, Sphere};
pub use noma::{
    conservative_order, conservative_sinr, min_sinr, order_violation, robust_gains,
    sic_decode_sinr, true_sinr, DecodingOrder, PowerAlloc, RobustGains,
};
pub use pso::{
    optimize, penalized_fitness, project_geometry, project_simplex, Fitness, FitnessMode,
    PsoParams, PsoResult, Swarm,
};
pub use scalar::Scalar;
pub use scenario::{generate_scenario, uniform_layout, Scenario, SystemConfig};

pub type ConfigF64 = SystemConfig<f64>;
pub type ConfigF32 = SystemConfig<f32>;
pub type ScenarioF64 = Scenario<f64>;
pub type ScenarioF32 = Scenario<f32>;
pub type LayoutF64 = PaLayout<f64>;
pub type LayoutF32 = PaLayout<f32>;
pub type PowerF64 = PowerAlloc<f64>;
pub type PowerF32 = PowerAlloc<f32>;
pub type ParamsF64 = PsoParams<f64>;
pub type ParamsF32 = PsoParams<f32>;
pub type OutcomeF64 = PsoResult<f64>;
pub type OutcomeF32 = PsoResult<f32>;
