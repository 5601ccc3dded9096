//! Projected, penalty-augmented particle swarm over antenna positions and
//! NOMA power fractions.
//!
//! A particle encodes `θ = [x_p; α]`: the first `N` coordinates are antenna
//! positions, the last `K` are per-user power fractions. After every move the
//! particle is projected back onto the feasible set, and particles are ranked
//! by the penalized fitness `Γ_min - μ V`.

mod fitness;
mod projection;
mod swarm;

pub use fitness::{penalized_fitness, Evaluator, Fitness, FitnessMode};
pub use projection::{project_geometry, project_simplex, project_theta};
pub use swarm::{optimize, sample_feasible_theta, Particle, PsoParams, PsoResult, Swarm};
