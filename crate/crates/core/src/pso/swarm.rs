use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fitness::{Evaluator, Fitness, FitnessMode};
use super::projection::project_theta;
use crate::error::{Error, Result};
use crate::scenario::{Scenario, SystemConfig};
use crate::seeding::{stream_rng, streams, StreamRng};
use crate::Scalar;

/// Swarm hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Scalar")]
pub struct PsoParams<T> {
    pub num_particles: usize,
    pub max_iters: usize,
    /// Inertia weight ω.
    pub inertia: T,
    /// Cognitive coefficient c₁.
    pub cognitive: T,
    /// Social coefficient c₂.
    pub social: T,
    /// Per-dimension velocity bound as a fraction of that dimension's range.
    pub velocity_clamp: T,
}

impl<T: Scalar> Default for PsoParams<T> {
    fn default() -> Self {
        Self {
            num_particles: 60,
            max_iters: 200,
            inertia: T::lit(0.729),
            cognitive: T::lit(1.494),
            social: T::lit(1.494),
            velocity_clamp: T::lit(0.2),
        }
    }
}

impl<T: Scalar> PsoParams<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_particles < 1 {
            return bad("pso.num_particles >= 1".into());
        }
        if self.max_iters < 1 {
            return bad("pso.max_iters >= 1".into());
        }
        if !(self.inertia >= T::zero() && self.inertia <= T::one()) {
            return bad(format!("0 <= pso.inertia <= 1 (got {})", self.inertia));
        }
        if !(self.cognitive >= T::zero() && self.social >= T::zero()) {
            return bad(format!(
                "pso.cognitive >= 0 and pso.social >= 0 (got {}, {})",
                self.cognitive, self.social
            ));
        }
        if self.velocity_clamp.is_nan()
            || self.velocity_clamp <= T::zero()
            || !self.velocity_clamp.is_finite()
        {
            return bad(format!(
                "pso.velocity_clamp > 0 (got {})",
                self.velocity_clamp
            ));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> PsoParams<U> {
        let c = |v: T| U::lit(v.as_f64());
        PsoParams {
            num_particles: self.num_particles,
            max_iters: self.max_iters,
            inertia: c(self.inertia),
            cognitive: c(self.cognitive),
            social: c(self.social),
            velocity_clamp: c(self.velocity_clamp),
        }
    }
}

/// One particle: a candidate `θ = [x_p; α]` with its velocity and personal best.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle<T> {
    pub theta: Vec<T>,
    pub velocity: Vec<T>,
    pub fitness: Fitness<T>,
    pub best_theta: Vec<T>,
    pub best: Fitness<T>,
}

impl<T: Scalar> Particle<T> {
    pub fn best_fitness(&self) -> T {
        self.best.value
    }
}

/// Outcome of a swarm run.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult<T> {
    pub num_pas: usize,
    /// Global best `θ = [x_p; α]`.
    pub best_theta: Vec<T>,
    /// Penalized fitness of the global best under the optimized evaluation.
    pub best_fitness: T,
    /// Γ_min of the global best under the robust evaluation.
    pub best_min_sinr: T,
    /// Full robust evaluation of the global best.
    pub robust: Fitness<T>,
    /// Global-best fitness after initialization (index 0) and after each iteration.
    pub trace: Vec<T>,
    /// Robust Γ_min of the global best at the same points as `trace`.
    pub robust_trace: Vec<T>,
}

impl<T: Scalar> PsoResult<T> {
    pub fn positions(&self) -> &[T] {
        &self.best_theta[..self.num_pas]
    }

    pub fn alpha(&self) -> &[T] {
        &self.best_theta[self.num_pas..]
    }
}

/// Draws a feasible `θ`: positions uniform on `[0, L]` then projected, power
/// fractions uniform on the unit simplex (normalized exponentials).
pub fn sample_feasible_theta<T: Scalar, R: Rng + ?Sized>(
    config: &SystemConfig<T>,
    rng: &mut R,
) -> Result<Vec<T>> {
    let mut theta = Vec::with_capacity(config.num_pas + config.num_users);
    for _ in 0..config.num_pas {
        let u: f64 = rng.random();
        theta.push(T::lit(u) * config.waveguide_len);
    }
    let draws: Vec<f64> = (0..config.num_users)
        .map(|_| -rng.sample::<f64, _>(Open01).ln())
        .collect();
    let total: f64 = draws.iter().sum();
    theta.extend(draws.iter().map(|d| T::lit(d / total)));
    project_theta(
        &mut theta,
        config.num_pas,
        config.waveguide_len,
        config.min_spacing,
    )?;
    Ok(theta)
}

/// Particle swarm over one scenario.
///
/// Each particle owns an RNG stream derived from the run seed, so a run is a
/// pure function of `(scenario, config, params, seed, mode)`.
pub struct Swarm<'a, T> {
    config: SystemConfig<T>,
    params: PsoParams<T>,
    evaluator: Evaluator<'a, T>,
    robust_evaluator: Option<Evaluator<'a, T>>,
    particles: Vec<Particle<T>>,
    rngs: Vec<StreamRng>,
    velocity_bounds: Vec<T>,
    gbest_theta: Vec<T>,
    gbest: Fitness<T>,
    gbest_robust: Fitness<T>,
    trace: Vec<T>,
    robust_trace: Vec<T>,
}

impl<'a, T: Scalar> Swarm<'a, T> {
    /// Initializes and evaluates the swarm.
    pub fn new(
        scenario: &'a Scenario<T>,
        config: &SystemConfig<T>,
        params: &PsoParams<T>,
        seed: u64,
        mode: FitnessMode,
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        if scenario.users.len() != config.num_users {
            return Err(Error::Dimension {
                what: "scenario users",
                got: scenario.users.len(),
                expected: config.num_users,
            });
        }
        let evaluator = Evaluator::new(scenario, config, mode);
        let robust_evaluator = match mode {
            FitnessMode::Robust => None,
            FitnessMode::Nominal => Some(Evaluator::new(scenario, config, FitnessMode::Robust)),
        };
        let dim = config.num_pas + config.num_users;
        let mut velocity_bounds =
            vec![params.velocity_clamp * config.waveguide_len; config.num_pas];
        velocity_bounds.extend(vec![params.velocity_clamp; config.num_users]);

        let mut rngs = Vec::with_capacity(params.num_particles);
        let mut particles = Vec::with_capacity(params.num_particles);
        for i in 0..params.num_particles {
            let mut rng = stream_rng(seed, streams::PARTICLE_BASE + i as u64);
            let theta = sample_feasible_theta(config, &mut rng)?;
            let fitness = evaluator.evaluate(&theta)?;
            particles.push(Particle {
                best_theta: theta.clone(),
                theta,
                velocity: vec![T::zero(); dim],
                fitness,
                best: fitness,
            });
            rngs.push(rng);
        }

        let mut swarm = Self {
            config: config.clone(),
            params: params.clone(),
            evaluator,
            robust_evaluator,
            particles,
            rngs,
            velocity_bounds,
            gbest_theta: Vec::new(),
            gbest: Fitness {
                value: T::neg_infinity(),
                min_sinr: T::neg_infinity(),
                violation: T::zero(),
            },
            gbest_robust: Fitness {
                value: T::neg_infinity(),
                min_sinr: T::neg_infinity(),
                violation: T::zero(),
            },
            trace: Vec::with_capacity(params.max_iters + 1),
            robust_trace: Vec::with_capacity(params.max_iters + 1),
        };
        swarm.update_global_best()?;
        Ok(swarm)
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    pub fn global_best(&self) -> (&[T], Fitness<T>) {
        (&self.gbest_theta, self.gbest)
    }

    pub fn trace(&self) -> &[T] {
        &self.trace
    }

    /// Selects the best personal best (lowest index on ties) and records the trace.
    fn update_global_best(&mut self) -> Result<()> {
        let mut best_index = 0;
        for (i, p) in self.particles.iter().enumerate().skip(1) {
            if p.best.value > self.particles[best_index].best.value {
                best_index = i;
            }
        }
        let candidate = &self.particles[best_index];
        if self.gbest_theta.is_empty() || candidate.best.value > self.gbest.value {
            self.gbest_theta = candidate.best_theta.clone();
            self.gbest = candidate.best;
            self.gbest_robust = match &self.robust_evaluator {
                Some(robust) => robust.evaluate(&self.gbest_theta)?,
                None => self.gbest,
            };
        }
        self.trace.push(self.gbest.value);
        self.robust_trace.push(self.gbest_robust.min_sinr);
        Ok(())
    }

    /// One velocity/position update of every particle followed by the global-best update.
    pub fn step(&mut self) -> Result<()> {
        let PsoParams {
            inertia,
            cognitive,
            social,
            ..
        } = self.params;
        let num_pas = self.config.num_pas;
        let (length, spacing) = (self.config.waveguide_len, self.config.min_spacing);
        for (particle, rng) in self.particles.iter_mut().zip(&mut self.rngs) {
            let r1 = T::lit(rng.random::<f64>());
            let r2 = T::lit(rng.random::<f64>());
            for d in 0..particle.theta.len() {
                let x = particle.theta[d];
                let v = inertia * particle.velocity[d]
                    + cognitive * r1 * (particle.best_theta[d] - x)
                    + social * r2 * (self.gbest_theta[d] - x);
                let bound = self.velocity_bounds[d];
                particle.velocity[d] = v.max(-bound).min(bound);
                particle.theta[d] = x + particle.velocity[d];
            }
            project_theta(&mut particle.theta, num_pas, length, spacing)?;
            particle.fitness = self.evaluator.evaluate(&particle.theta)?;
            if particle.fitness.value > particle.best.value {
                particle.best_theta.clone_from(&particle.theta);
                particle.best = particle.fitness;
            }
        }
        self.update_global_best()
    }

    /// Runs the remaining iterations and returns the result.
    pub fn run(mut self) -> Result<PsoResult<T>> {
        while self.trace.len() <= self.params.max_iters {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> PsoResult<T> {
        PsoResult {
            num_pas: self.config.num_pas,
            best_fitness: self.gbest.value,
            best_min_sinr: self.gbest_robust.min_sinr,
            robust: self.gbest_robust,
            best_theta: self.gbest_theta,
            trace: self.trace,
            robust_trace: self.robust_trace,
        }
    }
}

/// Runs the full swarm search.
///
/// With `robust = false` the search optimizes the perfect-CSI evaluation; the
/// returned design is still scored under the robust evaluation.
pub fn optimize<T: Scalar>(
    scenario: &Scenario<T>,
    config: &SystemConfig<T>,
    params: &PsoParams<T>,
    seed: u64,
    robust: bool,
) -> Result<PsoResult<T>> {
    let mode = if robust {
        FitnessMode::Robust
    } else {
        FitnessMode::Nominal
    };
    Swarm::new(scenario, config, params, seed, mode)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_scenario;

    fn small() -> PsoParams<f64> {
        PsoParams {
            num_particles: 12,
            max_iters: 25,
            ..Default::default()
        }
    }

    #[test]
    fn frozen_dynamics_do_not_move() {
        let cfg = SystemConfig::<f64>::default();
        let s = generate_scenario(&cfg, 1).unwrap();
        let params = PsoParams {
            inertia: 0.0,
            cognitive: 0.0,
            social: 0.0,
            ..small()
        };
        let mut swarm = Swarm::new(&s, &cfg, &params, 3, FitnessMode::Robust).unwrap();
        let before: Vec<_> = swarm.particles().to_vec();
        swarm.step().unwrap();
        for (a, b) in before.iter().zip(swarm.particles()) {
            for (x, y) in a.theta.iter().zip(&b.theta) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
            }
            assert!((a.fitness.value - b.fitness.value).abs() <= 1e-9 * a.fitness.value.abs());
        }
    }

    #[test]
    fn single_particle_stays_at_global_best() {
        let cfg = SystemConfig::<f64>::default();
        let s = generate_scenario(&cfg, 2).unwrap();
        let params = PsoParams {
            num_particles: 1,
            max_iters: 1,
            ..Default::default()
        };
        let swarm = Swarm::new(&s, &cfg, &params, 5, FitnessMode::Robust).unwrap();
        let initial = swarm.particles()[0].fitness.value;
        let result = swarm.run().unwrap();
        assert_eq!(result.trace.len(), 2);
        assert!((result.best_fitness - initial).abs() <= 1e-9 * initial.abs());
    }

    #[test]
    fn trace_is_monotone_and_result_consistent() {
        let cfg = SystemConfig::<f64>::default();
        let s = generate_scenario(&cfg, 8).unwrap();
        let r = optimize(&s, &cfg, &small(), 21, true).unwrap();
        assert_eq!(r.trace.len(), 26);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*r.trace.last().unwrap(), r.best_fitness);
        assert_eq!(r.robust.value, r.best_fitness);
        assert_eq!(r.positions().len(), 5);
        assert_eq!(r.alpha().len(), 3);
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = SystemConfig::<f64>::default();
        let s = generate_scenario(&cfg, 8).unwrap();
        assert_eq!(
            optimize(&s, &cfg, &small(), 4, false).unwrap(),
            optimize(&s, &cfg, &small(), 4, false).unwrap()
        );
    }

    #[test]
    fn nominal_result_is_rescored_robustly() {
        let cfg = SystemConfig::<f64>::default();
        let s = generate_scenario(&cfg, 8).unwrap();
        let r = optimize(&s, &cfg, &small(), 4, false).unwrap();
        let robust = Evaluator::new(&s, &cfg, FitnessMode::Robust)
            .evaluate(&r.best_theta)
            .unwrap();
        assert_eq!(r.robust, robust);
        assert_eq!(r.best_min_sinr, robust.min_sinr);
        // the nominal view of the same design is never worse
        assert!(r.best_fitness >= robust.min_sinr);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let cfg = SystemConfig::<f64>::default();
        let s = generate_scenario(&cfg, 8).unwrap();
        for params in [
            PsoParams {
                num_particles: 0,
                ..small()
            },
            PsoParams {
                max_iters: 0,
                ..small()
            },
            PsoParams {
                inertia: 1.5,
                ..small()
            },
            PsoParams {
                social: -1.0,
                ..small()
            },
        ] {
            assert!(Swarm::new(&s, &cfg, &params, 0, FitnessMode::Robust).is_err());
        }
    }
}
