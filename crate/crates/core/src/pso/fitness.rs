//! Penalized max-min SINR fitness of a candidate design.

use crate::channel::LinkModel;
use crate::error::{Error, Result};
use crate::noma::{conservative_order, conservative_sinr, min_sinr, RobustGains};
use crate::scenario::{Scenario, SystemConfig};
use crate::Scalar;

/// Which evaluation the swarm optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitnessMode {
    /// Conservative evaluation at the configured CSI error bound.
    Robust,
    /// Perfect-CSI evaluation: `ε = 0`, `η_r = 0`.
    Nominal,
}

/// Penalized fitness and its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness<T> {
    /// `F = Γ_min - μ V`
    pub value: T,
    /// `Γ_min`, the smallest conservative SINR.
    pub min_sinr: T,
    /// `V`, the summed adjacent-pair order violations.
    pub violation: T,
}

/// Fitness evaluator bound to one scenario and configuration.
#[derive(Debug, Clone)]
pub struct Evaluator<'a, T> {
    scenario: &'a Scenario<T>,
    model: LinkModel<T>,
    gains: RobustGains<T>,
    eps: T,
    penalty: T,
    tx_power: T,
    noise_power: T,
    num_pas: usize,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(scenario: &'a Scenario<T>, config: &SystemConfig<T>, mode: FitnessMode) -> Self {
        let effective = match mode {
            FitnessMode::Robust => config.clone(),
            FitnessMode::Nominal => config.nominal(),
        };
        Self {
            scenario,
            model: LinkModel::new(&effective),
            gains: effective.robust_gains(),
            eps: effective.csi_eps,
            penalty: effective.penalty_mu,
            tx_power: effective.tx_power,
            noise_power: effective.noise_power,
            num_pas: effective.num_pas,
        }
    }

    pub fn num_pas(&self) -> usize {
        self.num_pas
    }

    pub fn num_users(&self) -> usize {
        self.scenario.users.len()
    }

    /// Evaluates `θ = [x_p; α]`, with `α` indexed by user.
    pub fn evaluate(&self, theta: &[T]) -> Result<Fitness<T>> {
        let expected = self.num_pas + self.num_users();
        if theta.len() != expected {
            return Err(Error::Dimension {
                what: "theta",
                got: theta.len(),
                expected,
            });
        }
        let (positions, alpha) = theta.split_at(self.num_pas);
        self.evaluate_parts(positions, alpha)
    }

    pub fn evaluate_parts(&self, positions: &[T], alpha: &[T]) -> Result<Fitness<T>> {
        // nominal estimate ĥ = h; uncertainty enters only through ε
        let h = self.model.effective_all(positions, self.scenario)?;
        let order = conservative_order(&h, self.eps);
        let h_sq: Vec<T> = order.order.iter().map(|&u| h[u].norm_sqr()).collect();
        let a: Vec<T> = order.order.iter().map(|&u| alpha[u]).collect();
        let sinrs = conservative_sinr(&h_sq, &a, &self.gains, self.tx_power, self.noise_power);
        let gamma = min_sinr(&sinrs)?;
        let violation = order.total_violation();
        Ok(Fitness {
            value: gamma - self.penalty * violation,
            min_sinr: gamma,
            violation,
        })
    }
}

/// Robust penalized fitness of `θ = [x_p; α]` for one scenario.
pub fn penalized_fitness<T: Scalar>(
    theta: &[T],
    scenario: &Scenario<T>,
    config: &SystemConfig<T>,
) -> Result<Fitness<T>> {
    Evaluator::new(scenario, config, FitnessMode::Robust).evaluate(theta)
}
