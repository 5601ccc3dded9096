//! Per-antenna and effective per-user channels.
//!
//! Each PA-user link is a free-space LoS path scaled by the waveguide power
//! loss up to the tap point and by a soft-blockage coefficient. The user's
//! effective channel coherently sums the links, each rotated by the in-guide
//! phase of its tap point (feed at `x = 0`).

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_point_distance, Point3, Sphere};
use crate::scenario::{Scenario, SystemConfig};
use crate::Scalar;

/// Antenna x-coordinates along the waveguide, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PaLayout<T> {
    pub positions: Vec<T>,
}

impl<T: Scalar> PaLayout<T> {
    pub fn new(positions: Vec<T>) -> Self {
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Antenna `n` as a 3-D point `(x_n, 0, H)`.
    pub fn antenna(&self, n: usize, height: T) -> Point3<T> {
        Point3::new(self.positions[n], T::zero(), height)
    }

    /// Box and spacing constraints, with `tol` of slack for round-off.
    pub fn is_feasible(&self, length: T, min_spacing: T, tol: T) -> bool {
        self.positions
            .iter()
            .all(|&x| x >= -tol && x <= length + tol)
            && self
                .positions
                .windows(2)
                .all(|w| w[1] - w[0] >= min_spacing - tol)
    }
}

/// Waveguide power attenuation `10^(-κ x / 10)` at guided distance `x`.
pub fn waveguide_attenuation<T: Scalar>(x: T, loss_db_per_m: T) -> T {
    T::lit(10.0).powf(-loss_db_per_m * x / T::lit(10.0))
}

/// Soft-blockage transmission coefficient `β + (1 - β)(1 - e^{-α d})`, in `[β, 1]`.
pub fn blockage_factor<T: Scalar>(clearance: T, rate: T, floor: T) -> T {
    if clearance.is_infinite() {
        return T::one();
    }
    floor + (T::one() - floor) * (-(-rate * clearance).exp_m1())
}

/// Clearance between the segment `pa`-`user` and the nearest obstacle surface.
///
/// Zero when the segment touches or crosses an obstacle; `+inf` with no obstacles.
pub fn min_obstacle_distance<T: Scalar>(
    pa: Point3<T>,
    user: Point3<T>,
    obstacles: &[Sphere<T>],
) -> T {
    obstacles
        .iter()
        .map(|o| (segment_point_distance(pa, user, o.center) - o.radius).max(T::zero()))
        .fold(T::infinity(), T::min)
}

/// Precomputed constants of the link model for one configuration.
#[derive(Debug, Clone, Copy)]
pub struct LinkModel<T> {
    wavelength: T,
    free_space_wavenumber: T,
    guide_wavenumber: T,
    loss_db_per_m: T,
    blockage_rate: T,
    blockage_floor: T,
    pa_height: T,
}

impl<T: Scalar> LinkModel<T> {
    pub fn new(config: &SystemConfig<T>) -> Self {
        let two_pi = T::TAU();
        Self {
            wavelength: config.wavelength(),
            free_space_wavenumber: two_pi / config.wavelength(),
            guide_wavenumber: two_pi / config.guide_wavelength(),
            loss_db_per_m: config.wg_loss,
            blockage_rate: config.blockage_alpha,
            blockage_floor: config.blockage_beta,
            pa_height: config.pa_height,
        }
    }

    /// Link channel `g_{k,n}`: blockage times waveguide amplitude times LoS term.
    /// Excludes the in-guide phase of the tap point.
    pub fn link_gain(&self, x: T, user: Point3<T>, obstacles: &[Sphere<T>]) -> Option<Complex<T>> {
        let pa = Point3::new(x, T::zero(), self.pa_height);
        let r = pa.distance(user);
        if r.is_nan() || r <= T::zero() {
            return None;
        }
        let clearance = min_obstacle_distance(pa, user, obstacles);
        let b = blockage_factor(clearance, self.blockage_rate, self.blockage_floor);
        let amp = b * waveguide_attenuation(x, self.loss_db_per_m).sqrt() * self.wavelength
            / (T::lit(4.0) * T::PI() * r);
        Some(Complex::from_polar(amp, -self.free_space_wavenumber * r))
    }

    /// Unit phasor `e^{-j 2π x / λ_g}` applied by the guide up to `x`.
    pub fn guide_phase(&self, x: T) -> Complex<T> {
        Complex::from_polar(T::one(), -self.guide_wavenumber * x)
    }

    /// Effective channel of one user: coherent sum over all antennas.
    pub fn effective(
        &self,
        positions: &[T],
        user_index: usize,
        user: Point3<T>,
        obstacles: &[Sphere<T>],
    ) -> Result<Complex<T>> {
        let mut h = Complex::new(T::zero(), T::zero());
        for (n, &x) in positions.iter().enumerate() {
            let pa = Point3::new(x, T::zero(), self.pa_height);
            let r = pa.distance(user);
            if r.is_nan() || r <= T::zero() {
                return Err(Error::DegenerateGeometry {
                    user: user_index,
                    antenna: n,
                });
            }
            let clearance = min_obstacle_distance(pa, user, obstacles);
            let b = blockage_factor(clearance, self.blockage_rate, self.blockage_floor);
            let amp = b * waveguide_attenuation(x, self.loss_db_per_m).sqrt() * self.wavelength
                / (T::lit(4.0) * T::PI() * r);
            let phase = -(self.free_space_wavenumber * r + self.guide_wavenumber * x);
            h += Complex::from_polar(amp, phase);
        }
        Ok(h)
    }

    /// Effective channels of every user in the scenario.
    pub fn effective_all(
        &self,
        positions: &[T],
        scenario: &Scenario<T>,
    ) -> Result<Vec<Complex<T>>> {
        scenario
            .users
            .iter()
            .enumerate()
            .map(|(k, &u)| self.effective(positions, k, u, &scenario.obstacles))
            .collect()
    }
}

/// Effective channel `h_k` of the user at `user` for a given layout.
pub fn effective_channel<T: Scalar>(
    layout: &PaLayout<T>,
    user: Point3<T>,
    scenario: &Scenario<T>,
    config: &SystemConfig<T>,
) -> Result<Complex<T>> {
    let k = scenario.users.iter().position(|&u| u == user).unwrap_or(0);
    LinkModel::new(config).effective(&layout.positions, k, user, &scenario.obstacles)
}

/// Estimate `h + e` with `e = ρ ε |h| e^{jφ}` for explicit `ρ ∈ [0,1]`, `φ`.
pub fn csi_error_with<T: Scalar>(h: Complex<T>, eps: T, rho: T, phi: T) -> Complex<T> {
    h + Complex::from_polar(rho * eps * h.norm(), phi)
}

/// Draws a bounded estimation error: `ρ ~ U[0,1]`, `φ ~ U[0, 2π)`, so `|ĥ - h| ≤ ε|h|`.
pub fn apply_csi_error<T: Scalar, R: Rng + ?Sized>(
    h: Complex<T>,
    eps: T,
    rng: &mut R,
) -> Complex<T> {
    let rho: f64 = rng.random();
    let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    csi_error_with(h, eps, T::lit(rho), T::lit(phi))
}

/// True and estimated effective channels plus every per-link gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    pub h: Vec<Complex<T>>,
    pub h_hat: Vec<Complex<T>>,
    /// `gains[k][n]` is the link channel between user `k` and antenna `n`.
    pub gains: Vec<Vec<Complex<T>>>,
    /// In-guide phasor of each antenna.
    pub guide_phases: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelSet<T> {
    /// Computes all channels with the nominal estimate `ĥ = h`.
    pub fn compute(
        layout: &PaLayout<T>,
        scenario: &Scenario<T>,
        config: &SystemConfig<T>,
    ) -> Result<Self> {
        let model = LinkModel::new(config);
        let guide_phases: Vec<_> = layout
            .positions
            .iter()
            .map(|&x| model.guide_phase(x))
            .collect();
        let mut gains = Vec::with_capacity(scenario.users.len());
        let mut h = Vec::with_capacity(scenario.users.len());
        for (k, &user) in scenario.users.iter().enumerate() {
            let row = layout
                .positions
                .iter()
                .enumerate()
                .map(|(n, &x)| {
                    model
                        .link_gain(x, user, &scenario.obstacles)
                        .ok_or(Error::DegenerateGeometry {
                            user: k,
                            antenna: n,
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            h.push(
                row.iter()
                    .zip(&guide_phases)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (g, p)| {
                        acc + g * p
                    }),
            );
            gains.push(row);
        }
        Ok(Self {
            h_hat: h.clone(),
            h,
            gains,
            guide_phases,
        })
    }

    /// Replaces the estimates with bounded random errors around the true channels.
    pub fn with_csi_errors<R: Rng + ?Sized>(mut self, eps: T, rng: &mut R) -> Self {
        self.h_hat = self
            .h
            .iter()
            .map(|&h| apply_csi_error(h, eps, rng))
            .collect();
        self
    }
}
