//! System constants and randomized realizations.
//!
//! [`SystemConfig`] holds every physical and model constant. A [`Scenario`]
//! is one realization of user positions and obstacles, drawn deterministically
//! from a seed by [`generate_scenario`].
//!
//! Obstacles are modelled as spheres so the clearance of a PA-user link is a
//! closed-form point-to-segment distance minus the radius.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::PaLayout;
use crate::error::{Error, Result};
use crate::geometry::{Point3, Sphere};
use crate::noma::{robust_gains, RobustGains};
use crate::seeding::{stream_rng, streams};
use crate::Scalar;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// All physical and model constants.
///
/// Deserializes from JSON with these exact field names. Missing keys take the
/// defaults of [`SystemConfig::default`]; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound = "T: Scalar")]
pub struct SystemConfig<T> {
    /// Number of users K.
    pub num_users: usize,
    /// Number of pinching antennas N.
    pub num_pas: usize,
    /// Waveguide length L, m.
    pub waveguide_len: T,
    /// Antenna height H, m.
    pub pa_height: T,
    /// Minimum spacing between adjacent antennas, m.
    pub min_spacing: T,
    /// Service rectangle extent along x, m.
    pub area_x: T,
    /// Service rectangle extent along y, m.
    pub area_y: T,
    /// Carrier frequency, Hz.
    pub carrier_freq: T,
    /// Effective refractive index of the guide (guided wavelength = wavelength / index).
    pub guide_index: T,
    /// Waveguide loss, dB/m.
    pub wg_loss: T,
    /// Total transmit power P_T, W.
    pub tx_power: T,
    /// Receiver noise power, W.
    pub noise_power: T,
    /// Minimum blockage transmission coefficient, in (0, 1].
    pub blockage_beta: T,
    /// Blockage attenuation rate, 1/m.
    pub blockage_alpha: T,
    /// Relative CSI error bound, in [0, 1).
    pub csi_eps: T,
    /// Interference inflation level.
    pub eta_i: T,
    /// Residual SIC leakage factor.
    pub eta_r: T,
    /// Order-violation penalty weight.
    pub penalty_mu: T,
    pub obstacle_count: usize,
    /// Obstacle radius range `[min, max]`, m.
    pub obstacle_radius_range: [T; 2],
}

impl<T: Scalar> Default for SystemConfig<T> {
    fn default() -> Self {
        Self {
            num_users: 3,
            num_pas: 5,
            waveguide_len: T::lit(10.0),
            pa_height: T::lit(3.0),
            min_spacing: T::lit(0.5),
            area_x: T::lit(10.0),
            area_y: T::lit(10.0),
            carrier_freq: T::lit(28e9),
            guide_index: T::lit(1.4),
            wg_loss: T::lit(0.1),
            tx_power: T::lit(1.0),
            noise_power: T::lit(1e-10),
            blockage_beta: T::lit(0.1),
            blockage_alpha: T::lit(2.0),
            csi_eps: T::lit(0.1),
            eta_i: T::lit(0.5),
            eta_r: T::lit(0.2),
            penalty_mu: T::lit(1.0),
            obstacle_count: 3,
            obstacle_radius_range: [T::lit(0.3), T::lit(0.8)],
        }
    }
}

fn check(ok: bool, invariant: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(invariant()))
    }
}

impl<T: Scalar> SystemConfig<T> {
    /// Parses a JSON document; missing keys fall back to defaults.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(json)?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every invariant, naming the first one violated.
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        check(self.num_users >= 1, || "num_users >= 1".into())?;
        check(self.num_pas >= 1, || "num_pas >= 1".into())?;
        check(self.waveguide_len > zero, || {
            format!("waveguide_len > 0 (got {})", self.waveguide_len)
        })?;
        check(self.pa_height > zero, || {
            format!("pa_height > 0 (got {})", self.pa_height)
        })?;
        check(self.min_spacing >= zero, || {
            format!("min_spacing >= 0 (got {})", self.min_spacing)
        })?;
        let span = T::from_count(self.num_pas - 1) * self.min_spacing;
        check(span <= self.waveguide_len, || {
            format!(
                "(num_pas - 1) * min_spacing <= waveguide_len (got {} * {} = {} > {})",
                self.num_pas - 1,
                self.min_spacing,
                span,
                self.waveguide_len
            )
        })?;
        check(self.area_x > zero && self.area_y > zero, || {
            format!(
                "area_x > 0 and area_y > 0 (got {} x {})",
                self.area_x, self.area_y
            )
        })?;
        check(self.carrier_freq > zero, || {
            format!("carrier_freq > 0 (got {})", self.carrier_freq)
        })?;
        check(self.guide_index >= one, || {
            format!("guide_index >= 1 (got {})", self.guide_index)
        })?;
        check(self.wg_loss >= zero, || {
            format!("wg_loss >= 0 (got {})", self.wg_loss)
        })?;
        check(self.tx_power > zero, || {
            format!("tx_power > 0 (got {})", self.tx_power)
        })?;
        check(self.noise_power > zero, || {
            format!("noise_power > 0 (got {})", self.noise_power)
        })?;
        check(
            self.blockage_beta > zero && self.blockage_beta <= one,
            || format!("0 < blockage_beta <= 1 (got {})", self.blockage_beta),
        )?;
        check(self.blockage_alpha > zero, || {
            format!("blockage_alpha > 0 (got {})", self.blockage_alpha)
        })?;
        check(self.csi_eps >= zero && self.csi_eps < one, || {
            format!("0 <= csi_eps < 1 (got {})", self.csi_eps)
        })?;
        check(self.eta_i > zero, || {
            format!("eta_i > 0 (got {})", self.eta_i)
        })?;
        check(self.eta_r >= zero, || {
            format!("eta_r >= 0 (got {})", self.eta_r)
        })?;
        check(self.penalty_mu > zero, || {
            format!("penalty_mu > 0 (got {})", self.penalty_mu)
        })?;
        let [r_min, r_max] = self.obstacle_radius_range;
        check(r_min > zero && r_min <= r_max, || {
            format!(
                "0 < obstacle_radius_range[0] <= obstacle_radius_range[1] (got [{r_min}, {r_max}])"
            )
        })?;
        // Every float must be finite for the above to mean anything.
        check(
            [
                self.waveguide_len,
                self.pa_height,
                self.area_x,
                self.area_y,
                self.carrier_freq,
                self.wg_loss,
                self.tx_power,
                self.noise_power,
                self.blockage_alpha,
                self.eta_i,
                self.eta_r,
                self.penalty_mu,
                r_max,
            ]
            .iter()
            .all(|v| v.is_finite()),
            || "all parameters finite".into(),
        )
    }

    /// Free-space wavelength `c / f_c`.
    pub fn wavelength(&self) -> T {
        T::lit(SPEED_OF_LIGHT) / self.carrier_freq
    }

    /// In-guide wavelength.
    pub fn guide_wavelength(&self) -> T {
        self.wavelength() / self.guide_index
    }

    pub fn robust_gains(&self) -> RobustGains<T> {
        robust_gains(self.csi_eps, self.eta_i, self.eta_r)
    }

    /// Perfect-CSI view of this configuration (`csi_eps = 0`, `eta_r = 0`).
    pub fn nominal(&self) -> Self {
        Self {
            csi_eps: T::zero(),
            eta_r: T::zero(),
            ..self.clone()
        }
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SystemConfig<U> {
        let c = |v: T| U::lit(v.as_f64());
        SystemConfig {
            num_users: self.num_users,
            num_pas: self.num_pas,
            waveguide_len: c(self.waveguide_len),
            pa_height: c(self.pa_height),
            min_spacing: c(self.min_spacing),
            area_x: c(self.area_x),
            area_y: c(self.area_y),
            carrier_freq: c(self.carrier_freq),
            guide_index: c(self.guide_index),
            wg_loss: c(self.wg_loss),
            tx_power: c(self.tx_power),
            noise_power: c(self.noise_power),
            blockage_beta: c(self.blockage_beta),
            blockage_alpha: c(self.blockage_alpha),
            csi_eps: c(self.csi_eps),
            eta_i: c(self.eta_i),
            eta_r: c(self.eta_r),
            penalty_mu: c(self.penalty_mu),
            obstacle_count: self.obstacle_count,
            obstacle_radius_range: [
                c(self.obstacle_radius_range[0]),
                c(self.obstacle_radius_range[1]),
            ],
        }
    }
}

/// One realization of users and obstacles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Scenario<T> {
    /// User positions `(x, y, 0)` with `y > 0`.
    pub users: Vec<Point3<T>>,
    pub obstacles: Vec<Sphere<T>>,
    pub seed: u64,
}

impl<T: Scalar> Scenario<T> {
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Checks the geometry invariants against `config`.
    pub fn validate(&self, config: &SystemConfig<T>) -> Result<()> {
        let zero = T::zero();
        for (k, u) in self.users.iter().enumerate() {
            check(
                u.x > zero
                    && u.x < config.area_x
                    && u.y > zero
                    && u.y < config.area_y
                    && u.z == zero,
                || format!("user {k} outside service rectangle: {u:?}"),
            )?;
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            let c = o.center;
            check(
                o.radius > zero
                    && c.x >= zero
                    && c.x <= config.area_x
                    && c.y >= zero
                    && c.y <= config.area_y
                    && c.z >= zero
                    && c.z <= config.pa_height,
                || format!("obstacle {i} outside service volume: {o:?}"),
            )?;
        }
        Ok(())
    }
}

/// Draws one realization.
///
/// Users come from one RNG stream and obstacles from another, so the first
/// `K` users of a seed are the same for every `K` and every obstacle setting.
pub fn generate_scenario<T: Scalar>(config: &SystemConfig<T>, seed: u64) -> Result<Scenario<T>> {
    config.validate()?;

    let mut user_rng = stream_rng(seed, streams::USERS);
    let users = (0..config.num_users)
        .map(|_| {
            let fx: f64 = user_rng.sample(Open01);
            let fy: f64 = user_rng.sample(Open01);
            Point3::new(
                T::lit(fx) * config.area_x,
                T::lit(fy) * config.area_y,
                T::zero(),
            )
        })
        .collect();

    let mut obstacle_rng = stream_rng(seed, streams::OBSTACLES);
    let [r_min, r_max] = config.obstacle_radius_range;
    let obstacles = (0..config.obstacle_count)
        .map(|_| {
            let fx: f64 = obstacle_rng.random();
            let fy: f64 = obstacle_rng.random();
            let fz: f64 = obstacle_rng.random();
            let fr: f64 = obstacle_rng.random();
            Sphere {
                center: Point3::new(
                    T::lit(fx) * config.area_x,
                    T::lit(fy) * config.area_y,
                    T::lit(fz) * config.pa_height,
                ),
                radius: r_min + T::lit(fr) * (r_max - r_min),
            }
        })
        .collect();

    Ok(Scenario {
        users,
        obstacles,
        seed,
    })
}

/// Evenly spaced antennas over `[0, L]`; a single antenna sits at `L / 2`.
pub fn uniform_layout<T: Scalar>(config: &SystemConfig<T>) -> Result<PaLayout<T>> {
    let n = config.num_pas;
    let len = config.waveguide_len;
    if n == 0 {
        return Err(Error::InvalidConfig("num_pas >= 1".into()));
    }
    if n == 1 {
        return Ok(PaLayout::new(vec![len / T::lit(2.0)]));
    }
    let step = len / T::from_count(n - 1);
    if step < config.min_spacing {
        return Err(Error::InvalidConfig(format!(
            "uniform spacing {step} < min_spacing {}",
            config.min_spacing
        )));
    }
    Ok(PaLayout::new(
        (0..n).map(|i| T::from_count(i) * step).collect(),
    ))
}
