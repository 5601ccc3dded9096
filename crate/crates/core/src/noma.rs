//! SIC decoding order under bounded CSI error and the SINR evaluations.
//!
//! Users are decoded weakest first: the user at decoding position `k` cancels
//! positions `0..k` and treats positions `k+1..` as interference. All SINR
//! routines take channel gains `|h|²` and power fractions already arranged in
//! decoding order, and return linear SINRs in the same order.

use std::cmp::Ordering;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// NOMA power fractions, one per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PowerAlloc<T> {
    pub fractions: Vec<T>,
}

impl<T: Scalar> PowerAlloc<T> {
    pub fn new(fractions: Vec<T>) -> Self {
        Self { fractions }
    }

    /// Equal split `1/K`.
    pub fn uniform(num_users: usize) -> Self {
        Self::new(vec![T::one() / T::from_count(num_users); num_users])
    }

    /// Nonnegative with total at most one (plus `tol`).
    pub fn is_feasible(&self, tol: T) -> bool {
        self.fractions.iter().all(|&a| a >= T::zero())
            && self.fractions.iter().fold(T::zero(), |s, &a| s + a) <= T::one() + tol
    }

    /// Fractions rearranged into the given decoding order.
    pub fn in_order(&self, order: &[usize]) -> Vec<T> {
        order.iter().map(|&u| self.fractions[u]).collect()
    }
}

/// Signal shrink, interference inflation and residual-SIC leakage factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustGains<T> {
    /// `(1 - ε)²`
    pub signal: T,
    /// `(1 + η_i ε)²`
    pub interference: T,
    /// `η_r ε`
    pub residual: T,
}

impl<T: Scalar> RobustGains<T> {
    /// Perfect CSI and perfect SIC.
    pub fn nominal() -> Self {
        Self {
            signal: T::one(),
            interference: T::one(),
            residual: T::zero(),
        }
    }
}

pub fn robust_gains<T: Scalar>(eps: T, eta_i: T, eta_r: T) -> RobustGains<T> {
    let shrink = T::one() - eps;
    let inflate = T::one() + eta_i * eps;
    RobustGains {
        signal: shrink * shrink,
        interference: inflate * inflate,
        residual: eta_r * eps,
    }
}

/// Ratio `(1+ε)/(1-ε)` two estimated magnitudes must clear to be safely ordered.
pub fn order_margin<T: Scalar>(eps: T) -> T {
    (T::one() + eps) / (T::one() - eps)
}

/// Conservative decoding order built from estimated channel magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingOrder<T> {
    /// User indices, weakest estimate first.
    pub order: Vec<usize>,
    /// Consecutive runs of `order` whose adjacent pairs cannot be told apart under ε.
    pub clusters: Vec<Vec<usize>>,
    /// Adjacent-pair violation amounts, `order.len() - 1` entries.
    pub violations: Vec<T>,
}

impl<T: Scalar> DecodingOrder<T> {
    pub fn total_violation(&self) -> T {
        self.violations.iter().fold(T::zero(), |s, &v| s + v)
    }
}

/// Violation `[m·|ĥ_k| - |ĥ_{k+1}|]₊` of each adjacent pair, `m = (1+ε)/(1-ε)`.
/// Input must be sorted ascending.
pub fn order_violation<T: Scalar>(sorted_magnitudes: &[T], eps: T) -> Vec<T> {
    let margin = order_margin(eps);
    sorted_magnitudes
        .windows(2)
        .map(|w| (margin * w[0] - w[1]).max(T::zero()))
        .collect()
}

/// Sorts users by estimated magnitude (ties by index) and groups adjacent
/// pairs that fail the safe-ordering test into uncertainty clusters.
pub fn conservative_order_by_magnitude<T: Scalar>(magnitudes: &[T], eps: T) -> DecodingOrder<T> {
    let mut order: Vec<usize> = (0..magnitudes.len()).collect();
    // stable sort keeps index order among ties
    order.sort_by(|&a, &b| {
        magnitudes[a]
            .partial_cmp(&magnitudes[b])
            .unwrap_or(Ordering::Equal)
    });
    let sorted: Vec<T> = order.iter().map(|&u| magnitudes[u]).collect();
    let violations = order_violation(&sorted, eps);

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, &user) in order.iter().enumerate() {
        let joins_previous = pos > 0 && violations[pos - 1] > T::zero();
        match clusters.last_mut() {
            Some(cluster) if joins_previous => cluster.push(user),
            _ => clusters.push(vec![user]),
        }
    }
    DecodingOrder {
        order,
        clusters,
        violations,
    }
}

/// [`conservative_order_by_magnitude`] on complex estimates.
pub fn conservative_order<T: Scalar>(h_hat: &[Complex<T>], eps: T) -> DecodingOrder<T> {
    let magnitudes: Vec<T> = h_hat.iter().map(|h| h.norm()).collect();
    conservative_order_by_magnitude(&magnitudes, eps)
}

/// Conservative SINR of each decoding position.
///
/// `SINR_k = g_s α_k P |h_k|² / (g_i P |h_k|² Σ_{j>k} α_j + g_r P |h_k|² Σ_{j<k} α_j + σ²)`.
pub fn conservative_sinr<T: Scalar>(
    h_sq: &[T],
    alpha: &[T],
    gains: &RobustGains<T>,
    tx_power: T,
    noise_power: T,
) -> Vec<T> {
    debug_assert_eq!(h_sq.len(), alpha.len());
    let mut above = vec![T::zero(); alpha.len()];
    for k in (0..alpha.len().saturating_sub(1)).rev() {
        above[k] = above[k + 1] + alpha[k + 1];
    }
    let mut below = T::zero();
    h_sq.iter()
        .zip(alpha)
        .zip(above)
        .map(|((&g, &a), above)| {
            let received = tx_power * g;
            let denom = gains.interference * received * above
                + gains.residual * received * below
                + noise_power;
            below += a;
            gains.signal * a * received / denom
        })
        .collect()
}

/// SINR of decoding position `k` for a receiver whose channel gain is `h_sq`,
/// after cancelling positions `0..k`.
fn decode_sinr_with<T: Scalar>(h_sq: T, k: usize, alpha: &[T], tx_power: T, noise_power: T) -> T {
    let signal = alpha[k] * tx_power * h_sq;
    let interference = alpha[k + 1..]
        .iter()
        .fold(T::zero(), |s, &a| s + a * tx_power * h_sq);
    signal / (interference + noise_power)
}

/// Perfect-CSI SINR of each decoding position with ideal SIC.
pub fn true_sinr<T: Scalar>(h_sq: &[T], alpha: &[T], tx_power: T, noise_power: T) -> Vec<T> {
    debug_assert_eq!(h_sq.len(), alpha.len());
    (0..h_sq.len())
        .map(|k| decode_sinr_with(h_sq[k], k, alpha, tx_power, noise_power))
        .collect()
}

/// SINR with which a later user (channel gain `h_sq_j`) decodes position `k` during SIC.
pub fn sic_decode_sinr<T: Scalar>(
    h_sq_j: T,
    k: usize,
    alpha: &[T],
    tx_power: T,
    noise_power: T,
) -> T {
    decode_sinr_with(h_sq_j, k, alpha, tx_power, noise_power)
}

/// Fairness objective: the smallest SINR.
pub fn min_sinr<T: Scalar>(sinrs: &[T]) -> Result<T> {
    sinrs
        .iter()
        .copied()
        .reduce(T::min)
        .ok_or(Error::Empty("SINR list"))
}

/// Per-user SINR when decoding follows the order of the *estimates* while the
/// true channels govern reception.
///
/// Position `j` must decode every earlier position before its own signal; its
/// effective SINR is the smallest of its own SINR and any SIC step whose
/// decode SINR falls short of the target SINR of the cancelled user. Output is
/// indexed by user.
pub fn estimated_order_sinr<T: Scalar>(
    h: &[Complex<T>],
    h_hat: &[Complex<T>],
    alpha: &PowerAlloc<T>,
    tx_power: T,
    noise_power: T,
) -> Vec<T> {
    let order = conservative_order(h_hat, T::zero()).order;
    let h_sq: Vec<T> = order.iter().map(|&u| h[u].norm_sqr()).collect();
    let a = alpha.in_order(&order);
    let own = true_sinr(&h_sq, &a, tx_power, noise_power);
    let mut per_user = vec![T::zero(); h.len()];
    for (j, &user) in order.iter().enumerate() {
        let mut effective = own[j];
        for (k, &target) in own.iter().enumerate().take(j) {
            let decode = sic_decode_sinr(h_sq[j], k, &a, tx_power, noise_power);
            if decode < target {
                effective = effective.min(decode);
            }
        }
        per_user[user] = effective;
    }
    per_user
}
