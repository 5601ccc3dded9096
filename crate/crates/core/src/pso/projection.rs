//! Feasibility projection of a particle onto the layout and power constraints.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::Scalar;

/// Maps arbitrary antenna coordinates onto `{0 ≤ x_n ≤ L, x_{n+1} - x_n ≥ d_min}`.
///
/// Clip to `[0, L]`, sort, push forward so every gap is at least `d_min`, then
/// pull back from `L` so the last antenna fits. The result is ascending.
pub fn project_geometry<T: Scalar>(x: &[T], length: T, min_spacing: T) -> Result<Vec<T>> {
    let mut out = x.to_vec();
    project_geometry_in_place(&mut out, length, min_spacing)?;
    Ok(out)
}

pub(crate) fn project_geometry_in_place<T: Scalar>(
    x: &mut [T],
    length: T,
    min_spacing: T,
) -> Result<()> {
    if x.len() > 1 && T::from_count(x.len() - 1) * min_spacing > length {
        return Err(Error::InvalidConfig(format!(
            "(num_pas - 1) * min_spacing <= waveguide_len (got {} * {} > {})",
            x.len() - 1,
            min_spacing,
            length
        )));
    }
    for v in x.iter_mut() {
        // NaN clips to 0
        *v = v.max(T::zero()).min(length);
    }
    x.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    for n in 1..x.len() {
        if x[n] - x[n - 1] < min_spacing {
            x[n] = x[n - 1] + min_spacing;
        }
    }
    if let Some(last) = x.last_mut() {
        *last = last.min(length);
    }
    for n in (0..x.len().saturating_sub(1)).rev() {
        if x[n + 1] - x[n] < min_spacing {
            x[n] = x[n + 1] - min_spacing;
        }
    }
    Ok(())
}

/// Projects onto `{a ≥ 0, Σ a ≤ 1}`.
///
/// Negative entries are clipped; if the total still exceeds one the vector is
/// replaced by its Euclidean projection onto the unit simplex `Σ a = 1`.
/// Totals within summation round-off of one (`K` machine epsilons) count as
/// feasible, which keeps the projection idempotent.
pub fn project_simplex<T: Scalar>(a: &[T]) -> Vec<T> {
    let mut out = a.to_vec();
    project_simplex_in_place(&mut out);
    out
}

pub(crate) fn project_simplex_in_place<T: Scalar>(a: &mut [T]) {
    for v in a.iter_mut() {
        *v = v.max(T::zero());
    }
    let total = a.iter().fold(T::zero(), |s, &v| s + v);
    if total <= T::one() + T::epsilon() * T::from_count(a.len()) {
        return;
    }
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    let mut cumulative = T::zero();
    let mut threshold = T::zero();
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - T::one()) / T::from_count(i + 1);
        if u > candidate {
            threshold = candidate;
        } else {
            break;
        }
    }
    for v in a.iter_mut() {
        *v = (*v - threshold).max(T::zero());
    }
}

/// Projects a full particle `θ = [x_p; α]` in place; `num_pas` splits the blocks.
pub fn project_theta<T: Scalar>(
    theta: &mut [T],
    num_pas: usize,
    length: T,
    min_spacing: T,
) -> Result<()> {
    let (positions, alpha) = theta.split_at_mut(num_pas);
    project_geometry_in_place(positions, length, min_spacing)?;
    project_simplex_in_place(alpha);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn assert_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert_relative_eq!(*g, *w, epsilon = 1e-12);
        }
    }

    #[test]
    fn geometry_traces() {
        assert_close(
            &project_geometry(&[2.0, 5.0, 8.0], 10.0, 0.5).unwrap(),
            &[2.0, 5.0, 8.0],
        );
        assert_close(
            &project_geometry(&[9.9, 9.95], 10.0, 0.3).unwrap(),
            &[9.7, 10.0],
        );
        assert_close(
            &project_geometry(&[-1.0, 12.0], 10.0, 0.5).unwrap(),
            &[0.0, 10.0],
        );
    }

    #[test]
    fn geometry_sorts_and_packs() {
        let out = project_geometry(&[7.0, 1.0, 1.0, 1.0], 10.0, 3.0).unwrap();
        assert_close(&out, &[1.0, 4.0, 7.0, 10.0]);
        let out = project_geometry(&[10.0, 10.0, 10.0], 4.0, 2.0).unwrap();
        assert_close(&out, &[0.0, 2.0, 4.0]);
    }

    #[test]
    fn geometry_infeasible() {
        assert!(project_geometry(&[0.0, 1.0, 2.0], 1.0, 0.6).is_err());
        // single antenna never conflicts
        assert_eq!(project_geometry(&[3.0], 1.0, 5.0).unwrap(), vec![1.0]);
    }

    #[test]
    fn simplex_projection_is_exactly_idempotent() {
        // projects to a vector summing to 1 + 2 ulp
        let once = project_simplex(&[0.5460091369224929, 1.135017509677847, 0.9529387867775425]);
        assert_eq!(project_simplex(&once), once);
    }

    #[test]
    fn simplex_examples() {
        assert_close(&project_simplex(&[0.2, 0.3]), &[0.2, 0.3]);
        assert_close(&project_simplex(&[0.8, 0.8]), &[0.5, 0.5]);
        assert_close(&project_simplex(&[1.2, -0.1]), &[1.0, 0.0]);
        assert_close(&project_simplex(&[-3.0, -0.1]), &[0.0, 0.0]);
    }

    #[test]
    fn theta_projects_both_blocks() {
        let mut theta = vec![12.0, -2.0, 0.7, 0.9, -0.5];
        project_theta(&mut theta, 2, 10.0, 0.5).unwrap();
        assert_close(&theta, &[0.0, 10.0, 0.4, 0.6, 0.0]);
    }
}
