//! Closed-form inclination for axial candidates on a shared azimuth.
//!
//! Given unit candidates `(A_i, n_z_i)` the estimator maximizes
//!
//! ```text
//! J(θ) = Σ (A_i sin θ + n_z_i cos θ)²
//!      = ½ Σ(A_i² + n_z_i²) + ½ S_d cos 2θ + S_an sin 2θ
//! ```
//!
//! with `S_an = Σ A_i n_z_i` and `S_d = Σ (n_z_i² − A_i²)`. The squared
//! terms make `J` blind to the sign of each candidate, so `n` and `−n` count
//! as the same axis. The maximizer is `θ = ½ atan2(2 S_an, S_d)` modulo π.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::candidates::AxialCandidate;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InclinationSolution {
    /// Radians in `[0, π)`.
    pub theta: f64,
    /// Which critical point of the half-angle arctangent won: `θ ≡ θ₀ + l·π/2`.
    pub branch: u8,
    pub objective: f64,
}

/// `Σ (A_i sin θ + n_z_i cos θ)²`, evaluated term by term.
pub fn inclination_objective(candidates: &[AxialCandidate], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    candidates
        .iter()
        .map(|x| {
            let t = x.along * s + x.nz * c;
            t * t
        })
        .sum()
}

#[inline]
pub(crate) fn moment_sums(candidates: &[AxialCandidate]) -> (f64, f64) {
    let mut s_an = 0.0;
    let mut s_d = 0.0;
    for x in candidates {
        s_an += x.along * x.nz;
        s_d += x.nz * x.nz - x.along * x.along;
    }
    (s_an, s_d)
}

#[inline]
pub(crate) fn wrap_pi(theta: f64) -> f64 {
    let w = theta.rem_euclid(PI);
    if w >= PI {
        0.0
    } else {
        w
    }
}

/// Doubled-angle maximizer; `(theta, branch)` with `theta ∈ [0, π)`.
#[inline]
pub(crate) fn closed_form_theta(s_an: f64, s_d: f64) -> (f64, u8) {
    let theta = wrap_pi(0.5 * (2.0 * s_an).atan2(s_d));
    (theta, u8::from(s_d < 0.0))
}

/// `(cos θ̂, sin θ̂)` of the doubled-angle maximizer, up to a common sign,
/// via half-angle identities instead of trigonometric calls.
#[inline]
pub(crate) fn closed_form_axis(s_an: f64, s_d: f64) -> (f64, f64) {
    let y = 2.0 * s_an;
    let r = (s_d * s_d + y * y).sqrt();
    if r == 0.0 {
        return (1.0, 0.0);
    }
    let cos_2t = s_d / r;
    if cos_2t >= 0.0 {
        let c = (0.5 * (1.0 + cos_2t)).sqrt();
        (c, y / (2.0 * r * c))
    } else {
        let s = (0.5 * (1.0 - cos_2t)).sqrt();
        (y / (2.0 * r * s), s)
    }
}

/// Inclination maximizing the axial objective.
///
/// With no preferred direction (`S_an = S_d = 0`) the result is `θ = 0`.
pub fn axial_optimal_inclination(candidates: &[AxialCandidate]) -> Result<InclinationSolution> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let (s_an, s_d) = moment_sums(candidates);
    let (theta, branch) = closed_form_theta(s_an, s_d);
    Ok(InclinationSolution {
        theta,
        branch,
        objective: inclination_objective(candidates, theta),
    })
}

/// The same maximizer built the other way: take the single-argument
/// arctangent `θ₀ = ½ arctan(2 S_an / S_d)`, evaluate the objective at
/// `θ₀` and `θ₀ + π/2`, and keep the larger.
pub fn axial_inclination_by_branches(candidates: &[AxialCandidate]) -> Result<InclinationSolution> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let (s_an, s_d) = moment_sums(candidates);
    let theta0 = if s_d == 0.0 {
        if s_an == 0.0 {
            0.0
        } else {
            FRAC_PI_4.copysign(s_an)
        }
    } else {
        0.5 * (2.0 * s_an / s_d).atan()
    };
    let j0 = inclination_objective(candidates, theta0);
    let j1 = inclination_objective(candidates, theta0 + FRAC_PI_2);
    let (theta, branch, objective) = if j1 > j0 {
        (theta0 + FRAC_PI_2, 1, j1)
    } else {
        (theta0, 0, j0)
    };
    Ok(InclinationSolution {
        theta: wrap_pi(theta),
        branch,
        objective,
    })
}

/// Brute-force maximizer over `θ ∈ {0, step, 2·step, …} ∩ [0, π]`.
///
/// Ties (objective values within 1e-14 relative of the maximum) go to the
/// smallest θ.
pub fn grid_search_inclination(candidates: &[AxialCandidate], step: f64) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if !(step > 0.0 && step <= 0.01) {
        return Err(Error::InvalidInput(format!(
            "grid step must lie in (0, 0.01], got {step}"
        )));
    }
    let n = (PI / step).floor() as usize;
    let values: Vec<f64> = (0..=n)
        .map(|j| inclination_objective(candidates, j as f64 * step))
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-14 * best.abs().max(1.0);
    let j = values
        .iter()
        .position(|&x| x >= best - tol)
        .expect("grid is non-empty");
    Ok(j as f64 * step)
}

/// Distance between two inclinations modulo π.
pub fn axial_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn half_angle_axis_matches_atan2_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let check = |s_an: f64, s_d: f64| {
            let (theta, _) = closed_form_theta(s_an, s_d);
            let (c, s) = closed_form_axis(s_an, s_d);
            assert!((c.hypot(s) - 1.0).abs() < 1e-14);
            // same axis: cross product of (cos, sin) pairs vanishes
            assert!((c * theta.sin() - s * theta.cos()).abs() < 1e-14, "{s_an} {s_d}");
        };
        for _ in 0..10_000 {
            check(rng.random_range(-4.0..4.0), rng.random_range(-8.0..8.0));
        }
        for (a, d) in [(0.0, 0.0), (0.0, 1.0), (0.0, -1.0), (-0.0, -1.0), (1.0, 0.0), (-1.0, 0.0), (1e-300, -1.0)] {
            check(a, d);
        }
    }

    fn from_thetas(ts: &[f64]) -> Vec<AxialCandidate> {
        ts.iter().map(|&t| AxialCandidate::from_inclination(t)).collect()
    }

    fn random_set(rng: &mut ChaCha8Rng) -> Vec<AxialCandidate> {
        let k = rng.random_range(1..=8);
        (0..k)
            .map(|_| AxialCandidate::from_inclination(rng.random_range(-PI..PI)))
            .collect()
    }

    #[test]
    fn unanimous_candidates() {
        let c = from_thetas(&[0.3; 5]);
        let s = axial_optimal_inclination(&c).unwrap();
        assert!((s.theta - 0.3).abs() < 1e-15);
        assert_eq!(s.branch, 0);
        assert!((s.objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_candidates_share_an_axis() {
        let c = vec![
            AxialCandidate::from_inclination(0.3),
            AxialCandidate::from_inclination(0.3).negated(),
        ];
        let s = axial_optimal_inclination(&c).unwrap();
        assert!((s.theta - 0.3).abs() < 1e-15);
    }

    #[test]
    fn single_candidate_is_its_own_inclination() {
        for t in [0.0, 0.7, 1.5, 2.9] {
            let s = axial_optimal_inclination(&from_thetas(&[t])).unwrap();
            assert!(axial_distance(s.theta, t) < 1e-15, "{t} -> {}", s.theta);
        }
    }

    #[test]
    fn mixed_thetas_match_grid_oracle() {
        let c = from_thetas(&[0.1, 0.1, 1.6]);
        let grid = grid_search_inclination(&c, 1e-5).unwrap();
        let s = axial_optimal_inclination(&c).unwrap();
        // frozen from an independent 1e-5 grid evaluation: 0.16941
        assert!((grid - 0.16941).abs() < 1e-5, "{grid}");
        assert!((s.theta - 0.169_411_5).abs() < 1e-6, "{}", s.theta);
        assert!(axial_distance(s.theta, grid) <= 1e-5);
    }

    #[test]
    fn flat_objective_resolves_to_zero() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = vec![
            AxialCandidate { along: h, nz: h },
            AxialCandidate { along: h, nz: -h },
        ];
        // every θ scores 1
        for j in 0..100 {
            assert!((inclination_objective(&c, j as f64 * 0.0314) - 1.0).abs() < 1e-15);
        }
        assert_eq!(grid_search_inclination(&c, 1e-3).unwrap(), 0.0);
        assert_eq!(axial_optimal_inclination(&c).unwrap().theta, 0.0);
        assert_eq!(axial_inclination_by_branches(&c).unwrap().theta, 0.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(axial_optimal_inclination(&[]), Err(Error::EmptyCandidates)));
        assert!(matches!(grid_search_inclination(&[], 1e-3), Err(Error::EmptyCandidates)));
    }

    #[test]
    fn grid_step_bounds() {
        let c = from_thetas(&[0.3]);
        assert!(grid_search_inclination(&c, 0.0).is_err());
        assert!(grid_search_inclination(&c, 0.02).is_err());
        let t = grid_search_inclination(&c, 1e-3).unwrap();
        assert!((t - 0.3).abs() <= 1e-3);
    }

    #[test]
    fn random_sets_match_grid_within_one_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let step = 1e-3;
        for _ in 0..1000 {
            let c = random_set(&mut rng);
            let grid = grid_search_inclination(&c, step).unwrap();
            let s = axial_optimal_inclination(&c).unwrap();
            assert!(axial_distance(s.theta, grid) <= step, "{c:?}");
            assert!(s.objective >= inclination_objective(&c, grid) - 1e-9);
        }
    }

    #[test]
    fn branch_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let c = random_set(&mut rng);
            let a = axial_optimal_inclination(&c).unwrap();
            let b = axial_inclination_by_branches(&c).unwrap();
            assert!(axial_distance(a.theta, b.theta) < 1e-12, "{c:?}: {a:?} vs {b:?}");
            assert_eq!(a.branch, b.branch, "{c:?}");
        }
    }

    #[test]
    fn chosen_branch_dominates_the_other_critical_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let c = random_set(&mut rng);
            let s = axial_optimal_inclination(&c).unwrap();
            assert!(s.objective >= inclination_objective(&c, s.theta + FRAC_PI_2) - 1e-12);
        }
    }

    proptest! {
        #[test]
        fn sign_flips_do_not_move_the_axis(
            thetas in proptest::collection::vec(-PI..PI, 1..9),
            flips in proptest::collection::vec(any::<bool>(), 9),
        ) {
            let c = from_thetas(&thetas);
            let flipped: Vec<_> = c.iter().zip(&flips).map(|(&x, &f)| if f { x.negated() } else { x }).collect();
            let a = axial_optimal_inclination(&c).unwrap().theta;
            let b = axial_optimal_inclination(&flipped).unwrap().theta;
            prop_assert!(axial_distance(a, b) < 1e-9);
        }

        #[test]
        fn closed_form_beats_every_sampled_theta(
            thetas in proptest::collection::vec(-PI..PI, 1..9),
            probe in 0.0..PI,
        ) {
            let c = from_thetas(&thetas);
            let s = axial_optimal_inclination(&c).unwrap();
            prop_assert!(s.objective >= inclination_objective(&c, probe) - 1e-9);
        }
    }
}
