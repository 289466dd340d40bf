use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::candidates::AxialCandidate;
use crate::error::{Error, Result};
use crate::estimators::{axial_distance, axial_optimal_inclination, grid_search_inclination, inclination_objective};

/// Objective slack allowed between the closed form and the grid maximum.
const OBJECTIVE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub trials: usize,
    pub seed: u64,
    pub grid_step: f64,
    /// Largest `|θ_closed − θ_grid|` modulo π.
    pub max_theta_deviation: f64,
    /// Smallest `J(θ_closed) − J(θ_grid)`; negative means the grid won.
    pub min_objective_margin: f64,
    pub violations: usize,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for OracleSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "grid step: {:e}", self.grid_step)?;
        writeln!(f, "max |dtheta| (mod pi): {:.6e}", self.max_theta_deviation)?;
        writeln!(f, "min objective margin: {:.6e}", self.min_objective_margin)?;
        writeln!(f, "violations: {}", self.violations)?;
        write!(f, "result: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// `k ∈ [1, 8]` unit candidates at uniformly random inclinations.
pub fn random_candidate_set(rng: &mut impl Rng) -> Vec<AxialCandidate> {
    let k = rng.random_range(1..=8);
    (0..k)
        .map(|_| AxialCandidate::from_inclination(rng.random_range(-PI..PI)))
        .collect()
}

/// Compares the closed-form inclination with a brute-force grid over
/// `trials` seeded random candidate sets.
pub fn run_oracle_check(trials: usize, seed: u64, grid_step: f64) -> Result<OracleSummary> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::InvalidInput(format!("grid step must lie in (0, 0.01], got {grid_step}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<Vec<AxialCandidate>> = (0..trials).map(|_| random_candidate_set(&mut rng)).collect();
    let results: Vec<(f64, f64)> = sets
        .par_iter()
        .map(|c| -> Result<(f64, f64)> {
            let closed = axial_optimal_inclination(c)?;
            let grid = grid_search_inclination(c, grid_step)?;
            let margin = closed.objective - inclination_objective(c, grid);
            Ok((axial_distance(closed.theta, grid), margin))
        })
        .collect::<Result<_>>()?;
    let mut summary = OracleSummary {
        trials,
        seed,
        grid_step,
        max_theta_deviation: 0.0,
        min_objective_margin: f64::INFINITY,
        violations: 0,
    };
    for (dev, margin) in results {
        summary.max_theta_deviation = summary.max_theta_deviation.max(dev);
        summary.min_objective_margin = summary.min_objective_margin.min(margin);
        if dev > grid_step || margin < -OBJECTIVE_TOL {
            summary.violations += 1;
        }
    }
    Ok(summary)
}
