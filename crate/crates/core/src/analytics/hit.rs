use statrs::function::erf::erfc;

use super::che::{solve_characteristic_time, CheProblem, CheSolution};
use crate::workload::TtuLaw;
use crate::Result;

/// LRU hit probability `1 − e^{−ρT}` under the Che approximation.
pub fn hit_probability_lru(rho: f64, t: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    -(-rho * t).exp_m1()
}

/// LRU hit probability scaled by the chance the content is admitted at all.
pub fn hit_probability_tlru(rho: f64, t: f64, admit_prob: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&admit_prob));
    hit_probability_lru(rho, t) * admit_prob.clamp(0.0, 1.0)
}

/// Probability that a TTU drawn from `law` exceeds the mean inter-request
/// time `1/ρ`, i.e. that the content clears admission.
pub fn admit_probability(law: &TtuLaw, rho: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let tau = 1.0 / rho;
    match *law {
        TtuLaw::Constant { value } => f64::from(u8::from(value > tau)),
        TtuLaw::Normal { mean, stddev, floor } => {
            // Draws are clamped at the floor, so a floor above tau always admits.
            if floor > tau {
                1.0
            } else if stddev == 0.0 {
                f64::from(u8::from(mean > tau))
            } else {
                0.5 * erfc((tau - mean) / (stddev * std::f64::consts::SQRT_2))
            }
        }
        TtuLaw::Absent => 0.0,
    }
}

/// Predicted per-content hit probabilities for one cache.
#[derive(Clone, Debug, PartialEq)]
pub struct HitPrediction {
    /// `None` when the cache holds every requested content (no finite root).
    pub solution: Option<CheSolution>,
    pub admit: Vec<f64>,
    pub lru: Vec<f64>,
    pub tlru: Vec<f64>,
}

/// Solves for the characteristic time and evaluates both hit curves. A cache
/// large enough for every requested content predicts certain hits.
pub fn predict_hit_curve(problem: &CheProblem, law: &TtuLaw, tolerance: f64, max_iter: u32) -> Result<HitPrediction> {
    let admit: Vec<f64> = match &problem.ttu_admit_prob {
        Some(p) => p.clone(),
        None => problem.rates.iter().map(|&r| admit_probability(law, r)).collect(),
    };
    let solution = if problem.capacity >= problem.positive_rates() as f64 {
        None
    } else {
        Some(solve_characteristic_time(problem, tolerance, max_iter)?)
    };
    let t = solution.as_ref().map_or(f64::INFINITY, |s| s.t);
    let lru: Vec<f64> = problem.rates.iter().map(|&r| hit_probability_lru(r, t)).collect();
    let tlru = lru.iter().zip(&admit).map(|(h, a)| h * a).collect();
    Ok(HitPrediction {
        solution,
        admit,
        lru,
        tlru,
    })
}
