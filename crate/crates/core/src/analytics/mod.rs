//! Closed-form models: the Che approximation for the characteristic time of
//! an LRU-like cache, the resulting hit probabilities, and the M/M/1 delay
//! chain along a path of caches.

mod che;
mod hit;
mod queueing;

pub use che::{
    che_derivative, che_f, che_initial_guess, solve_characteristic_time, CheProblem, CheSolution, IterationRecord,
    SolveMethod,
};
pub use hit::{admit_probability, hit_probability_lru, hit_probability_tlru, predict_hit_curve, HitPrediction};
pub use queueing::{chain_delay, mm1_waiting_time, ProductMode};
