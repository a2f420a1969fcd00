use crate::{Error, Result};

/// Capacity fixed point of the Che approximation: find `T` with
/// `Σ_k (1 − e^{−ρ_k T}) = capacity`.
#[derive(Clone, Debug, PartialEq)]
pub struct CheProblem {
    pub capacity: f64,
    pub rates: Vec<f64>,
    /// Optional per-content admission probabilities overriding the TTU model.
    pub ttu_admit_prob: Option<Vec<f64>>,
}

impl CheProblem {
    pub fn new(capacity: f64, rates: Vec<f64>) -> Result<Self> {
        if !(capacity > 0.0) || !capacity.is_finite() {
            return Err(Error::Domain(format!("capacity must be positive and finite, got {capacity}")));
        }
        if let Some(r) = rates.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::Domain(format!("rates must be finite and >= 0, got {r}")));
        }
        Ok(Self {
            capacity,
            rates,
            ttu_admit_prob: None,
        })
    }

    pub fn with_admit_prob(mut self, admit: Vec<f64>) -> Result<Self> {
        if admit.len() != self.rates.len() {
            return Err(Error::Domain("admission vector length differs from rate vector".into()));
        }
        if let Some(p) = admit.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("admission probability {p} outside [0, 1]")));
        }
        self.ttu_admit_prob = Some(admit);
        Ok(self)
    }

    pub fn positive_rates(&self) -> usize {
        self.rates.iter().filter(|r| **r > 0.0).count()
    }

    /// A positive root exists iff capacity is below the number of contents
    /// with positive rate.
    pub fn check_well_posed(&self) -> Result<()> {
        let positive = self.positive_rates();
        if self.capacity >= positive as f64 {
            return Err(Error::NoRoot {
                capacity: self.capacity,
                positive,
            });
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Newton,
    /// Newton left its domain; the answer came from bracketing bisection.
    Bisection,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: u32,
    pub t: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheSolution {
    pub t: f64,
    pub iterations: u32,
    pub residual: f64,
    pub converged: bool,
    pub method: SolveMethod,
    /// Iterate 0 is the initial guess.
    pub trace: Vec<IterationRecord>,
}

/// Neumaier-compensated sum.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `F(T) = capacity − Σ_k (1 − e^{−ρ_k T})`, summed over every content.
pub fn che_f(t: f64, problem: &CheProblem) -> f64 {
    let occupied = compensated_sum(problem.rates.iter().map(|&r| -(-r * t).exp_m1()));
    problem.capacity - occupied
}

/// `F'(T) = −Σ_k ρ_k e^{−ρ_k T}`.
pub fn che_derivative(t: f64, problem: &CheProblem) -> f64 {
    -compensated_sum(problem.rates.iter().map(|&r| r * (-r * t).exp()))
}

/// Starting point `capacity / Σ ρ`. It never overshoots the root because
/// `1 − e^{−x} ≤ x`.
pub fn che_initial_guess(problem: &CheProblem) -> Result<f64> {
    let total = compensated_sum(problem.rates.iter().copied());
    if !(total > 0.0) {
        return Err(Error::Domain("initial guess needs at least one positive rate".into()));
    }
    Ok(problem.capacity / total)
}

/// Newton iteration from [`che_initial_guess`], with a bracketing bisection
/// fallback should an iterate leave `(0, ∞)` or the derivative vanish.
pub fn solve_characteristic_time(problem: &CheProblem, tolerance: f64, max_iter: u32) -> Result<CheSolution> {
    if !(tolerance > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tolerance}")));
    }
    problem.check_well_posed()?;
    let mut t = che_initial_guess(problem)?;
    let mut f = che_f(t, problem);
    let mut trace = vec![IterationRecord {
        iteration: 0,
        t,
        residual: f.abs(),
    }];
    let mut it = 0;
    while f.abs() >= tolerance {
        if it >= max_iter {
            return Ok(CheSolution {
                t,
                iterations: it,
                residual: f.abs(),
                converged: false,
                method: SolveMethod::Newton,
                trace,
            });
        }
        let d = che_derivative(t, problem);
        let next = t - f / d;
        if !(d < 0.0) || !(next > 0.0) || !next.is_finite() {
            return bisect(problem, tolerance, t, trace);
        }
        it += 1;
        t = next;
        f = che_f(t, problem);
        trace.push(IterationRecord {
            iteration: it,
            t,
            residual: f.abs(),
        });
    }
    Ok(CheSolution {
        t,
        iterations: it,
        residual: f.abs(),
        converged: true,
        method: SolveMethod::Newton,
        trace,
    })
}

fn bisect(problem: &CheProblem, tolerance: f64, start: f64, mut trace: Vec<IterationRecord>) -> Result<CheSolution> {
    let mut lo = 0.0;
    let mut hi = start.max(f64::MIN_POSITIVE);
    while che_f(hi, problem) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoRoot {
                capacity: problem.capacity,
                positive: problem.positive_rates(),
            });
        }
    }
    let mut it = trace.last().map_or(0, |r| r.iteration);
    let mut mid = 0.5 * (lo + hi);
    let mut f = che_f(mid, problem);
    while f.abs() >= tolerance {
        if mid <= lo || mid >= hi {
            break;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        it += 1;
        mid = 0.5 * (lo + hi);
        f = che_f(mid, problem);
        trace.push(IterationRecord {
            iteration: it,
            t: mid,
            residual: f.abs(),
        });
    }
    Ok(CheSolution {
        t: mid,
        iterations: it,
        residual: f.abs(),
        converged: f.abs() < tolerance,
        method: SolveMethod::Bisection,
        trace,
    })
}
