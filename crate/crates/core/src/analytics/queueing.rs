use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean waiting time of an M/M/1 queue with arrival rate `sigma` and
/// service rate `service_rate`: `σ / (μ (μ − σ))`.
pub fn mm1_waiting_time(sigma: f64, service_rate: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !(service_rate > 0.0) {
        return Err(Error::Domain(format!(
            "need sigma >= 0 and service rate > 0, got ({sigma}, {service_rate})"
        )));
    }
    if sigma >= service_rate {
        return Err(Error::UnstableQueue { sigma, service_rate });
    }
    Ok(sigma / (service_rate * (service_rate - sigma)))
}

/// Which miss probabilities weight hop `i` of the delay chain.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMode {
    /// Hops `1..=i`: hop `i` only counts if it missed too.
    #[default]
    Inclusive,
    /// Hops `1..i`: hop `i` counts whenever the request reached it.
    Exclusive,
}

/// Expected queueing delay along `hops.len()` caches: each hop's M/M/1 wait
/// weighted by the product of miss probabilities per `mode`.
pub fn chain_delay(hops: &[(f64, f64)], hit_probs: &[f64], mode: ProductMode) -> Result<f64> {
    if hops.len() != hit_probs.len() {
        return Err(Error::Domain(format!(
            "{} hops but {} hit probabilities",
            hops.len(),
            hit_probs.len()
        )));
    }
    if let Some(p) = hit_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Domain(format!("hit probability {p} outside [0, 1]")));
    }
    let mut total = 0.0;
    let mut reach = 1.0;
    for (&(sigma, mu), &h) in hops.iter().zip(hit_probs) {
        let wait = mm1_waiting_time(sigma, mu)?;
        let weight = match mode {
            ProductMode::Inclusive => reach * (1.0 - h),
            ProductMode::Exclusive => reach,
        };
        total += wait * weight;
        reach *= 1.0 - h;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waiting_time_examples() {
        assert_eq!(mm1_waiting_time(1.0, 2.0).unwrap(), 0.5);
        assert_eq!(mm1_waiting_time(0.0, 2.0).unwrap(), 0.0);
        assert!(matches!(mm1_waiting_time(3.0, 3.0), Err(Error::UnstableQueue { .. })));
        assert!(mm1_waiting_time(4.0, 3.0).is_err());
    }

    #[test]
    fn matches_the_unsimplified_form() {
        // (σ/μ) · ((1/μ) / (1 − σ/μ)) as written with the service rate.
        for (s, m) in [(0.3, 1.0), (2.0, 7.5), (9.9, 10.0)] {
            let raw = (s / m) * ((1.0 / m) / (1.0 - s / m));
            assert!((mm1_waiting_time(s, m).unwrap() - raw).abs() < 1e-12 * raw.max(1.0));
        }
    }

    #[test]
    fn chain_examples() {
        assert_eq!(chain_delay(&[(1.0, 2.0)], &[0.5], ProductMode::Inclusive).unwrap(), 0.25);
        let hops = [(1.0, 2.0), (1.0, 3.0), (2.0, 5.0)];
        assert_eq!(chain_delay(&hops, &[1.0; 3], ProductMode::Inclusive).unwrap(), 0.0);
        let plain: f64 = hops.iter().map(|&(s, m)| mm1_waiting_time(s, m).unwrap()).sum();
        let none = chain_delay(&hops, &[0.0; 3], ProductMode::Inclusive).unwrap();
        assert!((none - plain).abs() < 1e-15);
        // Exclusive: first hop always counts.
        assert_eq!(chain_delay(&[(1.0, 2.0)], &[0.5], ProductMode::Exclusive).unwrap(), 0.5);
        assert!(chain_delay(&[(3.0, 3.0)], &[0.0], ProductMode::Inclusive).is_err());
        assert!(chain_delay(&[(1.0, 3.0)], &[], ProductMode::Inclusive).is_err());
    }
}
