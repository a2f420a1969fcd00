//! Content catalog, Zipf popularity, Poisson arrivals and TTU stamps.
//!
//! Every random draw goes through a [`ChaCha8Rng`] derived from the
//! experiment seed plus a named stream, so each node's request process is
//! independent of which other nodes exist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::{ContentId, Error, NodeId, Result, SimTime};

/// Floor applied to normal TTU draws when the config gives none.
pub const DEFAULT_TTU_FLOOR: f64 = 0.001;

/// Publisher-side TTU assignment law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum TtuLaw {
    Constant {
        value: f64,
    },
    Normal {
        mean: f64,
        stddev: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
    /// No publisher stamp: content is forwarded but never cached.
    Absent,
}

fn default_floor() -> f64 {
    DEFAULT_TTU_FLOOR
}

impl TtuLaw {
    /// Default normal law for a node seeing `total_rate` requests per second:
    /// mean ten mean inter-request times, stddev a quarter of the mean.
    pub fn default_normal(total_rate: f64) -> TtuLaw {
        let mean = 10.0 / total_rate;
        TtuLaw::Normal {
            mean,
            stddev: mean / 4.0,
            floor: DEFAULT_TTU_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TtuLaw::Constant { value } if !(value > 0.0) => {
                Err(Error::Domain(format!("constant TTU must be positive, got {value}")))
            }
            TtuLaw::Normal { stddev, floor, mean } => {
                if !(floor > 0.0) {
                    return Err(Error::Domain(format!("TTU floor must be positive, got {floor}")));
                }
                if !(stddev >= 0.0) || !stddev.is_finite() || !mean.is_finite() {
                    return Err(Error::Domain(format!(
                        "normal TTU needs finite mean and stddev >= 0, got ({mean}, {stddev})"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A catalog entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ContentMeta {
    pub id: ContentId,
    /// Size in cache-capacity units.
    pub size: u64,
    /// Publisher TTU stamp; `None` means "forward, never store".
    pub publisher_ttu: Option<f64>,
    pub popularity_rank: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorkloadSpec {
    pub catalog_size: usize,
    pub zipf_alpha: f64,
    /// Aggregate exogenous request rate at a node, requests per second.
    pub total_rate: f64,
    pub ttu_law: TtuLaw,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.catalog_size == 0 {
            return Err(Error::Domain("catalog size must be positive".into()));
        }
        if !(self.zipf_alpha > 0.0) {
            return Err(Error::Domain(format!("zipf alpha must be > 0, got {}", self.zipf_alpha)));
        }
        if !(self.total_rate > 0.0) {
            return Err(Error::Domain(format!("total rate must be > 0, got {}", self.total_rate)));
        }
        self.ttu_law.validate()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RequestKind {
    Exogenous,
    Endogenous,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RequestEvent {
    pub time: SimTime,
    pub content: ContentId,
    pub node: NodeId,
    pub kind: RequestKind,
}

/// Unnormalised Zipf weight `rank^-alpha`.
pub fn zipf_weight(rank: u32, alpha: f64) -> Result<f64> {
    if rank == 0 {
        return Err(Error::Domain("zipf rank must be >= 1".into()));
    }
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("zipf alpha must be > 0, got {alpha}")));
    }
    Ok((rank as f64).powf(-alpha))
}

/// Zipf probabilities over a finite catalog of `k` ranks.
pub fn zipf_distribution(k: usize, alpha: f64) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Domain("catalog size must be >= 1".into()));
    }
    let mut weights = (1..=k as u32)
        .map(|r| zipf_weight(r, alpha))
        .collect::<Result<Vec<_>>>()?;
    // Sum smallest-first to keep the rounding error of the normaliser small.
    let total: f64 = weights.iter().rev().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

/// One exponential inter-arrival time for a Poisson process of rate `rate`.
pub fn next_arrival<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64> {
    let exp = Exp::new(rate)
        .ok()
        .filter(|_| rate > 0.0)
        .ok_or_else(|| Error::Domain(format!("arrival rate must be > 0, got {rate}")))?;
    Ok(exp.sample(rng))
}

/// Draws a publisher TTU stamp. Normal draws are clamped at the floor.
pub fn assign_ttu<R: Rng + ?Sized>(law: &TtuLaw, rng: &mut R) -> Option<f64> {
    match *law {
        TtuLaw::Constant { value } => Some(value),
        TtuLaw::Normal { mean, stddev, floor } => {
            let draw = if stddev > 0.0 {
                Normal::new(mean, stddev).map(|n| n.sample(rng)).unwrap_or(mean)
            } else {
                mean
            };
            Some(draw.max(floor))
        }
        TtuLaw::Absent => None,
    }
}

/// 64-bit FNV-1a, used to derive stable stream identifiers from names.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Independent generator for the named stream of an experiment seed.
pub fn stream_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(stream.as_bytes()));
    rng
}

/// Inverse-CDF sampler over a finite popularity vector.
#[derive(Clone, Debug)]
pub struct PopularitySampler {
    cdf: Vec<f64>,
}

impl PopularitySampler {
    pub fn new(probabilities: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ContentId {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        ContentId(idx as u32 + 1)
    }
}

/// The content catalog with its popularity law.
#[derive(Clone, Debug)]
pub struct Catalog {
    contents: Vec<ContentMeta>,
    popularity: Vec<f64>,
    alpha: f64,
    ttu_law: TtuLaw,
}

impl Catalog {
    /// Builds a catalog of `k` unit-or-`content_size` items. Rank equals id;
    /// publisher TTUs are drawn from the `catalog` stream of `seed`.
    pub fn build(k: usize, alpha: f64, content_size: u64, ttu_law: TtuLaw, seed: u64) -> Result<Self> {
        if content_size == 0 {
            return Err(Error::Domain("content size must be >= 1".into()));
        }
        ttu_law.validate()?;
        let popularity = zipf_distribution(k, alpha)?;
        let mut rng = stream_rng(seed, "catalog");
        let contents = (1..=k as u32)
            .map(|id| ContentMeta {
                id: ContentId(id),
                size: content_size,
                publisher_ttu: assign_ttu(&ttu_law, &mut rng),
                popularity_rank: id,
            })
            .collect();
        Ok(Self {
            contents,
            popularity,
            alpha,
            ttu_law,
        })
    }

    pub fn len(&self) -> usize {
        self.contents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contents.is_empty()
    }

    pub fn get(&self, id: ContentId) -> Option<&ContentMeta> {
        if id.0 == 0 {
            return None;
        }
        self.contents.get(id.index())
    }

    pub fn contents(&self) -> &[ContentMeta] {
        &self.contents
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ttu_law(&self) -> &TtuLaw {
        &self.ttu_law
    }
}

/// Exogenous Poisson request process for one node under the IRM: arrivals at
/// `rate`, each addressing a content drawn from the popularity law.
#[derive(Clone, Debug)]
pub struct RequestStream {
    node: NodeId,
    rate: f64,
    sampler: PopularitySampler,
    rng: ChaCha8Rng,
    clock: SimTime,
}

impl RequestStream {
    pub fn new(node: NodeId, stream_name: &str, rate: f64, popularity: &[f64], seed: u64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::Domain(format!("exogenous rate must be > 0, got {rate}")));
        }
        Ok(Self {
            node,
            rate,
            sampler: PopularitySampler::new(popularity),
            rng: stream_rng(seed, &format!("exogenous/{stream_name}")),
            clock: 0.0,
        })
    }

    pub fn node(&self) -> NodeId {
        self.node
    }
}

impl Iterator for RequestStream {
    type Item = RequestEvent;

    fn next(&mut self) -> Option<RequestEvent> {
        let gap = next_arrival(self.rate, &mut self.rng).ok()?;
        self.clock += gap;
        let content = self.sampler.sample(&mut self.rng);
        Some(RequestEvent {
            time: self.clock,
            content,
            node: self.node,
            kind: RequestKind::Exogenous,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zipf_weight_examples() {
        assert_eq!(zipf_weight(1, 0.8).unwrap(), 1.0);
        assert_eq!(zipf_weight(2, 1.0).unwrap(), 0.5);
        assert_eq!(zipf_weight(4, 0.5).unwrap(), 0.5);
        assert!(zipf_weight(0, 1.0).is_err());
        assert!(zipf_weight(3, 0.0).is_err());
        assert!(zipf_weight(3, -0.5).is_err());
    }

    #[test]
    fn zipf_distribution_examples() {
        assert_eq!(zipf_distribution(1, 0.8).unwrap(), vec![1.0]);
        let two = zipf_distribution(2, 1.0).unwrap();
        assert!((two[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((two[1] - 1.0 / 3.0).abs() < 1e-15);

        // Oracle: explicit four-term sum.
        let denom = 1.0 + 2f64.powf(-0.8) + 3f64.powf(-0.8) + 4f64.powf(-0.8);
        let four = zipf_distribution(4, 0.8).unwrap();
        assert!((four[0] - 1.0 / denom).abs() < 1e-15);
        assert!((four[0] - 0.431_133_011_196_797).abs() < 1e-12);
        assert!(zipf_distribution(0, 1.0).is_err());
    }

    #[test]
    fn exponential_moments() {
        let mut rng = stream_rng(7, "moments");
        let n = 1_000_000;
        let mean = (0..n).map(|_| next_arrival(2.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");

        let draws: Vec<f64> = (0..n).map(|_| next_arrival(10.0, &mut rng).unwrap()).collect();
        let m = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 0.01).abs() < 0.0005, "variance {var}");

        assert!(next_arrival(0.0, &mut rng).is_err());
        assert!(next_arrival(-1.0, &mut rng).is_err());
    }

    #[test]
    fn arrivals_are_reproducible() {
        let a: Vec<f64> = {
            let mut rng = stream_rng(99, "x");
            (0..100).map(|_| next_arrival(1.0, &mut rng).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut rng = stream_rng(99, "x");
            (0..100).map(|_| next_arrival(1.0, &mut rng).unwrap()).collect()
        };
        assert_eq!(a, b);
        let mut other = stream_rng(99, "y");
        assert_ne!(a[0], next_arrival(1.0, &mut other).unwrap());
    }

    #[test]
    fn ttu_laws() {
        let mut rng = stream_rng(1, "ttu");
        assert_eq!(assign_ttu(&TtuLaw::Constant { value: 60.0 }, &mut rng), Some(60.0));
        assert_eq!(assign_ttu(&TtuLaw::Absent, &mut rng), None);
        let wide = TtuLaw::Normal {
            mean: 100.0,
            stddev: 1e9,
            floor: 0.001,
        };
        let mut clamped = 0;
        for _ in 0..10_000 {
            let v = assign_ttu(&wide, &mut rng).unwrap();
            assert!(v >= 0.001);
            if v == 0.001 {
                clamped += 1;
            }
        }
        // Roughly half of the draws are negative and land on the floor.
        assert!((4_000..6_000).contains(&clamped), "{clamped}");
    }

    #[test]
    fn default_normal_law() {
        match TtuLaw::default_normal(4.0) {
            TtuLaw::Normal { mean, stddev, floor } => {
                assert_eq!(mean, 2.5);
                assert_eq!(stddev, 0.625);
                assert_eq!(floor, DEFAULT_TTU_FLOOR);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sampler_matches_zipf_top_ranks() {
        let p = zipf_distribution(100, 0.8).unwrap();
        let sampler = PopularitySampler::new(&p);
        let mut rng = stream_rng(2024, "zipf");
        let n = 10_000_000u64;
        let mut counts = [0u64; 100];
        for _ in 0..n {
            counts[sampler.sample(&mut rng).index()] += 1;
        }
        for rank in 0..10 {
            let freq = counts[rank] as f64 / n as f64;
            let se = (p[rank] * (1.0 - p[rank]) / n as f64).sqrt();
            assert!((freq - p[rank]).abs() <= 3.0 * se, "rank {} freq {freq} p {}", rank + 1, p[rank]);
        }
    }

    #[test]
    fn identical_specs_give_identical_streams() {
        let p = zipf_distribution(50, 0.9).unwrap();
        let a: Vec<_> = RequestStream::new(NodeId(1), "edge", 3.0, &p, 11).unwrap().take(500).collect();
        let b: Vec<_> = RequestStream::new(NodeId(1), "edge", 3.0, &p, 11).unwrap().take(500).collect();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn catalog_ranks_are_a_permutation() {
        let cat = Catalog::build(20, 0.8, 1, TtuLaw::default_normal(1.0), 5).unwrap();
        let mut ranks: Vec<u32> = cat.contents().iter().map(|c| c.popularity_rank).collect();
        ranks.sort();
        assert_eq!(ranks, (1..=20).collect::<Vec<_>>());
        assert!(cat.contents().iter().all(|c| c.size >= 1 && c.publisher_ttu.unwrap() > 0.0));
        assert!(Catalog::build(5, 0.8, 0, TtuLaw::Absent, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn zipf_is_a_probability_vector(k in 1usize..100_000, alpha in 0.1f64..2.0) {
            let p = zipf_distribution(k, alpha).unwrap();
            prop_assert_eq!(p.len(), k);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!(p.windows(2).all(|w| w[0] >= w[1]));
            let total: f64 = p.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12, "sum {}", total);
        }

        #[test]
        fn ttu_draws_strictly_positive(mean in -50.0f64..50.0, sd in 0.0f64..100.0, seed in any::<u64>()) {
            let law = TtuLaw::Normal { mean, stddev: sd, floor: 0.001 };
            let mut rng = stream_rng(seed, "p");
            for _ in 0..32 {
                prop_assert!(assign_ttu(&law, &mut rng).unwrap() > 0.0);
            }
        }
    }
}
