//! Exact uniform sampling of set partitions and Monte Carlo estimates of the
//! statistics `X` (pairs `j, j + n` sharing a block) and `Y` (block pairs with
//! equal `psi` image) on partitions of `[2n]`.

use num_bigint::RandBigInt;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact_kernel::{bell_numbers, binomial, falling_factorial, Natural};
use crate::oracle::SetPartition;

/// Largest ground set the per-sample bitmask statistics support.
pub const MAX_GROUND_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("ground size {0} exceeds {MAX_GROUND_SIZE}")]
    TooLarge(usize),
    #[error("n must be at least 1")]
    EmptyGround,
    #[error("moment order r = {r} exceeds n = {n}")]
    OrderTooLarge { n: usize, r: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SamplerConfig {
            trials,
            seed,
            workers: 1,
        }
    }

    fn validate(&self) -> Result<(), SamplerError> {
        if self.trials == 0 {
            return Err(SamplerError::NoTrials);
        }
        Ok(())
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl Estimate {
    /// `(estimate - exact) / std_error`; zero when both the error and the gap vanish.
    pub fn z_score(&self, exact: f64) -> f64 {
        let gap = self.estimate - exact;
        if self.std_error == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                gap.signum() * f64::INFINITY
            }
        } else {
            gap / self.std_error
        }
    }
}

/// `splitmix64` finalizer; derives the stream seed of worker `index`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws uniform partitions of `[N]` using exact Bell-number weights.
#[derive(Debug, Clone)]
pub struct PartitionSampler {
    ground_size: usize,
    bells: Vec<Natural>,
    // cumulative[m][k - 1] = sum_{j <= k} C(m - 1, j - 1) B_{m - j}
    cumulative: Vec<Vec<Natural>>,
}

impl PartitionSampler {
    pub fn new(ground_size: usize) -> Self {
        let bells = bell_numbers(ground_size);
        let cumulative = (0..=ground_size)
            .map(|m| {
                let mut acc = Natural::zero();
                (1..=m)
                    .map(|k| {
                        acc += binomial(m - 1, k - 1) * &bells[m - k];
                        acc.clone()
                    })
                    .collect()
            })
            .collect();
        PartitionSampler {
            ground_size,
            bells,
            cumulative,
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SetPartition {
        let n = self.ground_size;
        let mut labels = vec![u32::MAX; n];
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut next = 0u32;
        while let Some(&first) = remaining.first() {
            let m = remaining.len();
            let draw = rng.gen_biguint_below(&self.bells[m]);
            // cumulative[m] ends at B_m, so some entry exceeds the draw.
            let k = self.cumulative[m].partition_point(|c| c <= &draw) + 1;
            labels[first] = next;
            let picks = index::sample(rng, m - 1, k - 1);
            for i in picks.iter() {
                labels[remaining[i + 1]] = next;
            }
            remaining.retain(|&e| labels[e] == u32::MAX);
            next += 1;
        }
        // Blocks are labelled in order of their smallest element, which is
        // already restricted-growth order.
        SetPartition::from_rgs(labels).expect("sampler builds a valid growth string")
    }
}

/// One uniform partition of `[N]` from the given stream.
pub fn sample_partition<R: Rng + ?Sized>(ground_size: usize, rng: &mut R) -> SetPartition {
    PartitionSampler::new(ground_size).sample(rng)
}

/// Per-sample statistics on a partition of `[2n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleStats {
    pub x: usize,
    pub collision: bool,
}

pub fn sample_stats(p: &SetPartition, n: usize) -> SampleStats {
    let rgs = p.rgs();
    let x = (0..n).filter(|&j| rgs[j] == rgs[j + n]).count();
    let low = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut images: Vec<u64> = p
        .block_masks()
        .into_iter()
        .map(|m| (m | m >> n) & low)
        .collect();
    images.sort_unstable();
    let collision = images.windows(2).any(|w| w[0] == w[1]);
    SampleStats { x, collision }
}

/// Exact sums of a per-sample value and its square.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Accumulator {
    count: u64,
    sum: Natural,
    sum_sq: Natural,
}

impl Accumulator {
    fn push(&mut self, value: Natural) {
        self.count += 1;
        self.sum_sq += &value * &value;
        self.sum += value;
    }

    fn merge(&mut self, other: Accumulator) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn estimate(&self) -> Estimate {
        let t = self.count as f64;
        let mean = self.sum.to_f64().unwrap_or(f64::NAN) / t;
        let second = self.sum_sq.to_f64().unwrap_or(f64::NAN) / t;
        let var = (second - mean * mean).max(0.0);
        Estimate {
            estimate: mean,
            std_error: (var / t).sqrt(),
            trials: self.count,
        }
    }
}

fn worker_trials(trials: u64, workers: usize, index: usize) -> u64 {
    let w = workers as u64;
    trials / w + u64::from((index as u64) < trials % w)
}

/// Runs `cfg.trials` samples of `[2n]` split across workers and averages `value`.
fn run_estimate<F>(n: usize, cfg: &SamplerConfig, value: F) -> Result<Estimate, SamplerError>
where
    F: Fn(SampleStats) -> Natural + Sync,
{
    cfg.validate()?;
    if n == 0 {
        return Err(SamplerError::EmptyGround);
    }
    if 2 * n > MAX_GROUND_SIZE {
        return Err(SamplerError::TooLarge(2 * n));
    }
    let sampler = PartitionSampler::new(2 * n);
    let workers = cfg.workers.max(1).min(cfg.trials as usize);
    let run = |index: usize| {
        let mut rng = rng_from_seed(split_seed(cfg.seed, index as u64));
        let mut acc = Accumulator::default();
        for _ in 0..worker_trials(cfg.trials, workers, index) {
            let p = sampler.sample(&mut rng);
            acc.push(value(sample_stats(&p, n)));
        }
        acc
    };
    let parts: Vec<Accumulator> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|i| scope.spawn(move || run(i))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler worker panicked"))
                .collect()
        })
    };
    let mut total = Accumulator::default();
    for part in parts {
        total.merge(part);
    }
    Ok(total.estimate())
}

fn indicator(b: bool) -> Natural {
    Natural::from(u8::from(b))
}

/// Fraction of sampled partitions of `[2n]` with `X = 0`.
pub fn estimate_p_x0(n: usize, cfg: &SamplerConfig) -> Result<Estimate, SamplerError> {
    run_estimate(n, cfg, |s| indicator(s.x == 0))
}

/// Sample mean of `(X)_r`.
pub fn estimate_moment(n: usize, r: usize, cfg: &SamplerConfig) -> Result<Estimate, SamplerError> {
    if r > n {
        return Err(SamplerError::OrderTooLarge { n, r });
    }
    run_estimate(n, cfg, |s| falling_factorial(s.x, r))
}

/// Fraction of sampled partitions of `[2n]` with `Y > 0`.
pub fn estimate_p_collision(n: usize, cfg: &SamplerConfig) -> Result<Estimate, SamplerError> {
    run_estimate(n, cfg, |s| indicator(s.collision))
}

/// Pearson chi-square of `samples` draws over all `B_N` partitions of `[N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformityTest {
    pub cells: usize,
    pub samples: u64,
    pub counts: Vec<u64>,
    pub statistic: f64,
}

impl UniformityTest {
    pub fn degrees_of_freedom(&self) -> usize {
        self.cells.saturating_sub(1)
    }
}

pub fn uniformity_test(ground_size: usize, samples: u64, seed: u64) -> UniformityTest {
    let sampler = PartitionSampler::new(ground_size);
    let all: Vec<SetPartition> = crate::oracle::enumerate_partitions(ground_size).collect();
    let mut counts = vec![0u64; all.len()];
    let mut rng = rng_from_seed(split_seed(seed, 0));
    for _ in 0..samples {
        let p = sampler.sample(&mut rng);
        // Enumeration is lexicographic, so the cell is found by binary search.
        let cell = all.binary_search(&p).expect("sampled partition is enumerated");
        counts[cell] += 1;
    }
    let expected = samples as f64 / all.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    UniformityTest {
        cells: all.len(),
        samples,
        counts,
        statistic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{moment_e_x_r, p_x0_exact, rational_to_f64};

    #[test]
    fn singleton_and_empty() {
        let mut rng = rng_from_seed(7);
        for _ in 0..10 {
            assert_eq!(sample_partition(1, &mut rng).rgs(), &[0]);
            assert_eq!(sample_partition(0, &mut rng).ground_size(), 0);
        }
    }

    #[test]
    fn deterministic_streams() {
        let a = sample_partition(12, &mut rng_from_seed(99));
        let b = sample_partition(12, &mut rng_from_seed(99));
        assert_eq!(a, b);
        let cfg = SamplerConfig::new(500, 3);
        assert_eq!(estimate_p_x0(3, &cfg).unwrap(), estimate_p_x0(3, &cfg).unwrap());
        let multi = SamplerConfig { workers: 3, ..cfg };
        assert_eq!(estimate_p_x0(3, &multi).unwrap(), estimate_p_x0(3, &multi).unwrap());
    }

    #[test]
    fn split_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..100).map(|i| split_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn worker_split_covers_all_trials() {
        for (t, w) in [(10u64, 3usize), (1, 1), (7, 7), (100, 6)] {
            assert_eq!((0..w).map(|i| worker_trials(t, w, i)).sum::<u64>(), t);
        }
    }

    #[test]
    fn frequencies_at_four() {
        let test = uniformity_test(4, 150_000, 11);
        assert_eq!(test.cells, 15);
        let p: f64 = 1.0 / 15.0;
        let sd = (150_000.0 * p * (1.0 - p)).sqrt();
        for &c in &test.counts {
            assert!((c as f64 - 150_000.0 * p).abs() < 4.0 * sd, "{:?}", test.counts);
        }
    }

    #[test]
    fn single_trial_estimates() {
        let cfg = SamplerConfig::new(1, 5);
        let e = estimate_p_x0(2, &cfg).unwrap();
        assert!(e.estimate == 0.0 || e.estimate == 1.0);
        let c = estimate_p_collision(1, &cfg).unwrap();
        assert!(c.estimate == 0.0 || c.estimate == 1.0);
        let m = estimate_moment(4, 0, &SamplerConfig::new(37, 1)).unwrap();
        assert_eq!((m.estimate, m.std_error), (1.0, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            estimate_p_x0(2, &SamplerConfig::new(0, 1)).unwrap_err(),
            SamplerError::NoTrials
        );
        assert!(estimate_moment(2, 3, &SamplerConfig::new(1, 1)).is_err());
        assert!(estimate_p_x0(33, &SamplerConfig::new(1, 1)).is_err());
        assert!(estimate_p_x0(0, &SamplerConfig::new(1, 1)).is_err());
    }

    #[test]
    fn estimates_near_exact() {
        let cfg = SamplerConfig::new(20_000, 2024);
        let e = estimate_p_x0(3, &cfg).unwrap();
        assert!(e.z_score(rational_to_f64(&p_x0_exact(3))).abs() < 4.0);
        let m = estimate_moment(3, 2, &cfg).unwrap();
        assert!(m.z_score(rational_to_f64(&moment_e_x_r(3, 2))).abs() < 4.0);
    }

    #[test]
    fn stats_of_fixed_partitions() {
        let p = SetPartition::from_blocks(4, &[vec![1, 4], vec![2, 3]]).unwrap();
        assert_eq!(sample_stats(&p, 2), SampleStats { x: 0, collision: true });
        let p = SetPartition::from_blocks(4, &[vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(sample_stats(&p, 2), SampleStats { x: 2, collision: false });
    }
}
