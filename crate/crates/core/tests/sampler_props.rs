use cover_census::exact_kernel::Natural;
use cover_census::sampler::{
    estimate_p_collision, estimate_p_x0, rng_from_seed, sample_partition, PartitionSampler, SamplerConfig,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_partition(n in 0usize..40, seed in any::<u64>()) {
        let a = sample_partition(n, &mut rng_from_seed(seed));
        let b = sample_partition(n, &mut rng_from_seed(seed));
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.ground_size(), n);
    }

    #[test]
    fn same_config_same_estimate(n in 1usize..6, seed in any::<u64>(), trials in 1u64..200, workers in 1usize..4) {
        let cfg = SamplerConfig { trials, seed, workers };
        let a = estimate_p_x0(n, &cfg).unwrap();
        prop_assert_eq!(a, estimate_p_x0(n, &cfg).unwrap());
        prop_assert!((0.0..=1.0).contains(&a.estimate));
        prop_assert_eq!(a.trials, trials);
        let c = estimate_p_collision(n, &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.estimate));
    }
}

#[test]
fn block_sizes_follow_exact_weights() {
    // P(block of element 1 has size k) = C(N-1, k-1) B_{N-k} / B_N; at N = 5
    // the weights are 15, 20, 12, 4, 1 out of 52.
    let sampler = PartitionSampler::new(5);
    let mut rng = rng_from_seed(17);
    let mut counts = [0u64; 5];
    let trials = 52_000u64;
    for _ in 0..trials {
        let p = sampler.sample(&mut rng);
        let size = p.rgs().iter().filter(|&&l| l == 0).count();
        counts[size - 1] += 1;
    }
    for (k, &w) in [15u64, 20, 12, 4, 1].iter().enumerate() {
        let p = w as f64 / 52.0;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((counts[k] as f64 - trials as f64 * p).abs() < 4.0 * sd, "{counts:?}");
    }
    assert_eq!(Natural::from(52u8), cover_census::exact_kernel::bell(5));
}
