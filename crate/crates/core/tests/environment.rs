use episteme::{AccessDistribution, AccessSampler, Environment, GroundTruthSchedule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn uniform_candidates_cover_ids_evenly() {
    let sampler = AccessSampler::new(&AccessDistribution::Uniform { k: 100 }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let batches = 100_000;
    let mut counts = vec![0usize; 100];
    for _ in 0..batches {
        let batch = sampler.draw_candidates(10, &mut rng);
        assert_eq!(batch.len(), 10);
        for id in batch {
            counts[id] += 1;
        }
    }
    let draws = (batches * 10) as f64;
    for (id, &c) in counts.iter().enumerate() {
        let f = c as f64 / draws;
        assert!((f - 0.01).abs() <= 0.001, "id {id}: {f}");
    }
}

#[test]
fn zipf_head_ratio_matches_exponent() {
    let s = 1.1;
    let sampler = AccessSampler::new(&AccessDistribution::Zipf { k: 100, s }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counts = vec![0usize; 100];
    for _ in 0..1_000_000 {
        counts[sampler.draw(&mut rng)] += 1;
    }
    let ratio = counts[0] as f64 / counts[1] as f64;
    let expect = 2f64.powf(s);
    assert!((expect - 2.1435).abs() < 1e-4);
    assert!((ratio - expect).abs() <= 0.1, "ratio {ratio}");
    // Popularity decreases with rank on average.
    assert!(counts[0] > counts[9] && counts[9] > counts[99]);
}

#[test]
fn zipf_pmf_is_normalized_power_law() {
    let pmf = AccessDistribution::Zipf { k: 50, s: 1.1 }.pmf();
    let h: f64 = (1..=50).map(|r| (r as f64).powf(-1.1)).sum();
    for (i, p) in pmf.iter().enumerate() {
        let expect = ((i + 1) as f64).powf(-1.1) / h;
        assert!((p - expect).abs() < 1e-15);
    }
    assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn observations_follow_the_truth() {
    let env = Environment::new(
        GroundTruthSchedule::constant(0.8).unwrap(),
        &AccessDistribution::Uniform { k: 1 },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let hits = (0..n)
        .filter(|_| env.observe(0, 1, &mut rng).unwrap().value() == 1.0)
        .count();
    let f = hits as f64 / n as f64;
    assert!((f - 0.8).abs() <= 0.005, "frequency {f}");
}

#[test]
fn same_seed_same_stream() {
    let env = Environment::new(
        GroundTruthSchedule::consensus_shift(),
        &AccessDistribution::Zipf { k: 30, s: 1.1 },
    )
    .unwrap();
    let trace = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (1..=300u64)
            .map(|t| {
                let id = env.sampler().draw(&mut rng);
                (id, env.observe(id, t, &mut rng).unwrap().value())
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(trace(42), trace(42));
    assert_ne!(trace(42), trace(43));
}

#[test]
fn schedule_is_piecewise_constant() {
    let sched = GroundTruthSchedule::consensus_shift();
    for t in [1, 250, 500] {
        assert_eq!(sched.theta_star(7, t).unwrap(), 0.8);
    }
    for t in [501, 502, 2000, 1_000_000] {
        assert_eq!(sched.theta_star(7, t).unwrap(), 0.2);
    }
    assert!(sched.theta_star(0, 0).is_err());

    let sched = GroundTruthSchedule::new(vec![(1, 0.1), (10, 0.5), (20, 0.9)])
        .unwrap()
        .with_override(3, vec![(1, 1.0)])
        .unwrap();
    assert_eq!(sched.theta_star(0, 9).unwrap(), 0.1);
    assert_eq!(sched.theta_star(0, 10).unwrap(), 0.5);
    assert_eq!(sched.theta_star(0, 19).unwrap(), 0.5);
    assert_eq!(sched.theta_star(0, 20).unwrap(), 0.9);
    assert_eq!(sched.theta_star(3, 20).unwrap(), 1.0);
}

#[test]
fn malformed_schedules_are_rejected() {
    assert!(GroundTruthSchedule::new(vec![]).is_err());
    assert!(GroundTruthSchedule::new(vec![(2, 0.5)]).is_err());
    assert!(GroundTruthSchedule::new(vec![(1, 0.5), (1, 0.6)]).is_err());
    assert!(GroundTruthSchedule::new(vec![(1, 0.5), (5, 1.5)]).is_err());
    assert!(AccessSampler::new(&AccessDistribution::Uniform { k: 0 }).is_err());
    assert!(AccessSampler::new(&AccessDistribution::Zipf { k: 5, s: -1.0 }).is_err());
}
