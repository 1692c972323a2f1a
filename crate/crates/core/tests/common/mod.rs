#![allow(dead_code)]

use cdvrp::{euclidean_instance, random_instance, FleetSpec, MetricInstance, RandomSpec, VehicleClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn unit_square(capacity: f64, bound: f64) -> MetricInstance {
    euclidean_instance(
        &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
        &[0.0, 1.0, 1.0, 1.0],
        FleetSpec::single(capacity, bound).unwrap(),
    )
    .unwrap()
}

pub fn line(k: usize, spacing: f64) -> MetricInstance {
    let pts: Vec<_> = (0..=k).map(|i| (i as f64 * spacing, 0.0)).collect();
    let mut demands = vec![1.0; k + 1];
    demands[0] = 0.0;
    euclidean_instance(&pts, &demands, FleetSpec::single(100.0, 100.0).unwrap()).unwrap()
}

/// Seeded random fleet with 1..=`max_classes` classes, capacities in [1, 3]
/// and distance bounds in [1.5, 4] (unit box).
pub fn random_fleet(rng: &mut ChaCha8Rng, max_classes: usize) -> FleetSpec {
    let t = rng.gen_range(1..=max_classes);
    let classes = (0..t)
        .map(|_| VehicleClass::new(rng.gen_range(1.0..=3.0), rng.gen_range(1.5..=4.0)))
        .collect();
    FleetSpec::new(classes).unwrap()
}

/// Seeded instance with `n` vertices in the unit box.
pub fn seeded_instance(seed: u64, n: usize, max_classes: usize) -> MetricInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let fleet = random_fleet(&mut rng, max_classes);
    random_instance(&RandomSpec {
        n,
        seed,
        side: 1.0,
        demand_range: (0.2, 1.0),
        fleet,
    })
    .unwrap()
}

/// `count` instances with `n` drawn from `lo..=hi`.
pub fn corpus(count: usize, lo: usize, hi: usize, max_classes: usize, base_seed: u64) -> Vec<MetricInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    (0..count)
        .map(|i| {
            let n = rng.gen_range(lo..=hi);
            seeded_instance(base_seed.wrapping_mul(1000).wrapping_add(i as u64), n, max_classes)
        })
        .collect()
}
