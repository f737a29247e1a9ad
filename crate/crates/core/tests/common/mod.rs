//! Seeded generators shared by the integration suites.
//!
//! Each test target compiles its own copy, so helpers a target does not
//! use would otherwise warn.
#![allow(dead_code)]

use ambiguity_lab::pmf::JointPMF;
use ambiguity_lab::storage::HintEncoder;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random joint table with strictly positive weights, occasionally zeroing
/// one entry to exercise the zero-mass paths.
pub fn random_joint(rng: &mut ChaCha12Rng, x_size: usize, y_size: usize) -> JointPMF {
    loop {
        let mut mass: Vec<f64> = (0..x_size * y_size)
            .map(|_| rng.random_range(0.05..1.0f64).powi(2))
            .collect();
        if rng.random_range(0..4u8) == 0 {
            let k = rng.random_range(0..mass.len());
            mass[k] = 0.0;
        }
        let total: f64 = mass.iter().sum();
        if total <= 0.0 {
            continue;
        }
        for m in &mut mass {
            *m /= total;
        }
        if let Ok(j) = JointPMF::new(x_size, y_size, mass) {
            return j;
        }
    }
}

/// Random stochastic hint encoder: each source pair emits one to three
/// distinct hint pairs with random positive probabilities.
pub fn random_hint_encoder(
    rng: &mut ChaCha12Rng,
    x_size: usize,
    y_size: usize,
    m1_size: usize,
    m2_size: usize,
) -> HintEncoder {
    let mut rows = Vec::with_capacity(x_size * y_size);
    for _ in 0..x_size * y_size {
        let fanout = rng.random_range(1..=3.min(m1_size * m2_size));
        let mut pairs = Vec::new();
        while pairs.len() < fanout {
            let m1 = rng.random_range(0..m1_size) as u32;
            let m2 = rng.random_range(0..m2_size) as u32;
            if !pairs.contains(&(m1, m2)) {
                pairs.push((m1, m2));
            }
        }
        let weights: Vec<f64> = (0..fanout).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let row = pairs
            .into_iter()
            .zip(weights)
            .map(|((m1, m2), w)| (m1, m2, w / total))
            .collect();
        rows.push(row);
    }
    HintEncoder::from_rows(x_size, y_size, m1_size, m2_size, rows)
        .expect("generated rows are valid")
}

/// Random side-information table `map[x * y_size + y]` into `z_size` values.
pub fn random_side_info_map(
    rng: &mut ChaCha12Rng,
    x_size: usize,
    y_size: usize,
    z_size: usize,
) -> Vec<u32> {
    (0..x_size * y_size)
        .map(|_| rng.random_range(0..z_size) as u32)
        .collect()
}
