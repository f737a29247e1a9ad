//! Cross-module invariants on randomized instances: entropy laws, the
//! guessing/list reductions, bound sandwiches, and the scheme's secrecy
//! properties. The heavyweight oracle corpora live in the acceptance
//! suite; these tests aim for breadth on small instances.

mod common;

use ambiguity_lab::guessing::{
    arikan_bounds, ceiled_min_guess_moment, guess_moment, min_guess_moment, optimal_guesser,
    refine_with_side_info, SideInfoFunction,
};
use ambiguity_lab::oracles::{brute_task_encoder, Budget};
use ambiguity_lab::pmf::{
    arimoto_conditional_entropy, renyi_entropy, tilt_order, JointPMF,
};
use ambiguity_lab::storage::{
    bob_guess_ambiguity, bob_list_ambiguity, build_guess_encoder, choose_split,
    eve_ambiguity_alternating, eve_feasible_pair_ambiguity, pad_secrecy_deviation,
    per_hint_min_moment, Hint,
};
use ambiguity_lab::task::{best_v, encoder_from_guesser, guesser_from_lists, list_moment};
use proptest::prelude::*;
use rand::Rng;

const RHOS: [f64; 3] = [0.5, 1.0, 2.0];

fn joint_strategy(max_x: usize, max_y: usize) -> impl Strategy<Value = JointPMF> {
    (2..=max_x, 1..=max_y)
        .prop_flat_map(|(x, y)| {
            prop::collection::vec(1u32..1000, x * y).prop_map(move |w| {
                let total: f64 = w.iter().map(|&v| v as f64).sum();
                let mass = w.iter().map(|&v| v as f64 / total).collect();
                JointPMF::new(x, y, mass).expect("positive weights normalize")
            })
        })
}

proptest! {
    #[test]
    fn renyi_entropy_is_bounded_and_decreasing_in_order(
        w in prop::collection::vec(1u32..1000, 2..8),
        a1 in 0.05f64..0.9,
        gap in 0.01f64..0.09,
    ) {
        let total: f64 = w.iter().map(|&v| v as f64).sum();
        let p: Vec<f64> = w.iter().map(|&v| v as f64 / total).collect();
        let a2 = a1 + gap;
        let h1 = renyi_entropy(&p, a1).unwrap();
        let h2 = renyi_entropy(&p, a2).unwrap();
        prop_assert!(h1 >= -1e-12);
        prop_assert!(h1 <= (p.len() as f64).log2() + 1e-9);
        prop_assert!(h1 >= h2 - 1e-9, "order {} gave {}, order {} gave {}", a1, h1, a2, h2);
    }

    #[test]
    fn conditioning_never_increases_entropy(j in joint_strategy(5, 3), alpha in 0.05f64..0.95) {
        let conditional = arimoto_conditional_entropy(&j, alpha).unwrap();
        let marginal: Vec<f64> = (0..j.x_size())
            .map(|x| (0..j.y_size()).map(|y| j.mass(x, y)).sum())
            .collect();
        let unconditional = renyi_entropy(&marginal, alpha).unwrap();
        prop_assert!(conditional <= unconditional + 1e-9);
        prop_assert!(conditional >= -1e-12);
    }

    #[test]
    fn optimal_guessing_moment_sits_inside_the_entropy_sandwich(
        j in joint_strategy(6, 2),
        rho_idx in 0usize..3,
    ) {
        let rho = RHOS[rho_idx];
        let moment = min_guess_moment(&j, rho).unwrap();
        let (lower, upper) = arikan_bounds(&j, rho).unwrap();
        prop_assert!(lower <= moment + 1e-9, "lower {} > moment {}", lower, moment);
        prop_assert!(moment <= upper + 1e-9, "moment {} > upper {}", moment, upper);
        // no guesser beats the posterior-sorted one
        let g = optimal_guesser(&j.posterior_family());
        prop_assert!((guess_moment(&g, &j, rho).unwrap() - moment).abs() <= 1e-12);
    }

    #[test]
    fn residue_side_information_achieves_the_ceiling_moment(
        j in joint_strategy(6, 2),
        z in 2usize..4,
        rho_idx in 0usize..3,
    ) {
        let rho = RHOS[rho_idx];
        let g = optimal_guesser(&j.posterior_family());
        let f = ambiguity_lab::guessing::block_side_info(&g, z).unwrap();
        let refined = refine_with_side_info(&j, &f).unwrap();
        let achieved = min_guess_moment(&refined, rho).unwrap();
        let ceiling = ceiled_min_guess_moment(&j, z, rho).unwrap();
        prop_assert!((achieved - ceiling).abs() <= 1e-9);
    }

    #[test]
    fn extension_entropy_is_additive(j in joint_strategy(4, 2), alpha in 0.1f64..0.9) {
        let ext = j.iid_extension(2, 100_000).unwrap();
        let h1 = arimoto_conditional_entropy(&j, alpha).unwrap();
        let h2 = arimoto_conditional_entropy(&ext, alpha).unwrap();
        prop_assert!((h2 - 2.0 * h1).abs() <= 1e-9);
    }

    #[test]
    fn adjoined_pad_adds_exactly_its_own_entropy(
        j in joint_strategy(4, 2),
        c in 2usize..5,
        rho_idx in 0usize..3,
    ) {
        let alpha = tilt_order(RHOS[rho_idx]);
        let padded = j.adjoin_uniform(c).unwrap();
        let before = arimoto_conditional_entropy(&j, alpha).unwrap();
        let after = arimoto_conditional_entropy(&padded, alpha).unwrap();
        prop_assert!((after - before - (c as f64).log2()).abs() <= 1e-9);
    }
}

/// The achievability analysis leans on `ceil(t)^rho < 1 + 2^rho * t^rho`
/// for positive `t`; exercise the scalar inequality densely.
#[test]
fn ceiling_powers_stay_under_the_doubling_bound() {
    let mut rng = common::rng(0xCE11);
    for _ in 0..10_000 {
        let t: f64 = rng.random_range(1e-6..100.0);
        for rho in RHOS {
            let lhs = t.ceil().powf(rho);
            let rhs = 1.0 + (2.0 * t).powf(rho);
            assert!(
                lhs < rhs + 1e-12,
                "t = {}, rho = {}: {} >= {}",
                t,
                rho,
                lhs,
                rhs
            );
        }
    }
}

/// Any side-information map refines at least as well as no map, and never
/// better than the full-information floor `E[ceil(G*/z)^rho]`.
#[test]
fn random_side_information_respects_the_refinement_floor() {
    let mut rng = common::rng(0x51DE);
    for trial in 0..150 {
        let x = 2 + (trial % 4);
        let y = 1 + (trial % 2);
        let j = common::random_joint(&mut rng, x, y);
        for z in [2usize, 3] {
            let map = common::random_side_info_map(&mut rng, x, y, z);
            let f = SideInfoFunction::new(x, y, z, map).unwrap();
            let refined = refine_with_side_info(&j, &f).unwrap();
            for rho in RHOS {
                let refined_moment = min_guess_moment(&refined, rho).unwrap();
                let floor = ceiled_min_guess_moment(&j, z, rho).unwrap();
                let plain = min_guess_moment(&j, rho).unwrap();
                assert!(refined_moment >= floor - 1e-9);
                assert!(refined_moment <= plain + 1e-9);
            }
        }
    }
}

/// Walking lists in increasing cardinality loses at most `|M|^rho` against
/// the list moment, stochastic encoders included.
#[test]
fn list_walking_guesser_stays_within_the_message_factor() {
    let mut rng = common::rng(0x7A5C);
    for trial in 0..200 {
        let x = 2 + (trial % 4);
        let y = 1 + (trial % 2);
        let m = 2 + (trial % 3);
        let j = common::random_joint(&mut rng, x, y);
        // random kernel, stochastic on half the trials
        let kernel: Vec<f64> = if trial % 2 == 0 {
            (0..x * y)
                .flat_map(|_| {
                    let mut row = vec![0.0; m];
                    row[rng.random_range(0..m)] = 1.0;
                    row
                })
                .collect()
        } else {
            (0..x * y)
                .flat_map(|_| {
                    let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
                    let t: f64 = w.iter().sum();
                    w.into_iter().map(|v| v / t).collect::<Vec<_>>()
                })
                .collect()
        };
        let enc = ambiguity_lab::task::TaskEncoder::new(x, y, m, kernel).unwrap();
        let g = guesser_from_lists(&enc, &j).unwrap();
        for rho in RHOS {
            let gm = guess_moment(&g, &j, rho).unwrap();
            let lm = list_moment(&enc, &j, rho).unwrap();
            assert!(
                gm <= (m as f64).powf(rho) * lm + 1e-9,
                "trial {}, rho {}: {} > {}",
                trial,
                rho,
                gm,
                (m as f64).powf(rho) * lm
            );
        }
    }
}

/// Rank splitting turns a guessing moment into a list moment: the encoder
/// built from the optimal guesser has list moment at most the ceiling
/// moment, and with the best modulus it meets the closed-form target.
#[test]
fn rank_splitting_converts_guessing_into_lists() {
    let mut rng = common::rng(0xBE57);
    for trial in 0..200 {
        let x = 3 + (trial % 4);
        let y = 1 + (trial % 2);
        let j = common::random_joint(&mut rng, x, y);
        let g = optimal_guesser(&j.posterior_family());
        let bits = (x as f64).log2().floor() as usize + 1;
        for v in 1..=x.min(3) {
            let m_size = v * ((x.div_ceil(v) as f64).log2().floor() as usize + 1);
            let enc = encoder_from_guesser(&g, &j, v, m_size).unwrap();
            for rho in RHOS {
                let lm = list_moment(&enc, &j, rho).unwrap();
                let ceiling = ceiled_min_guess_moment(&j, v, rho).unwrap();
                assert!(lm <= ceiling + 1e-9, "v = {}: {} > {}", v, lm, ceiling);
            }
        }
        // the one-residue regime: lists never beat plain guessing
        let enc1 = encoder_from_guesser(&g, &j, 1, bits).unwrap();
        for rho in RHOS {
            assert!(
                list_moment(&enc1, &j, rho).unwrap()
                    <= min_guess_moment(&j, rho).unwrap() + 1e-9
            );
        }
    }
}

/// With the best residue modulus for the message budget, the list moment
/// obeys `1 + 2^rho * E[G^rho] * (m/(log2|X|+1) - 1)^(-rho)` and the
/// exhaustive optimum over deterministic encoders is never far below.
#[test]
fn best_modulus_encoders_meet_the_budgeted_target() {
    let mut rng = common::rng(0x0B57);
    let budget = Budget::default();
    for trial in 0..60 {
        let x = 4 + (trial % 2); // 4 or 5 symbols
        let j = common::random_joint(&mut rng, x, 1);
        let m_size = 4usize;
        let denom = m_size as f64 / ((x as f64).log2() + 1.0) - 1.0;
        assert!(denom > 0.0);
        let v = best_v(m_size, x).unwrap();
        let g = optimal_guesser(&j.posterior_family());
        let enc = encoder_from_guesser(&g, &j, v, m_size).unwrap();
        for rho in RHOS {
            let lm = list_moment(&enc, &j, rho).unwrap();
            let target =
                1.0 + 2f64.powf(rho) * min_guess_moment(&j, rho).unwrap() * denom.powf(-rho);
            assert!(lm <= target + 1e-9, "trial {}: {} > {}", trial, lm, target);
            let optimum = brute_task_encoder(&j, m_size, rho, &budget).unwrap();
            assert!(optimum <= lm + 1e-9);
            assert!(
                lm <= target.max(optimum) + 1e-9,
                "constructed encoder should sit between the optimum and the target"
            );
        }
    }
}

/// End-to-end scheme sanity on random sources: the reader outperforms
/// every single-hint observer, the pad digit is exactly uniform, and the
/// heuristic search never loses to the plain feasible pair.
#[test]
fn built_schemes_keep_their_secrecy_shape() {
    let mut rng = common::rng(0x5EC2);
    for trial in 0..40 {
        let x = 3 + (trial % 3);
        let y = 1 + (trial % 2);
        let j = common::random_joint(&mut rng, x, y);
        let m1 = rng.random_range(2..=6u64);
        let m2 = rng.random_range(2..=6u64);
        for rho in RHOS {
            let p = choose_split(m1, m2, &j, rho).unwrap();
            let enc = build_guess_encoder(&j, &p, trial as u64).unwrap();
            assert_eq!(pad_secrecy_deviation(&enc).unwrap(), 0.0);
            let bob = bob_guess_ambiguity(&enc, &j, rho).unwrap();
            let lists = bob_list_ambiguity(&enc, &j, rho).unwrap();
            let h1 = per_hint_min_moment(&enc, &j, rho, Hint::M1).unwrap();
            let h2 = per_hint_min_moment(&enc, &j, rho, Hint::M2).unwrap();
            assert!(bob <= h1 + 1e-9 && bob <= h2 + 1e-9);
            assert!(lists >= 1.0 - 1e-12 && bob >= 1.0 - 1e-12);
            let feasible = eve_feasible_pair_ambiguity(&enc, &j, rho).unwrap();
            let searched = eve_ambiguity_alternating(&enc, &j, rho, 2, 11).unwrap();
            assert!(searched <= feasible + 1e-12);
            assert!(feasible <= h1.min(h2) + 1e-9);
        }
    }
}
