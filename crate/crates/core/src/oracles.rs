//! Exhaustive reference computations.
//!
//! Everything here recomputes an optimum by enumerating the full strategy
//! space — every guessing order, side-information map, deterministic task
//! encoder, or eavesdropper strategy pair — without reusing the closed-form
//! shortcuts elsewhere in the crate. The point is to have an independent
//! answer that is only feasible on small instances, so every oracle first
//! prices its search space against a [`Budget`] and refuses to start when
//! it does not fit.

use std::collections::BTreeMap;
use std::time::Instant;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::pmf::JointPMF;
use crate::storage::HintEncoder;

/// Enumeration limits: a hard cap on the number of configurations and a
/// wall-clock safety net checked periodically while enumerating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_configs: u64,
    pub max_seconds: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_configs: 1_000_000,
            max_seconds: 60.0,
        }
    }
}

impl Budget {
    pub fn with_max_configs(max_configs: u64) -> Self {
        Budget {
            max_configs,
            ..Budget::default()
        }
    }
}

fn check_configs(context: &str, required: f64, budget: &Budget) -> Result<()> {
    if !(required <= budget.max_configs as f64) {
        return Err(Error::Budget {
            context: context.to_string(),
            required,
            limit: budget.max_configs,
        });
    }
    Ok(())
}

/// Periodic wall-clock guard; checked every `TIME_CHECK_STRIDE` configs,
/// including the very first one.
const TIME_CHECK_STRIDE: u64 = 4096;

fn check_clock(context: &str, start: &Instant, budget: &Budget) -> Result<()> {
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > budget.max_seconds {
        return Err(Error::TimeBudget {
            context: context.to_string(),
            elapsed,
            limit: budget.max_seconds,
        });
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Param(format!("rho must be positive, got {}", rho)));
    }
    Ok(())
}

/// All rank assignments of `x_size` symbols, one vector of 1-based ranks
/// per guessing order, in lexicographic order of the orders.
fn rank_vectors(x_size: usize) -> Vec<Vec<u32>> {
    (0..x_size)
        .permutations(x_size)
        .map(|order| {
            let mut ranks = vec![0u32; x_size];
            for (k, &x) in order.iter().enumerate() {
                ranks[x] = k as u32 + 1;
            }
            ranks
        })
        .collect()
}

/// Advance a fixed-base odometer; returns false after the last config.
fn next_config(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn rank_powers(x_size: usize, rho: f64) -> Vec<f64> {
    (0..=x_size).map(|r| (r as f64).powf(rho)).collect()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Exhaustive minimum of `E[G(X | Y)^rho]` over all guessing functions:
/// every conditioning cell with positive probability tries every
/// permutation independently, `(x_size!)^cells` configurations in total.
pub fn brute_min_guess(j: &JointPMF, rho: f64, budget: &Budget) -> Result<f64> {
    check_rho(rho)?;
    let cells: Vec<usize> = (0..j.y_size())
        .filter(|&y| j.y_marginal(y) > 0.0)
        .collect();
    let per_cell = factorial(j.x_size());
    check_configs(
        "brute_min_guess",
        per_cell.powi(cells.len() as i32),
        budget,
    )?;
    let perms = rank_vectors(j.x_size());
    let pow = rank_powers(j.x_size(), rho);
    let start = Instant::now();
    let mut digits = vec![0usize; cells.len()];
    let mut best = f64::INFINITY;
    let mut count = 0u64;
    loop {
        if count % TIME_CHECK_STRIDE == 0 {
            check_clock("brute_min_guess", &start, budget)?;
        }
        count += 1;
        let mut total = 0.0;
        for (slot, &y) in cells.iter().enumerate() {
            let ranks = &perms[digits[slot]];
            for x in 0..j.x_size() {
                let mass = j.mass(x, y);
                if mass > 0.0 {
                    total += mass * pow[ranks[x] as usize];
                }
            }
        }
        if total < best {
            best = total;
        }
        if !next_config(&mut digits, perms.len()) {
            break;
        }
    }
    Ok(if best.is_finite() { best } else { 0.0 })
}

/// Exhaustive minimum of the refined optimal guessing moment
/// `min_G E[G(X | Y, f(X, Y))^rho]` over all side-information maps
/// `f : X x Y -> {0..z_size-1}`; `z_size^pairs` configurations over the
/// positive-mass source pairs.
pub fn brute_side_info(j: &JointPMF, z_size: usize, rho: f64, budget: &Budget) -> Result<f64> {
    check_rho(rho)?;
    if z_size == 0 {
        return Err(Error::Param("z_size must be at least 1".into()));
    }
    let pairs: Vec<(usize, usize, f64)> = (0..j.x_size())
        .flat_map(|x| (0..j.y_size()).map(move |y| (x, y)))
        .filter_map(|(x, y)| {
            let mass = j.mass(x, y);
            (mass > 0.0).then_some((x, y, mass))
        })
        .collect();
    check_configs(
        "brute_side_info",
        (z_size as f64).powi(pairs.len() as i32),
        budget,
    )?;
    let pow = rank_powers(j.x_size(), rho);
    let start = Instant::now();
    let mut digits = vec![0usize; pairs.len()];
    let mut best = f64::INFINITY;
    let mut count = 0u64;
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); j.y_size() * z_size];
    loop {
        if count % TIME_CHECK_STRIDE == 0 {
            check_clock("brute_side_info", &start, budget)?;
        }
        count += 1;
        for cell in cells.iter_mut() {
            cell.clear();
        }
        for (slot, &(_, y, mass)) in pairs.iter().enumerate() {
            cells[y * z_size + digits[slot]].push(mass);
        }
        let mut total = 0.0;
        for cell in &cells {
            if cell.is_empty() {
                continue;
            }
            let mut sorted = cell.clone();
            sorted.sort_by(|a, b| b.total_cmp(a));
            for (rank0, mass) in sorted.iter().enumerate() {
                total += mass * pow[rank0 + 1];
            }
        }
        if total < best {
            best = total;
        }
        if !next_config(&mut digits, z_size) {
            break;
        }
    }
    Ok(if best.is_finite() { best } else { 0.0 })
}

/// Exhaustive minimum of the list moment `E[|L(Y, M)|^rho]` over all
/// deterministic task encoders into `m_size` messages; `m_size^pairs`
/// configurations over the positive-mass source pairs.
pub fn brute_task_encoder(j: &JointPMF, m_size: usize, rho: f64, budget: &Budget) -> Result<f64> {
    check_rho(rho)?;
    if m_size == 0 {
        return Err(Error::Param("m_size must be at least 1".into()));
    }
    let pairs: Vec<(usize, usize, f64)> = (0..j.x_size())
        .flat_map(|x| (0..j.y_size()).map(move |y| (x, y)))
        .filter_map(|(x, y)| {
            let mass = j.mass(x, y);
            (mass > 0.0).then_some((x, y, mass))
        })
        .collect();
    check_configs(
        "brute_task_encoder",
        (m_size as f64).powi(pairs.len() as i32),
        budget,
    )?;
    let pow = rank_powers(j.x_size(), rho);
    let start = Instant::now();
    let mut digits = vec![0usize; pairs.len()];
    let mut best = f64::INFINITY;
    let mut count = 0u64;
    let mut sizes = vec![0usize; j.y_size() * m_size];
    loop {
        if count % TIME_CHECK_STRIDE == 0 {
            check_clock("brute_task_encoder", &start, budget)?;
        }
        count += 1;
        for s in sizes.iter_mut() {
            *s = 0;
        }
        for (slot, &(_, y, _)) in pairs.iter().enumerate() {
            sizes[y * m_size + digits[slot]] += 1;
        }
        let mut total = 0.0;
        for (slot, &(_, y, mass)) in pairs.iter().enumerate() {
            total += mass * pow[sizes[y * m_size + digits[slot]]];
        }
        if total < best {
            best = total;
        }
        if !next_config(&mut digits, m_size) {
            break;
        }
    }
    Ok(if best.is_finite() { best } else { 0.0 })
}

/// Exhaustive minimum of the genie-aided pair ambiguity
/// `E[min(G1(X | Y, M1), G2(X | Y, M2))^rho]` over all strategy pairs.
/// Each hint cell that receives positive probability tries every
/// permutation; `(x_size!)^(cells1 + cells2)` configurations.
pub fn brute_eve(enc: &HintEncoder, j: &JointPMF, rho: f64, budget: &Budget) -> Result<f64> {
    check_rho(rho)?;
    if enc.x_size() != j.x_size() || enc.y_size() != j.y_size() {
        return Err(Error::Param("encoder shape does not match joint".into()));
    }
    // positive-probability observation cells per hint
    let mut cells1: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    let mut cells2: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    // (cell1 slot, cell2 slot, x, joint mass) per positive kernel entry
    let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let pxy = j.mass(x, y);
            if pxy <= 0.0 {
                continue;
            }
            for &(m1, m2, p) in enc.row(x, y) {
                let n1 = cells1.len();
                let s1 = *cells1.entry((y, m1)).or_insert(n1);
                let n2 = cells2.len();
                let s2 = *cells2.entry((y, m2)).or_insert(n2);
                entries.push((s1, s2, x, pxy * p));
            }
        }
    }
    let per_cell = factorial(j.x_size());
    check_configs(
        "brute_eve",
        per_cell.powi((cells1.len() + cells2.len()) as i32),
        budget,
    )?;
    let perms = rank_vectors(j.x_size());
    let pow = rank_powers(j.x_size(), rho);
    let start = Instant::now();
    let mut digits = vec![0usize; cells1.len() + cells2.len()];
    let split = cells1.len();
    let mut best = f64::INFINITY;
    let mut count = 0u64;
    loop {
        if count % TIME_CHECK_STRIDE == 0 {
            check_clock("brute_eve", &start, budget)?;
        }
        count += 1;
        let mut total = 0.0;
        for &(s1, s2, x, mass) in &entries {
            let r1 = perms[digits[s1]][x];
            let r2 = perms[digits[split + s2]][x];
            total += mass * pow[r1.min(r2) as usize];
        }
        if total < best {
            best = total;
        }
        if !next_config(&mut digits, perms.len()) {
            break;
        }
    }
    Ok(if best.is_finite() { best } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guessing::{ceiled_min_guess_moment, min_guess_moment};
    use crate::storage::{build_guess_encoder, HintVersion, SplitParams};

    fn close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {} ~ {} within {:e}",
            a,
            b,
            tol
        );
    }

    #[test]
    fn exhaustive_guessing_matches_the_sorted_optimum() {
        let uniform = JointPMF::uniform(4);
        close(brute_min_guess(&uniform, 1.0, &Budget::default()).unwrap(), 2.5, 1e-12);
        let skew = JointPMF::from_marginal(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        close(brute_min_guess(&skew, 1.0, &Budget::default()).unwrap(), 2.0, 1e-12);
        for rho in [0.5, 1.0, 2.0] {
            close(
                brute_min_guess(&skew, rho, &Budget::default()).unwrap(),
                min_guess_moment(&skew, rho).unwrap(),
                1e-12,
            );
        }
    }

    #[test]
    fn exhaustive_guessing_with_side_information() {
        let j = JointPMF::from_rows(&[
            vec![0.30, 0.10],
            vec![0.05, 0.15],
            vec![0.25, 0.15],
        ])
        .unwrap();
        close(
            brute_min_guess(&j, 1.0, &Budget::default()).unwrap(),
            min_guess_moment(&j, 1.0).unwrap(),
            1e-12,
        );
    }

    #[test]
    fn residue_maps_are_exhaustively_optimal_on_uniform_four() {
        let j = JointPMF::uniform(4);
        let exhaustive = brute_side_info(&j, 2, 1.0, &Budget::default()).unwrap();
        close(exhaustive, 1.5, 1e-12);
        close(
            exhaustive,
            ceiled_min_guess_moment(&j, 2, 1.0).unwrap(),
            1e-12,
        );
    }

    #[test]
    fn best_two_message_encoder_splits_uniform_alphabets_in_half() {
        close(
            brute_task_encoder(&JointPMF::uniform(4), 2, 1.0, &Budget::default()).unwrap(),
            2.0,
            1e-12,
        );
        close(
            brute_task_encoder(&JointPMF::uniform(3), 2, 1.0, &Budget::default()).unwrap(),
            5.0 / 3.0,
            1e-12,
        );
    }

    #[test]
    fn genie_pair_on_the_binary_pad_pins_the_secret() {
        let j = JointPMF::uniform(2);
        let p = SplitParams::new(2, 1, 1, 2, 2, HintVersion::Guessing);
        let enc = build_guess_encoder(&j, &p, 0).unwrap();
        // 2 cells per hint, 2 orders each: 16 configurations
        close(brute_eve(&enc, &j, 1.0, &Budget::default()).unwrap(), 1.0, 1e-12);
    }

    #[test]
    fn genie_pair_with_constant_hints_reads_both_ends() {
        // hints carry nothing; the pair guesses from opposite ends of the
        // posterior: ranks min(1,3), min(2,2), min(3,1)
        let j = JointPMF::uniform(3);
        let enc = HintEncoder::from_rows(
            3,
            1,
            2,
            2,
            vec![vec![(0, 0, 1.0)]; 3],
        )
        .unwrap();
        close(
            brute_eve(&enc, &j, 1.0, &Budget::default()).unwrap(),
            4.0 / 3.0,
            1e-12,
        );
    }

    #[test]
    fn oversized_searches_are_refused_up_front() {
        let j = JointPMF::uniform(8);
        match brute_min_guess(&j, 1.0, &Budget::with_max_configs(1000)) {
            Err(Error::Budget { required, limit, .. }) => {
                close(required, 40320.0, 1e-6);
                assert_eq!(limit, 1000);
            }
            other => panic!("expected budget refusal, got {:?}", other),
        }
        assert!(brute_side_info(&j, 3, 1.0, &Budget::with_max_configs(100)).is_err());
        assert!(brute_task_encoder(&j, 4, 1.0, &Budget::with_max_configs(100)).is_err());
    }

    #[test]
    fn wall_clock_guard_interrupts_enumeration() {
        let j = JointPMF::uniform(4);
        let strict = Budget {
            max_configs: 1_000_000,
            max_seconds: 0.0,
        };
        assert!(matches!(
            brute_min_guess(&j, 1.0, &strict),
            Err(Error::TimeBudget { .. })
        ));
    }

    #[test]
    fn degenerate_sources_cost_nothing_to_guess() {
        let j = JointPMF::from_marginal(&[1.0, 0.0]).unwrap();
        close(brute_min_guess(&j, 1.0, &Budget::default()).unwrap(), 1.0, 0.0);
        close(brute_side_info(&j, 2, 1.0, &Budget::default()).unwrap(), 1.0, 0.0);
    }
}
