//! Blocklength sweeps: run the two-hint construction over i.i.d.
//! extensions of a per-letter source at fixed hint rates and watch the
//! eavesdropper's normalized exponent approach its single-letter value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::Budget;
use crate::pmf::{tilt_order, arimoto_conditional_entropy, JointPMF};
use crate::storage::{
    bob_guess_ambiguity, bob_list_ambiguity, build_guess_encoder, choose_split,
    eve_ambiguity_alternating, eve_bounds, eve_feasible_pair_ambiguity,
};

/// Hint rates in bits per source letter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

impl RatePair {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        for (r, name) in [(r1, "r1"), (r2, "r2")] {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Param(format!(
                    "rate {} must be finite and nonnegative, got {}",
                    name, r
                )));
            }
        }
        Ok(RatePair { r1, r2 })
    }
}

/// Single-letter eavesdropper exponent at a rate pair.
///
/// When the rates jointly cover the source (`r1 + r2 > H`), the normalized
/// ambiguity exponent converges to `rho * min(r1, r2, H)`; when they fall
/// short, no positive exponent is achievable. The boundary marker is
/// reported only at exact floating-point equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrivacyExponent {
    Value(f64),
    NegInf,
    Boundary,
}

impl std::fmt::Display for PrivacyExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrivacyExponent::Value(v) => write!(f, "{:.8e}", v),
            PrivacyExponent::NegInf => write!(f, "NEG_INF"),
            PrivacyExponent::Boundary => write!(f, "BOUNDARY"),
        }
    }
}

/// The exponent the sweep converges toward, from the per-letter source.
pub fn privacy_exponent(j: &JointPMF, rates: RatePair, rho: f64) -> Result<PrivacyExponent> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Param(format!("rho must be positive, got {}", rho)));
    }
    let h = arimoto_conditional_entropy(j, tilt_order(rho))?;
    let sum = rates.r1 + rates.r2;
    if sum == h {
        Ok(PrivacyExponent::Boundary)
    } else if sum < h {
        Ok(PrivacyExponent::NegInf)
    } else {
        Ok(PrivacyExponent::Value(rho * rates.r1.min(rates.r2).min(h)))
    }
}

/// Hint alphabet sizes at blocklength `n`: `ceil(2^(n * r))`, with values
/// a hair under an integer snapped to it before rounding up. Sizes beyond
/// `max_size` are refused.
pub fn message_sizes(n: u32, rates: RatePair, max_size: u64) -> Result<(u64, u64)> {
    let size_of = |r: f64| -> Result<u64> {
        let raw = (n as f64 * r).exp2();
        let snapped = if (raw - raw.round()).abs() < 1e-9 {
            raw.round()
        } else {
            raw.ceil()
        };
        if !(snapped <= max_size as f64) {
            return Err(Error::Budget {
                context: format!("message_sizes at n = {}", n),
                required: snapped,
                limit: max_size,
            });
        }
        Ok((snapped as u64).max(1))
    };
    Ok((size_of(rates.r1)?, size_of(rates.r2)?))
}

/// One blocklength of a sweep. `exp_lo` and `exp_hi` are the normalized
/// exponents `log2(value) / n` of the closed-form eavesdropper lower bound
/// and of the feasible eavesdropper strategy pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub m1: u64,
    pub m2: u64,
    pub bob_guess: f64,
    pub bob_list: f64,
    pub eve_lo: f64,
    pub eve_hi: f64,
    pub exp_lo: f64,
    pub exp_hi: f64,
}

/// A sweep and whether it stopped early on a budget limit.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub target: PrivacyExponent,
    pub truncated: bool,
}

/// Run the guessing-version construction at blocklengths `1..=n_max`.
///
/// Each blocklength extends the per-letter source i.i.d., sizes the hints
/// from the rates, picks a split, builds the encoder, and records both
/// readers' ambiguities together with the eavesdropper sandwich. `eve_hi`
/// is the per-hint-optimal feasible pair value unless
/// `alternating_restarts` asks for the heuristic search. The budget's
/// `max_configs` caps both the extended joint table size and the hint
/// alphabet sizes; hitting either cap truncates the sweep instead of
/// failing it.
pub fn sweep(
    per_letter: &JointPMF,
    rates: RatePair,
    rho: f64,
    n_max: u32,
    seed: u64,
    alternating_restarts: Option<u32>,
    budget: &Budget,
) -> Result<SweepOutcome> {
    if n_max == 0 {
        return Err(Error::Param("n_max must be at least 1".into()));
    }
    let target = privacy_exponent(per_letter, rates, rho)?;
    let mut rows = Vec::with_capacity(n_max as usize);
    let mut truncated = false;
    for n in 1..=n_max {
        let j = match per_letter.iid_extension(n, budget.max_configs) {
            Ok(j) => j,
            Err(Error::Budget { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let (m1, m2) = match message_sizes(n, rates, budget.max_configs) {
            Ok(sizes) => sizes,
            Err(Error::Budget { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let p = choose_split(m1, m2, &j, rho)?;
        let enc = build_guess_encoder(&j, &p, seed)?;
        let bob_guess = bob_guess_ambiguity(&enc, &j, rho)?;
        let bob_list = bob_list_ambiguity(&enc, &j, rho)?;
        let (eve_lo, _) = eve_bounds(&p, &j, rho, bob_guess)?;
        let eve_hi = match alternating_restarts {
            Some(restarts) => eve_ambiguity_alternating(&enc, &j, rho, restarts, seed)?,
            None => eve_feasible_pair_ambiguity(&enc, &j, rho)?,
        };
        rows.push(SweepRow {
            n,
            m1,
            m2,
            bob_guess,
            bob_list,
            eve_lo,
            eve_hi,
            exp_lo: eve_lo.log2() / n as f64,
            exp_hi: eve_hi.log2() / n as f64,
        });
    }
    Ok(SweepOutcome {
        rows,
        target,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn exponent_is_the_smallest_rate_when_rates_cover_the_source() {
        let j = JointPMF::uniform(2);
        match privacy_exponent(&j, RatePair::new(0.6, 0.8).unwrap(), 1.0).unwrap() {
            PrivacyExponent::Value(v) => close(v, 0.6, 1e-12),
            other => panic!("expected a value, got {:?}", other),
        }
        match privacy_exponent(&j, RatePair::new(0.9, 0.7).unwrap(), 2.0).unwrap() {
            PrivacyExponent::Value(v) => close(v, 1.4, 1e-12),
            other => panic!("expected a value, got {:?}", other),
        }
    }

    #[test]
    fn exponent_collapses_when_rates_fall_short() {
        let j = JointPMF::uniform(2);
        assert_eq!(
            privacy_exponent(&j, RatePair::new(0.2, 0.2).unwrap(), 1.0).unwrap(),
            PrivacyExponent::NegInf
        );
    }

    #[test]
    fn exponent_marks_the_exact_boundary() {
        // a deterministic secret has exactly zero entropy in floating point
        let j = JointPMF::from_marginal(&[1.0, 0.0]).unwrap();
        assert_eq!(
            privacy_exponent(&j, RatePair::new(0.0, 0.0).unwrap(), 1.0).unwrap(),
            PrivacyExponent::Boundary
        );
    }

    #[test]
    fn exponent_caps_at_the_source_entropy() {
        let j = JointPMF::uniform(2);
        match privacy_exponent(&j, RatePair::new(1.5, 1.5).unwrap(), 1.0).unwrap() {
            PrivacyExponent::Value(v) => close(v, 1.0, 1e-12),
            other => panic!("expected a value, got {:?}", other),
        }
    }

    #[test]
    fn exponent_formatting_uses_sentinels() {
        assert_eq!(PrivacyExponent::NegInf.to_string(), "NEG_INF");
        assert_eq!(PrivacyExponent::Boundary.to_string(), "BOUNDARY");
        assert_eq!(PrivacyExponent::Value(0.6).to_string(), "6.00000000e-1");
    }

    #[test]
    fn hint_sizes_round_up_to_whole_messages() {
        let rates = RatePair::new(0.6, 0.6).unwrap();
        assert_eq!(message_sizes(12, rates, 1_000_000).unwrap(), (148, 148));
        let mixed = RatePair::new(0.5, 0.25).unwrap();
        assert_eq!(message_sizes(4, mixed, 1_000_000).unwrap(), (4, 2));
        // integral powers of two stay exact instead of rounding up past
        assert_eq!(message_sizes(2, mixed, 1_000_000).unwrap(), (2, 2));
        assert!(matches!(
            message_sizes(40, rates, 1_000_000),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn short_sweep_over_the_uniform_bit() {
        let j = JointPMF::uniform(2);
        let rates = RatePair::new(0.6, 0.6).unwrap();
        let out = sweep(&j, rates, 1.0, 3, 0, None, &Budget::default()).unwrap();
        assert!(!out.truncated);
        assert_eq!(out.rows.len(), 3);
        let sizes: Vec<(u64, u64)> = out.rows.iter().map(|r| (r.m1, r.m2)).collect();
        assert_eq!(sizes, vec![(2, 2), (3, 3), (4, 4)]);
        match out.target {
            PrivacyExponent::Value(v) => close(v, 0.6, 1e-12),
            other => panic!("expected a value, got {:?}", other),
        }
        for row in &out.rows {
            assert!(row.bob_guess >= 1.0 - 1e-12);
            assert!(row.bob_list >= 1.0 - 1e-12);
            assert!(
                row.eve_lo <= row.eve_hi + 1e-9,
                "n = {}: lower {} above feasible {}",
                row.n,
                row.eve_lo,
                row.eve_hi
            );
            assert!(row.exp_hi >= row.exp_lo - 1e-9);
        }
    }

    #[test]
    fn sweeps_truncate_when_the_extension_outgrows_the_budget() {
        let j = JointPMF::uniform(2);
        let rates = RatePair::new(0.6, 0.6).unwrap();
        let tight = Budget {
            max_configs: 100,
            max_seconds: 60.0,
        };
        let out = sweep(&j, rates, 1.0, 12, 0, None, &tight).unwrap();
        assert!(out.truncated);
        assert_eq!(out.rows.len(), 6); // 2^7 = 128 cells breaks the cap
    }

    #[test]
    fn alternating_search_never_worsens_the_feasible_value() {
        let j = JointPMF::from_marginal(&[0.5, 0.3, 0.2]).unwrap();
        let rates = RatePair::new(0.8, 0.8).unwrap();
        let plain = sweep(&j, rates, 1.0, 2, 0, None, &Budget::default()).unwrap();
        let searched = sweep(&j, rates, 1.0, 2, 0, Some(2), &Budget::default()).unwrap();
        for (a, b) in plain.rows.iter().zip(searched.rows.iter()) {
            assert!(b.eve_hi <= a.eve_hi + 1e-12);
        }
    }
}
