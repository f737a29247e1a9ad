//! The two-hint storage scheme and its ambiguity accounting.
//!
//! A secret `X` (with public side information `Y`) is compressed to a value
//! `z` on `c_s * c_1 * c_2` points, split into mixed-radix digits
//! `(v_s, v_1, v_2)` (with `v_s` least significant), and scattered across
//! two hints with a one-time pad `U` uniform on `{0..c_s-1}`:
//!
//! ```text
//! M1 = ((v_s + u) mod c_s) * c_1 + v_1        M2 = u * c_2 + v_2
//! ```
//!
//! A reader holding both hints recovers `u` from `M2`, strips the pad, and
//! is left with `z`; a reader holding one hint sees a perfectly uniform pad
//! digit plus only `v_1` (or `v_2`). The module computes both sides of that
//! trade exactly — the reader's guessing/list ambiguity and a genie-aided
//! single-hint eavesdropper's ambiguity — together with the closed-form
//! bounds that sandwich them.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::solve_min_assignment;
use crate::error::{Error, Result};
use crate::guessing::{
    block_side_info, min_guess_moment, optimal_guesser, GuessingFunction,
};
use crate::oracles::{brute_eve, Budget};
use crate::pmf::{tilt_order, arimoto_conditional_entropy, JointPMF};
use crate::task::{best_v, magnitude_block, rank_split_map};

/// Which hint an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hint {
    M1,
    M2,
}

/// Which construction (and bound family) a split is meant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HintVersion {
    Guessing,
    List,
}

/// Split of the hint alphabets into pad (`c_s`) and per-hint payload
/// (`c_1`, `c_2`) components, together with the declared hint sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitParams {
    pub c_s: u64,
    pub c_1: u64,
    pub c_2: u64,
    pub m1_size: u64,
    pub m2_size: u64,
    pub version: HintVersion,
    /// True when [`choose_split`] swapped the two hint labels so that the
    /// second hint is the smaller one.
    #[serde(default)]
    pub relabeled: bool,
}

impl SplitParams {
    pub fn new(
        c_s: u64,
        c_1: u64,
        c_2: u64,
        m1_size: u64,
        m2_size: u64,
        version: HintVersion,
    ) -> Self {
        SplitParams {
            c_s,
            c_1,
            c_2,
            m1_size,
            m2_size,
            version,
            relabeled: false,
        }
    }

    /// `c_s * c_1 * c_2`, the size of the split alphabet.
    pub fn product(&self) -> u64 {
        self.c_s * self.c_1 * self.c_2
    }
}

/// A single violated split constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Some component that must be a positive integer is zero.
    ZeroComponent { name: &'static str },
    /// Pad alphabet larger than a hint alphabet: `c_s > min(m1, m2)`.
    PadExceedsHints { c_s: u64, limit: u64 },
    /// First-hint payload does not fit: `c_1 > floor(m1 / c_s)`.
    HintOneOverfull { c_1: u64, cap: u64 },
    /// Second-hint payload does not fit: `c_2 > floor(m2 / c_s)`.
    HintTwoOverfull { c_2: u64, cap: u64 },
    /// List version needs `c_s*c_1*c_2 > log2|X| + 2`.
    SplitTooSmallForLists { product: u64, threshold: f64 },
    /// List version needs `m1*m2 > log2|X| + 2`.
    HintsTooSmallForLists { pairs: u64, threshold: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ZeroComponent { name } => {
                write!(f, "{} must be a positive integer", name)
            }
            Violation::PadExceedsHints { c_s, limit } => {
                write!(f, "pad size c_s = {} exceeds the smaller hint alphabet {}", c_s, limit)
            }
            Violation::HintOneOverfull { c_1, cap } => {
                write!(f, "c_1 = {} exceeds floor(m1/c_s) = {}", c_1, cap)
            }
            Violation::HintTwoOverfull { c_2, cap } => {
                write!(f, "c_2 = {} exceeds floor(m2/c_s) = {}", c_2, cap)
            }
            Violation::SplitTooSmallForLists { product, threshold } => {
                write!(
                    f,
                    "list version needs c_s*c_1*c_2 > log2|X| + 2 ({} <= {:.6})",
                    product, threshold
                )
            }
            Violation::HintsTooSmallForLists { pairs, threshold } => {
                write!(
                    f,
                    "list version needs m1*m2 > log2|X| + 2 ({} <= {:.6})",
                    pairs, threshold
                )
            }
        }
    }
}

/// All constraints a split violates for its declared version; empty means
/// the split is admissible over an `x_size`-point secret alphabet.
pub fn validate_params(p: &SplitParams, x_size: usize) -> Vec<Violation> {
    let mut v = Vec::new();
    for (value, name) in [
        (p.c_s, "c_s"),
        (p.c_1, "c_1"),
        (p.c_2, "c_2"),
        (p.m1_size, "m1_size"),
        (p.m2_size, "m2_size"),
    ] {
        if value == 0 {
            v.push(Violation::ZeroComponent { name });
        }
    }
    if !v.is_empty() {
        return v;
    }
    let limit = p.m1_size.min(p.m2_size);
    if p.c_s > limit {
        v.push(Violation::PadExceedsHints { c_s: p.c_s, limit });
    }
    let cap1 = p.m1_size / p.c_s;
    if p.c_1 > cap1 {
        v.push(Violation::HintOneOverfull { c_1: p.c_1, cap: cap1 });
    }
    let cap2 = p.m2_size / p.c_s;
    if p.c_2 > cap2 {
        v.push(Violation::HintTwoOverfull { c_2: p.c_2, cap: cap2 });
    }
    if p.version == HintVersion::List {
        let threshold = (x_size as f64).log2() + 2.0;
        let product = p.product();
        if (product as f64) <= threshold {
            v.push(Violation::SplitTooSmallForLists { product, threshold });
        }
        let pairs = p.m1_size.saturating_mul(p.m2_size);
        if (pairs as f64) <= threshold {
            v.push(Violation::HintsTooSmallForLists { pairs, threshold });
        }
    }
    v
}

/// Pick an admissible guessing-version split for the given hint sizes.
///
/// Hints are relabeled so the second is the smaller (recorded in
/// `relabeled`). If even the smaller hint alphabet exceeds `2^H` (Arimoto
/// entropy of order `1/(1+rho)`), the whole smaller hint becomes the pad:
/// `(m2, 1, 1)`. Otherwise the split aims the product `c_s*c_1*c_2` at the
/// target `min(m1*m2, ceil(2^H))` — enough for the two-hint reader to
/// decode — and, among the splits reaching it, keeps the single-hint
/// payload `c_1 + c_2` minimal (ties: larger pad, then larger `c_1`).
pub fn choose_split(m1_size: u64, m2_size: u64, j: &JointPMF, rho: f64) -> Result<SplitParams> {
    if m1_size == 0 || m2_size == 0 {
        return Err(Error::Param("hint alphabet sizes must be positive".into()));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Param(format!("rho must be positive, got {}", rho)));
    }
    let (m1, m2, relabeled) = if m2_size <= m1_size {
        (m1_size, m2_size, false)
    } else {
        (m2_size, m1_size, true)
    };
    let h = arimoto_conditional_entropy(j, tilt_order(rho))?;
    let two_h = h.exp2();
    if (m2 as f64) > two_h {
        return Ok(SplitParams {
            c_s: m2,
            c_1: 1,
            c_2: 1,
            m1_size: m1,
            m2_size: m2,
            version: HintVersion::Guessing,
            relabeled,
        });
    }
    // Entropy powers land a few ulps off whole numbers (e.g. the uniform
    // bit gives 2^H = 2.0000000000000004); snap before rounding up so the
    // coverage target is not inflated by float noise.
    let entropy_cap = if two_h.is_finite() {
        let snapped = if (two_h - two_h.round()).abs() < 1e-9 * two_h.abs().max(1.0) {
            two_h.round()
        } else {
            two_h.ceil()
        };
        snapped as u64
    } else {
        u64::MAX
    };
    let target = m1.saturating_mul(m2).min(entropy_cap).max(1);
    // Largest product any admissible split can reach; cap the target there
    // so integer rounding can never make the search come back empty.
    let mut reachable = 0u64;
    for c_s in 1..=m2 {
        reachable = reachable.max(c_s * (m1 / c_s) * (m2 / c_s));
    }
    let goal = target.min(reachable);
    let mut best: Option<(u64, u64, u64)> = None;
    let mut best_key = (u64::MAX, 0u64, 0u64); // (c_1+c_2, c_s, c_1): min, max, max
    for c_s in 1..=m2 {
        let cap1 = m1 / c_s;
        let cap2 = m2 / c_s;
        if c_s * cap1 * cap2 < goal {
            continue;
        }
        for c_2 in 1..=cap2 {
            let c_1 = goal.div_ceil(c_s * c_2).max(1);
            if c_1 > cap1 {
                continue;
            }
            let key = (c_1 + c_2, c_s, c_1);
            let better = key.0 < best_key.0
                || (key.0 == best_key.0
                    && (key.1 > best_key.1 || (key.1 == best_key.1 && key.2 > best_key.2)));
            if best.is_none() || better {
                best = Some((c_s, c_1, c_2));
                best_key = key;
            }
        }
    }
    let (c_s, c_1, c_2) = best.expect("c_s = c_1 = c_2 = 1 is always admissible");
    let params = SplitParams {
        c_s,
        c_1,
        c_2,
        m1_size: m1,
        m2_size: m2,
        version: HintVersion::Guessing,
        relabeled,
    };
    debug_assert!(validate_params(&params, j.x_size()).is_empty());
    Ok(params)
}

/// How a built encoder was put together: the split it realizes and the
/// table `z_map[x * y_size + y]` of split-alphabet values that were cut
/// into the mixed-radix digits `(v_s, v_1, v_2)`, `v_s` least significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderStructure {
    pub params: SplitParams,
    pub z_map: Vec<u32>,
}

/// Stochastic map from `(x, y)` to a hint pair `(m1, m2)`.
///
/// Rows are stored sparsely — `rows[x * y_size + y]` lists the pairs of
/// positive kernel probability — because built encoders emit only `c_s`
/// pairs per source symbol while the declared hint alphabets can be much
/// larger.
#[derive(Debug, Clone, PartialEq)]
pub struct HintEncoder {
    x_size: usize,
    y_size: usize,
    m1_size: usize,
    m2_size: usize,
    rows: Vec<Vec<(u32, u32, f64)>>,
    structure: Option<EncoderStructure>,
}

#[derive(Serialize, Deserialize)]
struct HintEncoderWire {
    m1_size: usize,
    m2_size: usize,
    /// Dense kernel indexed `(x, y, m1, m2)`.
    kernel: Vec<Vec<Vec<Vec<f64>>>>,
    structure: Option<EncoderStructure>,
}

impl HintEncoder {
    pub fn from_rows(
        x_size: usize,
        y_size: usize,
        m1_size: usize,
        m2_size: usize,
        rows: Vec<Vec<(u32, u32, f64)>>,
    ) -> Result<Self> {
        if x_size == 0 || y_size == 0 || m1_size == 0 || m2_size == 0 {
            return Err(Error::Param("hint encoder sizes must be positive".into()));
        }
        if rows.len() != x_size * y_size {
            return Err(Error::Param(format!(
                "encoder has {} rows, expected {}",
                rows.len(),
                x_size * y_size
            )));
        }
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            let mut total = 0.0;
            for &(m1, m2, p) in row.iter() {
                if m1 as usize >= m1_size || m2 as usize >= m2_size {
                    return Err(Error::Param(format!(
                        "row {} emits ({}, {}) outside {} x {}",
                        i, m1, m2, m1_size, m2_size
                    )));
                }
                if !p.is_finite() || p <= 0.0 {
                    return Err(Error::Distribution(format!(
                        "row {} carries non-positive probability {}",
                        i, p
                    )));
                }
                total += p;
            }
            if (total - 1.0).abs() > crate::pmf::NORM_TOL {
                return Err(Error::Distribution(format!(
                    "row {} sums to {}",
                    i, total
                )));
            }
            row.sort_by_key(|&(m1, m2, _)| (m1, m2));
            for w in row.windows(2) {
                if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                    return Err(Error::Param(format!(
                        "row {} lists hint pair ({}, {}) twice",
                        i, w[0].0, w[0].1
                    )));
                }
            }
        }
        Ok(HintEncoder {
            x_size,
            y_size,
            m1_size,
            m2_size,
            rows,
            structure: None,
        })
    }

    pub fn from_dense_kernel(
        x_size: usize,
        y_size: usize,
        m1_size: usize,
        m2_size: usize,
        kernel: &[f64],
    ) -> Result<Self> {
        if kernel.len() != x_size * y_size * m1_size * m2_size {
            return Err(Error::Param(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                x_size * y_size * m1_size * m2_size
            )));
        }
        let rows = (0..x_size * y_size)
            .map(|i| {
                let base = i * m1_size * m2_size;
                (0..m1_size * m2_size)
                    .filter_map(|k| {
                        let p = kernel[base + k];
                        (p != 0.0).then(|| ((k / m2_size) as u32, (k % m2_size) as u32, p))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(x_size, y_size, m1_size, m2_size, rows)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn m1_size(&self) -> usize {
        self.m1_size
    }

    pub fn m2_size(&self) -> usize {
        self.m2_size
    }

    /// Positive-probability hint pairs for `(x, y)`, sorted by `(m1, m2)`.
    pub fn row(&self, x: usize, y: usize) -> &[(u32, u32, f64)] {
        &self.rows[x * self.y_size + y]
    }

    pub fn structure(&self) -> Option<&EncoderStructure> {
        self.structure.as_ref()
    }

    pub fn to_json(&self) -> String {
        let kernel = (0..self.x_size)
            .map(|x| {
                (0..self.y_size)
                    .map(|y| {
                        let mut dense = vec![vec![0.0; self.m2_size]; self.m1_size];
                        for &(m1, m2, p) in self.row(x, y) {
                            dense[m1 as usize][m2 as usize] = p;
                        }
                        dense
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&HintEncoderWire {
            m1_size: self.m1_size,
            m2_size: self.m2_size,
            kernel,
            structure: self.structure.clone(),
        })
        .expect("kernel serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: HintEncoderWire = serde_json::from_str(s)?;
        let x_size = wire.kernel.len();
        if x_size == 0 {
            return Err(Error::Distribution("kernel has no x rows".into()));
        }
        let y_size = wire.kernel[0].len();
        let mut flat = Vec::new();
        for row in &wire.kernel {
            if row.len() != y_size {
                return Err(Error::Distribution("ragged kernel y dimension".into()));
            }
            for cell in row {
                if cell.len() != wire.m1_size {
                    return Err(Error::Distribution("ragged kernel m1 dimension".into()));
                }
                for inner in cell {
                    if inner.len() != wire.m2_size {
                        return Err(Error::Distribution("ragged kernel m2 dimension".into()));
                    }
                    flat.extend_from_slice(inner);
                }
            }
        }
        let mut enc =
            Self::from_dense_kernel(x_size, y_size, wire.m1_size, wire.m2_size, &flat)?;
        enc.structure = wire.structure;
        Ok(enc)
    }
}

fn split_digits(z: u64, c_s: u64, c_1: u64) -> (u64, u64, u64) {
    (z % c_s, (z / c_s) % c_1, z / (c_s * c_1))
}

fn checked_u32(value: u64, what: &str) -> Result<u32> {
    u32::try_from(value)
        .map_err(|_| Error::Param(format!("{} = {} exceeds the supported range", what, value)))
}

fn build_from_z_map(j: &JointPMF, p: &SplitParams, z_map: Vec<u32>) -> Result<HintEncoder> {
    let m1_size = usize::try_from(p.m1_size)
        .map_err(|_| Error::Param("m1_size exceeds the supported range".into()))?;
    let m2_size = usize::try_from(p.m2_size)
        .map_err(|_| Error::Param("m2_size exceeds the supported range".into()))?;
    checked_u32(p.m1_size - 1, "largest hint-1 value")?;
    checked_u32(p.m2_size - 1, "largest hint-2 value")?;
    let mut rows = Vec::with_capacity(j.x_size() * j.y_size());
    let pad = 1.0 / p.c_s as f64;
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let z = z_map[x * j.y_size() + y] as u64;
            let (v_s, v_1, v_2) = split_digits(z, p.c_s, p.c_1);
            let mut row = Vec::with_capacity(p.c_s as usize);
            for u in 0..p.c_s {
                let m1 = ((v_s + u) % p.c_s) * p.c_1 + v_1;
                let m2 = u * p.c_2 + v_2;
                row.push((checked_u32(m1, "hint-1 value")?, checked_u32(m2, "hint-2 value")?, pad));
            }
            rows.push(row);
        }
    }
    let mut enc = HintEncoder::from_rows(j.x_size(), j.y_size(), m1_size, m2_size, rows)?;
    enc.structure = Some(EncoderStructure {
        params: *p,
        z_map,
    });
    Ok(enc)
}

fn split_product(p: &SplitParams) -> Result<usize> {
    usize::try_from(p.product())
        .map_err(|_| Error::Param("c_s*c_1*c_2 exceeds the supported range".into()))
}

/// Build the guessing-version encoder: `z` is the optimal-guesser rank
/// residue `(rank - 1) mod (c_s*c_1*c_2)`, split and padded as in the
/// module description. The `seed` parameter is accepted for interface
/// uniformity with the heuristic searches; construction is deterministic.
pub fn build_guess_encoder(j: &JointPMF, p: &SplitParams, _seed: u64) -> Result<HintEncoder> {
    if p.version != HintVersion::Guessing {
        return Err(Error::Param(
            "build_guess_encoder needs guessing-version split parameters".into(),
        ));
    }
    let violations = validate_params(p, j.x_size());
    if !violations.is_empty() {
        return Err(Error::SplitRejected(violations));
    }
    let product = split_product(p)?;
    let g = optimal_guesser(&j.posterior_family());
    let f = block_side_info(&g, product)?;
    let z_map: Vec<u32> = (0..j.x_size() * j.y_size())
        .map(|i| f.value(i / j.y_size(), i % j.y_size()))
        .collect();
    build_from_z_map(j, p, z_map)
}

/// Build the list-version encoder: `z` is the rank-splitting task message
/// (residue modulo the best modulus plus binary-magnitude block) over the
/// split alphabet, then padded exactly like the guessing version.
pub fn build_list_encoder(j: &JointPMF, p: &SplitParams, _seed: u64) -> Result<HintEncoder> {
    if p.version != HintVersion::List {
        return Err(Error::Param(
            "build_list_encoder needs list-version split parameters".into(),
        ));
    }
    let violations = validate_params(p, j.x_size());
    if !violations.is_empty() {
        return Err(Error::SplitRejected(violations));
    }
    let product = split_product(p)?;
    let v = best_v(product, j.x_size())?;
    let g = optimal_guesser(&j.posterior_family());
    let map = rank_split_map(&g, v);
    build_from_z_map(j, p, map)
}

/// Accumulated joint mass per extended conditioning cell `(y, m1, m2)`.
/// Entries keep the per-symbol mass (possibly zero when
/// `include_zero_mass` is set, so rank assignment stays total).
fn extended_cells(
    enc: &HintEncoder,
    j: &JointPMF,
    include_zero_mass: bool,
) -> Result<BTreeMap<(usize, u32, u32), Vec<(usize, f64)>>> {
    if enc.x_size() != j.x_size() || enc.y_size() != j.y_size() {
        return Err(Error::Param(format!(
            "encoder shape ({} x {}) does not match joint ({} x {})",
            enc.x_size(),
            enc.y_size(),
            j.x_size(),
            j.y_size()
        )));
    }
    let mut cells: BTreeMap<(usize, u32, u32), Vec<(usize, f64)>> = BTreeMap::new();
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let mass = j.mass(x, y);
            if mass <= 0.0 && !include_zero_mass {
                continue;
            }
            for &(m1, m2, p) in enc.row(x, y) {
                cells
                    .entry((y, m1, m2))
                    .or_default()
                    .push((x, mass * p));
            }
        }
    }
    Ok(cells)
}

fn check_rho(rho: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Param(format!("rho must be positive, got {}", rho)));
    }
    Ok(rho)
}

/// The two-hint reader's exact guessing ambiguity: the optimal guessing
/// moment of `X` given `(Y, M1, M2)`.
pub fn bob_guess_ambiguity(enc: &HintEncoder, j: &JointPMF, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let cells = extended_cells(enc, j, false)?;
    let mut total = 0.0;
    for entries in cells.values() {
        let mut sorted = entries.clone();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (rank0, &(_, mass)) in sorted.iter().enumerate() {
            if mass > 0.0 {
                total += mass * ((rank0 + 1) as f64).powf(rho);
            }
        }
    }
    Ok(total)
}

/// The two-hint reader's exact list ambiguity `E[|L(Y, M1, M2)|^rho]`,
/// where a list collects every source symbol of positive joint mass that
/// can emit the observed hint pair.
pub fn bob_list_ambiguity(enc: &HintEncoder, j: &JointPMF, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let cells = extended_cells(enc, j, false)?;
    let mut total = 0.0;
    for entries in cells.values() {
        let size = entries.iter().filter(|&&(_, mass)| mass > 0.0).count() as f64;
        for &(_, mass) in entries {
            if mass > 0.0 {
                total += mass * size.powf(rho);
            }
        }
    }
    Ok(total)
}

/// Joint distribution of `X` against `(Y, M_k)` for a single hint,
/// flattened `y * mk_size + mk`.
pub fn hint_joint(enc: &HintEncoder, j: &JointPMF, hint: Hint) -> Result<JointPMF> {
    if enc.x_size() != j.x_size() || enc.y_size() != j.y_size() {
        return Err(Error::Param("encoder shape does not match joint".into()));
    }
    let mk_size = match hint {
        Hint::M1 => enc.m1_size(),
        Hint::M2 => enc.m2_size(),
    };
    let cond = j.y_size() * mk_size;
    let mut mass = vec![0.0; j.x_size() * cond];
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let pxy = j.mass(x, y);
            if pxy <= 0.0 {
                continue;
            }
            for &(m1, m2, p) in enc.row(x, y) {
                let mk = match hint {
                    Hint::M1 => m1,
                    Hint::M2 => m2,
                } as usize;
                mass[x * cond + y * mk_size + mk] += pxy * p;
            }
        }
    }
    // Accumulation drift over many sparse entries can step a few ulps past
    // the strict construction tolerance; scale the residual away.
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        for q in &mut mass {
            *q /= total;
        }
    }
    JointPMF::new(j.x_size(), cond, mass)
}

/// Optimal guessing moment of `X` for an observer holding `Y` and one hint.
pub fn per_hint_min_moment(enc: &HintEncoder, j: &JointPMF, rho: f64, hint: Hint) -> Result<f64> {
    min_guess_moment(&hint_joint(enc, j, hint)?, rho)
}

/// Moment-optimal guesser for an observer holding `Y` and one hint; cells
/// flatten as `y * mk_size + mk`.
pub fn per_hint_optimal_guesser(
    enc: &HintEncoder,
    j: &JointPMF,
    hint: Hint,
) -> Result<GuessingFunction> {
    Ok(optimal_guesser(&hint_joint(enc, j, hint)?.posterior_family()))
}

fn check_pair_shapes(
    enc: &HintEncoder,
    j: &JointPMF,
    g1: &GuessingFunction,
    g2: &GuessingFunction,
) -> Result<()> {
    if g1.x_size() != j.x_size()
        || g2.x_size() != j.x_size()
        || g1.cell_count() != j.y_size() * enc.m1_size()
        || g2.cell_count() != j.y_size() * enc.m2_size()
    {
        return Err(Error::Param(
            "strategy pair shapes do not match the encoder's hint alphabets".into(),
        ));
    }
    Ok(())
}

/// Ambiguity of a genie-aided eavesdropper holding a fixed strategy pair:
/// `E[min(G1(X | Y, M1), G2(X | Y, M2))^rho]`, the genie handing Eve
/// whichever hint serves her better on each realization.
pub fn eve_pair_ambiguity(
    enc: &HintEncoder,
    j: &JointPMF,
    rho: f64,
    g1: &GuessingFunction,
    g2: &GuessingFunction,
) -> Result<f64> {
    check_rho(rho)?;
    check_pair_shapes(enc, j, g1, g2)?;
    let mut total = 0.0;
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let pxy = j.mass(x, y);
            if pxy <= 0.0 {
                continue;
            }
            for &(m1, m2, p) in enc.row(x, y) {
                let r1 = g1.rank(y * enc.m1_size() + m1 as usize, x);
                let r2 = g2.rank(y * enc.m2_size() + m2 as usize, x);
                total += pxy * p * (r1.min(r2) as f64).powf(rho);
            }
        }
    }
    Ok(total)
}

/// The feasible Eve value used in reports and sweeps: the pair ambiguity of
/// the two per-hint moment-optimal guessers. Always an upper bound on the
/// true minimum over pairs.
pub fn eve_feasible_pair_ambiguity(enc: &HintEncoder, j: &JointPMF, rho: f64) -> Result<f64> {
    let g1 = per_hint_optimal_guesser(enc, j, Hint::M1)?;
    let g2 = per_hint_optimal_guesser(enc, j, Hint::M2)?;
    eve_pair_ambiguity(enc, j, rho, &g1, &g2)
}

/// Exact best response for one side of the strategy pair: in every
/// conditioning cell of the chosen hint, assigning ranks to symbols is a
/// minimum-cost assignment with
/// `cost(x, k) = sum_pairs mass * min(k, other_rank)^rho`.
fn best_response(
    enc: &HintEncoder,
    j: &JointPMF,
    rho: f64,
    other: &GuessingFunction,
    target: Hint,
) -> Result<GuessingFunction> {
    let x_size = j.x_size();
    let (t_size, o_size) = match target {
        Hint::M1 => (enc.m1_size(), enc.m2_size()),
        Hint::M2 => (enc.m2_size(), enc.m1_size()),
    };
    // cell -> per-symbol cost rows, built over positive-mass entries only
    let mut groups: BTreeMap<(usize, u32), Vec<(usize, u32, f64)>> = BTreeMap::new();
    for x in 0..x_size {
        for y in 0..j.y_size() {
            let pxy = j.mass(x, y);
            if pxy <= 0.0 {
                continue;
            }
            for &(m1, m2, p) in enc.row(x, y) {
                let (mt, mo) = match target {
                    Hint::M1 => (m1, m2),
                    Hint::M2 => (m2, m1),
                };
                groups.entry((y, mt)).or_default().push((x, mo, pxy * p));
            }
        }
    }
    let mut cells = vec![Vec::new(); j.y_size() * t_size];
    for cell in cells.iter_mut() {
        *cell = (1..=x_size as u32).collect();
    }
    for ((y, mt), entries) in groups {
        let mut costs = vec![vec![0.0f64; x_size]; x_size];
        for &(x, mo, mass) in &entries {
            let other_rank = other.rank(y * o_size + mo as usize, x);
            for k in 0..x_size {
                costs[x][k] += mass * (((k + 1) as u32).min(other_rank) as f64).powf(rho);
            }
        }
        let assign = solve_min_assignment(&costs);
        let ranks: Vec<u32> = assign.iter().map(|&k| k as u32 + 1).collect();
        cells[y * t_size + mt as usize] = ranks;
    }
    GuessingFunction::new(cells)
}

/// Heuristic minimization of the pair ambiguity by alternating exact best
/// responses, with seeded random restarts. Restart 0 always starts from
/// the per-hint optimal pair, so the result never exceeds
/// [`eve_feasible_pair_ambiguity`]; later restarts start from uniformly
/// random second-hint strategies drawn from the seeded generator.
pub fn eve_ambiguity_alternating(
    enc: &HintEncoder,
    j: &JointPMF,
    rho: f64,
    restarts: u32,
    seed: u64,
) -> Result<f64> {
    check_rho(rho)?;
    if restarts == 0 {
        return Err(Error::Param("restarts must be at least 1".into()));
    }
    let g1_opt = per_hint_optimal_guesser(enc, j, Hint::M1)?;
    let g2_opt = per_hint_optimal_guesser(enc, j, Hint::M2)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for restart in 0..restarts {
        let mut g2 = if restart == 0 {
            g2_opt.clone()
        } else {
            let mut cells = Vec::with_capacity(j.y_size() * enc.m2_size());
            for _ in 0..j.y_size() * enc.m2_size() {
                let mut ranks: Vec<u32> = (1..=j.x_size() as u32).collect();
                ranks.shuffle(&mut rng);
                cells.push(ranks);
            }
            GuessingFunction::new(cells)?
        };
        let mut g1 = g1_opt.clone();
        let mut obj = eve_pair_ambiguity(enc, j, rho, &g1, &g2)?;
        for _ in 0..64 {
            g1 = best_response(enc, j, rho, &g2, Hint::M1)?;
            g2 = best_response(enc, j, rho, &g1, Hint::M2)?;
            let next = eve_pair_ambiguity(enc, j, rho, &g1, &g2)?;
            if next >= obj - 1e-14 * obj.abs().max(1.0) {
                obj = obj.min(next);
                break;
            }
            obj = next;
        }
        best = best.min(obj);
    }
    Ok(best)
}

/// Closed-form sandwich for the genie-aided eavesdropper:
/// lower `(1 + ln|X|)^(-rho) * 2^(rho * (H - log2(c_1 + c_2)))`,
/// upper `min(min(m1, m2)^rho * bob_value, 2^(rho * H))` where `bob_value`
/// is the reader's ambiguity of the matching version.
pub fn eve_bounds(
    p: &SplitParams,
    j: &JointPMF,
    rho: f64,
    bob_value: f64,
) -> Result<(f64, f64)> {
    check_rho(rho)?;
    if !bob_value.is_finite() || bob_value < 0.0 {
        return Err(Error::Param(format!(
            "bob_value must be a finite nonnegative ambiguity, got {}",
            bob_value
        )));
    }
    let h = arimoto_conditional_entropy(j, tilt_order(rho))?;
    let payload = (p.c_1 + p.c_2) as f64;
    let lower = (1.0 + (j.x_size() as f64).ln()).powf(-rho)
        * (rho * (h - payload.log2())).exp2();
    let smaller_hint = p.m1_size.min(p.m2_size) as f64;
    let upper = (smaller_hint.powf(rho) * bob_value).min((rho * h).exp2());
    Ok((lower, upper))
}

/// Closed-form sandwich for the two-hint reader, as
/// `(achievability_rhs, converse_rhs)`.
///
/// Guessing version: the built encoder satisfies
/// `ambiguity < 1 + 2^(rho * (H - log2(c_s*c_1*c_2) + 1))`, and no encoder
/// beats `max((1 + ln|X|)^(-rho) * 2^(rho * (H - log2(m1*m2))), 1)`.
///
/// List version: the target is
/// `1 + 2^(rho * (H - log2(c_s*c_1*c_2 - log2|X| - 2) + 2))` — returned as
/// infinity when the inner difference is non-positive, making the
/// achievability side vacuous — and no encoder beats
/// `max(2^(rho * (H - log2(m1*m2))), 1)`.
pub fn bob_bounds(p: &SplitParams, j: &JointPMF, rho: f64) -> Result<(f64, f64)> {
    check_rho(rho)?;
    let h = arimoto_conditional_entropy(j, tilt_order(rho))?;
    let pairs = (p.m1_size as f64) * (p.m2_size as f64);
    let product = p.product() as f64;
    match p.version {
        HintVersion::Guessing => {
            let ach = 1.0 + (rho * (h - product.log2() + 1.0)).exp2();
            let conv = ((1.0 + (j.x_size() as f64).ln()).powf(-rho)
                * (rho * (h - pairs.log2())).exp2())
            .max(1.0);
            Ok((ach, conv))
        }
        HintVersion::List => {
            let margin = product - (j.x_size() as f64).log2() - 2.0;
            let ach = if margin > 0.0 {
                1.0 + (rho * (h - margin.log2() + 2.0)).exp2()
            } else {
                f64::INFINITY
            };
            let conv = (rho * (h - pairs.log2())).exp2().max(1.0);
            Ok((ach, conv))
        }
    }
}

/// Largest total-variation distance, over all source pairs `(x, y)`,
/// between the padded hint-1 digit `floor(m1 / c_1)` and the uniform
/// distribution on `{0..c_s-1}`. Exactly zero for correctly built
/// encoders. Errors on encoders without structure records.
pub fn pad_secrecy_deviation(enc: &HintEncoder) -> Result<f64> {
    let structure = enc.structure().ok_or_else(|| {
        Error::Param("pad secrecy is only defined for built encoders with structure".into())
    })?;
    let c_s = structure.params.c_s;
    let c_1 = structure.params.c_1;
    let mut worst = 0.0f64;
    for x in 0..enc.x_size() {
        for y in 0..enc.y_size() {
            let mut seen: BTreeMap<u64, f64> = BTreeMap::new();
            for &(m1, _, p) in enc.row(x, y) {
                *seen.entry(m1 as u64 / c_1).or_insert(0.0) += p;
            }
            let uniform = 1.0 / c_s as f64;
            let mut tv = 0.0;
            for digit in 0..c_s {
                tv += (seen.get(&digit).copied().unwrap_or(0.0) - uniform).abs();
            }
            worst = worst.max(tv / 2.0);
        }
    }
    Ok(worst)
}

/// Append to the first hint the magnitude block of the reader's optimal
/// rank: `M1' = (M1, floor(log2 G*(X | Y, M1, M2)))`, flattened with `M1`
/// most significant. The augmented reader's list ambiguity never exceeds
/// the original reader's guessing ambiguity.
pub fn augment_with_list_hint(enc: &HintEncoder, j: &JointPMF) -> Result<HintEncoder> {
    let cells = extended_cells(enc, j, true)?;
    // rank of every (x, cell) combination under the reader's optimal order
    let mut ranks: BTreeMap<(usize, u32, u32, usize), u32> = BTreeMap::new();
    for (&(y, m1, m2), entries) in &cells {
        let mut sorted = entries.clone();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (rank0, &(x, _)) in sorted.iter().enumerate() {
            ranks.insert((y, m1, m2, x), rank0 as u32 + 1);
        }
    }
    let blocks = magnitude_block(j.x_size() as u64)? as u64 + 1;
    let new_m1_size = u64::try_from(enc.m1_size())
        .unwrap()
        .checked_mul(blocks)
        .ok_or_else(|| Error::Param("augmented hint alphabet exceeds the supported range".into()))?;
    checked_u32(new_m1_size - 1, "largest augmented hint value")?;
    let mut rows = Vec::with_capacity(enc.x_size() * enc.y_size());
    for x in 0..enc.x_size() {
        for y in 0..enc.y_size() {
            let row = enc
                .row(x, y)
                .iter()
                .map(|&(m1, m2, p)| {
                    let rank = ranks[&(y, m1, m2, x)];
                    let block = magnitude_block(rank as u64).expect("ranks are >= 1");
                    (m1 * blocks as u32 + block, m2, p)
                })
                .collect();
            rows.push(row);
        }
    }
    HintEncoder::from_rows(
        enc.x_size(),
        enc.y_size(),
        new_m1_size as usize,
        enc.m2_size(),
        rows,
    )
}

/// Dense joint distribution of `X` against the full observation
/// `(Y, M1, M2)`, flattened `(y * m1_size + m1) * m2_size + m2`. Intended
/// for cross-checks on small instances; rejected when the table would
/// exceed `max_cells` entries.
pub fn extended_joint(enc: &HintEncoder, j: &JointPMF, max_cells: u64) -> Result<JointPMF> {
    let cond = (j.y_size() as u64)
        .checked_mul(enc.m1_size() as u64)
        .and_then(|v| v.checked_mul(enc.m2_size() as u64))
        .and_then(|v| v.checked_mul(j.x_size() as u64));
    match cond {
        Some(cells) if cells <= max_cells => {}
        _ => {
            return Err(Error::Budget {
                context: "extended_joint".into(),
                required: j.x_size() as f64
                    * j.y_size() as f64
                    * enc.m1_size() as f64
                    * enc.m2_size() as f64,
                limit: max_cells,
            });
        }
    }
    let cond = j.y_size() * enc.m1_size() * enc.m2_size();
    let mut mass = vec![0.0; j.x_size() * cond];
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let pxy = j.mass(x, y);
            if pxy <= 0.0 {
                continue;
            }
            for &(m1, m2, p) in enc.row(x, y) {
                mass[x * cond
                    + (y * enc.m1_size() + m1 as usize) * enc.m2_size()
                    + m2 as usize] += pxy * p;
            }
        }
    }
    let total: f64 = mass.iter().sum();
    if total > 0.0 {
        for q in &mut mass {
            *q /= total;
        }
    }
    JointPMF::new(j.x_size(), cond, mass)
}

/// How the eavesdropper side of a report should be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EveMode {
    /// Bounds plus the cheap feasible pair value.
    Formula,
    /// Alternating best-response search with restarts.
    Heuristic,
    /// Exhaustive minimum over strategy pairs (budget permitting).
    Exact,
}

/// The four closed-form bounds evaluated for one instance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundValues {
    pub bob_achievability: f64,
    pub bob_converse: f64,
    pub eve_lower: f64,
    pub eve_upper: f64,
}

/// Everything the CLI prints and logs for one evaluated scheme.
#[derive(Debug, Clone, Serialize)]
pub struct AmbiguityReport {
    pub bob_guess: f64,
    pub bob_list: f64,
    /// Exhaustive minimum over Eve strategy pairs; present only in exact
    /// mode within budget.
    pub eve_exact: Option<f64>,
    /// Value of a concrete (feasible) Eve strategy pair: the alternating
    /// heuristic in heuristic/exact mode, the per-hint optimal pair
    /// otherwise.
    pub eve_upper_feasible: f64,
    /// Closed-form eavesdropper lower bound.
    pub eve_lower_formula: f64,
    pub bounds: BoundValues,
}

impl AmbiguityReport {
    /// The best available estimate of the true Eve ambiguity.
    pub fn eve_value(&self) -> f64 {
        self.eve_exact.unwrap_or(self.eve_upper_feasible)
    }
}

/// Build an encoder for `p` and evaluate both readers' ambiguities and all
/// closed-form bounds. `restarts`/`seed` drive the heuristic Eve search;
/// `budget` gates the exact one.
pub fn evaluate_scheme(
    j: &JointPMF,
    p: &SplitParams,
    rho: f64,
    mode: EveMode,
    restarts: u32,
    seed: u64,
    budget: &Budget,
) -> Result<(HintEncoder, AmbiguityReport)> {
    check_rho(rho)?;
    let enc = match p.version {
        HintVersion::Guessing => build_guess_encoder(j, p, seed)?,
        HintVersion::List => build_list_encoder(j, p, seed)?,
    };
    let bob_guess = bob_guess_ambiguity(&enc, j, rho)?;
    let bob_list = bob_list_ambiguity(&enc, j, rho)?;
    let (bob_achievability, bob_converse) = bob_bounds(p, j, rho)?;
    let bob_for_eve = match p.version {
        HintVersion::Guessing => bob_guess,
        HintVersion::List => bob_list,
    };
    let (eve_lower, eve_upper) = eve_bounds(p, j, rho, bob_for_eve)?;
    let eve_upper_feasible = match mode {
        EveMode::Formula => eve_feasible_pair_ambiguity(&enc, j, rho)?,
        EveMode::Heuristic | EveMode::Exact => {
            eve_ambiguity_alternating(&enc, j, rho, restarts, seed)?
        }
    };
    let eve_exact = match mode {
        EveMode::Exact => Some(brute_eve(&enc, j, rho, budget)?),
        _ => None,
    };
    let report = AmbiguityReport {
        bob_guess,
        bob_list,
        eve_exact,
        eve_upper_feasible,
        eve_lower_formula: eve_lower,
        bounds: BoundValues {
            bob_achievability,
            bob_converse,
            eve_lower,
            eve_upper,
        },
    };
    Ok((enc, report))
}
