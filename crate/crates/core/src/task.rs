//! Task encoders, candidate lists, and the two reductions between list
//! ambiguity and guessing ambiguity.
//!
//! A task encoder emits a message `M` from `(X, Y)` through a stochastic
//! kernel; the receiver, knowing `(y, m)`, is left with the candidate list
//! of all symbols that could have produced the message. List performance is
//! measured by `E[|L|^rho]` and converts to and from guessing performance:
//!
//! * any encoder induces a guesser that walks the lists in increasing order
//!   of cardinality, losing at most a factor `|M|^rho`;
//! * any guesser induces a deterministic encoder that publishes the rank
//!   residue modulo `v` together with the binary-magnitude block of the
//!   remaining rank, turning a guessing moment into a list moment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guessing::GuessingFunction;
use crate::pmf::{JointPMF, NORM_TOL};

/// Stochastic encoder `P(m | x, y)` with a dense kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskEncoder {
    x_size: usize,
    y_size: usize,
    m_size: usize,
    /// Indexed `(x * y_size + y) * m_size + m`.
    kernel: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TaskEncoderWire {
    m_size: usize,
    kernel: Vec<Vec<Vec<f64>>>,
}

impl TaskEncoder {
    pub fn new(x_size: usize, y_size: usize, m_size: usize, kernel: Vec<f64>) -> Result<Self> {
        if x_size == 0 || y_size == 0 || m_size == 0 {
            return Err(Error::Param("task encoder sizes must be positive".into()));
        }
        if kernel.len() != x_size * y_size * m_size {
            return Err(Error::Distribution(format!(
                "kernel has {} entries, expected {}",
                kernel.len(),
                x_size * y_size * m_size
            )));
        }
        for x in 0..x_size {
            for y in 0..y_size {
                let base = (x * y_size + y) * m_size;
                let row = &kernel[base..base + m_size];
                let mut total = 0.0;
                for &p in row {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::Distribution(format!(
                            "kernel row (x={}, y={}) has invalid entry {}",
                            x, y, p
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > NORM_TOL {
                    return Err(Error::Distribution(format!(
                        "kernel row (x={}, y={}) sums to {}",
                        x, y, total
                    )));
                }
            }
        }
        Ok(TaskEncoder {
            x_size,
            y_size,
            m_size,
            kernel,
        })
    }

    /// Deterministic encoder from a message table `map[x * y_size + y]`.
    pub fn deterministic(x_size: usize, y_size: usize, m_size: usize, map: &[u32]) -> Result<Self> {
        if map.len() != x_size * y_size {
            return Err(Error::Param(format!(
                "message table has {} entries, expected {}",
                map.len(),
                x_size * y_size
            )));
        }
        let mut kernel = vec![0.0; x_size * y_size * m_size];
        for (i, &m) in map.iter().enumerate() {
            if m as usize >= m_size {
                return Err(Error::Param(format!(
                    "message {} out of range 0..{}",
                    m, m_size
                )));
            }
            kernel[i * m_size + m as usize] = 1.0;
        }
        Self::new(x_size, y_size, m_size, kernel)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn m_size(&self) -> usize {
        self.m_size
    }

    pub fn kernel(&self, x: usize, y: usize, m: usize) -> f64 {
        self.kernel[(x * self.y_size + y) * self.m_size + m]
    }

    pub fn is_deterministic(&self) -> bool {
        self.kernel.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    pub fn to_json(&self) -> String {
        let kernel = (0..self.x_size)
            .map(|x| {
                (0..self.y_size)
                    .map(|y| (0..self.m_size).map(|m| self.kernel(x, y, m)).collect())
                    .collect()
            })
            .collect();
        serde_json::to_string(&TaskEncoderWire {
            m_size: self.m_size,
            kernel,
        })
        .expect("kernel serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: TaskEncoderWire = serde_json::from_str(s)?;
        let x_size = wire.kernel.len();
        if x_size == 0 {
            return Err(Error::Distribution("kernel has no x rows".into()));
        }
        let y_size = wire.kernel[0].len();
        let mut flat = Vec::with_capacity(x_size * y_size * wire.m_size);
        for row in &wire.kernel {
            if row.len() != y_size {
                return Err(Error::Distribution("ragged kernel y dimension".into()));
            }
            for cell in row {
                if cell.len() != wire.m_size {
                    return Err(Error::Distribution("ragged kernel m dimension".into()));
                }
                flat.extend_from_slice(cell);
            }
        }
        Self::new(x_size, y_size, wire.m_size, flat)
    }
}

/// Candidate lists `L[y][m] = { x : P(x,y) * P(m|x,y) > 0 }`, each sorted by
/// symbol index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListFamily {
    y_size: usize,
    m_size: usize,
    lists: Vec<Vec<u32>>,
}

impl ListFamily {
    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn m_size(&self) -> usize {
        self.m_size
    }

    pub fn list(&self, y: usize, m: usize) -> &[u32] {
        &self.lists[y * self.m_size + m]
    }
}

fn check_encoder_shape(enc: &TaskEncoder, j: &JointPMF) -> Result<()> {
    if enc.x_size() != j.x_size() || enc.y_size() != j.y_size() {
        return Err(Error::Param(format!(
            "encoder shape ({} x {}) does not match joint ({} x {})",
            enc.x_size(),
            enc.y_size(),
            j.x_size(),
            j.y_size()
        )));
    }
    Ok(())
}

/// Candidate lists of an encoder under a joint source.
pub fn lists_of(enc: &TaskEncoder, j: &JointPMF) -> Result<ListFamily> {
    check_encoder_shape(enc, j)?;
    let mut lists = vec![Vec::new(); j.y_size() * enc.m_size()];
    for y in 0..j.y_size() {
        for x in 0..j.x_size() {
            if j.mass(x, y) <= 0.0 {
                continue;
            }
            for m in 0..enc.m_size() {
                if enc.kernel(x, y, m) > 0.0 {
                    lists[y * enc.m_size() + m].push(x as u32);
                }
            }
        }
    }
    Ok(ListFamily {
        y_size: j.y_size(),
        m_size: enc.m_size(),
        lists,
    })
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Param(format!("rho must be positive, got {}", rho)));
    }
    Ok(())
}

/// `E[|L(Y, M)|^rho]`, the list-size moment of an encoder.
pub fn list_moment(enc: &TaskEncoder, j: &JointPMF, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let lists = lists_of(enc, j)?;
    let mut total = 0.0;
    for y in 0..j.y_size() {
        for x in 0..j.x_size() {
            let p = j.mass(x, y);
            if p <= 0.0 {
                continue;
            }
            for m in 0..enc.m_size() {
                let k = enc.kernel(x, y, m);
                if k > 0.0 {
                    total += p * k * (lists.list(y, m).len() as f64).powf(rho);
                }
            }
        }
    }
    Ok(total)
}

/// The guesser induced by an encoder's lists: for each `y`, lists are
/// visited in increasing order of cardinality (ties by message index),
/// elements inside a list in ascending symbol order, previously guessed
/// symbols skipped, and symbols on no list appended last in ascending
/// order. Its moment exceeds the list moment by at most `m_size^rho`.
pub fn guesser_from_lists(enc: &TaskEncoder, j: &JointPMF) -> Result<GuessingFunction> {
    let lists = lists_of(enc, j)?;
    let mut orders = Vec::with_capacity(j.y_size());
    for y in 0..j.y_size() {
        let mut by_size: Vec<usize> = (0..enc.m_size()).collect();
        by_size.sort_by_key(|&m| (lists.list(y, m).len(), m));
        let mut guessed = vec![false; j.x_size()];
        let mut order = Vec::with_capacity(j.x_size());
        for m in by_size {
            for &x in lists.list(y, m) {
                if !guessed[x as usize] {
                    guessed[x as usize] = true;
                    order.push(x as usize);
                }
            }
        }
        for x in 0..j.x_size() {
            if !guessed[x] {
                order.push(x);
            }
        }
        orders.push(order);
    }
    GuessingFunction::from_orders(j.x_size(), &orders)
}

/// Binary-magnitude block index `floor(log2 k)`; at most `2^s <= k`
/// integers share block `s`.
pub fn magnitude_block(k: u64) -> Result<u32> {
    if k == 0 {
        return Err(Error::Param("block index needs k >= 1".into()));
    }
    Ok(k.ilog2())
}

/// Alphabet size the magnitude component needs when ranks are first cut
/// into residue classes modulo `v`: `floor(log2(ceil(x_size / v))) + 1`.
pub fn magnitude_size(x_size: usize, v: usize) -> usize {
    magnitude_block(x_size.div_ceil(v) as u64).expect("ceil(x/v) >= 1") as usize + 1
}

/// Rank-splitting message table: symbol with rank `r` (in guesser `g`'s
/// cell `y`) maps to `m = z * s_size + s` with residue `z = (r-1) mod v`
/// and magnitude block `s = floor(log2(ceil(r / v)))`.
pub(crate) fn rank_split_map(g: &GuessingFunction, v: usize) -> Vec<u32> {
    let s_size = magnitude_size(g.x_size(), v);
    let mut map = vec![0u32; g.x_size() * g.cell_count()];
    for y in 0..g.cell_count() {
        for x in 0..g.x_size() {
            let rank = g.rank(y, x) as usize;
            let z = (rank - 1) % v;
            let refined = rank.div_ceil(v);
            let s = magnitude_block(refined as u64).expect("refined rank >= 1") as usize;
            map[x * g.cell_count() + y] = (z * s_size + s) as u32;
        }
    }
    map
}

/// Deterministic encoder built from a guesser by publishing the rank
/// residue modulo `v` and the binary-magnitude block of the remaining
/// rank. Requires `1 <= v <= x_size` and
/// `m_size >= v * (floor(log2(ceil(x_size / v))) + 1)`; message values past
/// the used range stay as dead codewords. Its list moment is at most
/// `E[ceil(G/v)^rho]` for the generating guesser `G`.
pub fn encoder_from_guesser(
    g: &GuessingFunction,
    j: &JointPMF,
    v: usize,
    m_size: usize,
) -> Result<TaskEncoder> {
    if g.x_size() != j.x_size() || g.cell_count() != j.y_size() {
        return Err(Error::Param(
            "guessing function shape does not match joint".into(),
        ));
    }
    if v == 0 || v > j.x_size() {
        return Err(Error::Param(format!(
            "residue modulus v = {} must lie in 1..={}",
            v,
            j.x_size()
        )));
    }
    let needed = v * magnitude_size(j.x_size(), v);
    if m_size < needed {
        return Err(Error::Param(format!(
            "m_size = {} too small: residue modulus {} over alphabet {} needs at least {} messages",
            m_size,
            v,
            j.x_size(),
            needed
        )));
    }
    let map = rank_split_map(g, v);
    TaskEncoder::deterministic(j.x_size(), j.y_size(), m_size, &map)
}

/// Residue modulus that best converts a guessing moment into a list moment
/// for a given message budget:
/// `clamp(floor(m_size / (floor(log2 x_size) + 1)), 1, x_size)`.
/// Errors when even `v = 1` cannot fit (`m_size < floor(log2 x_size) + 1`).
pub fn best_v(m_size: usize, x_size: usize) -> Result<usize> {
    if x_size == 0 {
        return Err(Error::Param("x_size must be at least 1".into()));
    }
    let bits = magnitude_block(x_size as u64)? as usize + 1;
    if m_size < bits {
        return Err(Error::Param(format!(
            "m_size = {} too small: alphabet of {} symbols needs at least {} messages",
            m_size, x_size, bits
        )));
    }
    Ok((m_size / bits).clamp(1, x_size))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guessing::{guess_moment, min_guess_moment, optimal_guesser};

    fn close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol,
            "expected {} ~ {} within {:e}",
            a,
            b,
            tol
        );
    }

    fn uniform8_split_encoder(v: usize, m_size: usize) -> (TaskEncoder, JointPMF) {
        let j = JointPMF::uniform(8);
        let g = optimal_guesser(&j.posterior_family());
        (encoder_from_guesser(&g, &j, v, m_size).unwrap(), j)
    }

    #[test]
    fn magnitude_blocks_match_binary_magnitudes() {
        assert_eq!(magnitude_block(1).unwrap(), 0);
        assert_eq!(magnitude_block(2).unwrap(), 1);
        assert_eq!(magnitude_block(3).unwrap(), 1);
        assert_eq!(magnitude_block(4).unwrap(), 2);
        assert_eq!(magnitude_block(255).unwrap(), 7);
        assert_eq!(magnitude_block(256).unwrap(), 8);
        assert!(magnitude_block(0).is_err());
    }

    #[test]
    fn rank_split_lists_on_uniform_eight() {
        let (enc, j) = uniform8_split_encoder(2, 6);
        assert!(enc.is_deterministic());
        let lists = lists_of(&enc, &j).unwrap();
        // per residue class: magnitude blocks of refined ranks 1..4 have
        // sizes 1, 2, 1
        let sizes: Vec<usize> = (0..6).map(|m| lists.list(0, m).len()).collect();
        assert_eq!(sizes, vec![1, 2, 1, 1, 2, 1]);
        close(list_moment(&enc, &j, 1.0).unwrap(), 1.5, 1e-12);
        // never better than the ceiling moment of the generating guesser
        let ceiling = crate::guessing::ceiled_min_guess_moment(&j, 2, 1.0).unwrap();
        close(ceiling, 2.5, 1e-12);
        assert!(list_moment(&enc, &j, 1.0).unwrap() <= ceiling + 1e-12);
    }

    #[test]
    fn magnitude_only_encoder_on_uniform_eight() {
        // v = 1 publishes only the magnitude block; list sizes 1,2,4,1
        let (enc, j) = uniform8_split_encoder(1, 4);
        let lists = lists_of(&enc, &j).unwrap();
        let sizes: Vec<usize> = (0..4).map(|m| lists.list(0, m).len()).collect();
        assert_eq!(sizes, vec![1, 2, 4, 1]);
        close(list_moment(&enc, &j, 1.0).unwrap(), 22.0 / 8.0, 1e-12);
        let g_moment = min_guess_moment(&j, 1.0).unwrap();
        assert!(list_moment(&enc, &j, 1.0).unwrap() <= g_moment + 1e-12);
    }

    #[test]
    fn list_moment_of_stochastic_encoder() {
        // x uniform on {0,1}, kernel splits x=0 across both messages
        let j = JointPMF::uniform(2);
        let enc = TaskEncoder::new(2, 1, 2, vec![0.5, 0.5, 0.0, 1.0]).unwrap();
        let lists = lists_of(&enc, &j).unwrap();
        assert_eq!(lists.list(0, 0), &[0]);
        assert_eq!(lists.list(0, 1), &[0, 1]);
        // E = 1/2*(1/2*1 + 1/2*2) + 1/2*2 = 1.75
        close(list_moment(&enc, &j, 1.0).unwrap(), 1.75, 1e-12);
    }

    #[test]
    fn induced_guesser_loses_at_most_m_to_the_rho() {
        let j = JointPMF::from_marginal(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        for map in [[0u32, 0, 1, 1], [0, 1, 0, 1], [1, 0, 0, 0]] {
            let enc = TaskEncoder::deterministic(4, 1, 2, &map).unwrap();
            let g = guesser_from_lists(&enc, &j).unwrap();
            for rho in [0.5, 1.0, 2.0] {
                let gm = guess_moment(&g, &j, rho).unwrap();
                let lm = list_moment(&enc, &j, rho).unwrap();
                assert!(
                    gm <= 2f64.powf(rho) * lm + 1e-12,
                    "map {:?}, rho {}: {} > {}",
                    map,
                    rho,
                    gm,
                    2f64.powf(rho) * lm
                );
            }
        }
    }

    #[test]
    fn induced_guesser_orders_lists_by_cardinality() {
        let j = JointPMF::uniform(4);
        // message 0 -> {0,1,2}, message 1 -> {3}
        let enc = TaskEncoder::deterministic(4, 1, 2, &[0, 0, 0, 1]).unwrap();
        let g = guesser_from_lists(&enc, &j).unwrap();
        assert_eq!(g.rank(0, 3), 1); // singleton list first
        assert_eq!(g.rank(0, 0), 2);
        assert_eq!(g.rank(0, 1), 3);
        assert_eq!(g.rank(0, 2), 4);
    }

    #[test]
    fn best_v_matches_the_message_budget() {
        assert_eq!(best_v(8, 8).unwrap(), 2);
        assert_eq!(best_v(4, 8).unwrap(), 1);
        assert_eq!(best_v(64, 4).unwrap(), 4); // clamped to x_size
        assert_eq!(best_v(3, 4).unwrap(), 1); // exactly the minimum budget
    }

    #[test]
    fn best_v_rejects_hopeless_budgets() {
        assert!(best_v(2, 8).is_err());
        assert!(best_v(0, 4).is_err());
    }

    #[test]
    fn encoder_from_guesser_checks_message_budget() {
        let j = JointPMF::uniform(8);
        let g = optimal_guesser(&j.posterior_family());
        assert!(encoder_from_guesser(&g, &j, 2, 5).is_err()); // needs 6
        assert!(encoder_from_guesser(&g, &j, 2, 6).is_ok());
        assert!(encoder_from_guesser(&g, &j, 9, 64).is_err()); // v > |X|
    }

    #[test]
    fn kernel_serialization_round_trips() {
        let enc = TaskEncoder::new(2, 1, 2, vec![0.5, 0.5, 0.0, 1.0]).unwrap();
        let back = TaskEncoder::from_json(&enc.to_json()).unwrap();
        assert_eq!(enc, back);
        assert!(!enc.is_deterministic());
    }
}
