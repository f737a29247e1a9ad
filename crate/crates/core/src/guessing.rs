//! Guessing functions, guessing moments, and side-information refinement.
//!
//! A guessing function fixes, for every conditioning value, the order in
//! which a guesser would submit the symbols of `X`; its quality is the
//! moment `E[G(X|·)^rho]`. The minimum over all guessing functions is
//! achieved by sorting each posterior in decreasing order, and that minimum
//! is sandwiched by two closed-form bounds driven by the order-`1/(1+rho)`
//! Arimoto entropy.
//!
//! The second half of the module deals with deterministic side information
//! `Z = f(X,Y)`: how much a `z`-valued leak can reduce the optimal moment,
//! and the residue construction that meets the reduction limit exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::{tilt_order, arimoto_conditional_entropy, CondPMF, JointPMF};

/// A per-conditioning-value guessing order: `cells[c][x]` is the 1-based
/// position of symbol `x` in the guessing sequence used when the
/// conditioning value is `c`. Every row is a bijection onto `1..=|X|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessingFunction {
    x_size: usize,
    cells: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct GuessingFunctionWire {
    cells: Vec<Vec<u32>>,
}

impl GuessingFunction {
    pub fn new(cells: Vec<Vec<u32>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Param("guessing function needs at least one cell".into()));
        }
        let x_size = cells[0].len();
        for (c, row) in cells.iter().enumerate() {
            if row.len() != x_size {
                return Err(Error::Param(format!(
                    "cell {} has {} ranks, expected {}",
                    c,
                    row.len(),
                    x_size
                )));
            }
            let mut seen = vec![false; x_size];
            for &r in row {
                if r == 0 || r as usize > x_size || seen[r as usize - 1] {
                    return Err(Error::Param(format!(
                        "cell {} is not a bijection onto 1..={}",
                        c, x_size
                    )));
                }
                seen[r as usize - 1] = true;
            }
        }
        Ok(GuessingFunction { x_size, cells })
    }

    /// Identity order (`x` guessed at position `x+1`) in every cell.
    pub fn identity(x_size: usize, cell_count: usize) -> Result<Self> {
        let row: Vec<u32> = (1..=x_size as u32).collect();
        Self::new(vec![row; cell_count])
    }

    /// Build from explicit guessing orders: `orders[c]` lists the symbols
    /// of cell `c` in the order they would be guessed.
    pub fn from_orders(x_size: usize, orders: &[Vec<usize>]) -> Result<Self> {
        let mut cells = Vec::with_capacity(orders.len());
        for order in orders {
            let mut row = vec![0u32; x_size];
            for (pos, &x) in order.iter().enumerate() {
                if x >= x_size {
                    return Err(Error::Param(format!("symbol {} out of range", x)));
                }
                row[x] = pos as u32 + 1;
            }
            cells.push(row);
        }
        Self::new(cells)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn rank(&self, cell: usize, x: usize) -> u32 {
        self.cells[cell][x]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GuessingFunctionWire {
            cells: self.cells.clone(),
        })
        .expect("rank table serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: GuessingFunctionWire = serde_json::from_str(s)?;
        Self::new(wire.cells)
    }
}

/// The moment-minimizing guessing function for a posterior family: each
/// defined row is sorted by decreasing posterior, ties broken by ascending
/// symbol index (which also places zero-probability symbols last, in index
/// order). Undefined rows get the identity order — they are never queried
/// with positive probability.
pub fn optimal_guesser(post: &CondPMF) -> GuessingFunction {
    let x_size = post.target_size();
    let cells = (0..post.given_size())
        .map(|g| match post.row(g) {
            Some(row) => {
                let mut order: Vec<usize> = (0..x_size).collect();
                order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
                let mut ranks = vec![0u32; x_size];
                for (pos, &x) in order.iter().enumerate() {
                    ranks[x] = pos as u32 + 1;
                }
                ranks
            }
            None => (1..=x_size as u32).collect(),
        })
        .collect();
    GuessingFunction { x_size, cells }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Param(format!("rho must be positive, got {}", rho)));
    }
    Ok(())
}

fn check_shape(g: &GuessingFunction, j: &JointPMF) -> Result<()> {
    if g.x_size() != j.x_size() || g.cell_count() != j.y_size() {
        return Err(Error::Param(format!(
            "guessing function shape ({} cells over {} symbols) does not match joint ({} x {})",
            g.cell_count(),
            g.x_size(),
            j.x_size(),
            j.y_size()
        )));
    }
    Ok(())
}

/// `E[G(X|Y)^rho]` for an explicit guessing function.
pub fn guess_moment(g: &GuessingFunction, j: &JointPMF, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    check_shape(g, j)?;
    let mut total = 0.0;
    for y in 0..j.y_size() {
        for x in 0..j.x_size() {
            let p = j.mass(x, y);
            if p > 0.0 {
                total += p * (g.rank(y, x) as f64).powf(rho);
            }
        }
    }
    Ok(total)
}

/// Minimum of `E[G(X|Y)^rho]` over all guessing functions.
pub fn min_guess_moment(j: &JointPMF, rho: f64) -> Result<f64> {
    guess_moment(&optimal_guesser(&j.posterior_family()), j, rho)
}

/// `E[ceil(G*(X|Y)/z_size)^rho]` where `G*` is the optimal guesser — the
/// exact value of the optimal moment after adjoining the residue side
/// information of [`block_side_info`], and a floor for any other `z_size`-
/// valued side information.
pub fn ceiled_min_guess_moment(j: &JointPMF, z_size: usize, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if z_size == 0 {
        return Err(Error::Param("z_size must be at least 1".into()));
    }
    let g = optimal_guesser(&j.posterior_family());
    let mut total = 0.0;
    for y in 0..j.y_size() {
        for x in 0..j.x_size() {
            let p = j.mass(x, y);
            if p > 0.0 {
                let block = (g.rank(y, x) as f64 / z_size as f64).ceil();
                total += p * block.powf(rho);
            }
        }
    }
    Ok(total)
}

/// Closed-form sandwich for the optimal guessing moment:
/// `(1 + ln|X|)^(-rho) * 2^(rho * H) <= min E[G^rho] <= 2^(rho * H)`
/// with `H` the Arimoto entropy of order `1/(1+rho)`. The `ln` in the
/// polylog factor is natural; everything else is base 2.
pub fn arikan_bounds(j: &JointPMF, rho: f64) -> Result<(f64, f64)> {
    check_rho(rho)?;
    let h = arimoto_conditional_entropy(j, tilt_order(rho))?;
    let upper = (rho * h).exp2();
    let lower = (1.0 + (j.x_size() as f64).ln()).powf(-rho) * upper;
    Ok((lower, upper))
}

/// Deterministic side information `z = f(x, y)` with values in
/// `{0..z_size-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideInfoFunction {
    x_size: usize,
    y_size: usize,
    z_size: usize,
    map: Vec<u32>,
}

impl SideInfoFunction {
    pub fn new(x_size: usize, y_size: usize, z_size: usize, map: Vec<u32>) -> Result<Self> {
        if x_size == 0 || y_size == 0 || z_size == 0 {
            return Err(Error::Param("side-information sizes must be positive".into()));
        }
        if map.len() != x_size * y_size {
            return Err(Error::Param(format!(
                "side-information table has {} entries, expected {}",
                map.len(),
                x_size * y_size
            )));
        }
        if let Some(&bad) = map.iter().find(|&&z| z as usize >= z_size) {
            return Err(Error::Param(format!(
                "side-information value {} out of range 0..{}",
                bad, z_size
            )));
        }
        Ok(SideInfoFunction {
            x_size,
            y_size,
            z_size,
            map,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn value(&self, x: usize, y: usize) -> u32 {
        self.map[x * self.y_size + y]
    }
}

/// The residue construction that makes side information as useless as
/// possible to the party who already planned to guess in `g`'s order:
/// `f(x,y) = (rank(x|y) - 1) mod z_size`. Within every run of `z_size`
/// consecutive ranks the leaked values are distinct, which is exactly the
/// condition for the refined optimal moment to collapse to
/// [`ceiled_min_guess_moment`].
pub fn block_side_info(g: &GuessingFunction, z_size: usize) -> Result<SideInfoFunction> {
    if z_size == 0 {
        return Err(Error::Param("z_size must be at least 1".into()));
    }
    let mut map = vec![0u32; g.x_size() * g.cell_count()];
    for y in 0..g.cell_count() {
        for x in 0..g.x_size() {
            map[x * g.cell_count() + y] = ((g.rank(y, x) - 1) as usize % z_size) as u32;
        }
    }
    SideInfoFunction::new(g.x_size(), g.cell_count(), z_size, map)
}

/// Joint distribution of `X` against the refined side information `(Y, Z)`
/// with `Z = f(X,Y)`. The conditioning alphabet flattens as
/// `y * z_size + z`.
pub fn refine_with_side_info(j: &JointPMF, f: &SideInfoFunction) -> Result<JointPMF> {
    if f.x_size() != j.x_size() || f.y_size() != j.y_size() {
        return Err(Error::Param(format!(
            "side-information table shape ({} x {}) does not match joint ({} x {})",
            f.x_size(),
            f.y_size(),
            j.x_size(),
            j.y_size()
        )));
    }
    let yz = j.y_size() * f.z_size();
    let mut mass = vec![0.0; j.x_size() * yz];
    for x in 0..j.x_size() {
        for y in 0..j.y_size() {
            let p = j.mass(x, y);
            if p > 0.0 {
                let z = f.value(x, y) as usize;
                mass[x * yz + y * f.z_size() + z] = p;
            }
        }
    }
    JointPMF::new(j.x_size(), yz, mass)
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
    fn optimal_guesser_sorts_posteriors_with_index_tie_break() {
        // y=0: descending already; y=1: reversed; ties at y=0 between the
        // trailing 0.1s go to the smaller index.
        let j = JointPMF::from_rows(&[
            vec![0.40, 0.02],
            vec![0.05, 0.08],
            vec![0.05, 0.40],
        ])
        .unwrap();
        let g = optimal_guesser(&j.posterior_family());
        assert_eq!(g.rank(0, 0), 1);
        assert_eq!(g.rank(0, 1), 2); // tie with x=2 broken by index
        assert_eq!(g.rank(0, 2), 3);
        assert_eq!(g.rank(1, 2), 1);
        assert_eq!(g.rank(1, 1), 2);
        assert_eq!(g.rank(1, 0), 3);
    }

    #[test]
    fn zero_probability_symbols_rank_last() {
        let j = JointPMF::from_marginal(&[0.0, 0.6, 0.0, 0.4]).unwrap();
        let g = optimal_guesser(&j.posterior_family());
        assert_eq!(g.rank(0, 1), 1);
        assert_eq!(g.rank(0, 3), 2);
        assert_eq!(g.rank(0, 0), 3);
        assert_eq!(g.rank(0, 2), 4);
    }

    #[test]
    fn min_moment_of_uniform_four() {
        let j = JointPMF::uniform(4);
        close(min_guess_moment(&j, 1.0).unwrap(), 2.5, 1e-12);
        close(min_guess_moment(&j, 2.0).unwrap(), 7.5, 1e-12);
    }

    #[test]
    fn min_moment_of_skewed_three() {
        let j = JointPMF::from_marginal(&[0.7, 0.2, 0.1]).unwrap();
        close(min_guess_moment(&j, 1.0).unwrap(), 1.4, 1e-12);
    }

    #[test]
    fn side_information_lowers_the_optimal_moment() {
        let j = JointPMF::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.3]]).unwrap();
        let with_y = min_guess_moment(&j, 1.0).unwrap();
        let marginal: Vec<f64> = (0..2)
            .map(|x| (0..2).map(|y| j.mass(x, y)).sum())
            .collect();
        let without_y = min_guess_moment(&JointPMF::from_marginal(&marginal).unwrap(), 1.0).unwrap();
        assert!(with_y <= without_y + 1e-12);
    }

    #[test]
    fn moment_rejects_nonpositive_rho_and_shape_mismatch() {
        let j = JointPMF::uniform(3);
        assert!(matches!(
            min_guess_moment(&j, 0.0),
            Err(Error::Param(_))
        ));
        let g = GuessingFunction::identity(3, 2).unwrap();
        assert!(matches!(guess_moment(&g, &j, 1.0), Err(Error::Param(_))));
    }

    #[test]
    fn arikan_sandwich_on_uniform_four() {
        let j = JointPMF::uniform(4);
        let (lo, hi) = arikan_bounds(&j, 1.0).unwrap();
        close(hi, 4.0, 1e-12);
        close(lo, 4.0 / (1.0 + 4.0f64.ln()), 1e-12);
        let m = min_guess_moment(&j, 1.0).unwrap();
        assert!(lo <= m + 1e-12 && m <= hi + 1e-12);
    }

    #[test]
    fn arikan_sandwich_on_uniform_two() {
        let j = JointPMF::uniform(2);
        let (lo, hi) = arikan_bounds(&j, 1.0).unwrap();
        close(hi, 2.0, 1e-12);
        close(lo, 2.0 / (1.0 + 2.0f64.ln()), 1e-12);
    }

    #[test]
    fn residue_side_info_achieves_the_ceiling_moment() {
        let j = JointPMF::uniform(4);
        let g = optimal_guesser(&j.posterior_family());
        let f = block_side_info(&g, 2).unwrap();
        let refined = refine_with_side_info(&j, &f).unwrap();
        // ranks 1..4 in blocks of 2: ceil -> 1,1,2,2
        close(min_guess_moment(&refined, 1.0).unwrap(), 1.5, 1e-12);
        close(ceiled_min_guess_moment(&j, 2, 1.0).unwrap(), 1.5, 1e-12);
    }

    #[test]
    fn refinement_never_beats_the_ceiling_floor() {
        // every deterministic 2-valued leak on a skewed source stays above
        // E[ceil(G*/2)^rho]
        let j = JointPMF::from_marginal(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let floor = ceiled_min_guess_moment(&j, 2, 1.0).unwrap();
        for bits in 0..16u32 {
            let map: Vec<u32> = (0..4).map(|x| (bits >> x) & 1).collect();
            let f = SideInfoFunction::new(4, 1, 2, map).unwrap();
            let refined = refine_with_side_info(&j, &f).unwrap();
            let m = min_guess_moment(&refined, 1.0).unwrap();
            assert!(m >= floor - 1e-12, "map {:04b}: {} < {}", bits, m, floor);
        }
    }

    #[test]
    fn rank_table_serialization_round_trips() {
        let j = JointPMF::from_rows(&[
            vec![0.35, 0.05],
            vec![0.10, 0.10],
            vec![0.05, 0.35],
        ])
        .unwrap();
        let g = optimal_guesser(&j.posterior_family());
        let json = g.to_json();
        assert_eq!(json, r#"{"cells":[[1,2,3],[3,2,1]]}"#);
        assert_eq!(GuessingFunction::from_json(&json).unwrap(), g);
    }

    #[test]
    fn rank_table_validation_rejects_non_bijections() {
        assert!(GuessingFunction::new(vec![vec![1, 1, 3]]).is_err());
        assert!(GuessingFunction::new(vec![vec![0, 1, 2]]).is_err());
        assert!(GuessingFunction::new(vec![vec![1, 2, 4]]).is_err());
    }
}
