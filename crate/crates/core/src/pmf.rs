//! Finite probability mass functions and order-`alpha` entropies.
//!
//! Everything downstream (guessing moments, list moments, storage bounds)
//! is an exact finite sum over a joint PMF of a secret `X` and side
//! information `Y`, so this module is deliberately strict: tables are
//! validated on construction, logs are base 2, and `alpha` is restricted to
//! the open interval (0,1) — the only range the rest of the crate needs.
//!
//! Layout conventions used across the crate:
//! * `JointPMF.mass` is row-major: `mass[x * y_size + y]`.
//! * Tuple alphabets flatten big-endian (first coordinate most
//!   significant); compound conditioning alphabets like `(y, m)` flatten
//!   with the rightmost variable least significant: `y * m_size + m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for "sums to one" checks on probability vectors.
pub const NORM_TOL: f64 = 1e-12;

/// A finite alphabet, known only by its size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Param("alphabet size must be at least 1".into()));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Joint distribution of a secret `X` and side information `Y`.
///
/// Entries must be nonnegative and sum to one within [`NORM_TOL`]. Zero
/// rows/columns are allowed: a `y` of zero marginal probability simply has
/// no defined posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPMF {
    x: Alphabet,
    y: Alphabet,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct JointPmfWire {
    x_size: usize,
    y_size: usize,
    mass: Vec<Vec<f64>>,
}

impl JointPMF {
    pub fn new(x_size: usize, y_size: usize, mass: Vec<f64>) -> Result<Self> {
        let x = Alphabet::new(x_size)?;
        let y = Alphabet::new(y_size)?;
        if mass.len() != x_size * y_size {
            return Err(Error::Distribution(format!(
                "mass has {} entries, expected {}",
                mass.len(),
                x_size * y_size
            )));
        }
        let mut total = 0.0;
        for (i, &p) in mass.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Distribution(format!(
                    "mass entry {} is {} (must be finite and nonnegative)",
                    i, p
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::Distribution(format!(
                "mass sums to {} (must be 1 within {:e})",
                total, NORM_TOL
            )));
        }
        Ok(JointPMF { x, y, mass })
    }

    /// Joint table from per-`x` rows (each row runs over `y`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Distribution("mass table has no rows".into()));
        }
        let y_size = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != y_size {
                return Err(Error::Distribution(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    y_size
                )));
            }
        }
        let mass: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), y_size, mass)
    }

    /// Distribution of `X` alone (constant side information, `|Y| = 1`).
    pub fn from_marginal(p: &[f64]) -> Result<Self> {
        Self::new(p.len(), 1, p.to_vec())
    }

    /// Uniform secret with constant side information.
    pub fn uniform(x_size: usize) -> Self {
        let p = vec![1.0 / x_size as f64; x_size];
        Self::new(x_size, 1, p).expect("uniform mass is always valid")
    }

    pub fn x_size(&self) -> usize {
        self.x.size()
    }

    pub fn y_size(&self) -> usize {
        self.y.size()
    }

    pub fn mass(&self, x: usize, y: usize) -> f64 {
        self.mass[x * self.y.size() + y]
    }

    pub fn y_marginal(&self, y: usize) -> f64 {
        (0..self.x.size()).map(|x| self.mass(x, y)).sum()
    }

    /// Family of posteriors `P(x | y)`, one row per `y`; rows for `y` of
    /// zero marginal probability are absent.
    pub fn posterior_family(&self) -> CondPMF {
        let rows = (0..self.y.size())
            .map(|y| {
                let marginal = self.y_marginal(y);
                if marginal <= 0.0 {
                    None
                } else {
                    Some(
                        (0..self.x.size())
                            .map(|x| self.mass(x, y) / marginal)
                            .collect(),
                    )
                }
            })
            .collect();
        CondPMF {
            given: self.y,
            target: self.x,
            rows,
        }
    }

    /// `n`-fold product distribution of i.i.d. copies, tuples flattened
    /// big-endian (first coordinate most significant).
    ///
    /// Rejected when the extended table would exceed `max_cells` entries.
    pub fn iid_extension(&self, n: u32, max_cells: u64) -> Result<JointPMF> {
        if n == 0 {
            return Err(Error::Param("extension length n must be positive".into()));
        }
        let xs = self.x.size() as u64;
        let ys = self.y.size() as u64;
        let cells = xs
            .checked_pow(n)
            .and_then(|a| ys.checked_pow(n).and_then(|b| a.checked_mul(b)));
        match cells {
            Some(c) if c <= max_cells => {}
            _ => {
                let required = (xs as f64).powi(n as i32) * (ys as f64).powi(n as i32);
                return Err(Error::Budget {
                    context: format!("iid_extension(n={})", n),
                    required,
                    limit: max_cells,
                });
            }
        }
        let xn = self.x.size().pow(n);
        let yn = self.y.size().pow(n);
        let mut mass = vec![0.0; xn * yn];
        // Walk every (x-tuple, y-tuple) pair by decoding the flat indices
        // digit by digit, most significant first.
        for xt in 0..xn {
            for yt in 0..yn {
                let mut p = 1.0;
                let mut xr = xt;
                let mut yr = yt;
                let mut xdigits = vec![0usize; n as usize];
                let mut ydigits = vec![0usize; n as usize];
                for i in (0..n as usize).rev() {
                    xdigits[i] = xr % self.x.size();
                    xr /= self.x.size();
                    ydigits[i] = yr % self.y.size();
                    yr /= self.y.size();
                }
                for i in 0..n as usize {
                    p *= self.mass(xdigits[i], ydigits[i]);
                }
                mass[xt * yn + yt] = p;
            }
        }
        // Product of normalized tables can drift a few ulps past the strict
        // tolerance for large n; renormalize the tiny residual.
        let total: f64 = mass.iter().sum();
        if total > 0.0 {
            for p in &mut mass {
                *p /= total;
            }
        }
        JointPMF::new(xn, yn, mass)
    }

    /// Adjoin an independent uniform component `U` over `{0..c-1}`: the new
    /// secret is the pair `(x, u)`, flattened as `x * c + u`.
    pub fn adjoin_uniform(&self, c: usize) -> Result<JointPMF> {
        if c == 0 {
            return Err(Error::Param(
                "uniform component size c must be at least 1".into(),
            ));
        }
        let mut mass = vec![0.0; self.x.size() * c * self.y.size()];
        for x in 0..self.x.size() {
            for u in 0..c {
                for y in 0..self.y.size() {
                    mass[(x * c + u) * self.y.size() + y] = self.mass(x, y) / c as f64;
                }
            }
        }
        JointPMF::new(self.x.size() * c, self.y.size(), mass)
    }

    pub fn to_json(&self) -> String {
        let wire = JointPmfWire {
            x_size: self.x.size(),
            y_size: self.y.size(),
            mass: (0..self.x.size())
                .map(|x| (0..self.y.size()).map(|y| self.mass(x, y)).collect())
                .collect(),
        };
        serde_json::to_string(&wire).expect("serializing a plain table cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: JointPmfWire = serde_json::from_str(s)?;
        if wire.mass.len() != wire.x_size {
            return Err(Error::Distribution(format!(
                "mass has {} rows, expected x_size = {}",
                wire.mass.len(),
                wire.x_size
            )));
        }
        for (i, row) in wire.mass.iter().enumerate() {
            if row.len() != wire.y_size {
                return Err(Error::Distribution(format!(
                    "mass row {} has {} entries, expected y_size = {}",
                    i,
                    row.len(),
                    wire.y_size
                )));
            }
        }
        Self::new(
            wire.x_size,
            wire.y_size,
            wire.mass.into_iter().flatten().collect(),
        )
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json())?)
    }
}

/// Conditional distribution `P(target | given)`; rows may be undefined for
/// conditioning values that occur with probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CondPMF {
    given: Alphabet,
    target: Alphabet,
    rows: Vec<Option<Vec<f64>>>,
}

impl CondPMF {
    pub fn new(target_size: usize, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let given = Alphabet::new(rows.len())?;
        let target = Alphabet::new(target_size)?;
        for (g, row) in rows.iter().enumerate() {
            if let Some(row) = row {
                if row.len() != target_size {
                    return Err(Error::Distribution(format!(
                        "conditional row {} has {} entries, expected {}",
                        g,
                        row.len(),
                        target_size
                    )));
                }
                let mut total = 0.0;
                for &p in row {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::Distribution(format!(
                            "conditional row {} has invalid entry {}",
                            g, p
                        )));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > NORM_TOL {
                    return Err(Error::Distribution(format!(
                        "conditional row {} sums to {}",
                        g, total
                    )));
                }
            }
        }
        Ok(CondPMF {
            given,
            target,
            rows,
        })
    }

    pub fn given_size(&self) -> usize {
        self.given.size()
    }

    pub fn target_size(&self) -> usize {
        self.target.size()
    }

    pub fn row(&self, given: usize) -> Option<&[f64]> {
        self.rows[given].as_deref()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Param(format!(
            "alpha must lie in the open interval (0,1), got {}",
            alpha
        )));
    }
    Ok(())
}

/// Rényi entropy of order `alpha` in bits:
/// `(1/(1-alpha)) * log2(sum_x p(x)^alpha)`.
///
/// Only orders in the open interval (0,1) are supported.
pub fn renyi_entropy(p: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if p.is_empty() {
        return Err(Error::Distribution("empty probability vector".into()));
    }
    let mut total = 0.0;
    let mut sum_alpha = 0.0;
    for &q in p {
        if !q.is_finite() || q < 0.0 {
            return Err(Error::Distribution(format!(
                "probability entry {} is invalid",
                q
            )));
        }
        total += q;
        if q > 0.0 {
            sum_alpha += q.powf(alpha);
        }
    }
    if (total - 1.0).abs() > NORM_TOL {
        return Err(Error::Distribution(format!(
            "probability vector sums to {}",
            total
        )));
    }
    Ok(sum_alpha.log2() / (1.0 - alpha))
}

/// Arimoto conditional Rényi entropy of order `alpha` in bits:
/// `(alpha/(1-alpha)) * log2( sum_y ( sum_x P(x,y)^alpha )^(1/alpha) )`.
///
/// For `|Y| = 1` this reduces to the unconditional Rényi entropy, and it is
/// additive under both [`JointPMF::iid_extension`] and
/// [`JointPMF::adjoin_uniform`].
pub fn arimoto_conditional_entropy(j: &JointPMF, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mut outer = 0.0;
    for y in 0..j.y_size() {
        let mut inner = 0.0;
        for x in 0..j.x_size() {
            let p = j.mass(x, y);
            if p > 0.0 {
                inner += p.powf(alpha);
            }
        }
        if inner > 0.0 {
            outer += inner.powf(1.0 / alpha);
        }
    }
    Ok(outer.log2() * alpha / (1.0 - alpha))
}

/// The Rényi order `1/(1+rho)` that tilts every guessing-moment bound of
/// this crate.
pub fn tilt_order(rho: f64) -> f64 {
    1.0 / (1.0 + rho)
}
