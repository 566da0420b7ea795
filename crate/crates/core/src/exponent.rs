//! Variable exponents `p(·)` on ℤ: explicit window values plus a constant
//! tail `p_∞`, with log-Hölder-at-infinity constants and (fractional)
//! conjugates.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};

/// Absolute tolerance for exponent comparisons.
pub const EXPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentFunction {
    window_lo: i64,
    #[serde(rename = "values")]
    window_values: Vec<f64>,
    p_inf: f64,
}

fn validate(index: i64, v: f64) -> Result<f64> {
    if !v.is_finite() || v < 1.0 - EXPONENT_TOL {
        return Err(Error::InvalidExponent { index, value: v });
    }
    Ok(v.max(1.0))
}

impl ExponentFunction {
    pub fn new(window_lo: i64, window_values: Vec<f64>, p_inf: f64) -> Result<Self> {
        // the tail is reported at index i64::MAX in errors
        let p_inf = validate(i64::MAX, p_inf)?;
        let window_values = window_values
            .into_iter()
            .enumerate()
            .map(|(i, v)| validate(window_lo.saturating_add(i as i64), v))
            .collect::<Result<Vec<_>>>()?;
        if !window_values.is_empty() {
            window_lo
                .checked_add(window_values.len() as i64 - 1)
                .ok_or(Error::Overflow("exponent window"))?;
        }
        Ok(Self {
            window_lo,
            window_values,
            p_inf,
        })
    }

    pub fn constant(p: f64) -> Result<Self> {
        Self::new(0, Vec::new(), p)
    }

    /// Re-validates a deserialized value.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.window_lo, self.window_values, self.p_inf)
    }

    pub fn window_lo(&self) -> i64 {
        self.window_lo
    }

    pub fn window_values(&self) -> &[f64] {
        &self.window_values
    }

    pub fn p_inf(&self) -> f64 {
        self.p_inf
    }

    pub fn at(&self, n: i64) -> f64 {
        let i = n.wrapping_sub(self.window_lo);
        if n >= self.window_lo && (i as u64) < self.window_values.len() as u64 {
            self.window_values[i as usize]
        } else {
            self.p_inf
        }
    }

    /// `(index, p(index))` over the explicit window.
    pub fn window_entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.window_values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.window_lo + i as i64, v))
    }

    pub fn window_contains(&self, n: i64) -> bool {
        let i = n.wrapping_sub(self.window_lo);
        n >= self.window_lo && (i as u64) < self.window_values.len() as u64
    }

    pub fn p_minus(&self) -> f64 {
        self.window_values.iter().copied().fold(self.p_inf, f64::min)
    }

    pub fn p_plus(&self) -> f64 {
        self.window_values.iter().copied().fold(self.p_inf, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        self.window_values
            .iter()
            .all(|&v| (v - self.p_inf).abs() <= EXPONENT_TOL)
    }

    /// Applies `f` pointwise, window and tail alike.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(
            self.window_lo,
            self.window_values.iter().map(|&v| f(v)).collect(),
            f(self.p_inf),
        )
    }

    pub fn shifted(&self, s: i64) -> Result<Self> {
        let lo = self.window_lo.checked_add(s).ok_or(Error::Overflow("shift"))?;
        Self::new(lo, self.window_values.clone(), self.p_inf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhConstant {
    pub c_inf: f64,
}

#[inline]
pub fn log_weight(n: i64) -> f64 {
    (std::f64::consts::E + (n as f64).abs()).ln()
}

/// Smallest `C` with `|g(n) − g_∞| ≤ C / log(e+|n|)` for a function that equals
/// `g_∞` off the listed points.
pub fn lh_constant_of<I: IntoIterator<Item = (i64, f64)>>(points: I, tail: f64) -> f64 {
    points
        .into_iter()
        .map(|(n, v)| (v - tail).abs() * log_weight(n))
        .fold(0.0, f64::max)
}

pub fn lh_infinity_constant(p: &ExponentFunction) -> LhConstant {
    LhConstant {
        c_inf: lh_constant_of(p.window_entries(), p.p_inf),
    }
}

/// `q = p/(p−1)` pointwise.
pub fn conjugate(p: &ExponentFunction) -> Result<ExponentFunction> {
    let p_minus = p.p_minus();
    if p_minus <= 1.0 + EXPONENT_TOL {
        return Err(Error::ConjugateUndefined { p_minus });
    }
    p.map(|v| v / (v - 1.0))
}

/// `q` with `1/p − 1/q = α`, i.e. `q = p/(1 − α p)`.
pub fn fractional_conjugate(p: &ExponentFunction, alpha: f64) -> Result<ExponentFunction> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(p.clone());
    }
    let p_plus = p.p_plus();
    if 1.0 - alpha * p_plus <= EXPONENT_TOL {
        return Err(Error::Precondition(format!(
            "fractional conjugate needs p_+ < 1/alpha (p_+ = {p_plus}, alpha = {alpha})"
        )));
    }
    p.map(|v| v / (1.0 - alpha * v))
}

/// Outcome of checking the four LH∞ memberships and the constant transfers
/// between `p`, `1/p`, `q` and `1/q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhEquivalenceReport {
    pub c_p: f64,
    pub c_inv_p: f64,
    pub c_q: f64,
    pub c_inv_q: f64,
    /// `C(1/p) ≤ C(p)/(p_- p_∞)`
    pub inv_p_from_p: bool,
    /// `C(p) ≤ p_+ p_∞ C(1/p)`
    pub p_from_inv_p: bool,
    /// `C(1/q) ≤ C(q)/(q_- q_∞)`
    pub inv_q_from_q: bool,
    /// `C(q) ≤ q_+ q_∞ C(1/q)`
    pub q_from_inv_q: bool,
    /// `1/q = 1 − 1/p`, so the two reciprocal constants coincide.
    pub inv_p_eq_inv_q: bool,
}

impl LhEquivalenceReport {
    pub fn all_hold(&self) -> bool {
        self.inv_p_from_p && self.p_from_inv_p && self.inv_q_from_q && self.q_from_inv_q && self.inv_p_eq_inv_q
    }
}

fn le_tol(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-12 * (1.0 + rhs.abs())
}

fn reciprocal_constant(p: &ExponentFunction) -> f64 {
    lh_constant_of(p.window_entries().map(|(n, v)| (n, 1.0 / v)), 1.0 / p.p_inf())
}

pub fn check_lh_equivalences(p: &ExponentFunction) -> Result<LhEquivalenceReport> {
    let q = conjugate(p)?;
    let c_p = lh_infinity_constant(p).c_inf;
    let c_q = lh_infinity_constant(&q).c_inf;
    let c_inv_p = reciprocal_constant(p);
    let c_inv_q = reciprocal_constant(&q);
    Ok(LhEquivalenceReport {
        c_p,
        c_inv_p,
        c_q,
        c_inv_q,
        inv_p_from_p: le_tol(c_inv_p, c_p / (p.p_minus() * p.p_inf())),
        p_from_inv_p: le_tol(c_p, p.p_plus() * p.p_inf() * c_inv_p),
        inv_q_from_q: le_tol(c_inv_q, c_q / (q.p_minus() * q.p_inf())),
        q_from_inv_q: le_tol(c_q, q.p_plus() * q.p_inf() * c_inv_q),
        inv_p_eq_inv_q: (c_inv_p - c_inv_q).abs() <= 1e-12 * (1.0 + c_inv_p),
    })
}
