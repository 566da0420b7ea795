//! The modular `ρ_{p(·)}(a) = Σ |a(k)|^{p(k)}` and the Luxemburg norm
//! `inf{λ > 0 : ρ(a/λ) ≤ 1}`, computed by bisection on the strictly
//! decreasing map `λ ↦ ρ(a/λ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::lattice::{RunSet, Sequence};

pub const DEFAULT_REL_TOL: f64 = 1e-12;
pub const MAX_BISECTION_ITERS: usize = 200;

/// `x^p` as `exp(p·ln x)`, zero at `x = 0`.
#[inline]
pub fn power(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (p * x.ln()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularValue {
    pub value: f64,
}

pub fn modular(a: &Sequence, p: &ExponentFunction) -> ModularValue {
    ModularValue {
        value: scaled_modular(a, p, 1.0),
    }
}

/// `ρ(a/λ)`.
pub fn scaled_modular(a: &Sequence, p: &ExponentFunction, lambda: f64) -> f64 {
    a.entries()
        .filter(|&(_, v)| v != 0.0)
        .map(|(n, v)| power(v / lambda, p.at(n)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    #[serde(rename = "norm")]
    pub value: f64,
    pub achieved_modular: f64,
    #[serde(rename = "tol")]
    pub tolerance: f64,
}

/// Bisection for the root of `ρ(λ) = 1` on a bracket with `ρ(lo) ≥ 1 ≥ ρ(hi)`.
/// Returns the upper end, which always satisfies `ρ ≤ 1`, and the final
/// relative bracket width.
fn bisect_unit_level<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, rho: F, rel_tol: f64) -> (f64, f64) {
    let mut iters = 0;
    while hi - lo > rel_tol * lo && iters < MAX_BISECTION_ITERS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if rho(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    (hi, (hi - lo) / lo)
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol <= 1e-3 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("rel_tol must be in (0, 1e-3], got {rel_tol}")))
    }
}

pub fn luxemburg_norm(a: &Sequence, p: &ExponentFunction, rel_tol: f64) -> Result<NormValue> {
    check_rel_tol(rel_tol)?;
    if let Some((n, v)) = a.entries().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index: n, value: v });
    }
    if a.is_zero() {
        return Ok(NormValue {
            value: 0.0,
            achieved_modular: 0.0,
            tolerance: 0.0,
        });
    }
    let lo = a.max_value();
    let hi = lo.max(a.total());
    let (lambda, width) = bisect_unit_level(lo, hi, |l| scaled_modular(a, p, l), rel_tol);
    Ok(NormValue {
        value: lambda,
        achieved_modular: scaled_modular(a, p, lambda),
        tolerance: width,
    })
}

/// `ρ_{q(·)}(χ_S / λ) = Σ_{n∈S} λ^{-q(n)}`, with the tail exponent applied to
/// the points of `S` outside the explicit window.
pub fn indicator_modular(set: &RunSet, q: &ExponentFunction, lambda: f64) -> f64 {
    let inv = 1.0 / lambda;
    let mut inside = 0u64;
    let mut sum = 0.0;
    for (n, qn) in q.window_entries() {
        if set.contains(n) {
            inside += 1;
            sum += power(inv, qn);
        }
    }
    let outside = set.count() - inside;
    sum + outside as f64 * power(inv, q.p_inf())
}

/// `‖χ_S‖_{q(·)}`.
pub fn indicator_norm(set: &RunSet, q: &ExponentFunction, rel_tol: f64) -> Result<NormValue> {
    check_rel_tol(rel_tol)?;
    if set.is_empty() {
        return Ok(NormValue {
            value: 0.0,
            achieved_modular: 0.0,
            tolerance: 0.0,
        });
    }
    let hi = (set.count() as f64).max(1.0);
    let (lambda, width) = bisect_unit_level(1.0, hi, |l| indicator_modular(set, q, l), rel_tol);
    Ok(NormValue {
        value: lambda,
        achieved_modular: indicator_modular(set, q, lambda),
        tolerance: width,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingBoundsReport {
    pub lambda: f64,
    pub rho: f64,
    pub rho_scaled: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// `rho_scaled − lower` and `upper − rho_scaled`.
    pub lower_slack: f64,
    pub upper_slack: f64,
}

impl ScalingBoundsReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds
    }
}

const CHECK_REL: f64 = 1e-12;

fn le_rel(lhs: f64, rhs: f64, rel: f64) -> bool {
    lhs <= rhs + rel * (1.0 + lhs.abs().max(rhs.abs()))
}

/// `λ^{p_-} ρ(a) ≤ ρ(λa) ≤ λ^{p_+} ρ(a)` for `λ ≥ 1`, reversed for `λ < 1`.
pub fn check_scaling_bounds(a: &Sequence, p: &ExponentFunction, lambda: f64) -> Result<ScalingBoundsReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    let rho = modular(a, p).value;
    let rho_scaled = scaled_modular(a, p, 1.0 / lambda);
    let (pm, pp) = (p.p_minus(), p.p_plus());
    let (lower, upper) = if lambda >= 1.0 {
        (lambda.powf(pm) * rho, lambda.powf(pp) * rho)
    } else {
        (lambda.powf(pp) * rho, lambda.powf(pm) * rho)
    };
    Ok(ScalingBoundsReport {
        lambda,
        rho,
        rho_scaled,
        lower,
        upper,
        lower_holds: le_rel(lower, rho_scaled, CHECK_REL),
        upper_holds: le_rel(rho_scaled, upper, CHECK_REL),
        lower_slack: rho_scaled - lower,
        upper_slack: upper - rho_scaled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormModularReport {
    pub norm: f64,
    pub rho: f64,
    /// `‖a‖ ≤ 1`
    pub unit_regime: bool,
    /// `ρ ≤ ‖a‖` when `‖a‖ ≤ 1`, `ρ ≥ ‖a‖` when `‖a‖ ≥ 1`.
    pub modular_vs_norm: bool,
    /// `ρ^{1/p_-} ≤ ‖a‖ ≤ ρ^{1/p_+}` for `‖a‖ ≤ 1`, `ρ^{1/p_+} ≤ ‖a‖ ≤ ρ^{1/p_-}` otherwise.
    pub power_chain: bool,
    pub chain_lower: f64,
    pub chain_upper: f64,
}

impl NormModularReport {
    pub fn holds(&self) -> bool {
        self.modular_vs_norm && self.power_chain
    }
}

pub fn check_norm_modular_relations(
    a: &Sequence,
    p: &ExponentFunction,
    rel_tol: f64,
) -> Result<NormModularReport> {
    if a.is_zero() {
        return Err(Error::Precondition("norm–modular relations need a nontrivial sequence".into()));
    }
    let norm = luxemburg_norm(a, p, rel_tol)?.value;
    let rho = modular(a, p).value;
    let (pm, pp) = (p.p_minus(), p.p_plus());
    let unit_regime = norm <= 1.0;
    let (chain_lower, chain_upper) = if unit_regime {
        (rho.powf(1.0 / pm), rho.powf(1.0 / pp))
    } else {
        (rho.powf(1.0 / pp), rho.powf(1.0 / pm))
    };
    // ρ moves by at most a factor (1+rel)^{p_+} across the norm's bracket
    let tol = rel_tol * pp.max(1.0) * 4.0;
    let modular_vs_norm = if unit_regime {
        le_rel(rho, norm, tol)
    } else {
        le_rel(norm, rho, tol)
    };
    let power_chain = le_rel(chain_lower, norm, tol) && le_rel(norm, chain_upper, tol);
    Ok(NormModularReport {
        norm,
        rho,
        unit_regime,
        modular_vs_norm,
        power_chain,
        chain_lower,
        chain_upper,
    })
}
