//! Fractional maximal operator
//! `M_α a(n) = sup_{I ∋ n} |I|^{α−1} Σ_{k∈I} |a(k)|`.
//!
//! For finite-support `a` and `α < 1` the supremum is attained on intervals
//! with endpoints in `[min(n, h_lo), max(n, h_hi)]`, `[h_lo, h_hi]` being the
//! support hull: extending an interval past the hull only adds zeros while
//! growing `|I|`. Every candidate value is computed through [`alpha_average`],
//! so the brute-force and production paths agree bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::lattice::{RunSet, Sequence, ZInterval};

/// `|I|^{α−1}` for `|I| = card`.
#[inline]
pub fn alpha_weight(card: u64, alpha: f64) -> f64 {
    (card as f64).powf(alpha - 1.0)
}

/// `|I|^{α−1} Σ_{k∈I} |a(k)|`.
#[inline]
pub fn alpha_average(a: &Sequence, interval: &ZInterval, alpha: f64) -> f64 {
    alpha_weight(interval.cardinality(), alpha) * a.interval_sum(interval)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalProfile {
    pub window: ZInterval,
    pub values: Vec<f64>,
    pub alpha: f64,
}

impl MaximalProfile {
    pub fn get(&self, n: i64) -> Option<f64> {
        self.window
            .contains(n)
            .then(|| self.values[(n - self.window.lo()) as usize])
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.window.iter().zip(self.values.iter().copied())
    }

    /// The profile as a sequence on its window.
    pub fn to_sequence(&self) -> Result<Sequence> {
        Sequence::new(self.window.lo(), self.values.clone())
    }
}

/// Direct evaluation of the defining maximum: every interval `[l, r] ∋ n`
/// with endpoints in the hull-extended range.
pub fn m_alpha_point(a: &Sequence, alpha: f64, n: i64) -> Result<f64> {
    check_alpha(alpha)?;
    let Some(hull) = a.support_hull() else {
        return Ok(0.0);
    };
    let lo = n.min(hull.lo());
    let hi = n.max(hull.hi());
    let mut best = 0.0f64;
    for l in lo..=n {
        for r in n..=hi {
            best = best.max(alpha_average(a, &ZInterval::new_unchecked(l, r), alpha));
        }
    }
    Ok(best)
}

/// `M_α a` for one sequence, with the values on the support hull cached.
#[derive(Debug, Clone)]
pub struct MaximalField<'a> {
    a: &'a Sequence,
    alpha: f64,
    hull: Option<ZInterval>,
    inside: Vec<f64>,
}

impl<'a> MaximalField<'a> {
    pub fn new(a: &'a Sequence, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let hull = a.support_hull();
        let inside = match hull {
            Some(h) => hull_sweep(a, alpha, h),
            None => Vec::new(),
        };
        Ok(Self { a, alpha, hull, inside })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sequence(&self) -> &Sequence {
        self.a
    }

    pub fn hull(&self) -> Option<ZInterval> {
        self.hull
    }

    /// `max_n M_α a(n)`, attained on the hull.
    pub fn max_value(&self) -> f64 {
        self.inside.iter().copied().fold(0.0, f64::max)
    }

    pub fn value(&self, n: i64) -> f64 {
        let Some(h) = self.hull else {
            return 0.0;
        };
        if n < h.lo() {
            // left endpoint pinned at n; right endpoint ranges over the hull
            (h.lo()..=h.hi())
                .map(|r| alpha_average(self.a, &ZInterval::new_unchecked(n, r), self.alpha))
                .fold(0.0, f64::max)
        } else if n > h.hi() {
            (h.lo()..=h.hi())
                .map(|l| alpha_average(self.a, &ZInterval::new_unchecked(l, n), self.alpha))
                .fold(0.0, f64::max)
        } else {
            self.inside[(n - h.lo()) as usize]
        }
    }

    pub fn profile(&self, window: ZInterval) -> MaximalProfile {
        MaximalProfile {
            window,
            values: window.iter().map(|n| self.value(n)).collect(),
            alpha: self.alpha,
        }
    }

    /// Distance bound beyond which `M_α a ≤ s`: a point at distance `d` from
    /// the hull sees at most `(d+1)^{α−1} Σ|a|`.
    pub fn search_radius(&self, s: f64) -> Result<i64> {
        let r = (self.a.total() / s).powf(1.0 / (1.0 - self.alpha)).ceil();
        if !r.is_finite() || r > (1u64 << 60) as f64 {
            return Err(Error::Overflow("superlevel search radius"));
        }
        Ok(r as i64)
    }

    /// `{n : M_α a(n) > s}` as maximal runs.
    pub fn superlevel(&self, s: f64) -> Result<RunSet> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Precondition(format!("superlevel threshold must be positive, got {s}")));
        }
        let Some(h) = self.hull else {
            return Ok(RunSet::empty());
        };
        let radius = self.search_radius(s)?;
        h.lo().checked_sub(radius).ok_or(Error::Overflow("superlevel search"))?;
        h.hi().checked_add(radius).ok_or(Error::Overflow("superlevel search"))?;

        let mut runs = Vec::new();
        // outside the hull M_α a is nonincreasing in the distance to it
        let reach = |point: &dyn Fn(i64) -> i64| -> Option<i64> {
            if radius < 1 || self.value(point(1)) <= s {
                return None;
            }
            let (mut good, mut bad) = (1i64, radius + 1);
            while bad - good > 1 {
                let mid = good + (bad - good) / 2;
                if self.value(point(mid)) > s {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            Some(good)
        };
        if let Some(d) = reach(&|d| h.lo() - d) {
            runs.push(ZInterval::new_unchecked(h.lo() - d, h.lo() - 1));
        }
        let mut start: Option<i64> = None;
        for (i, &v) in self.inside.iter().enumerate() {
            let n = h.lo() + i as i64;
            match (v > s, start) {
                (true, None) => start = Some(n),
                (false, Some(st)) => {
                    runs.push(ZInterval::new_unchecked(st, n - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(st) = start {
            runs.push(ZInterval::new_unchecked(st, h.hi()));
        }
        if let Some(d) = reach(&|d| h.hi() + d) {
            runs.push(ZInterval::new_unchecked(h.hi() + 1, h.hi() + d));
        }
        Ok(RunSet::from_intervals(runs))
    }
}

/// `M_α a` on the hull in `O(W²)`: for each left endpoint `l`, a suffix maximum
/// over right endpoints gives `max_{r ≥ n} v(l, r)` at every `n ≥ l`.
fn hull_sweep(a: &Sequence, alpha: f64, hull: ZInterval) -> Vec<f64> {
    let width = hull.cardinality() as usize;
    let mut out = vec![0.0f64; width];
    for l in hull.lo()..=hull.hi() {
        let mut suffix = 0.0f64;
        for r in (l..=hull.hi()).rev() {
            suffix = suffix.max(alpha_average(a, &ZInterval::new_unchecked(l, r), alpha));
            let slot = &mut out[(r - hull.lo()) as usize];
            *slot = slot.max(suffix);
        }
    }
    out
}

pub fn m_alpha_profile(a: &Sequence, alpha: f64, window: ZInterval) -> Result<MaximalProfile> {
    Ok(MaximalField::new(a, alpha)?.profile(window))
}

pub fn superlevel_set(a: &Sequence, alpha: f64, s: f64) -> Result<Vec<ZInterval>> {
    Ok(MaximalField::new(a, alpha)?.superlevel(s)?.runs().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> ZInterval {
        ZInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn delta_profile_closed_forms() {
        let d = Sequence::delta(0, 1.0).unwrap();
        for n in -12i64..=12 {
            let m = m_alpha_point(&d, 0.0, n).unwrap();
            assert!((m - 1.0 / (n.abs() as f64 + 1.0)).abs() < 1e-15);
            let m = m_alpha_point(&d, 0.5, n).unwrap();
            assert!((m - (n.abs() as f64 + 1.0).powf(-0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_block_has_unit_maximal_function() {
        let a = Sequence::new(0, vec![1.0; 8]).unwrap();
        for n in 0..8 {
            assert_eq!(m_alpha_point(&a, 0.0, n).unwrap(), 1.0);
        }
    }

    #[test]
    fn profile_matches_point_evaluation() {
        let a = Sequence::new(-3, vec![0.0, 0.4, 2.0, 0.0, 0.0, 1.1, 0.3, 0.0]).unwrap();
        for alpha in [0.0, 0.25, 0.5, 0.9] {
            let prof = m_alpha_profile(&a, alpha, iv(-20, 20)).unwrap();
            for (n, v) in prof.entries() {
                assert_eq!(v, m_alpha_point(&a, alpha, n).unwrap(), "alpha={alpha} n={n}");
            }
        }
    }

    #[test]
    fn zero_sequence() {
        let z = Sequence::new(2, vec![0.0; 4]).unwrap();
        let prof = m_alpha_profile(&z, 0.3, iv(-5, 5)).unwrap();
        assert!(prof.values.iter().all(|&v| v == 0.0));
        assert!(superlevel_set(&z, 0.0, 0.1).unwrap().is_empty());
    }

    #[test]
    fn alpha_out_of_range() {
        let d = Sequence::delta(0, 1.0).unwrap();
        assert!(matches!(m_alpha_point(&d, 1.0, 0), Err(Error::AlphaOutOfRange(_))));
        assert!(m_alpha_profile(&d, -0.5, iv(0, 0)).is_err());
    }

    #[test]
    fn superlevel_examples() {
        let a = Sequence::delta(1, 100.0).unwrap();
        assert_eq!(superlevel_set(&a, 0.0, 9.0).unwrap(), vec![iv(-9, 11)]);
        assert!(superlevel_set(&a, 0.0, 100.0).unwrap().is_empty());
        let b = Sequence::new(0, vec![1.0; 8]).unwrap();
        let runs = superlevel_set(&b, 0.0, 0.5).unwrap();
        assert_eq!(runs.len(), 1);
        assert!(runs[0].contains_interval(&iv(0, 7)));
        assert!(superlevel_set(&b, 0.0, 0.0).is_err());
        assert!(superlevel_set(&b, 0.0, -1.0).is_err());
    }

    #[test]
    fn superlevel_matches_pointwise_scan() {
        let a = Sequence::new(-4, vec![0.5, 0.0, 3.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        for alpha in [0.0, 0.25, 0.5] {
            let field = MaximalField::new(&a, alpha).unwrap();
            for s in [0.05, 0.2, 0.9, 1.7, 2.9] {
                let set = field.superlevel(s).unwrap();
                let r = field.search_radius(s).unwrap();
                let h = a.support_hull().unwrap();
                for n in (h.lo() - r - 2)..=(h.hi() + r + 2) {
                    let m = m_alpha_point(&a, alpha, n).unwrap();
                    assert_eq!(set.contains(n), m > s, "alpha={alpha} s={s} n={n}");
                }
            }
        }
    }
}
