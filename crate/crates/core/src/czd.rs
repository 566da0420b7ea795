//! Calderón–Zygmund decomposition of a finite-support sequence at height `t`
//! on the absolute dyadic grid `I_{N,j} = [(j−1)2^N + 1, j 2^N]`, the `9t`
//! covering property, and the level-set partition used to dominate
//! `Σ M_α a(i)^{q(i)}`.
//!
//! The starting level `N_t` is the smallest `N ≥ 1` such that every dyadic
//! block at every level `≥ N` has α-average `≤ t`. For `α = 0` averages are
//! monotone in the level and this is just the first level whose blocks all
//! average `≤ t`; for `α > 0` they are not, and stopping at the first such
//! level would lose the covering property.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::exponent::{fractional_conjugate, ExponentFunction};
use crate::lattice::{DyadicBlock, RunSet, Sequence, ZInterval, MAX_DYADIC_LEVEL};
use crate::maximal::{alpha_average, alpha_weight, MaximalField};
use crate::norm::power;

/// Relative slack for the float comparisons against `2^{1−α} t` and `2t`.
const BOUND_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzDecomposition {
    pub t: f64,
    pub alpha: f64,
    pub n_t: u32,
    pub intervals: Vec<ZInterval>,
    pub averages: Vec<f64>,
    pub blocks: Vec<DyadicBlock>,
}

/// The machine-readable summary emitted by the `czd` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzSummary {
    pub n_t: u32,
    pub intervals: Vec<ZInterval>,
    pub averages: Vec<f64>,
}

impl CzDecomposition {
    pub fn summary(&self) -> CzSummary {
        CzSummary {
            n_t: self.n_t,
            intervals: self.intervals.clone(),
            averages: self.averages.clone(),
        }
    }

    pub fn union(&self) -> RunSet {
        RunSet::from_intervals(self.intervals.iter().copied())
    }

    /// `∪_j 2I_j`.
    pub fn dilated_union(&self) -> Result<RunSet> {
        let dilated = self
            .intervals
            .iter()
            .map(|i| i.dilate(2))
            .collect::<Result<Vec<_>>>()?;
        Ok(RunSet::from_intervals(dilated))
    }

    /// `2^{1−α} t`: the bound a selected half inherits from its unselected parent.
    pub fn parent_bound(&self) -> f64 {
        2f64.powf(1.0 - self.alpha) * self.t
    }
}

fn validate_height(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("height t must be positive, got {t}")))
    }
}

fn blocks_meeting(hull: ZInterval, level: u32) -> Result<impl Iterator<Item = DyadicBlock>> {
    let first = DyadicBlock::containing(level, hull.lo())?.index;
    let last = DyadicBlock::containing(level, hull.hi())?.index;
    Ok((first..=last).map(move |index| DyadicBlock { level, index }))
}

/// Starting level: one above the highest level holding a block with α-average `> t`.
fn starting_level(a: &Sequence, hull: ZInterval, alpha: f64, t: f64) -> Result<u32> {
    let total = a.total();
    let mut last_exceeding = 0u32;
    for level in 1..=MAX_DYADIC_LEVEL {
        for block in blocks_meeting(hull, level)? {
            if alpha_average(a, &block.interval()?, alpha) > t {
                last_exceeding = level;
                break;
            }
        }
        // every block at this level and above averages at most 2^{N(α−1)} Σ|a|
        if alpha_weight(1u64 << level, alpha) * total <= t {
            let n_t = last_exceeding + 1;
            if n_t > MAX_DYADIC_LEVEL {
                return Err(Error::Overflow("starting dyadic level"));
            }
            return Ok(n_t);
        }
    }
    Err(Error::Overflow("starting dyadic level"))
}

pub fn cz_decompose(a: &Sequence, alpha: f64, t: f64) -> Result<CzDecomposition> {
    check_alpha(alpha)?;
    validate_height(t)?;
    let hull = a.support_hull().ok_or(Error::Empty("sequence is identically zero"))?;
    let n_t = starting_level(a, hull, alpha, t)?;

    let mut out = CzDecomposition {
        t,
        alpha,
        n_t,
        intervals: Vec::new(),
        averages: Vec::new(),
        blocks: Vec::new(),
    };
    for top in blocks_meeting(hull, n_t)? {
        descend(a, hull, alpha, t, top, &mut out)?;
    }
    Ok(out)
}

fn descend(
    a: &Sequence,
    hull: ZInterval,
    alpha: f64,
    t: f64,
    block: DyadicBlock,
    out: &mut CzDecomposition,
) -> Result<()> {
    let Some((left, right)) = block.children() else {
        return Ok(());
    };
    for child in [left, right] {
        let interval = child.interval()?;
        if !interval.intersects(&hull) || a.interval_sum(&interval) == 0.0 {
            continue;
        }
        let avg = alpha_average(a, &interval, alpha);
        if avg > t {
            out.intervals.push(interval);
            out.averages.push(avg);
            out.blocks.push(child);
        } else {
            descend(a, hull, alpha, t, child, out)?;
        }
    }
    Ok(())
}

/// Structural properties of one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzPropertyReport {
    pub disjoint: bool,
    /// `t < avg ≤ 2^{1−α} t` for every selected interval.
    pub average_bounds: bool,
    /// The literal `avg ≤ 2t`.
    pub literal_two_t: bool,
    /// `|a(n)| ≤ t` off the union.
    pub outside_bound: bool,
    /// Every interval is the dyadic block recorded for it, at a level below `N_t`.
    pub dyadic_blocks: bool,
    /// `∪ I_j ⊆ {M_α a > t}`.
    pub union_in_superlevel: bool,
    pub max_average_ratio: f64,
}

impl CzPropertyReport {
    pub fn holds(&self) -> bool {
        self.disjoint && self.average_bounds && self.outside_bound && self.dyadic_blocks && self.union_in_superlevel
    }
}

pub fn check_cz_properties(a: &Sequence, cz: &CzDecomposition) -> Result<CzPropertyReport> {
    let mut sorted = cz.intervals.clone();
    sorted.sort();
    let disjoint = sorted.windows(2).all(|w| w[0].hi() < w[1].lo());
    let upper = cz.parent_bound();
    let average_bounds = cz
        .averages
        .iter()
        .all(|&avg| avg > cz.t && avg <= upper * (1.0 + BOUND_REL_TOL));
    let literal_two_t = cz.averages.iter().all(|&avg| avg <= 2.0 * cz.t * (1.0 + BOUND_REL_TOL));
    let union = cz.union();
    let outside_bound = a.entries().all(|(n, v)| union.contains(n) || v <= cz.t);
    let dyadic_blocks = cz
        .blocks
        .iter()
        .zip(&cz.intervals)
        .all(|(b, i)| b.level < cz.n_t && b.interval().ok() == Some(*i));
    let field = MaximalField::new(a, cz.alpha)?;
    let union_in_superlevel = union.is_subset_of(&field.superlevel(cz.t)?);
    let max_average_ratio = cz.averages.iter().map(|avg| avg / cz.t).fold(0.0, f64::max);
    Ok(CzPropertyReport {
        disjoint,
        average_bounds,
        literal_two_t,
        outside_bound,
        dyadic_blocks,
        union_in_superlevel,
        max_average_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingReport {
    pub t1: f64,
    pub t2: f64,
    pub coarse_count: usize,
    pub fine_count: usize,
    /// Intervals selected at `t1` lying in no interval selected at `t2`.
    pub violations: Vec<ZInterval>,
}

impl NestingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For `t1 > t2`, every interval selected at `t1` sits inside one selected at `t2`.
pub fn cz_nesting_check(a: &Sequence, alpha: f64, t1: f64, t2: f64) -> Result<NestingReport> {
    validate_height(t2)?;
    if !(t1 > t2) {
        return Err(Error::Precondition(format!("nesting needs t1 > t2 (t1 = {t1}, t2 = {t2})")));
    }
    let high = cz_decompose(a, alpha, t1)?;
    let low = cz_decompose(a, alpha, t2)?;
    let violations = high
        .intervals
        .iter()
        .filter(|i| !low.intervals.iter().any(|j| j.contains_interval(i)))
        .copied()
        .collect();
    Ok(NestingReport {
        t1,
        t2,
        coarse_count: high.intervals.len(),
        fine_count: low.intervals.len(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub t: f64,
    pub superlevel: RunSet,
    pub cover: RunSet,
    pub uncovered: RunSet,
}

impl CoveringReport {
    pub fn holds(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// `{M_α a > 9t} ⊆ ∪_j 2I_j^t`.
pub fn covering_check(a: &Sequence, alpha: f64, t: f64) -> Result<CoveringReport> {
    let cz = cz_decompose(a, alpha, t)?;
    let superlevel = MaximalField::new(a, alpha)?.superlevel(9.0 * t)?;
    let cover = cz.dilated_union()?;
    let uncovered = superlevel.difference(&cover);
    Ok(CoveringReport {
        t,
        superlevel,
        cover,
        uncovered,
    })
}

/// One `E_j^k` with the decomposition interval it was cut from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPiece {
    pub k: i32,
    pub j: usize,
    /// `I_j^k`
    pub interval: ZInterval,
    /// `2I_j^k`
    pub dilated: ZInterval,
    pub set: RunSet,
}

/// Shells `Ω_{k+1} \ Ω_k`, `Ω_k = {M_α a > A^k}`, `A = 9t`, split into the
/// disjoint pieces `E_j^k ⊆ 2I_j^k`. `I_j^k` comes from the decomposition at
/// height `A^{k+1}/9`, so that the covering property puts `Ω_{k+1}` inside
/// `∪_j 2I_j^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetPartition {
    pub t: f64,
    pub alpha: f64,
    pub base: f64,
    /// First level with a nonempty shell.
    pub first_level: i32,
    pub omega: BTreeMap<i32, RunSet>,
    pub shells: BTreeMap<i32, RunSet>,
    pub pieces: Vec<LevelPiece>,
}

impl LevelSetPartition {
    pub fn threshold(&self, k: i32) -> f64 {
        self.base.powi(k)
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        self.shells.keys().copied()
    }

    /// Union of all shells, i.e. `Ω_{k_max+1}`.
    pub fn domain(&self) -> RunSet {
        self.omega.values().next_back().cloned().unwrap_or_default()
    }

    /// Pairwise disjointness of all pieces across levels.
    pub fn pieces_disjoint(&self) -> bool {
        let mut seen = RunSet::empty();
        for piece in &self.pieces {
            if !piece.set.intersection(&seen).is_empty() {
                return false;
            }
            seen = seen.union(&piece.set);
        }
        true
    }

    /// `∪_j E_j^k = Ω_{k+1} \ Ω_k` for each level.
    pub fn shells_recovered(&self) -> bool {
        self.shells.iter().all(|(&k, shell)| {
            let union = RunSet::from_intervals(
                self.pieces
                    .iter()
                    .filter(|p| p.k == k)
                    .flat_map(|p| p.set.runs().iter().copied()),
            );
            union == *shell
        })
    }

    pub fn pieces_in_dilations(&self) -> bool {
        self.pieces
            .iter()
            .all(|p| p.set.is_subset_of(&RunSet::from_intervals([p.dilated])))
    }
}

pub fn validate_partition_height(t: f64) -> Result<()> {
    if t > 0.0 && t < 1.0 / 9.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("t must be in (0, 1/9), got {t}")))
    }
}

/// Builds the partition for `levels` consecutive nonempty-from-the-top shells.
pub fn level_set_partition(a: &Sequence, alpha: f64, t: f64, levels: usize) -> Result<LevelSetPartition> {
    validate_partition_height(t)?;
    check_alpha(alpha)?;
    let base = 9.0 * t;
    let field = MaximalField::new(a, alpha)?;
    let mut partition = LevelSetPartition {
        t,
        alpha,
        base,
        first_level: 0,
        omega: BTreeMap::new(),
        shells: BTreeMap::new(),
        pieces: Vec::new(),
    };
    let peak = field.max_value();
    if peak == 0.0 || levels == 0 {
        return Ok(partition);
    }
    let threshold = |k: i32| base.powi(k);
    let mut first = (peak.ln() / base.ln()).floor() as i32;
    while threshold(first) < peak {
        first -= 1;
    }
    while threshold(first + 1) >= peak {
        first += 1;
    }
    partition.first_level = first;
    let last = first
        .checked_add(i32::try_from(levels).map_err(|_| Error::Overflow("levels"))?)
        .ok_or(Error::Overflow("levels"))?;
    for k in first..=last {
        partition.omega.insert(k, field.superlevel(threshold(k))?);
    }
    for k in first..last {
        let shell = partition.omega[&(k + 1)].difference(&partition.omega[&k]);
        let cz = cz_decompose(a, alpha, threshold(k + 1) / 9.0)?;
        let mut taken = RunSet::empty();
        for (j, interval) in cz.intervals.iter().enumerate() {
            let dilated = interval.dilate(2)?;
            let set = shell.intersect_interval(&dilated).difference(&taken);
            taken = taken.union(&set);
            partition.pieces.push(LevelPiece {
                k,
                j,
                interval: *interval,
                dilated,
                set,
            });
        }
        partition.shells.insert(k, shell);
    }
    Ok(partition)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub t: f64,
    pub alpha: f64,
    pub base: f64,
    pub levels: usize,
    pub domain_points: u64,
    pub q_minus: f64,
    pub q_plus: f64,
    /// `Σ_{i∈domain} M_α a(i)^{q(i)}`
    pub lhs: f64,
    /// `Σ_{k,j} Σ_{i∈E_j^k} (|2I_j^k|^{α−1} Σ_{2I_j^k} a)^{q(i)}`, without constant.
    pub rhs_sum: f64,
    /// `A^{q_-} 2^{q_+(α−1)}`
    pub const_inverse_sign: f64,
    /// `A^{q_-} 2^{(1−α) q_+}`
    pub const_corrected: f64,
    /// `(2^{1−α}/t)^{q_+}`, the constant the partition heights guarantee.
    pub const_construction: f64,
    pub holds_inverse_sign: bool,
    pub holds_corrected: bool,
    pub holds_construction: bool,
    pub shells_recovered: bool,
}

impl DominationReport {
    /// `lhs / (C · rhs_sum)`; ≤ 1 means the inequality holds.
    pub fn ratio(&self, constant: f64) -> f64 {
        self.lhs / (constant * self.rhs_sum)
    }
}

/// Sum of `x^{q(i)}` over the points of `set`.
fn exponent_sum(set: &RunSet, q: &ExponentFunction, x: f64) -> f64 {
    let mut inside = 0u64;
    let mut sum = 0.0;
    for (n, qn) in q.window_entries() {
        if set.contains(n) {
            inside += 1;
            sum += power(x, qn);
        }
    }
    sum + (set.count() - inside) as f64 * power(x, q.p_inf())
}

pub fn domination_check(
    a: &Sequence,
    p: &ExponentFunction,
    alpha: f64,
    t: f64,
    levels: usize,
) -> Result<DominationReport> {
    let q = fractional_conjugate(p, alpha)?;
    let partition = level_set_partition(a, alpha, t, levels)?;
    let field = MaximalField::new(a, alpha)?;
    let domain = partition.domain();
    let lhs: f64 = domain.iter().map(|i| power(field.value(i), q.at(i))).sum();
    let mut rhs_sum = 0.0;
    for piece in &partition.pieces {
        if piece.set.is_empty() {
            continue;
        }
        let avg = alpha_average(a, &piece.dilated, alpha);
        rhs_sum += exponent_sum(&piece.set, &q, avg);
    }
    let (q_minus, q_plus) = (q.p_minus(), q.p_plus());
    let base = partition.base;
    let const_inverse_sign = base.powf(q_minus) * 2f64.powf(q_plus * (alpha - 1.0));
    let const_corrected = base.powf(q_minus) * 2f64.powf((1.0 - alpha) * q_plus);
    let const_construction = (2f64.powf(1.0 - alpha) / t).powf(q_plus);
    let holds = |c: f64| lhs <= c * rhs_sum * (1.0 + BOUND_REL_TOL);
    Ok(DominationReport {
        t,
        alpha,
        base,
        levels,
        domain_points: domain.count(),
        q_minus,
        q_plus,
        lhs,
        rhs_sum,
        const_inverse_sign,
        const_corrected,
        const_construction,
        holds_inverse_sign: holds(const_inverse_sign),
        holds_corrected: holds(const_corrected),
        holds_construction: holds(const_construction),
        shells_recovered: partition.shells_recovered(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> ZInterval {
        ZInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn single_spike_in_block() {
        let a = Sequence::new(1, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let cz = cz_decompose(&a, 0.0, 1.0).unwrap();
        assert_eq!(cz.n_t, 2);
        assert_eq!(cz.intervals, vec![iv(1, 2)]);
        assert_eq!(cz.averages, vec![2.0]);
        assert!(check_cz_properties(&a, &cz).unwrap().holds());
    }

    #[test]
    fn flat_block_high_and_low_heights() {
        let a = Sequence::new(1, vec![1.0; 8]).unwrap();
        let cz = cz_decompose(&a, 0.0, 2.0).unwrap();
        assert!(cz.intervals.is_empty());
        assert!(check_cz_properties(&a, &cz).unwrap().outside_bound);
        let cz = cz_decompose(&a, 0.0, 0.5).unwrap();
        assert_eq!(cz.n_t, 4);
        assert_eq!(cz.intervals, vec![iv(1, 8)]);
        assert_eq!(cz.averages, vec![1.0]);
    }

    #[test]
    fn spike_covering_example() {
        let a = Sequence::delta(1, 100.0).unwrap();
        let cz = cz_decompose(&a, 0.0, 1.0).unwrap();
        assert_eq!(cz.n_t, 7);
        assert_eq!(cz.intervals, vec![iv(1, 64)]);
        let cov = covering_check(&a, 0.0, 1.0).unwrap();
        assert_eq!(cov.cover.runs(), &[iv(-31, 96)]);
        assert_eq!(cov.superlevel.runs(), &[iv(-9, 11)]);
        assert!(cov.holds());
        let cov = covering_check(&a, 0.0, 50.0).unwrap();
        assert!(cov.superlevel.is_empty() && cov.holds());
    }

    #[test]
    fn long_flat_block_with_positive_alpha_keeps_covering() {
        // first-level-only stopping would select nothing here while
        // M_α a = 2^{K/2} > 9t on the block
        let k = 8u32;
        let a = Sequence::new(1, vec![1.0; 1 << k]).unwrap();
        let t = 2f64.powf(k as f64 / 2.0) / 10.0;
        let cz = cz_decompose(&a, 0.5, t).unwrap();
        assert!(cz.n_t > k);
        assert!(!cz.intervals.is_empty());
        assert!(check_cz_properties(&a, &cz).unwrap().holds());
        assert!(covering_check(&a, 0.5, t).unwrap().holds());
    }

    #[test]
    fn nesting_examples() {
        let a = Sequence::new(1, vec![4.0, 0.0, 0.0, 0.0]).unwrap();
        let r = cz_nesting_check(&a, 0.0, 2.0, 1.0).unwrap();
        assert!(r.holds());
        let r = cz_nesting_check(&a, 0.0, 1e6, 1e-3).unwrap();
        assert_eq!(r.coarse_count, 0);
        assert!(r.holds());
        assert!(cz_nesting_check(&a, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn decomposition_errors() {
        let a = Sequence::delta(0, 1.0).unwrap();
        assert!(cz_decompose(&a, 0.0, 0.0).is_err());
        assert!(cz_decompose(&a, 1.0, 1.0).is_err());
        assert!(matches!(cz_decompose(&Sequence::zero(), 0.0, 1.0), Err(Error::Empty(_))));
    }

    #[test]
    fn delta_level_sets_are_explicit() {
        let d = Sequence::delta(0, 1.0).unwrap();
        let part = level_set_partition(&d, 0.0, 1.0 / 18.0, 6).unwrap();
        assert_eq!(part.first_level, 0);
        for (&k, omega) in &part.omega {
            if k <= 0 {
                assert!(omega.is_empty());
            } else {
                let r = (1i64 << k) - 2;
                assert_eq!(omega.runs(), &[iv(-r, r)], "k={k}");
            }
        }
        assert!(part.pieces_disjoint());
        assert!(part.shells_recovered());
        assert!(part.pieces_in_dilations());
        assert!(level_set_partition(&d, 0.0, 1.0 / 9.0, 3).is_err());
        assert!(level_set_partition(&d, 0.0, 0.0, 3).is_err());
    }

    #[test]
    fn delta_domination_sides() {
        let d = Sequence::delta(0, 1.0).unwrap();
        let p = ExponentFunction::constant(2.0).unwrap();
        let r = domination_check(&d, &p, 0.0, 1.0 / 18.0, 6).unwrap();
        let want_lhs: f64 = (-62i64..=62).map(|n| 1.0 / ((n.abs() + 1) as f64).powi(2)).sum();
        assert!((r.lhs - want_lhs).abs() < 1e-12);
        assert!((r.const_corrected - 1.0).abs() < 1e-12);
        assert!(r.shells_recovered);
        assert!(r.holds_construction);
        // every 2I average is a candidate in the sup, so rhs_sum ≤ lhs, strictly here
        assert!(r.rhs_sum < r.lhs);
        assert!(!r.holds_corrected);
    }

    #[test]
    fn domination_of_zero_sequence_is_trivial() {
        let z = Sequence::new(0, vec![0.0; 3]).unwrap();
        let p = ExponentFunction::constant(2.0).unwrap();
        let r = domination_check(&z, &p, 0.0, 0.1, 4).unwrap();
        assert_eq!((r.lhs, r.rhs_sum, r.domain_points), (0.0, 0.0, 0));
    }
}
