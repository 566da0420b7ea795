//! Integer intervals, dyadic blocks, sets of integers stored as runs, and
//! finite-support non-negative sequences on ℤ.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed integer interval `[lo, hi]`, never empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct ZInterval {
    lo: i64,
    hi: i64,
}

impl ZInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInterval { lo, hi });
        }
        // cardinality must fit in a u64 and in i64 arithmetic downstream
        hi.checked_sub(lo)
            .and_then(|d| d.checked_add(1))
            .ok_or(Error::Overflow("interval cardinality"))?;
        Ok(Self { lo, hi })
    }

    /// Caller guarantees `lo <= hi`.
    pub(crate) const fn new_unchecked(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn singleton(n: i64) -> Self {
        Self { lo: n, hi: n }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn cardinality(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn contains_interval(&self, other: &ZInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &ZInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &ZInterval) -> Option<ZInterval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(ZInterval { lo, hi })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &ZInterval) -> ZInterval {
        ZInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// The `factor`-fold dilation: cardinality exactly `factor · |I|`, the extra
    /// `(factor − 1)·|I|` points split floor-left / ceil-right.
    pub fn dilate(&self, factor: u64) -> Result<ZInterval> {
        if factor == 0 {
            return Err(Error::Precondition("dilation factor must be >= 1".into()));
        }
        let extra = (factor - 1)
            .checked_mul(self.cardinality())
            .ok_or(Error::Overflow("dilate"))?;
        let left = i64::try_from(extra / 2).map_err(|_| Error::Overflow("dilate"))?;
        let right = i64::try_from(extra - extra / 2).map_err(|_| Error::Overflow("dilate"))?;
        let lo = self.lo.checked_sub(left).ok_or(Error::Overflow("dilate"))?;
        let hi = self.hi.checked_add(right).ok_or(Error::Overflow("dilate"))?;
        ZInterval::new(lo, hi)
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for ZInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

impl TryFrom<[i64; 2]> for ZInterval {
    type Error = Error;
    fn try_from(v: [i64; 2]) -> Result<Self> {
        ZInterval::new(v[0], v[1])
    }
}

impl From<ZInterval> for [i64; 2] {
    fn from(i: ZInterval) -> Self {
        [i.lo, i.hi]
    }
}

pub fn cardinality(interval: &ZInterval) -> u64 {
    interval.cardinality()
}

pub fn dilate(interval: &ZInterval, factor: u64) -> Result<ZInterval> {
    interval.dilate(factor)
}

/// Dyadic block `I_{N,j} = [(j−1)·2^N + 1, j·2^N]`.
///
/// Level 0 is admitted and yields the singleton `{j}`; the decomposition
/// descends to singletons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicBlock {
    pub level: u32,
    pub index: i64,
}

/// Largest admissible dyadic level; keeps `2^N` and block endpoints inside i64.
pub const MAX_DYADIC_LEVEL: u32 = 61;

impl DyadicBlock {
    pub fn new(level: u32, index: i64) -> Result<Self> {
        let b = Self { level, index };
        b.interval()?;
        Ok(b)
    }

    pub fn side(&self) -> Result<i64> {
        if self.level > MAX_DYADIC_LEVEL {
            return Err(Error::Overflow("dyadic level"));
        }
        Ok(1i64 << self.level)
    }

    pub fn interval(&self) -> Result<ZInterval> {
        let side = self.side()?;
        let hi = self.index.checked_mul(side).ok_or(Error::Overflow("dyadic block"))?;
        let lo = hi.checked_sub(side - 1).ok_or(Error::Overflow("dyadic block"))?;
        ZInterval::new(lo, hi)
    }

    /// The block at `level` containing `n`.
    pub fn containing(level: u32, n: i64) -> Result<Self> {
        if level > MAX_DYADIC_LEVEL {
            return Err(Error::Overflow("dyadic level"));
        }
        let side = 1i64 << level;
        let index = (n - 1).div_euclid(side) + 1;
        Ok(Self { level, index })
    }

    /// Left and right halves; `None` for singletons.
    pub fn children(&self) -> Option<(DyadicBlock, DyadicBlock)> {
        if self.level == 0 {
            return None;
        }
        let level = self.level - 1;
        Some((
            DyadicBlock { level, index: 2 * self.index - 1 },
            DyadicBlock { level, index: 2 * self.index },
        ))
    }

    pub fn parent(&self) -> DyadicBlock {
        DyadicBlock {
            level: self.level + 1,
            index: (self.index + 1).div_euclid(2),
        }
    }
}

pub fn dyadic_block(level: u32, index: i64) -> Result<ZInterval> {
    DyadicBlock::new(level, index)?.interval()
}

/// A finite set of integers stored as sorted, pairwise disjoint and
/// non-adjacent runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSet {
    runs: Vec<ZInterval>,
}

impl RunSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_intervals<I: IntoIterator<Item = ZInterval>>(intervals: I) -> Self {
        let mut v: Vec<ZInterval> = intervals.into_iter().collect();
        v.sort();
        let mut runs: Vec<ZInterval> = Vec::with_capacity(v.len());
        for iv in v {
            match runs.last_mut() {
                Some(last) if iv.lo <= last.hi.saturating_add(1) => {
                    last.hi = last.hi.max(iv.hi);
                }
                _ => runs.push(iv),
            }
        }
        Self { runs }
    }

    pub fn from_indices<I: IntoIterator<Item = i64>>(indices: I) -> Self {
        Self::from_intervals(indices.into_iter().map(ZInterval::singleton))
    }

    pub fn runs(&self) -> &[ZInterval] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of integers in the set.
    pub fn count(&self) -> u64 {
        self.runs.iter().map(|r| r.cardinality()).sum()
    }

    pub fn contains(&self, n: i64) -> bool {
        let i = self.runs.partition_point(|r| r.hi < n);
        i < self.runs.len() && self.runs[i].lo <= n
    }

    pub fn hull(&self) -> Option<ZInterval> {
        match (self.runs.first(), self.runs.last()) {
            (Some(a), Some(b)) => Some(ZInterval { lo: a.lo, hi: b.hi }),
            _ => None,
        }
    }

    pub fn union(&self, other: &RunSet) -> RunSet {
        RunSet::from_intervals(self.runs.iter().chain(other.runs.iter()).copied())
    }

    pub fn intersection(&self, other: &RunSet) -> RunSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (self.runs[i], other.runs[j]);
            if let Some(x) = a.intersection(&b) {
                out.push(x);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        RunSet { runs: out }
    }

    pub fn intersect_interval(&self, interval: &ZInterval) -> RunSet {
        RunSet {
            runs: self.runs.iter().filter_map(|r| r.intersection(interval)).collect(),
        }
    }

    pub fn difference(&self, other: &RunSet) -> RunSet {
        let mut out = Vec::new();
        let mut j = 0;
        for &run in &self.runs {
            let mut cur_lo = run.lo;
            while j < other.runs.len() && other.runs[j].hi < cur_lo {
                j += 1;
            }
            let mut k = j;
            let mut exhausted = false;
            while k < other.runs.len() && other.runs[k].lo <= run.hi {
                let cut = other.runs[k];
                if cut.lo > cur_lo {
                    out.push(ZInterval { lo: cur_lo, hi: cut.lo - 1 });
                }
                if cut.hi >= run.hi {
                    exhausted = true;
                    break;
                }
                cur_lo = cur_lo.max(cut.hi + 1);
                k += 1;
            }
            if !exhausted && cur_lo <= run.hi {
                out.push(ZInterval { lo: cur_lo, hi: run.hi });
            }
        }
        RunSet { runs: out }
    }

    pub fn is_subset_of(&self, other: &RunSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.runs.iter().flat_map(|r| r.iter())
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Finite-support non-negative sequence stored as a dense window starting at
/// `offset`; zero outside the window.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr", into = "SequenceRepr")]
pub struct Sequence {
    offset: i64,
    values: Vec<f64>,
    // double-double prefix sums: prefix[i] = hi[i] + lo[i] = Σ values[..i]
    prefix_hi: Vec<f64>,
    prefix_lo: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceRepr {
    offset: i64,
    values: Vec<f64>,
}

impl TryFrom<SequenceRepr> for Sequence {
    type Error = Error;
    fn try_from(r: SequenceRepr) -> Result<Self> {
        Sequence::new(r.offset, r.values)
    }
}

impl From<Sequence> for SequenceRepr {
    fn from(s: Sequence) -> Self {
        SequenceRepr {
            offset: s.offset,
            values: s.values,
        }
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        self.offset == other.offset && self.values == other.values
    }
}

impl Sequence {
    /// Builds a sequence, taking absolute values. Non-finite entries are rejected.
    pub fn new(offset: i64, values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: offset.saturating_add(i as i64),
                    value: *v,
                });
            }
            *v = v.abs();
        }
        if !values.is_empty() {
            offset
                .checked_add(values.len() as i64 - 1)
                .ok_or(Error::Overflow("sequence window"))?;
        }
        let mut prefix_hi = Vec::with_capacity(values.len() + 1);
        let mut prefix_lo = Vec::with_capacity(values.len() + 1);
        let (mut hi, mut lo) = (0.0f64, 0.0f64);
        prefix_hi.push(0.0);
        prefix_lo.push(0.0);
        for &v in &values {
            let (s, e) = two_sum(hi, v);
            lo += e;
            let (s2, e2) = two_sum(s, lo);
            hi = s2;
            lo = e2;
            prefix_hi.push(hi);
            prefix_lo.push(lo);
        }
        Ok(Self {
            offset,
            values,
            prefix_hi,
            prefix_lo,
        })
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new()).expect("empty sequence is valid")
    }

    /// `value` at `index`, zero elsewhere.
    pub fn delta(index: i64, value: f64) -> Result<Self> {
        Self::new(index, vec![value])
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored window, `None` when nothing is stored.
    pub fn window(&self) -> Option<ZInterval> {
        (!self.values.is_empty()).then(|| ZInterval {
            lo: self.offset,
            hi: self.offset + self.values.len() as i64 - 1,
        })
    }

    pub fn get(&self, n: i64) -> f64 {
        let i = n.wrapping_sub(self.offset);
        if n >= self.offset && (i as u64) < self.values.len() as u64 {
            self.values[i as usize]
        } else {
            0.0
        }
    }

    /// Smallest interval containing every nonzero entry.
    pub fn support_hull(&self) -> Option<ZInterval> {
        let first = self.values.iter().position(|&v| v != 0.0)?;
        let last = self.values.iter().rposition(|&v| v != 0.0)?;
        Some(ZInterval {
            lo: self.offset + first as i64,
            hi: self.offset + last as i64,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        let n = self.values.len();
        self.prefix_hi[n] + self.prefix_lo[n]
    }

    /// `Σ_{k∈I} a(k)`.
    pub fn interval_sum(&self, interval: &ZInterval) -> f64 {
        let Some(win) = self.window() else {
            return 0.0;
        };
        let Some(x) = win.intersection(interval) else {
            return 0.0;
        };
        let l = (x.lo - self.offset) as usize;
        let r = (x.hi - self.offset) as usize + 1;
        let (d, e) = two_sum(self.prefix_hi[r], -self.prefix_hi[l]);
        let s = d + (e + (self.prefix_lo[r] - self.prefix_lo[l]));
        // guards tiny negative round-off; all entries are non-negative
        s.max(0.0)
    }

    /// `b(n) = a(n)` on `I`, zero elsewhere. The stored window shrinks to
    /// `I ∩ window`.
    pub fn truncate(&self, interval: &ZInterval) -> Sequence {
        match self.window().and_then(|w| w.intersection(interval)) {
            Some(x) => {
                let l = (x.lo - self.offset) as usize;
                let r = (x.hi - self.offset) as usize + 1;
                Sequence::new(x.lo, self.values[l..r].to_vec()).expect("subwindow of a valid sequence")
            }
            None => Sequence::zero(),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Sequence> {
        Sequence::new(self.offset, self.values.iter().map(|v| v * c).collect())
    }

    pub fn shifted(&self, s: i64) -> Result<Sequence> {
        let offset = self.offset.checked_add(s).ok_or(Error::Overflow("shift"))?;
        Sequence::new(offset, self.values.clone())
    }

    /// Pointwise sum over the union of both windows.
    pub fn add(&self, other: &Sequence) -> Result<Sequence> {
        let win = match (self.window(), other.window()) {
            (Some(a), Some(b)) => a.hull(&b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return Ok(Sequence::zero()),
        };
        Sequence::new(win.lo, win.iter().map(|n| self.get(n) + other.get(n)).collect())
    }

    /// Iterator over `(index, value)` of the stored window.
    pub fn entries(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }
}

pub fn interval_sum(a: &Sequence, interval: &ZInterval) -> f64 {
    a.interval_sum(interval)
}

pub fn truncate(a: &Sequence, interval: &ZInterval) -> Sequence {
    a.truncate(interval)
}
