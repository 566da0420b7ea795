//! Seeded corpora of `(sequence, exponent)` pairs.
//!
//! All draws come from one Xoshiro256** stream seeded through SplitMix64
//! (`seed_from_u64`), consumed item by item in a fixed order, so a spec
//! reproduces its corpus bit for bit on every platform with IEEE doubles.

use rand::Rng;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{check_alpha, Error, Result};
use crate::exponent::ExponentFunction;
use crate::lattice::Sequence;

pub type CorpusRng = Xoshiro256StarStar;

/// Largest window a corpus may ask for.
pub const MAX_WINDOW_WIDTH: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueLaw {
    Uniform01,
    Spike,
    GeometricDecay,
    BernoulliSparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentLaw {
    Constant,
    Bump,
    LhDecay,
    RandomRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub window_width: usize,
    pub value_law: ValueLaw,
    pub exponent_law: ExponentLaw,
    pub alpha_list: Vec<f64>,
    /// Exponent range; defaults follow from `alpha_list`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_hi: Option<f64>,
}

impl CorpusSpec {
    pub fn new(seed: u64, count: usize, window_width: usize, value_law: ValueLaw, exponent_law: ExponentLaw) -> Self {
        Self {
            seed,
            count,
            window_width,
            value_law,
            exponent_law,
            alpha_list: vec![0.0],
            p_lo: None,
            p_hi: None,
        }
    }

    pub fn with_alphas(mut self, alphas: &[f64]) -> Self {
        self.alpha_list = alphas.to_vec();
        self
    }

    pub fn with_p_range(mut self, lo: f64, hi: f64) -> Self {
        self.p_lo = Some(lo);
        self.p_hi = Some(hi);
        self
    }

    pub fn alpha_max(&self) -> f64 {
        self.alpha_list.iter().copied().fold(0.0, f64::max)
    }

    /// `(p_lo, p_hi)`: explicit values, or `[1.1, 4]` for `α = 0` and
    /// `[1.1, 1 + 0.9(1/α_max − 1)]` otherwise, which keeps `p_+ < 1/α`.
    pub fn p_range(&self) -> (f64, f64) {
        let am = self.alpha_max();
        let hi = if am > 0.0 { 1.0 + 0.9 * (1.0 / am - 1.0) } else { 4.0 };
        let lo = self.p_lo.unwrap_or(1.1_f64.min(hi));
        (lo, self.p_hi.unwrap_or(hi.max(lo)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_width == 0 || self.window_width > MAX_WINDOW_WIDTH {
            return Err(Error::Precondition(format!(
                "window_width must be in [1, {MAX_WINDOW_WIDTH}], got {}",
                self.window_width
            )));
        }
        for &a in &self.alpha_list {
            check_alpha(a)?;
        }
        let (lo, hi) = self.p_range();
        if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Precondition(format!("exponent range [{lo}, {hi}] must satisfy 1 ≤ p_lo ≤ p_hi < ∞")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusItem {
    pub index: usize,
    pub digest: String,
    pub sequence: Sequence,
    pub exponent: ExponentFunction,
}

/// First 16 hex digits of SHA-256 over the item's exact bit patterns.
pub fn item_digest(a: &Sequence, p: &ExponentFunction) -> String {
    let mut h = Sha256::new();
    h.update(a.offset().to_le_bytes());
    h.update((a.len() as u64).to_le_bytes());
    for v in a.values() {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update(p.window_lo().to_le_bytes());
    h.update((p.window_values().len() as u64).to_le_bytes());
    for v in p.window_values() {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update(p.p_inf().to_bits().to_le_bytes());
    let mut s = hex::encode(h.finalize());
    s.truncate(16);
    s
}

pub fn generate_corpus(spec: &CorpusSpec) -> Result<Vec<CorpusItem>> {
    spec.validate()?;
    let mut rng = CorpusRng::seed_from_u64(spec.seed);
    let (p_lo, p_hi) = spec.p_range();
    (0..spec.count)
        .map(|index| {
            let sequence = draw_sequence(&mut rng, spec.value_law, spec.window_width)?;
            let exponent = draw_exponent(&mut rng, spec.exponent_law, &sequence, p_lo, p_hi)?;
            Ok(CorpusItem {
                index,
                digest: item_digest(&sequence, &exponent),
                sequence,
                exponent,
            })
        })
        .collect()
}

/// Uniform on `(0, 1]`.
fn unit_open(rng: &mut CorpusRng) -> f64 {
    1.0 - rng.gen::<f64>()
}

fn draw_sequence(rng: &mut CorpusRng, law: ValueLaw, width: usize) -> Result<Sequence> {
    let w = width as i64;
    let min_len = if law == ValueLaw::Spike { 3.min(w) } else { 1 };
    let len = rng.gen_range(min_len..=w) as usize;
    let offset = rng.gen_range(-w..=w);
    let values = match law {
        ValueLaw::Uniform01 => (0..len).map(|_| unit_open(rng)).collect(),
        ValueLaw::Spike => {
            let mut v: Vec<f64> = (0..len).map(|_| rng.gen_range(0.01..1.0)).collect();
            let peak = v.iter().copied().fold(0.0, f64::max);
            let at = rng.gen_range(0..len);
            v[at] = peak * rng.gen_range(20.0..100.0);
            v
        }
        ValueLaw::GeometricDecay => {
            let ratio = rng.gen_range(0.3..0.9);
            let amp = rng.gen_range(0.5..2.0);
            let center = rng.gen_range(0..len) as i32;
            (0..len as i32).map(|i| amp * f64::powi(ratio, (i - center).abs())).collect()
        }
        ValueLaw::BernoulliSparse => {
            let mut v: Vec<f64> = (0..len)
                .map(|_| if rng.gen_bool(0.2) { rng.gen_range(0.1..=1.0) } else { 0.0 })
                .collect();
            let at = rng.gen_range(0..len);
            if v[at] == 0.0 {
                v[at] = rng.gen_range(0.1..=1.0);
            }
            v
        }
    };
    Sequence::new(offset, values)
}

fn draw_in(rng: &mut CorpusRng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

fn draw_exponent(rng: &mut CorpusRng, law: ExponentLaw, a: &Sequence, lo: f64, hi: f64) -> Result<ExponentFunction> {
    let pad = (a.len() / 4) as i64;
    let window_lo = a.offset() - pad;
    let window_len = a.len() + 2 * pad as usize;
    match law {
        ExponentLaw::Constant => ExponentFunction::constant(draw_in(rng, lo, hi)),
        ExponentLaw::Bump => {
            let p_inf = draw_in(rng, lo, hi);
            let peak = draw_in(rng, lo, hi);
            let center = window_lo + rng.gen_range(0..window_len as i64);
            let half_width = rng.gen_range(1..=(window_len as i64 / 2).max(1)) as f64;
            let values = (0..window_len as i64)
                .map(|i| {
                    let d = ((window_lo + i - center).abs() as f64) / half_width;
                    p_inf + (peak - p_inf) * (1.0 - d).max(0.0)
                })
                .collect();
            ExponentFunction::new(window_lo, values, p_inf)
        }
        ExponentLaw::LhDecay => {
            // p_inf + c/ln(e+|n|) with 1/ln(e+|n|) ≤ 1 stays in [lo, hi]
            let p_inf = draw_in(rng, lo, (lo + hi) / 2.0);
            let c = rng.gen::<f64>() * (hi - p_inf);
            let values = (0..window_len as i64)
                .map(|i| {
                    let n = (window_lo + i) as f64;
                    (p_inf + c / (std::f64::consts::E + n.abs()).ln()).min(hi)
                })
                .collect();
            ExponentFunction::new(window_lo, values, p_inf)
        }
        ExponentLaw::RandomRange => {
            let p_inf = draw_in(rng, lo, hi);
            let values = (0..window_len).map(|_| draw_in(rng, lo, hi)).collect();
            ExponentFunction::new(window_lo, values, p_inf)
        }
    }
}
