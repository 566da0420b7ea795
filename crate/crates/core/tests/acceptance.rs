//! Acceptance criteria, one line each. Runs as a plain binary so the verdicts
//! are printed even when the test runner captures output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use varseq::exponent::ExponentFunction;
use varseq::harness::checks::{self, CZ_HEIGHTS, DOMINATION_HEIGHTS};
use varseq::harness::corpus::{generate_corpus, CorpusItem, CorpusSpec, ExponentLaw, ValueLaw};
use varseq::harness::CheckRun;
use varseq::{RunSet, Sequence, ZInterval};

const VALUE_LAWS: [ValueLaw; 4] = [
    ValueLaw::Uniform01,
    ValueLaw::Spike,
    ValueLaw::GeometricDecay,
    ValueLaw::BernoulliSparse,
];
const EXPONENT_LAWS: [ExponentLaw; 4] = [
    ExponentLaw::Constant,
    ExponentLaw::Bump,
    ExponentLaw::LhDecay,
    ExponentLaw::RandomRange,
];
const ALPHAS: [f64; 3] = [0.0, 0.25, 0.5];

/// `count` items split evenly over the four value laws (and exponent laws,
/// rotated), each sub-corpus seeded from `seed`.
fn mixed(seed: u64, count: usize, width: usize, alphas: &[f64], p_range: Option<(f64, f64)>) -> Vec<CorpusItem> {
    let mut out = Vec::with_capacity(count);
    for (k, v) in VALUE_LAWS.iter().enumerate() {
        let n = count / 4 + usize::from(k < count % 4);
        let mut spec = CorpusSpec::new(seed + k as u64, n, width, *v, EXPONENT_LAWS[k]).with_alphas(alphas);
        if let Some((lo, hi)) = p_range {
            spec = spec.with_p_range(lo, hi);
        }
        out.extend(generate_corpus(&spec).unwrap());
    }
    out
}

fn corpus(seed: u64, count: usize, width: usize, v: ValueLaw, e: ExponentLaw, alphas: &[f64]) -> CorpusSpec {
    CorpusSpec::new(seed, count, width, v, e).with_alphas(alphas)
}

fn summary(run: &CheckRun) -> String {
    let r = &run.report;
    let mut s = format!("{}: {} cases, {} failures", r.check_name, r.cases, r.failures);
    if let Some(c) = r.empirical_constant {
        s += &if c.abs() < 1e6 { format!(", constant {c:.6}") } else { format!(", constant {c:.6e}") };
    }
    s
}

fn clean(run: &CheckRun) -> bool {
    run.report.cases > 0 && run.report.failures == 0
}

/// Compares against a frozen bit pattern and reports the current one.
fn pinned(label: &str, value: f64, bits: u64, notes: &mut Vec<String>) -> bool {
    let ok = value.to_bits() == bits;
    notes.push(format!("{label}={value:.12} [{:#018x}{}]", value.to_bits(), if ok { "" } else { " != pinned" }));
    ok
}

type Criterion = fn() -> (bool, String);

fn c01_constant_norm_oracle() -> (bool, String) {
    let items = mixed(101, 1000, 256, &[0.0], Some((1.0, 8.0)))
        .into_iter()
        .map(|mut it| {
            it.exponent = ExponentFunction::constant(it.exponent.p_inf()).unwrap();
            it
        })
        .collect::<Vec<_>>();
    let run = checks::norm_constant_oracle(&items);
    (clean(&run) && run.report.cases == 1000, summary(&run))
}

fn c02_unit_modular() -> (bool, String) {
    let run = checks::unit_modular(&mixed(201, 1000, 128, &[0.0], Some((1.0, 6.0))));
    (clean(&run) && run.report.cases == 1000, summary(&run))
}

fn c03_norm_modular_chains() -> (bool, String) {
    let items = mixed(301, 500, 128, &[0.0], Some((1.0, 6.0)));
    let inner = checks::norm_modular_chains(&items, 0.5);
    let outer = checks::norm_modular_chains(&items, 2.0);
    (
        clean(&inner) && clean(&outer) && inner.report.cases == 500 && outer.report.cases == 500,
        format!("{}; {}", summary(&inner), summary(&outer)),
    )
}

fn c04_scaling_bounds() -> (bool, String) {
    let run = checks::scaling_bounds(&mixed(401, 500, 128, &[0.0], Some((1.0, 6.0))), &[0.3, 1.0, 2.7]);
    (clean(&run) && run.report.cases == 1500, summary(&run))
}

fn c05_fatou_truncation() -> (bool, String) {
    let run = checks::fatou_truncation(&mixed(501, 200, 64, &[0.0], Some((1.0, 6.0))));
    (clean(&run) && run.report.cases == 200, summary(&run))
}

fn c06_maximal_oracle() -> (bool, String) {
    let run = checks::maximal_oracle(&mixed(601, 300, 128, &ALPHAS, None), &ALPHAS);
    (clean(&run) && run.report.cases == 900, summary(&run))
}

fn c07_cz_properties() -> (bool, String) {
    let run = checks::cz_properties(&mixed(701, 500, 64, &ALPHAS, None), &ALPHAS, &CZ_HEIGHTS);
    let frac = run.report.metric("literal_two_t_fraction").unwrap_or(f64::NAN);
    (
        clean(&run) && run.report.cases == 500,
        format!("{}, literal avg <= 2t in {:.1}% of cases", summary(&run), 100.0 * frac),
    )
}

fn c08_nesting() -> (bool, String) {
    let run = checks::cz_nesting(&mixed(801, 300, 64, &ALPHAS, None), &ALPHAS, &[2.0, 5.0, 10.0]);
    (clean(&run) && run.report.cases == 300, summary(&run))
}

fn c09_covering() -> (bool, String) {
    let run = checks::covering(&mixed(901, 500, 64, &ALPHAS, None), &ALPHAS, &CZ_HEIGHTS);
    (clean(&run) && run.report.cases == 500, summary(&run))
}

fn c10_domination() -> (bool, String) {
    let items = mixed(1001, 200, 32, &ALPHAS, None);
    let (corrected, construction) = checks::domination(&items, &ALPHAS, &DOMINATION_HEIGHTS, 3);
    let r = &corrected.report;
    let detail = format!(
        "{}; inverse-sign constant holds in {}/{}; {}",
        summary(&corrected),
        r.metric("inverse_sign_constant_holds").unwrap_or(0.0),
        r.cases,
        summary(&construction),
    );
    (clean(&corrected) && r.cases == 200, detail)
}

const PINNED_KEY_C: [(u64, u64); 2] = [(1101, 0x3ff6dfb659b70893), (1102, 0x3ff6107c67a6d5cc)];
const PINNED_KEY_EXAMPLE: u64 = 0x3ff0000000000000;

fn c11_key_comparison() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for (seed, bits) in PINNED_KEY_C {
        let spec = corpus(seed, 200, 64, ValueLaw::Uniform01, ExponentLaw::LhDecay, &[0.0]);
        let run = checks::key_comparison(&generate_corpus(&spec).unwrap());
        let again = checks::key_comparison(&generate_corpus(&spec).unwrap());
        let c = run.report.empirical_constant.unwrap_or(f64::NAN);
        ok &= clean(&run) && run.report.cases == 200 && c.is_finite();
        ok &= again.report == run.report;
        ok &= pinned(&format!("seed {seed} max C"), c, bits, &mut notes);
    }
    // F = 1 on E = [−32, 32], p = 2 + 1/ln(e+|n|) there, N = 2
    let e = ZInterval::new(-32, 32).unwrap();
    let p = ExponentFunction::new(
        -32,
        e.iter().map(|n| 2.0 + 1.0 / (std::f64::consts::E + n.abs() as f64).ln()).collect(),
        2.0,
    )
    .unwrap();
    let f = Sequence::new(-32, vec![1.0; 65]).unwrap();
    let r = checks::check_key_comparison(&RunSet::from_intervals([e]), &f, &p, 2.0).unwrap();
    ok &= r.c.is_finite();
    ok &= pinned("lh-decay example C", r.c, PINNED_KEY_EXAMPLE, &mut notes);
    (ok, notes.join("; "))
}

const PINNED_STRONG: [(f64, u64, u64); 3] = [
    (0.0, 1201, 0x40178efc81c8287c),
    (0.25, 1202, 0x401049e5608e5b64),
    (0.5, 1203, 0x400551da47cac2dd),
];

fn c12_strong_type() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for (alpha, seed, bits) in PINNED_STRONG {
        let p_range = if alpha == 0.0 { Some((1.1, 4.0)) } else { None };
        let items = mixed(seed, 500, 64, &[alpha], p_range);
        let run = checks::strong_type(&items, alpha).unwrap();
        let c = run.report.empirical_constant.unwrap_or(f64::NAN);
        ok &= clean(&run) && run.report.cases == 500;
        notes.push(format!(
            "alpha {alpha}: {} failures, homogeneity dev {:.1e}",
            run.report.failures,
            run.report.metric("max_homogeneity_dev").unwrap_or(f64::NAN)
        ));
        ok &= pinned(&format!("alpha {alpha} max ratio"), c, bits, &mut notes);
    }
    (ok, notes.join("; "))
}

const PINNED_WEAK: [(f64, u64, u64); 3] = [
    (0.0, 1301, 0x3fe34a53b33357b6),
    (0.25, 1302, 0x3fe115a0460e451a),
    (0.5, 1303, 0x3fc9e03187b8f6bc),
];

fn c13_weak_type() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for (alpha, seed, bits) in PINNED_WEAK {
        let mut items = mixed(seed, 400, 64, &[alpha], if alpha == 0.0 { Some((1.0, 3.0)) } else { None });
        if alpha == 0.0 {
            // p ≡ 1 throughout
            let spec = corpus(seed, 100, 64, ValueLaw::Spike, ExponentLaw::Constant, &[0.0]).with_p_range(1.0, 1.0);
            items.extend(generate_corpus(&spec).unwrap());
        } else {
            let spec = corpus(seed, 100, 64, ValueLaw::Uniform01, ExponentLaw::RandomRange, &[alpha]);
            items.extend(generate_corpus(&spec).unwrap());
        }
        let run = checks::weak_type(&items, alpha, None).unwrap();
        let c = run.report.empirical_constant.unwrap_or(f64::NAN);
        ok &= clean(&run) && run.report.cases == 500 && c.is_finite();
        ok &= pinned(&format!("alpha {alpha} sup ratio"), c, bits, &mut notes);
    }
    // δ_0, α = 0, p ≡ 1: {M a > 9t} = [−m, m] with m = ⌈1/(9t)⌉ − 2
    let d = Sequence::delta(0, 1.0).unwrap();
    let p1 = ExponentFunction::constant(1.0).unwrap();
    let grid = checks::default_t_grid(1.0);
    let got = checks::weak_type_ratio(&d, &p1, 0.0, Some(&grid)).unwrap();
    let derived = grid
        .iter()
        .map(|&t| {
            let m = (1.0 / (9.0 * t)).ceil() - 2.0;
            if m >= 0.0 {
                t * (2.0 * m + 1.0)
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    let dev = ((got - derived) / derived).abs();
    ok &= dev < 1e-10 && got <= 2.0 / 9.0;
    notes.push(format!("delta case {got:.12} vs derived {derived:.12}"));
    (ok, notes.join("; "))
}

fn c14_holder() -> (bool, String) {
    let items = mixed(1401, 500, 64, &[0.25, 0.5, 0.75], None);
    let run = checks::holder_variant(&items, &[0.1, 0.25, 0.5, 0.75, 0.9], 1401);
    let a = Sequence::new(-3, vec![2.5; 11]).unwrap();
    let r = checks::check_holder_variant(&a, ZInterval::new(-2, 5).unwrap(), 1.7, 0.3).unwrap();
    let eq = ((r.lhs - r.rhs) / r.rhs).abs();
    (
        clean(&run) && run.report.cases == 500 && eq <= 1e-10,
        format!("{}; constant sequence |lhs/rhs - 1| = {eq:.1e}", summary(&run)),
    )
}

fn c15_geometric_covering() -> (bool, String) {
    let stated = checks::geometric_covering(16, 4).unwrap();
    let five = checks::geometric_covering(16, 5).unwrap();
    let pairs = stated.report.metric("pairs").unwrap_or(0.0);
    let bad_pairs: f64 = stated.rows.iter().map(|r| r.score).sum();
    (
        clean(&stated),
        format!(
            "J subset of 4I: {bad_pairs} failing pairs of {pairs} ({} intervals I affected); J subset of 5I: {} failures",
            stated.report.failures, five.report.failures
        ),
    )
}

fn c16_determinism() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"command": "verify", "corpus": {"seed": 1601, "count": 30, "window_width": 24,
            "value_law": "spike", "exponent_law": "lh-decay", "alpha_list": [0.0, 0.25, 0.5]}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_varseq"))
            .env("VARSEQ_THREADS", threads)
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        outputs.push((status.code(), std::fs::read(&out).unwrap()));
    }
    let same = outputs.windows(2).all(|w| w[0].1 == w[1].1);
    let codes: Vec<_> = outputs.iter().map(|o| o.0).collect();
    (
        same && codes.iter().all(|&c| c == Some(0)),
        format!("3 runs (1, 4, 4 threads), {} bytes each, identical: {same}, exit codes {codes:?}", outputs[0].1.len()),
    )
}

fn main() {
    let criteria: [(&str, Criterion); 16] = [
        ("constant-exponent norm oracle", c01_constant_norm_oracle),
        ("unit-modular identity", c02_unit_modular),
        ("norm-modular chains", c03_norm_modular_chains),
        ("scaling bounds", c04_scaling_bounds),
        ("Fatou truncation", c05_fatou_truncation),
        ("maximal oracle equivalence", c06_maximal_oracle),
        ("CZ properties", c07_cz_properties),
        ("CZ nesting", c08_nesting),
        ("9t covering", c09_covering),
        ("domination, corrected constant", c10_domination),
        ("key comparison lemma", c11_key_comparison),
        ("strong type", c12_strong_type),
        ("weak type", c13_weak_type),
        ("Hölder variant", c14_holder),
        ("geometric covering fact", c15_geometric_covering),
        ("determinism", c16_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let start = Instant::now();
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|x| x == &n.to_string()) {
            continue;
        }
        let t0 = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        println!(
            "criterion {n:>2} {}  {name} ({:.1}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(n);
        }
    }
    println!("acceptance: {} failed {failed:?}, total {:.1}s", failed.len(), start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
