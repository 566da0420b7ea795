use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Outcome of one check over one case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub passed: bool,
    /// The quantity the check ranks cases by (a ratio, slack or count).
    pub score: f64,
    pub quantities: Vec<(&'static str, f64)>,
    pub error: Option<String>,
}

impl CaseOutcome {
    pub fn judged(passed: bool, score: f64, quantities: Vec<(&'static str, f64)>) -> Self {
        Self {
            passed: passed && score.is_finite(),
            score,
            quantities,
            error: None,
        }
    }

    pub fn failed(err: impl ToString) -> Self {
        Self {
            passed: false,
            score: f64::NAN,
            quantities: Vec::new(),
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorstCase {
    pub case: usize,
    pub digest: String,
    pub quantities: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationReport {
    pub check_name: String,
    pub cases: u64,
    pub failures: u64,
    /// Whether failures of this check count as a failed run.
    pub gating: bool,
    pub worst_case: Option<WorstCase>,
    pub empirical_constant: Option<f64>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub(crate) fn set_metric(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.metrics.insert(key.to_string(), value);
        }
    }
}

/// One CSV row: a single case of a single check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub check: String,
    pub case: usize,
    pub digest: String,
    pub passed: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRun {
    pub report: VerificationReport,
    pub rows: Vec<CaseRow>,
}

impl CheckRun {
    /// A report for a check that could not run at all.
    pub fn skipped(name: &str, gating: bool, note: String) -> Self {
        Self {
            report: VerificationReport {
                check_name: name.to_string(),
                cases: 0,
                failures: 0,
                gating,
                worst_case: None,
                empirical_constant: None,
                metrics: BTreeMap::new(),
                note: Some(note),
            },
            rows: Vec::new(),
        }
    }
}

/// Folds per-case outcomes, in case order, into a report.
///
/// The worst case is the first failing case with the largest score, or the
/// largest-score case when nothing failed. `constant` publishes the max score
/// as the empirical constant.
pub fn aggregate(
    name: &str,
    gating: bool,
    constant: bool,
    digests: &[String],
    outcomes: &[CaseOutcome],
) -> CheckRun {
    debug_assert_eq!(digests.len(), outcomes.len());
    let mut failures = 0u64;
    let mut worst: Option<usize> = None;
    let mut max_score = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut finite = 0u64;
    for (i, o) in outcomes.iter().enumerate() {
        if !o.passed {
            failures += 1;
        }
        if o.score.is_finite() {
            sum += o.score;
            finite += 1;
            max_score = max_score.max(o.score);
        }
        let better = match worst {
            None => true,
            Some(w) => {
                let cur = &outcomes[w];
                match (o.passed, cur.passed) {
                    (false, true) => true,
                    (true, false) => false,
                    _ => o.score > cur.score || (cur.score.is_nan() && !o.score.is_nan()),
                }
            }
        };
        if better {
            worst = Some(i);
        }
    }
    let worst_case = worst.map(|w| {
        let o = &outcomes[w];
        let mut quantities = BTreeMap::new();
        let mut dropped = Vec::new();
        for &(k, v) in o.quantities.iter().chain(std::iter::once(&("score", o.score))) {
            if v.is_finite() {
                quantities.insert(k.to_string(), v);
            } else {
                dropped.push(format!("{k}={v}"));
            }
        }
        let mut error = o.error.clone();
        if !dropped.is_empty() {
            let extra = format!("non-finite: {}", dropped.join(", "));
            error = Some(match error {
                Some(e) => format!("{e}; {extra}"),
                None => extra,
            });
        }
        WorstCase {
            case: w,
            digest: digests[w].clone(),
            quantities,
            error,
        }
    });
    let mut report = VerificationReport {
        check_name: name.to_string(),
        cases: outcomes.len() as u64,
        failures,
        gating,
        worst_case,
        empirical_constant: (constant && finite > 0).then_some(max_score),
        metrics: BTreeMap::new(),
        note: None,
    };
    if finite > 0 {
        report.set_metric("max_score", max_score);
        report.set_metric("mean_score", sum / finite as f64);
    }
    let rows = outcomes
        .iter()
        .zip(digests)
        .enumerate()
        .map(|(case, (o, d))| CaseRow {
            check: name.to_string(),
            case,
            digest: d.clone(),
            passed: o.passed,
            score: o.score,
        })
        .collect();
    CheckRun { report, rows }
}

/// Rows as CSV with header `check,case,digest,passed,score`.
pub fn rows_to_csv<'a>(rows: impl IntoIterator<Item = &'a CaseRow>) -> String {
    let mut out = String::from("check,case,digest,passed,score\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.check, r.case, r.digest, r.passed, r.score);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digests(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("d{i}")).collect()
    }

    #[test]
    fn worst_case_prefers_failures_then_score() {
        let outcomes = vec![
            CaseOutcome::judged(true, 5.0, vec![]),
            CaseOutcome::judged(false, 1.0, vec![("x", 2.0)]),
            CaseOutcome::judged(false, 3.0, vec![]),
            CaseOutcome::judged(false, 3.0, vec![]),
        ];
        let run = aggregate("c", true, true, &digests(4), &outcomes);
        assert_eq!(run.report.failures, 3);
        let w = run.report.worst_case.clone().unwrap();
        assert_eq!((w.case, w.digest.as_str()), (2, "d2"));
        assert_eq!(run.report.empirical_constant, Some(5.0));
        assert_eq!(run.report.metric("mean_score"), Some(3.0));
    }

    #[test]
    fn non_finite_scores_fail_and_stay_serializable() {
        let outcomes = vec![
            CaseOutcome::judged(true, 1.0, vec![]),
            CaseOutcome::judged(true, f64::INFINITY, vec![]),
            CaseOutcome::failed("boom"),
        ];
        let run = aggregate("c", true, true, &digests(3), &outcomes);
        assert_eq!(run.report.failures, 2);
        let json = serde_json::to_string(&run.report).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, run.report);
        assert_eq!(back.worst_case.unwrap().case, 1);
    }

    #[test]
    fn empty_and_csv() {
        let run = aggregate("c", false, true, &[], &[]);
        assert_eq!((run.report.cases, run.report.empirical_constant), (0, None));
        assert!(run.report.worst_case.is_none());
        let run = aggregate("c", false, false, &digests(1), &[CaseOutcome::judged(true, 0.5, vec![])]);
        assert_eq!(rows_to_csv(&run.rows), "check,case,digest,passed,score\nc,0,d0,true,0.5\n");
    }
}
