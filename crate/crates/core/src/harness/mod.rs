//! Seeded corpora and the empirical checks run over them.

pub mod checks;
pub mod corpus;
pub mod report;
pub mod suite;

pub use corpus::{generate_corpus, CorpusItem, CorpusSpec, ExponentLaw, ValueLaw};
pub use report::{CaseRow, CheckRun, VerificationReport, WorstCase};
pub use suite::{gating_failures, run_suite, SuiteOptions};
