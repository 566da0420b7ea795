//! The `varseq` command line: `norm`, `maximal`, `czd`, `verify`, `corpus`.
//!
//! Every flag mirrors a key of the JSON config file; flags win. Exit status is
//! 0 on success, 1 when a gating check fails, 2 on usage or input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::czd::{check_cz_properties, cz_decompose};
use crate::error::{check_alpha, Error, Result};
use crate::exponent::ExponentFunction;
use crate::harness::report::rows_to_csv;
use crate::harness::{gating_failures, generate_corpus, run_suite, CorpusSpec, ExponentLaw, SuiteOptions, ValueLaw};
use crate::io::{parse_json, read_exponent, read_sequence, write_atomic};
use crate::lattice::{Sequence, ZInterval};
use crate::maximal::MaximalField;
use crate::norm::{luxemburg_norm, DEFAULT_REL_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Luxemburg norm of a sequence
    Norm,
    /// Fractional maximal function on a window, as `n,value` rows
    Maximal,
    /// Calderón–Zygmund decomposition at height t
    Czd,
    /// Run the verification suite over a seeded corpus
    Verify,
    /// Emit a seeded corpus
    Corpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// The merged configuration of one invocation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    /// Sequence file (JSON or `index value` lines).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Exponent file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<PathBuf>,
    /// Constant exponent, instead of an exponent file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_const: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Absolute weak type heights for `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    /// Evaluation window `[lo, hi]` for `maximal`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<ZInterval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<CorpusSpec>,
    /// Overrides the corpus seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Level-set shells per domination case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip)]
    pub inject_fault: bool,
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = parse_json(&text, "config")?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha {
            check_alpha(a)?;
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Precondition(format!("t must be positive, got {t}")));
            }
        }
        if let Some(c) = &self.corpus {
            c.validate()?;
        }
        Ok(())
    }

    /// `self` with every field set in `over` replaced.
    pub fn overridden_by(self, over: RunConfig) -> RunConfig {
        RunConfig {
            command: over.command.or(self.command),
            input: over.input.or(self.input),
            exponent: over.exponent.or(self.exponent),
            p_const: over.p_const.or(self.p_const),
            alpha: over.alpha.or(self.alpha),
            t: over.t.or(self.t),
            t_grid: over.t_grid.or(self.t_grid),
            window: over.window.or(self.window),
            corpus: over.corpus.or(self.corpus),
            seed: over.seed.or(self.seed),
            levels: over.levels.or(self.levels),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            inject_fault: over.inject_fault || self.inject_fault,
        }
    }

    fn alpha_or_zero(&self) -> f64 {
        self.alpha.unwrap_or(0.0)
    }

    fn sequence(&self) -> Result<Sequence> {
        let path = self.input.as_ref().ok_or_else(|| Error::Precondition("missing --input".into()))?;
        read_sequence(path)
    }

    fn exponent_function(&self) -> Result<ExponentFunction> {
        match (&self.exponent, self.p_const) {
            (Some(_), Some(_)) => Err(Error::Precondition("give either --exponent or --p-const, not both".into())),
            (Some(path), None) => read_exponent(path),
            (None, Some(p)) => ExponentFunction::constant(p),
            (None, None) => Err(Error::Precondition("missing --exponent (or --p-const)".into())),
        }
    }

    /// The configured corpus, else a small default, with `seed` applied.
    pub fn corpus_spec(&self) -> CorpusSpec {
        let mut spec = self.corpus.clone().unwrap_or_else(|| {
            CorpusSpec::new(0, 40, 24, ValueLaw::Uniform01, ExponentLaw::RandomRange).with_alphas(&[0.0, 0.25, 0.5])
        });
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        spec
    }
}

#[derive(Debug, Parser)]
#[command(name = "varseq", version, about = "Maximal operators and norms on variable-exponent sequence spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandKind>,
    /// JSON config file; flags override its keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Sequence file
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Exponent file
    #[arg(long, global = true)]
    pub exponent: Option<PathBuf>,
    /// Constant exponent
    #[arg(long, global = true)]
    pub p_const: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Height
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Comma-separated weak type heights
    #[arg(long, global = true, value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    /// Evaluation window `lo:hi`
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<ZInterval>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Output file (written atomically); stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, hide = true)]
    pub inject_fault: bool,
}

fn parse_window(s: &str) -> std::result::Result<ZInterval, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower end `{lo}`"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper end `{hi}`"))?;
    ZInterval::new(lo, hi).map_err(|e| e.to_string())
}

impl Cli {
    fn flags(&self) -> RunConfig {
        RunConfig {
            command: self.command,
            input: self.input.clone(),
            exponent: self.exponent.clone(),
            p_const: self.p_const,
            alpha: self.alpha,
            t: self.t,
            t_grid: self.t_grid.clone(),
            window: self.window,
            corpus: None,
            seed: self.seed,
            levels: self.levels,
            out: self.out.clone(),
            format: self.format,
            inject_fault: self.inject_fault,
        }
    }

    pub fn config(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => parse_config(path)?,
            None => RunConfig::default(),
        };
        if let (Some(a), Some(b)) = (base.command, self.command) {
            if a != b {
                return Err(Error::Precondition(format!("config command {a:?} conflicts with subcommand {b:?}")));
            }
        }
        let cfg = base.overridden_by(self.flags());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Bytes to emit and whether a gating check failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub bytes: Vec<u8>,
    pub failed: bool,
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn execute(cfg: &RunConfig) -> Result<Artifact> {
    let command = cfg
        .command
        .ok_or_else(|| Error::Precondition("no command given (norm, maximal, czd, verify, corpus)".into()))?;
    let format = cfg.format.unwrap_or(if command == CommandKind::Maximal { Format::Csv } else { Format::Json });
    let mut failed = false;
    let bytes = match command {
        CommandKind::Norm => {
            let norm = luxemburg_norm(&cfg.sequence()?, &cfg.exponent_function()?, DEFAULT_REL_TOL)?;
            match format {
                Format::Json => json_bytes(&norm)?,
                Format::Csv => {
                    format!("norm,achieved_modular,tol\n{},{},{}\n", norm.value, norm.achieved_modular, norm.tolerance)
                        .into_bytes()
                }
            }
        }
        CommandKind::Maximal => {
            let a = cfg.sequence()?;
            let field = MaximalField::new(&a, cfg.alpha_or_zero())?;
            let window = match cfg.window {
                Some(w) => w,
                None => {
                    let hull = a.support_hull().ok_or(Error::Empty("sequence is identically zero; pass --window"))?;
                    hull.dilate(3)?
                }
            };
            if window.cardinality() > 1 << 24 {
                return Err(Error::Precondition("window too wide".into()));
            }
            let profile = field.profile(window);
            match format {
                Format::Json => json_bytes(&profile)?,
                Format::Csv => {
                    let mut out = String::from("n,value\n");
                    for (n, v) in profile.entries() {
                        let _ = writeln!(out, "{n},{v}");
                    }
                    out.into_bytes()
                }
            }
        }
        CommandKind::Czd => {
            let a = cfg.sequence()?;
            let t = cfg.t.ok_or_else(|| Error::Precondition("missing --t".into()))?;
            let cz = cz_decompose(&a, cfg.alpha_or_zero(), t)?;
            failed = !check_cz_properties(&a, &cz)?.holds();
            let summary = cz.summary();
            match format {
                Format::Json => json_bytes(&summary)?,
                Format::Csv => {
                    let mut out = String::from("lo,hi,average\n");
                    for (i, avg) in summary.intervals.iter().zip(&summary.averages) {
                        let _ = writeln!(out, "{},{},{avg}", i.lo(), i.hi());
                    }
                    out.into_bytes()
                }
            }
        }
        CommandKind::Verify => {
            let opts = SuiteOptions {
                levels: cfg.levels.unwrap_or(SuiteOptions::default().levels),
                t_grid: cfg.t_grid.clone(),
                inject_fault: cfg.inject_fault,
            };
            let runs = run_suite(&cfg.corpus_spec(), &opts)?;
            failed = gating_failures(runs.iter().map(|r| &r.report)) > 0;
            match format {
                Format::Json => json_bytes(&runs.iter().map(|r| &r.report).collect::<Vec<_>>())?,
                Format::Csv => rows_to_csv(runs.iter().flat_map(|r| &r.rows)).into_bytes(),
            }
        }
        CommandKind::Corpus => {
            let items = generate_corpus(&cfg.corpus_spec())?;
            match format {
                Format::Json => json_bytes(&items)?,
                Format::Csv => {
                    let mut out = String::from("index,digest,n,value,p\n");
                    for it in &items {
                        for (n, v) in it.sequence.entries() {
                            let _ = writeln!(out, "{},{},{n},{v},{}", it.index, it.digest, it.exponent.at(n));
                        }
                    }
                    out.into_bytes()
                }
            }
        }
    };
    Ok(Artifact { bytes, failed })
}

/// Parses `args`, runs the command, writes the artifact and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = cli.config().and_then(|cfg| {
        let artifact = execute(&cfg)?;
        match &cfg.out {
            Some(path) => write_atomic(path, &artifact.bytes)?,
            None => std::io::stdout().write_all(&artifact.bytes)?,
        }
        Ok(artifact.failed)
    });
    match result {
        Ok(false) => EXIT_OK,
        Ok(true) => {
            eprintln!("varseq: a gating check failed");
            EXIT_FAILED_CHECK
        }
        Err(e) => {
            eprintln!("varseq: error: {e}");
            EXIT_USAGE
        }
    }
}
