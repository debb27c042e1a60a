//! Command-line front end: named-state demos, checks on state files, Monte
//! Carlo campaigns and q-grid scans.
//!
//! Exit codes: 0 success or HOLDS, 1 usage/parse/config error, 2 a VIOLATED
//! verdict, 3 INDETERMINATE (`check` only).

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concurrence;
use crate::entropy::{self, QParam};
use crate::inequalities::{self, InequalityError};
use crate::qmat::DensityMatrix;
use crate::report::{Bound, InequalityReport, Verdict, EXACT_TOL, OPTIMIZER_TOL};
use crate::states::{self, PureState, Seed, StateInput};
use crate::tsallis::{self, GapRegime, RoofOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Largest qubit count accepted by campaigns and demos.
pub const MAX_QUBITS: usize = 10;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("unknown state '{0}' (expected ghz, w or werner)")]
    UnknownState(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<InequalityError> for CliError {
    fn from(e: InequalityError) -> Self {
        CliError::Check(e.to_string())
    }
}

impl From<states::StateError> for CliError {
    fn from(e: states::StateError) -> Self {
        match e {
            states::StateError::Parse(msg) => CliError::Parse(msg),
            other => CliError::Schema(other.to_string()),
        }
    }
}

/// Which q values a check is asserted for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QRegime {
    /// The check has no entropic index.
    Free,
    /// 2 <= q <= 3.
    Monogamy,
    /// q = 2 or q = 3.
    MonogamySet,
    /// 1 <= q <= 2 or 3 <= q <= 4.
    Polygamy,
    /// q >= 1.
    AtLeastOne,
}

impl QRegime {
    pub fn accepts(self, q: f64) -> bool {
        let Ok(q) = QParam::new(q) else { return false };
        match self {
            QRegime::Free => true,
            QRegime::Monogamy => (2.0..=3.0).contains(&q.value()),
            QRegime::MonogamySet => q.in_monogamy_set(),
            QRegime::Polygamy => q.in_polygamy_range(),
            QRegime::AtLeastOne => q.value() >= 1.0,
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            QRegime::Free => "any",
            QRegime::Monogamy => "2 <= q <= 3",
            QRegime::MonogamySet => "q in {2, 3}",
            QRegime::Polygamy => "1 <= q <= 2 or 3 <= q <= 4",
            QRegime::AtLeastOne => "q >= 1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    Ckw,
    DualPolygamy,
    TsallisMonogamy,
    TsallisPolygamy,
    GenMonogamy,
    Reciprocity,
    MultipartyPolygamy,
    GenPolygamy,
    Subadditivity,
    Triangle,
    #[serde(rename = "identity-22d")]
    #[value(name = "identity-22d")]
    Identity22d,
}

impl Inequality {
    pub const ALL: [Inequality; 11] = [
        Inequality::Ckw,
        Inequality::DualPolygamy,
        Inequality::TsallisMonogamy,
        Inequality::TsallisPolygamy,
        Inequality::GenMonogamy,
        Inequality::Reciprocity,
        Inequality::MultipartyPolygamy,
        Inequality::GenPolygamy,
        Inequality::Subadditivity,
        Inequality::Triangle,
        Inequality::Identity22d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Ckw => "ckw",
            Inequality::DualPolygamy => "dual-polygamy",
            Inequality::TsallisMonogamy => "tsallis-monogamy",
            Inequality::TsallisPolygamy => "tsallis-polygamy",
            Inequality::GenMonogamy => "gen-monogamy",
            Inequality::Reciprocity => "reciprocity",
            Inequality::MultipartyPolygamy => "multiparty-polygamy",
            Inequality::GenPolygamy => "gen-polygamy",
            Inequality::Subadditivity => "subadditivity",
            Inequality::Triangle => "triangle",
            Inequality::Identity22d => "identity-22d",
        }
    }

    pub fn regime(self) -> QRegime {
        match self {
            Inequality::Ckw | Inequality::DualPolygamy | Inequality::Identity22d => QRegime::Free,
            Inequality::TsallisMonogamy => QRegime::Monogamy,
            Inequality::GenMonogamy => QRegime::MonogamySet,
            Inequality::TsallisPolygamy | Inequality::GenPolygamy => QRegime::Polygamy,
            Inequality::Reciprocity
            | Inequality::MultipartyPolygamy
            | Inequality::Subadditivity
            | Inequality::Triangle => QRegime::AtLeastOne,
        }
    }

    /// Whether a sampled state for this check is a two-qubit mixed state
    /// rather than an n-qubit pure state.
    fn samples_two_qubit_mixed(self) -> bool {
        matches!(self, Inequality::Subadditivity | Inequality::Triangle)
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Inequality::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown inequality '{s}'")))
    }
}

/// Subsystem groups separated by `|`, members by `,`, e.g. `0|1|2,3`.
pub fn parse_partition(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split('|')
        .map(|group| {
            group
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad subsystem index '{t}' in partition '{text}'")))
                })
                .collect()
        })
        .collect()
}

/// Everything needed to evaluate one check on one state.
#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub inequality: Inequality,
    pub q: Option<f64>,
    pub focus: usize,
    pub partition: Option<Vec<Vec<usize>>>,
    pub tolerance: f64,
    pub roof: RoofOptions,
}

impl CheckSpec {
    pub fn new(inequality: Inequality, q: Option<f64>) -> Self {
        Self {
            inequality,
            q,
            focus: 0,
            partition: None,
            tolerance: EXACT_TOL,
            roof: RoofOptions::default(),
        }
    }
}

fn require_pure(input: &StateInput, what: Inequality) -> Result<&PureState, CliError> {
    match input {
        StateInput::Pure(s) => Ok(s),
        StateInput::Mixed(_) => Err(CliError::Check(format!("{what} needs a pure-state input"))),
    }
}

fn q_for(spec: &CheckSpec) -> Result<QParam, CliError> {
    let q = spec
        .q
        .ok_or_else(|| CliError::Usage(format!("{} needs --q", spec.inequality)))?;
    QParam::new(q).map_err(|e| CliError::Usage(e.to_string()))
}

/// Two groups `A|B` of single subsystems, defaulting to 0 and 1.
fn pair_groups(spec: &CheckSpec) -> Result<(usize, usize), CliError> {
    match &spec.partition {
        None => Ok((0, 1)),
        Some(groups) => match groups.as_slice() {
            [a, b] if a.len() == 1 && b.len() == 1 => Ok((a[0], b[0])),
            _ => Err(CliError::Usage(format!(
                "{} takes --partition a|b naming two single qubits",
                spec.inequality
            ))),
        },
    }
}

/// Three groups for the reciprocity check; by default the first two
/// subsystems alone and everything else in the third group.
fn three_groups(spec: &CheckSpec, n: usize) -> Result<[Vec<usize>; 3], CliError> {
    match &spec.partition {
        None if n >= 3 => Ok([vec![0], vec![1], (2..n).collect()]),
        None => Err(CliError::Check(format!("reciprocity needs at least 3 subsystems, got {n}"))),
        Some(groups) => <[Vec<usize>; 3]>::try_from(groups.clone())
            .map_err(|_| CliError::Usage("reciprocity takes --partition with three groups".into())),
    }
}

/// Regroups a state into the two-party form used by the entropy checks.
/// Only contiguous splits `0..k | k..n` are supported.
fn bipartite_view(input: &StateInput, spec: &CheckSpec) -> Result<DensityMatrix, CliError> {
    let m = input.to_density();
    let n = m.subsystem_dims().len();
    let split = match &spec.partition {
        None if n == 2 => return Ok(m),
        None => return Err(CliError::Check(format!("{} needs two subsystems or --partition", spec.inequality))),
        Some(groups) => match groups.as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() && a.iter().chain(b).copied().eq(0..n) => a.len(),
            _ => {
                return Err(CliError::Usage(format!(
                    "{} takes --partition 0,..,k-1|k,..,n-1 (contiguous, in order)",
                    spec.inequality
                )))
            }
        },
    };
    let dims = m.subsystem_dims();
    let da: usize = dims[..split].iter().product();
    let db: usize = dims[split..].iter().product();
    let regrouped = m
        .into_matrix()
        .with_dims(vec![da, db])
        .map_err(|e| CliError::Check(e.to_string()))?;
    crate::qmat::validate_density(regrouped, &Default::default()).map_err(|e| CliError::Check(e.to_string()))
}

/// Evaluates one check. The descriptor of the returned report is empty.
pub fn evaluate(input: &StateInput, spec: &CheckSpec) -> Result<InequalityReport, CliError> {
    let tol = spec.tolerance;
    let focus = spec.focus;
    let report = match spec.inequality {
        Inequality::Ckw => inequalities::ckw_monogamy(require_pure(input, spec.inequality)?, focus, tol)?,
        Inequality::DualPolygamy => inequalities::dual_polygamy(require_pure(input, spec.inequality)?, focus, tol)?,
        Inequality::TsallisMonogamy => {
            inequalities::tsallis_monogamy(require_pure(input, spec.inequality)?, focus, q_for(spec)?, tol)?
        }
        Inequality::TsallisPolygamy => inequalities::tsallis_polygamy(
            require_pure(input, spec.inequality)?,
            focus,
            q_for(spec)?,
            tol,
            &spec.roof,
        )?,
        Inequality::GenMonogamy => {
            let (a, b) = pair_groups(spec)?;
            inequalities::generalized_monogamy_on(require_pure(input, spec.inequality)?, a, b, q_for(spec)?, tol, &spec.roof)?
        }
        Inequality::GenPolygamy => {
            let (a, b) = pair_groups(spec)?;
            inequalities::generalized_polygamy_on(require_pure(input, spec.inequality)?, a, b, q_for(spec)?, tol, &spec.roof)?
        }
        Inequality::MultipartyPolygamy => {
            inequalities::teoa_multiparty(require_pure(input, spec.inequality)?, focus, q_for(spec)?, tol)?
        }
        Inequality::Reciprocity => {
            let groups = three_groups(spec, input.dims().len())?;
            inequalities::teoa_reciprocity(input, &groups, q_for(spec)?, tol, &spec.roof)?
        }
        Inequality::Subadditivity => entropy::check_subadditivity(&bipartite_view(input, spec)?, q_for(spec)?, tol)
            .map_err(|e| CliError::Check(e.to_string()))?,
        Inequality::Triangle => entropy::check_triangle(&bipartite_view(input, spec)?, q_for(spec)?, tol)
            .map_err(|e| CliError::Check(e.to_string()))?,
        Inequality::Identity22d => {
            concurrence::check_identity_22d(require_pure(input, spec.inequality)?, tol)
                .map_err(|e| CliError::Check(e.to_string()))?
        }
    };
    Ok(report)
}

pub fn exit_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Holds => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::Indeterminate => EXIT_INDETERMINATE,
    }
}

// ---------------------------------------------------------------- campaigns

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_n_qubits() -> usize {
    3
}

fn default_q_values() -> Vec<f64> {
    vec![2.0]
}

fn default_workers() -> usize {
    1
}

/// A Monte Carlo campaign. Every sample draws its state from the stream
/// `(master_seed, sample_index)`, so results do not depend on `workers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub inequalities: Vec<Inequality>,
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    pub samples: usize,
    #[serde(default = "default_q_values")]
    pub q_values: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Tolerance for every check without its own entry in `tolerances`.
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub tolerances: BTreeMap<Inequality, f64>,
    #[serde(default)]
    pub focus: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.inequalities.is_empty() {
            return bad("no inequalities selected".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let needs_pure = self.inequalities.iter().any(|k| !k.samples_two_qubit_mixed());
        if needs_pure && !(3..=MAX_QUBITS).contains(&self.n_qubits) {
            return bad(format!("n_qubits must lie in 3..={MAX_QUBITS}, got {}", self.n_qubits));
        }
        if self.inequalities.contains(&Inequality::Identity22d) && self.n_qubits != 3 {
            return bad("identity-22d needs n_qubits = 3".into());
        }
        if needs_pure && self.focus >= self.n_qubits {
            return bad(format!("focus {} out of range for {} qubits", self.focus, self.n_qubits));
        }
        let q_dependent = self.inequalities.iter().any(|k| k.regime() != QRegime::Free);
        if q_dependent && self.q_values.is_empty() {
            return bad("q_values is empty".into());
        }
        for &q in &self.q_values {
            if QParam::new(q).is_err() {
                return bad(format!("q = {q} is not a positive finite number"));
            }
            for k in &self.inequalities {
                if !k.regime().accepts(q) {
                    return bad(format!("q = {q} outside the regime of {k} ({})", k.regime().describe()));
                }
            }
        }
        for (&k, &t) in self.tolerances.iter() {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("tolerance for {k} must be finite and nonnegative"));
            }
        }
        if let Some(t) = self.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return bad("tolerance must be finite and nonnegative".into());
            }
        }
        Ok(())
    }

    pub fn tolerance_for(&self, k: Inequality) -> f64 {
        self.tolerances.get(&k).copied().or(self.tolerance).unwrap_or(EXACT_TOL)
    }
}

/// Parses and validates a campaign config file.
pub fn parse_campaign_config(text: &str) -> Result<CampaignConfig, CliError> {
    let cfg: CampaignConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// One output row; columns in this order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub lhs_bound: Bound,
    pub rhs_bound: Bound,
    pub seed: u64,
    pub stream: u64,
}

pub const ROW_HEADER: [&str; 10] = [
    "name", "q", "lhs", "rhs", "slack", "verdict", "lhs_bound", "rhs_bound", "seed", "stream",
];

/// 17 significant digits, enough to round-trip an f64.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Row {
    fn from_report(r: &InequalityReport, seed: Seed) -> Self {
        Self {
            name: r.name.clone(),
            q: r.q,
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            verdict: r.verdict,
            lhs_bound: r.lhs_bound,
            rhs_bound: r.rhs_bound,
            seed: seed.master,
            stream: seed.stream_index,
        }
    }

    pub fn csv_fields(&self) -> [String; 10] {
        [
            self.name.clone(),
            fmt_float(self.q),
            fmt_float(self.lhs),
            fmt_float(self.rhs),
            fmt_float(self.slack),
            self.verdict.as_str().to_string(),
            self.lhs_bound.as_str().to_string(),
            self.rhs_bound.as_str().to_string(),
            self.seed.to_string(),
            self.stream.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalitySummary {
    pub name: String,
    pub count: usize,
    pub holds: usize,
    pub violations: usize,
    pub indeterminates: usize,
    pub min_slack: f64,
    pub mean_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub per_inequality: Vec<InequalitySummary>,
    pub wall_time_secs: f64,
    pub master_seed: u64,
}

impl CampaignSummary {
    pub fn violations(&self) -> usize {
        self.per_inequality.iter().map(|s| s.violations).sum()
    }

    pub fn from_rows(rows: &[Row], master_seed: u64, wall_time_secs: f64) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut groups: BTreeMap<String, Vec<&Row>> = BTreeMap::new();
        for r in rows {
            if !groups.contains_key(&r.name) {
                order.push(r.name.clone());
            }
            groups.entry(r.name.clone()).or_default().push(r);
        }
        let per_inequality = order
            .into_iter()
            .map(|name| {
                let rs = &groups[&name];
                let count_of = |v: Verdict| rs.iter().filter(|r| r.verdict == v).count();
                InequalitySummary {
                    count: rs.len(),
                    holds: count_of(Verdict::Holds),
                    violations: count_of(Verdict::Violated),
                    indeterminates: count_of(Verdict::Indeterminate),
                    min_slack: rs.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
                    mean_slack: rs.iter().map(|r| r.slack).sum::<f64>() / rs.len() as f64,
                    name,
                }
            })
            .collect();
        Self {
            per_inequality,
            wall_time_secs,
            master_seed,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.per_inequality {
            out.push_str(&format!(
                "{:<20} count {:>7}  holds {:>7}  violated {:>5}  indeterminate {:>5}  min slack {:+.3e}  mean slack {:+.3e}\n",
                s.name, s.count, s.holds, s.violations, s.indeterminates, s.min_slack, s.mean_slack
            ));
        }
        out.push_str(&format!(
            "seed {}  wall time {:.2} s\n",
            self.master_seed, self.wall_time_secs
        ));
        out
    }
}

/// Rows of one sample, in the config's inequality order and then q order.
pub fn sample_rows(cfg: &CampaignConfig, index: u64) -> Result<Vec<Row>, CliError> {
    let seed = Seed::new(cfg.master_seed, index);
    let mut pure: Option<StateInput> = None;
    let mut mixed: Option<StateInput> = None;
    let mut rows = Vec::new();
    for &k in &cfg.inequalities {
        let input = if k.samples_two_qubit_mixed() {
            if mixed.is_none() {
                // Ranks 1 to 4 in turn, so every rank is exercised.
                let rank = 1 + (index % 4) as usize;
                mixed = Some(StateInput::Mixed(states::random_mixed_on(&[2, 2], rank, seed)?));
            }
            mixed.as_ref().expect("set above")
        } else {
            if pure.is_none() {
                pure = Some(StateInput::Pure(states::haar_random_pure(&vec![2; cfg.n_qubits], seed)?));
            }
            pure.as_ref().expect("set above")
        };
        let qs: Vec<Option<f64>> = if k.regime() == QRegime::Free {
            vec![None]
        } else {
            cfg.q_values.iter().map(|&q| Some(q)).collect()
        };
        for q in qs {
            let mut spec = CheckSpec::new(k, q);
            spec.focus = cfg.focus;
            spec.tolerance = cfg.tolerance_for(k);
            spec.roof.seed = seed;
            let report = evaluate(input, &spec)?;
            rows.push(Row::from_report(&report, seed));
        }
    }
    Ok(rows)
}

/// Runs a validated campaign on a pool of `cfg.workers` threads. Rows come
/// back sorted by sample index.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<(Vec<Row>, CampaignSummary), CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let per_sample: Vec<Result<Vec<Row>, CliError>> =
        pool.install(|| (0..cfg.samples as u64).into_par_iter().map(|i| sample_rows(cfg, i)).collect());
    let mut rows = Vec::new();
    for r in per_sample {
        rows.extend(r?);
    }
    let summary = CampaignSummary::from_rows(&rows, cfg.master_seed, start.elapsed().as_secs_f64());
    Ok((rows, summary))
}

pub fn write_rows(rows: &[Row], format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(ROW_HEADER).map_err(csv_err)?;
            for r in rows {
                w.write_record(r.csv_fields()).map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

// ---------------------------------------------------------------- q scans

/// Inclusive grid `min, min + step, ..., max`.
pub fn q_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || min > max {
        return Err(CliError::Grid(format!("need finite min <= max and step > 0, got {min}..{max} step {step}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(CliError::Grid(format!("{count} grid points is too many")));
    }
    Ok((0..count).map(|i| (min + i as f64 * step).min(max)).collect())
}

/// Extremes of f_q(sqrt(x^2 + y^2)) - f_q(x) - f_q(y) over an n x n grid on
/// the quarter disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapScan {
    pub q: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    pub points: usize,
    pub regime: Option<GapRegime>,
    pub certified: bool,
}

pub fn scan_fq_gap(q: f64, n: usize, tol: f64) -> Result<GapScan, CliError> {
    let qp = QParam::new(q).map_err(|e| CliError::Grid(e.to_string()))?;
    if !qp.in_fq_range() {
        return Err(CliError::Grid(format!("q = {q} outside [1, 4]")));
    }
    if n < 2 {
        return Err(CliError::Grid("grid needs at least 2 points per axis".into()));
    }
    let (mut lo, mut hi, mut points) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    let mut certified = true;
    let mut regime = None;
    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        for j in 0..n {
            let y = j as f64 / (n - 1) as f64;
            if x * x + y * y > 1.0 {
                continue;
            }
            let g = tsallis::fq_additivity_gap(x, y, qp).map_err(|e| CliError::Grid(e.to_string()))?;
            lo = lo.min(g.gap);
            hi = hi.max(g.gap);
            certified &= g.certified(tol);
            regime = Some(g.regime);
            points += 1;
        }
    }
    Ok(GapScan {
        q,
        min_gap: lo,
        max_gap: hi,
        points,
        regime,
        certified,
    })
}

// ---------------------------------------------------------------- clap

#[derive(Debug, Parser)]
#[command(name = "tsallis-mono", version, about = "Tsallis-q entanglement monogamy and polygamy checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every applicable report for a named state.
    Demo(DemoArgs),
    /// Run one check on a state file and print the report as JSON.
    Check(CheckArgs),
    /// Run a Monte Carlo campaign over Haar-random states.
    Sample(SampleArgs),
    /// Tabulate slack against q, or the f_q additivity gap on a grid.
    ScanQ(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedState {
    Ghz,
    W,
    Werner,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// ghz, w or werner.
    pub name: String,
    /// Number of qubits for ghz and w.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Singlet weight for werner.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Extra q evaluated besides 2 and 3.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// State JSON file.
    pub state: PathBuf,
    #[arg(long, short = 'i')]
    pub inequality: Inequality,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub focus: usize,
    /// Subsystem groups, e.g. `0|1|2` or `0,1|2,3`.
    #[arg(long)]
    pub partition: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Seed for any convex-roof search.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Campaign config JSON; flags given alongside override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated inequality names.
    #[arg(long, short = 'i', value_delimiter = ',')]
    pub inequality: Vec<Inequality>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated q values.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub focus: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// An inequality name, or `fq-gap` for the f_q additivity gap.
    #[arg(long, short = 'i')]
    pub inequality: String,
    #[arg(long)]
    pub q_min: f64,
    #[arg(long)]
    pub q_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub q_step: f64,
    /// State JSON file; without it a Haar-random n-qubit state is drawn.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub focus: usize,
    #[arg(long)]
    pub partition: Option<String>,
    /// Points per axis for the fq-gap grid.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Demo(a) => cmd_demo(&a, stdout),
        Command::Check(a) => cmd_check(&a, stdout),
        Command::Sample(a) => cmd_sample(&a, stdout, stderr),
        Command::ScanQ(a) => cmd_scan_q(&a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read_state(path: &PathBuf) -> Result<StateInput, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(states::parse_state_bytes(&bytes)?)
}

fn open_out(path: &Option<PathBuf>) -> Result<Option<std::fs::File>, CliError> {
    Ok(match path {
        Some(p) => Some(std::fs::File::create(p)?),
        None => None,
    })
}

pub fn cmd_check(a: &CheckArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let input = read_state(&a.state)?;
    let mut spec = CheckSpec::new(a.inequality, a.q);
    spec.focus = a.focus;
    spec.partition = a.partition.as_deref().map(parse_partition).transpose()?;
    let mixed_search = a.inequality == Inequality::Reciprocity && matches!(input, StateInput::Mixed(_));
    spec.tolerance = a.tolerance.unwrap_or(if mixed_search { OPTIMIZER_TOL } else { EXACT_TOL });
    if let Some(seed) = a.seed {
        spec.roof.seed = Seed::new(seed, 0);
    }
    let report = evaluate(&input, &spec)?.with_descriptor(format!("file:{}", a.state.display()));
    serde_json::to_writer_pretty(&mut *stdout, &report).map_err(|e| CliError::Io(e.into()))?;
    writeln!(stdout)?;
    Ok(exit_code(report.verdict))
}

fn campaign_from_args(a: &SampleArgs) -> Result<CampaignConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => CampaignConfig {
            inequalities: Vec::new(),
            n_qubits: default_n_qubits(),
            samples: 0,
            q_values: default_q_values(),
            master_seed: 0,
            tolerance: None,
            tolerances: BTreeMap::new(),
            focus: 0,
            out: None,
            format: OutputFormat::Csv,
            workers: default_workers(),
        },
    };
    if !a.inequality.is_empty() {
        cfg.inequalities = a.inequality.clone();
    }
    if !a.q.is_empty() {
        cfg.q_values = a.q.clone();
    }
    cfg.n_qubits = a.n.unwrap_or(cfg.n_qubits);
    cfg.samples = a.samples.unwrap_or(cfg.samples);
    cfg.master_seed = a.seed.unwrap_or(cfg.master_seed);
    cfg.focus = a.focus.unwrap_or(cfg.focus);
    cfg.tolerance = a.tolerance.or(cfg.tolerance);
    cfg.out = a.out.clone().or(cfg.out);
    cfg.format = a.format.unwrap_or(cfg.format);
    cfg.workers = a.workers.unwrap_or(cfg.workers);
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_sample(a: &SampleArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = campaign_from_args(a)?;
    let (rows, summary) = run_campaign(&cfg)?;
    match open_out(&cfg.out)? {
        Some(mut f) => write_rows(&rows, cfg.format, &mut f)?,
        None => write_rows(&rows, cfg.format, stdout)?,
    }
    write!(stderr, "{}", summary.render())?;
    Ok(if summary.violations() > 0 { EXIT_VIOLATED } else { EXIT_OK })
}

fn demo_state(a: &DemoArgs) -> Result<(NamedState, StateInput), CliError> {
    let name = NamedState::from_str(&a.name, true).map_err(|_| CliError::UnknownState(a.name.clone()))?;
    let qubit_count = |n: usize| {
        if (3..=MAX_QUBITS).contains(&n) {
            Ok(n)
        } else {
            Err(CliError::Usage(format!("--n must lie in 3..={MAX_QUBITS}")))
        }
    };
    let input = match name {
        NamedState::Ghz => StateInput::Pure(states::ghz(qubit_count(a.n)?)?),
        NamedState::W => StateInput::Pure(states::w_state(qubit_count(a.n)?)?),
        NamedState::Werner => StateInput::Mixed(states::werner(a.p)?),
    };
    Ok((name, input))
}

#[derive(Debug, Serialize)]
struct DemoOutput {
    state: String,
    measures: BTreeMap<String, f64>,
    reports: Vec<InequalityReport>,
}

fn two_qubit_measures(m: &DensityMatrix, qs: &[f64]) -> Result<BTreeMap<String, f64>, CliError> {
    let check = |e: tsallis::TsallisError| CliError::Check(e.to_string());
    let mut out = BTreeMap::new();
    out.insert("concurrence".into(), concurrence::concurrence_2q(m).map_err(|e| CliError::Check(e.to_string()))?);
    out.insert("coa".into(), concurrence::coa_2q(m).map_err(|e| CliError::Check(e.to_string()))?);
    out.insert("eof".into(), tsallis::eof_limit(m).map_err(check)?);
    for &q in qs {
        let qp = QParam::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
        if qp.in_fq_range() {
            out.insert(format!("tsallis_ent_q{q}"), tsallis::tsallis_ent_2q(m, qp).map_err(check)?);
            out.insert(format!("teoa_lower_q{q}"), tsallis::teoa_2q_bound(m, qp).map_err(check)?.value);
        }
    }
    // Adding 0.0 maps -0.0 to 0.0 for display.
    out.values_mut().for_each(|v| *v += 0.0);
    Ok(out)
}

pub fn cmd_demo(a: &DemoArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (name, input) = demo_state(a)?;
    let mut qs = vec![2.0, 3.0];
    if let Some(q) = a.q {
        QParam::new(q).map_err(|e| CliError::Usage(e.to_string()))?;
        if !qs.contains(&q) {
            qs.push(q);
        }
    }
    let (kinds, measures): (Vec<Inequality>, _) = match name {
        NamedState::Werner => (
            vec![Inequality::Subadditivity, Inequality::Triangle],
            two_qubit_measures(&input.to_density(), &qs)?,
        ),
        _ => {
            let mut kinds: Vec<Inequality> = Inequality::ALL
                .into_iter()
                .filter(|k| !k.samples_two_qubit_mixed())
                .collect();
            if a.n != 3 {
                kinds.retain(|&k| k != Inequality::Identity22d);
            }
            (kinds, BTreeMap::new())
        }
    };
    let mut reports = Vec::new();
    for k in kinds {
        let qlist: Vec<Option<f64>> = if k.regime() == QRegime::Free {
            vec![None]
        } else {
            qs.iter().copied().filter(|&q| k.regime().accepts(q)).map(Some).collect()
        };
        for q in qlist {
            let report = evaluate(&input, &CheckSpec::new(k, q))?;
            reports.push(report.with_descriptor(format!("demo:{}", a.name)));
        }
    }
    let violated = reports.iter().any(|r| r.verdict == Verdict::Violated);
    match a.format {
        OutputFormat::Json => {
            let out = DemoOutput {
                state: a.name.clone(),
                measures,
                reports,
            };
            serde_json::to_writer_pretty(&mut *stdout, &out).map_err(|e| CliError::Io(e.into()))?;
            writeln!(stdout)?;
        }
        OutputFormat::Csv => {
            for (k, v) in &measures {
                writeln!(stdout, "# {k} = {}", fmt_float(*v))?;
            }
            let rows: Vec<Row> = reports.iter().map(|r| Row::from_report(r, Seed::new(0, 0))).collect();
            write_rows(&rows, OutputFormat::Csv, stdout)?;
        }
    }
    Ok(if violated { EXIT_VIOLATED } else { EXIT_OK })
}

pub fn cmd_scan_q(a: &ScanArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let grid = q_grid(a.q_min, a.q_max, a.q_step)?;
    let mut file = open_out(&a.out)?;
    let out: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => stdout,
    };
    let mut w = csv::Writer::from_writer(out);
    if a.inequality == "fq-gap" {
        let tol = a.tolerance.unwrap_or(1e-12);
        w.write_record(["q", "min_gap", "max_gap", "points", "regime", "certified"]).map_err(csv_err)?;
        for q in grid {
            let s = scan_fq_gap(q, a.grid, tol)?;
            let regime = match s.regime {
                Some(GapRegime::Zero) => "zero",
                Some(GapRegime::NonNegative) => "nonnegative",
                Some(GapRegime::NonPositive) => "nonpositive",
                None => "none",
            };
            w.write_record([
                fmt_float(q),
                fmt_float(s.min_gap),
                fmt_float(s.max_gap),
                s.points.to_string(),
                regime.to_string(),
                s.certified.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        return Ok(EXIT_OK);
    }

    let kind: Inequality = a.inequality.parse()?;
    if kind.regime() == QRegime::Free {
        return Err(CliError::Grid(format!("{kind} does not depend on q")));
    }
    if let Some(bad) = grid.iter().find(|&&q| !kind.regime().accepts(q)) {
        return Err(CliError::Grid(format!(
            "q = {bad} outside the regime of {kind} ({})",
            kind.regime().describe()
        )));
    }
    let input = match &a.state {
        Some(p) => read_state(p)?,
        None if kind.samples_two_qubit_mixed() => StateInput::Mixed(states::random_mixed_on(&[2, 2], 4, Seed::new(a.seed, 0))?),
        None => StateInput::Pure(states::haar_random_pure(&vec![2; a.n], Seed::new(a.seed, 0))?),
    };
    let partition = a.partition.as_deref().map(parse_partition).transpose()?;
    let mut rows = Vec::new();
    let mut violated = false;
    for q in grid {
        let mut spec = CheckSpec::new(kind, Some(q));
        spec.focus = a.focus;
        spec.partition = partition.clone();
        if let Some(t) = a.tolerance {
            spec.tolerance = t;
        }
        let r = evaluate(&input, &spec)?;
        violated |= r.verdict == Verdict::Violated;
        rows.push(Row::from_report(&r, Seed::new(a.seed, 0)));
    }
    w.write_record(ROW_HEADER).map_err(csv_err)?;
    for r in &rows {
        w.write_record(r.csv_fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(if violated { EXIT_VIOLATED } else { EXIT_OK })
}
