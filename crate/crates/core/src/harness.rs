//! Experiment plumbing shared by every engine: configuration files, per-run
//! seed derivation, the worker pool and CSV persistence.
//!
//! # Config file grammar
//!
//! Config files are TOML documents restricted to flat `key = value` lines
//! followed by at most one table named after the experiment:
//!
//! ```text
//! experiment_id = "bent"      # ap_atsp | ttp | bent | byzantine (required)
//! master_seed = 2023          # integer, or a decimal string above i64::MAX
//! runs = 100                  # replicates per cell, >= 1
//! worker_count = 4            # >= 1
//! output_dir = "results"
//!
//! [bent]                      # optional; omitted keys take their defaults
//! n = 12
//! depth = 7
//! ```
//!
//! Unknown keys are rejected. [`ExperimentConfig::to_canonical_string`] writes
//! every key, including defaults, in a fixed order; loading that text yields
//! the same config and saving it again yields the same bytes.
//!
//! # Randomness
//!
//! Every random draw comes from a [`Rng64`] (xoshiro256++) seeded with a value
//! from [`derive_run_seed`]. Bounded draws go through `rand`'s `random_range`,
//! which rejects instead of reducing modulo the bound.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::ApParams;
use crate::bent::BentParams;
use crate::byzantine::ByzantineParams;
use crate::ttp::TtpParams;

/// The pinned generator for the whole workspace.
pub type Rng64 = Xoshiro256PlusPlus;

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "EVOBENCH_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for `{key}`: {value} ({reason})")]
    OutOfRange {
        key: String,
        value: String,
        reason: String,
    },
    #[error("config block [{found}] does not match experiment_id = {expected}")]
    BlockMismatch { expected: String, found: String },
    #[error("records mix experiments {first} and {other}")]
    MixedExperiments { first: String, other: String },
    #[error("record {run_index} has {got} columns, schema for {experiment} has {expected}")]
    ColumnCount {
        experiment: String,
        run_index: u64,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

impl HarnessError {
    pub(crate) fn out_of_range(
        key: impl Into<String>,
        value: impl fmt::Display,
        reason: impl Into<String>,
    ) -> Self {
        HarnessError::OutOfRange {
            key: key.into(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    ApAtsp,
    Ttp,
    Bent,
    Byzantine,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::ApAtsp => "ap_atsp",
            ExperimentId::Ttp => "ttp",
            ExperimentId::Bent => "bent",
            ExperimentId::Byzantine => "byzantine",
        }
    }

    /// Default replicate count: matrices per subensemble, schedules per
    /// team count, runs per operator, runs per (problem, model, p) cell.
    pub fn default_runs(self) -> u64 {
        match self {
            ExperimentId::ApAtsp => 1000,
            ExperimentId::Ttp => 100_000,
            ExperimentId::Bent => 100,
            ExperimentId::Byzantine => 50,
        }
    }

    /// Column layout of the main results CSV.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ExperimentId::ApAtsp => crate::assignment::CSV_COLUMNS,
            ExperimentId::Ttp => crate::ttp::CSV_COLUMNS,
            ExperimentId::Bent => crate::bent::CSV_COLUMNS,
            ExperimentId::Byzantine => crate::byzantine::CSV_COLUMNS,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ap_atsp" | "ap-atsp" => Ok(ExperimentId::ApAtsp),
            "ttp" => Ok(ExperimentId::Ttp),
            "bent" => Ok(ExperimentId::Bent),
            "byzantine" => Ok(ExperimentId::Byzantine),
            other => Err(format!("unknown experiment `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentParams {
    ApAtsp(ApParams),
    Ttp(TtpParams),
    Bent(BentParams),
    Byzantine(ByzantineParams),
}

impl ExperimentParams {
    pub fn defaults_for(id: ExperimentId) -> Self {
        match id {
            ExperimentId::ApAtsp => ExperimentParams::ApAtsp(ApParams::default()),
            ExperimentId::Ttp => ExperimentParams::Ttp(TtpParams::default()),
            ExperimentId::Bent => ExperimentParams::Bent(BentParams::default()),
            ExperimentId::Byzantine => ExperimentParams::Byzantine(ByzantineParams::default()),
        }
    }

    pub fn experiment_id(&self) -> ExperimentId {
        match self {
            ExperimentParams::ApAtsp(_) => ExperimentId::ApAtsp,
            ExperimentParams::Ttp(_) => ExperimentId::Ttp,
            ExperimentParams::Bent(_) => ExperimentId::Bent,
            ExperimentParams::Byzantine(_) => ExperimentId::Byzantine,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        match self {
            ExperimentParams::ApAtsp(p) => p.validate(),
            ExperimentParams::Ttp(p) => p.validate(),
            ExperimentParams::Bent(p) => p.validate(),
            ExperimentParams::Byzantine(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub runs: u64,
    pub worker_count: usize,
    pub output_dir: PathBuf,
    pub params: ExperimentParams,
}

pub const DEFAULT_MASTER_SEED: u64 = 2023;
pub const DEFAULT_OUTPUT_DIR: &str = "results";

impl ExperimentConfig {
    pub fn new(id: ExperimentId) -> Self {
        ExperimentConfig {
            master_seed: DEFAULT_MASTER_SEED,
            runs: id.default_runs(),
            worker_count: 1,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
            params: ExperimentParams::defaults_for(id),
        }
    }

    pub fn experiment_id(&self) -> ExperimentId {
        self.params.experiment_id()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs < 1 {
            return Err(HarnessError::out_of_range(
                "runs",
                self.runs,
                "must be >= 1",
            ));
        }
        if self.worker_count < 1 {
            return Err(HarnessError::out_of_range(
                "worker_count",
                self.worker_count,
                "must be >= 1",
            ));
        }
        self.params.validate()
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, HarnessError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| HarnessError::Parse {
            path: origin.to_path_buf(),
            message: e.message().to_string(),
        })?;
        raw.into_config()
    }

    /// Full config text with every key spelled out, in a fixed order.
    pub fn to_canonical_string(&self) -> String {
        let id = self.experiment_id();
        let mut raw = RawConfig {
            experiment_id: id,
            master_seed: Some(Seed(self.master_seed)),
            runs: Some(self.runs),
            worker_count: Some(self.worker_count as u64),
            output_dir: Some(self.output_dir.clone()),
            ap_atsp: None,
            ttp: None,
            bent: None,
            byzantine: None,
        };
        match &self.params {
            ExperimentParams::ApAtsp(p) => raw.ap_atsp = Some(p.clone()),
            ExperimentParams::Ttp(p) => raw.ttp = Some(p.clone()),
            ExperimentParams::Bent(p) => raw.bent = Some(p.clone()),
            ExperimentParams::Byzantine(p) => raw.byzantine = Some(p.clone()),
        }
        toml::to_string(&raw).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, self.to_canonical_string()).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Reads, validates and default-fills a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text, path)
}

/// Seeds above `i64::MAX` do not fit a TOML integer, so they are stored as
/// decimal strings.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Seed(u64);

impl Serialize for Seed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(v) => u64::try_from(v)
                .map(Seed)
                .map_err(|_| serde::de::Error::custom(format!("master_seed {v} is negative"))),
            Repr::Text(s) => {
                s.trim().parse::<u64>().map(Seed).map_err(|_| {
                    serde::de::Error::custom(format!("master_seed `{s}` is not a u64"))
                })
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment_id: ExperimentId,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<Seed>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    worker_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ap_atsp: Option<ApParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ttp: Option<TtpParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bent: Option<BentParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    byzantine: Option<ByzantineParams>,
}

impl RawConfig {
    fn into_config(self) -> Result<ExperimentConfig, HarnessError> {
        let id = self.experiment_id;
        let present = [
            (ExperimentId::ApAtsp, self.ap_atsp.is_some()),
            (ExperimentId::Ttp, self.ttp.is_some()),
            (ExperimentId::Bent, self.bent.is_some()),
            (ExperimentId::Byzantine, self.byzantine.is_some()),
        ];
        if let Some((other, _)) = present.iter().find(|(b, set)| *set && *b != id) {
            return Err(HarnessError::BlockMismatch {
                expected: id.to_string(),
                found: other.to_string(),
            });
        }
        let params = match id {
            ExperimentId::ApAtsp => ExperimentParams::ApAtsp(self.ap_atsp.unwrap_or_default()),
            ExperimentId::Ttp => ExperimentParams::Ttp(self.ttp.unwrap_or_default()),
            ExperimentId::Bent => ExperimentParams::Bent(self.bent.unwrap_or_default()),
            ExperimentId::Byzantine => {
                ExperimentParams::Byzantine(self.byzantine.unwrap_or_default())
            }
        };
        let worker_count = self.worker_count.unwrap_or(1);
        let config = ExperimentConfig {
            master_seed: self.master_seed.map_or(DEFAULT_MASTER_SEED, |s| s.0),
            runs: self.runs.unwrap_or_else(|| id.default_runs()),
            worker_count: usize::try_from(worker_count).map_err(|_| {
                HarnessError::out_of_range("worker_count", worker_count, "too large")
            })?,
            output_dir: self
                .output_dir
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            params,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Worker count after applying the `EVOBENCH_WORKERS` override.
pub fn resolve_workers(configured: usize) -> Result<usize, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(HarnessError::out_of_range(
                WORKERS_ENV,
                v,
                "must be an integer >= 1",
            )),
        },
        Err(_) => Ok(configured),
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The SplitMix64 output function (Stafford variant 13), a bijection on u64.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-run seed: `mix64(master_seed ^ mix64((run_index + 1) * GOLDEN_GAMMA))`.
///
/// For a fixed master seed this is injective in `run_index` (every step is a
/// bijection), and it does not depend on which worker executes the run.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    mix64(master_seed ^ mix64(run_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed for a nested index path, e.g. `(cell, replicate)`.
pub fn derive_path_seed(master_seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(master_seed, |s, &i| derive_run_seed(s, i))
}

pub fn rng_from_seed(seed: u64) -> Rng64 {
    Rng64::seed_from_u64(seed)
}

/// Runs `job(index)` for every index in `0..count` on `workers` threads and
/// returns the results in index order.
pub fn run_indexed<T, F>(count: u64, workers: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| (0..count).into_par_iter().map(&job).collect())
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    /// Written as `NA`.
    Missing,
}

/// Decimal places used for every real-valued CSV cell.
pub const REAL_PRECISION: usize = 6;

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) if v.is_nan() => f.write_str("NA"),
            Value::Real(v) => write!(f, "{:.*}", REAL_PRECISION, v),
            Value::Text(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Missing => f.write_str("NA"),
        }
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

/// One row of an experiment's main results table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub experiment: ExperimentId,
    pub run_index: u64,
    pub derived_seed: u64,
    /// Cells in the order of [`ExperimentId::columns`].
    pub payload: Vec<Value>,
}

/// A header plus rows, written verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::to_string))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    pub fn write(&self, path: &Path) -> Result<(), HarnessError> {
        fs::write(path, self.to_csv_string()).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Sorts records by run index and lays them out under the experiment's
/// fixed header.
pub fn records_to_table(records: &[RunRecord]) -> Result<Option<Table>, HarnessError> {
    let Some(first) = records.first() else {
        return Ok(None);
    };
    let experiment = first.experiment;
    let columns = experiment.columns();
    for r in records {
        if r.experiment != experiment {
            return Err(HarnessError::MixedExperiments {
                first: experiment.to_string(),
                other: r.experiment.to_string(),
            });
        }
        if r.payload.len() != columns.len() {
            return Err(HarnessError::ColumnCount {
                experiment: experiment.to_string(),
                run_index: r.run_index,
                got: r.payload.len(),
                expected: columns.len(),
            });
        }
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.run_index);
    let mut table = Table::new(columns);
    table.rows = sorted.into_iter().map(|r| r.payload.clone()).collect();
    Ok(Some(table))
}

/// Writes the main results CSV. An empty slice writes `header` alone, or an
/// empty file when no experiment is given to take the header from.
pub fn write_records(
    records: &[RunRecord],
    experiment: Option<ExperimentId>,
    path: &Path,
) -> Result<(), HarnessError> {
    let table = match records_to_table(records)? {
        Some(t) => t,
        None => match experiment {
            Some(id) => Table::new(id.columns()),
            None => Table::new(&[]),
        },
    };
    if let (Some(id), Some(first)) = (experiment, records.first()) {
        if id != first.experiment {
            return Err(HarnessError::MixedExperiments {
                first: id.to_string(),
                other: first.experiment.to_string(),
            });
        }
    }
    table.write(path)
}

/// Everything an experiment produces: the main record set plus any report
/// tables, each with its output file name.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub experiment: ExperimentId,
    pub records: Vec<RunRecord>,
    pub reports: Vec<(String, Table)>,
    /// Human-readable summary lines for the console.
    pub notes: Vec<String>,
}

impl ExperimentOutput {
    pub fn main_file_name(&self) -> String {
        format!("{}.csv", self.experiment)
    }

    /// Writes every table into `dir`, creating it if needed. Returns the
    /// written paths.
    pub fn write_all(&self, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let main = dir.join(self.main_file_name());
        write_records(&self.records, Some(self.experiment), &main)?;
        let mut written = vec![main];
        for (name, table) in &self.reports {
            let p = dir.join(name);
            table.write(&p)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Runs the experiment a config describes.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    let seed = config.master_seed;
    let runs = config.runs;
    let workers = config.worker_count;
    match &config.params {
        ExperimentParams::ApAtsp(p) => crate::assignment::run_experiment(p, runs, seed, workers),
        ExperimentParams::Ttp(p) => crate::ttp::run_experiment(p, runs, seed, workers),
        ExperimentParams::Bent(p) => crate::bent::run_experiment(p, runs, seed, workers),
        ExperimentParams::Byzantine(p) => crate::byzantine::run_experiment(p, runs, seed, workers),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn parse(text: &str) -> Result<ExperimentConfig, HarnessError> {
        ExperimentConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_bent_config_gets_defaults() {
        let cfg = parse("experiment_id = \"bent\"\n").unwrap();
        let ExperimentParams::Bent(p) = &cfg.params else {
            panic!("wrong block")
        };
        assert_eq!((p.n, p.depth, p.lambda), (12, 7, 4));
        assert_eq!(cfg.runs, 100);
        assert_eq!(cfg.worker_count, 1);
    }

    #[test]
    fn zero_runs_is_rejected_by_name() {
        let err = parse("experiment_id = \"ttp\"\nruns = 0\n").unwrap_err();
        assert!(err.to_string().contains("runs"), "{err}");
        assert!(err.to_string().contains('0'), "{err}");
    }

    #[test]
    fn zero_workers_is_rejected() {
        let err = parse("experiment_id = \"ttp\"\nworker_count = 0\n").unwrap_err();
        assert!(err.to_string().contains("worker_count"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("experiment_id = \"bent\"\nflavour = 3\n").unwrap_err();
        assert!(err.to_string().contains("flavour"), "{err}");
        let err = parse("experiment_id = \"bent\"\n[bent]\nwidth = 3\n").unwrap_err();
        assert!(err.to_string().contains("width"), "{err}");
    }

    #[test]
    fn engine_range_errors_name_the_key() {
        let err = parse("experiment_id = \"bent\"\n[bent]\nmr = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("mr"), "{err}");
        assert!(err.to_string().contains("1.5"), "{err}");
    }

    #[test]
    fn mismatched_block_is_rejected() {
        let err = parse("experiment_id = \"bent\"\n[ttp]\nmax_streak = 3\n").unwrap_err();
        assert!(matches!(err, HarnessError::BlockMismatch { .. }), "{err}");
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_config(Path::new("/nonexistent/evobench.toml")).unwrap_err();
        assert!(matches!(err, HarnessError::Io { .. }));
    }

    #[test]
    fn canonical_form_round_trips_byte_for_byte() {
        for id in [
            ExperimentId::ApAtsp,
            ExperimentId::Ttp,
            ExperimentId::Bent,
            ExperimentId::Byzantine,
        ] {
            let mut cfg = ExperimentConfig::new(id);
            cfg.master_seed = u64::MAX - 7;
            let text = cfg.to_canonical_string();
            let back = parse(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_canonical_string(), text);
        }
    }

    #[test]
    fn derived_seeds_are_deterministic() {
        assert_eq!(derive_run_seed(17, 5), derive_run_seed(17, 5));
        assert_ne!(derive_run_seed(17, 5), derive_run_seed(18, 5));
    }

    #[test]
    fn neighbouring_run_indices_never_collide() {
        let mut rng = rng_from_seed(1);
        for _ in 0..10_000 {
            let s: u64 = rng.random();
            assert_ne!(derive_run_seed(s, 0), derive_run_seed(s, 1));
        }
    }

    #[test]
    fn bounded_sampling_is_unbiased() {
        let mut rng = rng_from_seed(99);
        let draws = 1_000_000u64;
        for k in [3u64, 7, 10] {
            let mut counts = vec![0u64; k as usize];
            for _ in 0..draws {
                counts[rng.random_range(0..k) as usize] += 1;
            }
            let p = 1.0 / k as f64;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            for &c in &counts {
                assert!(
                    (c as f64 - draws as f64 * p).abs() < 5.0 * sigma,
                    "k={k} {counts:?}"
                );
            }
        }
    }

    #[test]
    fn run_indexed_is_worker_independent() {
        let job = |i: u64| derive_run_seed(42, i);
        assert_eq!(run_indexed(200, 1, job), run_indexed(200, 4, job));
    }

    fn record(id: ExperimentId, run_index: u64) -> RunRecord {
        RunRecord {
            experiment: id,
            run_index,
            derived_seed: derive_run_seed(0, run_index),
            payload: vec![
                Value::from("semantic"),
                Value::from(run_index),
                Value::from(derive_run_seed(0, run_index) >> 1),
                Value::from(120u64),
                Value::from(true),
                Value::from(2016u64),
            ],
        }
    }

    #[test]
    fn empty_records_write_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bent.csv");
        write_records(&[], Some(ExperimentId::Bent), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{}\n", crate::bent::CSV_COLUMNS.join(",")));
    }

    #[test]
    fn records_are_sorted_and_rewrites_are_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let recs = vec![record(ExperimentId::Bent, 2), record(ExperimentId::Bent, 0)];
        write_records(&recs, Some(ExperimentId::Bent), &a).unwrap();
        write_records(&recs, Some(ExperimentId::Bent), &b).unwrap();
        let ta = fs::read(&a).unwrap();
        assert_eq!(ta, fs::read(&b).unwrap());
        let text = String::from_utf8(ta).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert!(rows[0].starts_with("semantic,0,"));
        assert!(rows[1].starts_with("semantic,2,"));
    }

    #[test]
    fn mixed_experiments_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut other = record(ExperimentId::Bent, 1);
        other.experiment = ExperimentId::Ttp;
        let recs = vec![record(ExperimentId::Bent, 0), other];
        let err = write_records(&recs, None, &dir.path().join("x.csv")).unwrap_err();
        assert!(matches!(err, HarnessError::MixedExperiments { .. }));
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let recs = vec![record(ExperimentId::Bent, 0)];
        let err = write_records(&recs, None, Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(matches!(err, HarnessError::Io { .. }));
    }

    #[test]
    fn reals_use_fixed_precision() {
        assert_eq!(Value::Real(0.5).to_string(), "0.500000");
        assert_eq!(Value::Real(f64::NAN).to_string(), "NA");
        assert_eq!(Value::from(None::<u64>).to_string(), "NA");
    }
}
