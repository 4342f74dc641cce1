//! Generational GA under unreliable (byzantine) fitness evaluation.
//!
//! Every evaluation request passes through a [`CorruptionModel`]: with
//! probability `p` the GA sees a corrupted value instead of the true one.
//! Selection and replacement only ever read the value the GA saw; true
//! fitness goes to a shadow log that feeds the diagnostics.
//!
//! Population entropy is not a standard quantity for bitstring GAs. Here it
//! is the mean over loci of the binary Shannon entropy (in bits) of the
//! fraction of ones at that locus, so it lies in `[0, 1]` and is 0 exactly
//! when all individuals are identical.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{
    derive_path_seed, rng_from_seed, run_indexed, ExperimentId, ExperimentOutput, HarnessError,
    RunRecord, Table, Value,
};
use crate::stats;

pub const CSV_COLUMNS: &[&str] = &[
    "problem",
    "model",
    "p",
    "run_index",
    "seed",
    "final_best_true",
    "evals_to_q90",
    "evals_to_q95",
    "evals_to_q99",
    "evals_to_q100",
    "min_entropy",
];

pub const SUMMARY_COLUMNS: &[&str] = &[
    "problem",
    "model",
    "p",
    "runs",
    "mean_final_best_true",
    "optimum_hits",
    "mean_min_entropy",
    "effort_q90",
    "effort_q95",
    "effort_q99",
    "effort_q100",
];

/// Quality thresholds reported per run, as fractions of the optimum.
pub const QUALITIES: [f64; 4] = [0.90, 0.95, 0.99, 1.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ByzantineError {
    #[error("quality {0} is outside (0, 1]")]
    QualityOutOfRange(f64),
    #[error("record set is empty")]
    NoRecords,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    #[serde(rename = "onemax")]
    OneMax,
    #[serde(rename = "leadingones")]
    LeadingOnes,
}

impl Problem {
    pub const ALL: [Problem; 2] = [Problem::OneMax, Problem::LeadingOnes];

    pub fn as_str(self) -> &'static str {
        match self {
            Problem::OneMax => "onemax",
            Problem::LeadingOnes => "leadingones",
        }
    }

    pub fn eval(self, genome: &[u64], len: usize) -> u32 {
        match self {
            Problem::OneMax => onemax(genome),
            Problem::LeadingOnes => leading_ones(genome, len),
        }
    }

    fn code(self) -> u64 {
        match self {
            Problem::OneMax => 0,
            Problem::LeadingOnes => 1,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "onemax" => Ok(Problem::OneMax),
            "leadingones" | "leading_ones" => Ok(Problem::LeadingOnes),
            _ => Err(format!("unknown problem `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    None,
    Randomizer,
    Inverter,
}

impl CorruptionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionKind::None => "none",
            CorruptionKind::Randomizer => "randomizer",
            CorruptionKind::Inverter => "inverter",
        }
    }

    fn code(self) -> u64 {
        match self {
            CorruptionKind::None => 0,
            CorruptionKind::Randomizer => 1,
            CorruptionKind::Inverter => 2,
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(CorruptionKind::None),
            "randomizer" => Ok(CorruptionKind::Randomizer),
            "inverter" => Ok(CorruptionKind::Inverter),
            _ => Err(format!("unknown corruption model `{s}`")),
        }
    }
}

/// Number of one-bits. Bits past the genome length must be zero.
pub fn onemax(genome: &[u64]) -> u32 {
    genome.iter().map(|w| w.count_ones()).sum()
}

/// Length of the all-ones prefix (bit `i` of the genome is bit `i % 64` of
/// word `i / 64`).
pub fn leading_ones(genome: &[u64], len: usize) -> u32 {
    let mut acc = 0u32;
    for w in genome {
        let t = w.trailing_ones();
        acc += t;
        if t < 64 {
            break;
        }
    }
    acc.min(len as u32)
}

/// Corruption state for one run: the time-ordered history of true fitness
/// values and their running extremes.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionModel {
    pub kind: CorruptionKind,
    pub p: f64,
    /// Upper end of the problem's range, used when the randomizer has no
    /// history to draw from.
    pub range_max: u32,
    history: Vec<u32>,
    extremes: Option<(u32, u32)>,
}

impl CorruptionModel {
    pub fn new(kind: CorruptionKind, p: f64, range_max: u32) -> Self {
        assert!(
            (0.0..=1.0).contains(&p),
            "corruption probability outside [0, 1]"
        );
        CorruptionModel {
            kind,
            p,
            range_max,
            history: Vec::new(),
            extremes: None,
        }
    }

    pub fn history(&self) -> &[u32] {
        &self.history
    }

    pub fn extremes(&self) -> Option<(u32, u32)> {
        self.extremes
    }

    /// Records `f_true`, then returns either it or (with probability `p`) a
    /// corrupted value. The randomizer returns a uniformly chosen earlier
    /// entry of the history (or a uniform value in `[0, range_max]` when
    /// there is none); the inverter reflects `f_true` inside the extremes
    /// seen so far, `f_max - (f_true - f_min)`.
    pub fn corrupt<R: Rng + ?Sized>(&mut self, f_true: u32, rng: &mut R) -> u32 {
        let (lo, hi) = match self.extremes {
            Some((lo, hi)) => (lo.min(f_true), hi.max(f_true)),
            None => (f_true, f_true),
        };
        self.extremes = Some((lo, hi));
        self.history.push(f_true);
        if self.kind == CorruptionKind::None || !rng.random_bool(self.p) {
            return f_true;
        }
        match self.kind {
            CorruptionKind::None => f_true,
            CorruptionKind::Randomizer => {
                let earlier = self.history.len() - 1;
                if earlier == 0 {
                    rng.random_range(0..=self.range_max)
                } else {
                    self.history[rng.random_range(0..earlier)]
                }
            }
            CorruptionKind::Inverter => hi - (f_true - lo),
        }
    }
}

/// A bitstring with the fitness the GA saw and the true fitness kept for
/// diagnostics only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitIndividual {
    pub genome: Vec<u64>,
    pub unreliable_fitness: u32,
    pub true_fitness: u32,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

fn random_genome<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u64> {
    let mut g: Vec<u64> = (0..words_for(len)).map(|_| rng.random()).collect();
    if let Some(last) = g.last_mut() {
        *last &= tail_mask(len);
    }
    g
}

/// Children of a single-point crossover at `cut`: the first takes bits
/// `[0, cut)` from `a` and the rest from `b`, the second the reverse.
fn crossover(a: &[u64], b: &[u64], cut: usize) -> (Vec<u64>, Vec<u64>) {
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (k, (&x, &y)) in a.iter().zip(b).enumerate() {
        let start = k * 64;
        let mask = if cut >= start + 64 {
            u64::MAX
        } else if cut <= start {
            0
        } else {
            (1u64 << (cut - start)) - 1
        };
        c1.push((x & mask) | (y & !mask));
        c2.push((y & mask) | (x & !mask));
    }
    (c1, c2)
}

/// Flips each bit independently with probability `rate`, jumping between
/// flips with geometric gaps.
fn mutate_bits<R: Rng + ?Sized>(genome: &mut [u64], len: usize, rate: f64, rng: &mut R) {
    if rate <= 0.0 {
        return;
    }
    if rate >= 1.0 {
        for i in 0..len {
            genome[i / 64] ^= 1 << (i % 64);
        }
        return;
    }
    let log_q = (1.0 - rate).ln();
    let mut i = 0usize;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let gap = (u.ln() / log_q).floor();
        if gap >= (len - i) as f64 {
            return;
        }
        i += gap as usize;
        genome[i / 64] ^= 1 << (i % 64);
        i += 1;
        if i >= len {
            return;
        }
    }
}

fn binary_entropy(f: f64) -> f64 {
    if f <= 0.0 || f >= 1.0 {
        0.0
    } else {
        -(f * f.log2() + (1.0 - f) * (1.0 - f).log2())
    }
}

/// Mean per-locus Shannon entropy of the population's bit frequencies.
pub fn population_entropy(population: &[Vec<u64>], len: usize) -> f64 {
    assert!(!population.is_empty() && len > 0);
    let mut ones = vec![0u32; len];
    for g in population {
        for (k, &w) in g.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                ones[k * 64 + b] += 1;
                bits &= bits - 1;
            }
        }
    }
    let mu = population.len() as f64;
    ones.iter()
        .map(|&c| binary_entropy(f64::from(c) / mu))
        .sum::<f64>()
        / len as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaSettings {
    pub mu: usize,
    pub len: usize,
    pub px: f64,
    pub budget: u64,
}

impl Default for GaSettings {
    fn default() -> Self {
        GaSettings {
            mu: 100,
            len: 100,
            px: 0.9,
            budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ByzRunRecord {
    pub problem: Problem,
    pub model: CorruptionKind,
    pub p: f64,
    /// Best true fitness over everything evaluated so far, after the initial
    /// population and after each generation.
    pub best_true_trace: Vec<u32>,
    /// `(evaluation number, true fitness)` each time the best true fitness
    /// improved. Evaluation numbers start at 1.
    pub improvements: Vec<(u64, u32)>,
    pub min_entropy: f64,
    pub evaluations: u64,
    pub len: usize,
}

impl ByzRunRecord {
    pub fn final_best_true(&self) -> u32 {
        self.improvements.last().map_or(0, |&(_, f)| f)
    }

    /// First evaluation whose true fitness reached `quality · ℓ`.
    pub fn evals_to_quality(&self, quality: f64) -> Option<u64> {
        let need = threshold(quality, self.len);
        self.improvements
            .iter()
            .find(|&&(_, f)| f >= need)
            .map(|&(e, _)| e)
    }
}

fn threshold(quality: f64, len: usize) -> u32 {
    (quality * len as f64 - 1e-9).ceil().max(0.0) as u32
}

/// Binary tournament on the fitness the GA saw; ties go to a coin flip.
fn tournament<R: Rng + ?Sized>(pop: &[BitIndividual], rng: &mut R) -> usize {
    let i = rng.random_range(0..pop.len());
    let j = rng.random_range(0..pop.len());
    let (fi, fj) = (pop[i].unreliable_fitness, pop[j].unreliable_fitness);
    if fi > fj || (fi == fj && rng.random_bool(0.5)) {
        i
    } else {
        j
    }
}

struct ShadowLog {
    evaluations: u64,
    best: Option<u32>,
    improvements: Vec<(u64, u32)>,
}

impl ShadowLog {
    fn record(&mut self, f_true: u32) {
        self.evaluations += 1;
        if self.best.is_none_or(|b| f_true > b) {
            self.best = Some(f_true);
            self.improvements.push((self.evaluations, f_true));
        }
    }
}

fn evaluate<R: Rng + ?Sized>(
    genome: Vec<u64>,
    problem: Problem,
    len: usize,
    model: &mut CorruptionModel,
    log: &mut ShadowLog,
    rng: &mut R,
) -> BitIndividual {
    let true_fitness = problem.eval(&genome, len);
    let unreliable_fitness = model.corrupt(true_fitness, rng);
    log.record(true_fitness);
    BitIndividual {
        genome,
        unreliable_fitness,
        true_fitness,
    }
}

fn entropy_of(pop: &[BitIndividual], len: usize) -> f64 {
    let genomes: Vec<Vec<u64>> = pop.iter().map(|i| i.genome.clone()).collect();
    population_entropy(&genomes, len)
}

/// Elitist generational GA: binary tournament, single-point crossover with
/// probability `px` (cut uniform in `1..ℓ`, both children kept), per-bit
/// mutation at rate `1/ℓ`. The best parent by seen fitness replaces the
/// worst offspring. Generations run while a full one fits in the budget.
pub fn evolve_byzantine_run<R: Rng + ?Sized>(
    problem: Problem,
    kind: CorruptionKind,
    p: f64,
    settings: &GaSettings,
    rng: &mut R,
) -> ByzRunRecord {
    let GaSettings {
        mu,
        len,
        px,
        budget,
    } = *settings;
    assert!(
        mu >= 2 && mu % 2 == 0,
        "population size must be even and >= 2"
    );
    assert!(len >= 2 && budget >= mu as u64);
    let mut model = CorruptionModel::new(kind, p, len as u32);
    let mut log = ShadowLog {
        evaluations: 0,
        best: None,
        improvements: Vec::new(),
    };
    let rate = 1.0 / len as f64;

    let mut pop: Vec<BitIndividual> = (0..mu)
        .map(|_| {
            let g = random_genome(len, rng);
            evaluate(g, problem, len, &mut model, &mut log, rng)
        })
        .collect();
    let mut trace = vec![log.best.unwrap_or(0)];
    let mut min_entropy = entropy_of(&pop, len);

    while log.evaluations + mu as u64 <= budget {
        let mut offspring = Vec::with_capacity(mu);
        while offspring.len() < mu {
            let a = &pop[tournament(&pop, rng)].genome;
            let b = &pop[tournament(&pop, rng)].genome;
            let (mut c1, mut c2) = if rng.random_bool(px) {
                crossover(a, b, rng.random_range(1..len))
            } else {
                (a.clone(), b.clone())
            };
            mutate_bits(&mut c1, len, rate, rng);
            mutate_bits(&mut c2, len, rate, rng);
            offspring.push(evaluate(c1, problem, len, &mut model, &mut log, rng));
            offspring.push(evaluate(c2, problem, len, &mut model, &mut log, rng));
        }
        let elite = pop
            .iter()
            .enumerate()
            .max_by(|x, y| {
                x.1.unreliable_fitness
                    .cmp(&y.1.unreliable_fitness)
                    .then(y.0.cmp(&x.0))
            })
            .map(|(i, _)| i)
            .expect("non-empty population");
        let worst = offspring
            .iter()
            .enumerate()
            .min_by_key(|(_, ind)| ind.unreliable_fitness)
            .map(|(i, _)| i)
            .expect("non-empty offspring");
        offspring[worst] = pop.swap_remove(elite);
        pop = offspring;
        trace.push(log.best.unwrap_or(0));
        min_entropy = min_entropy.min(entropy_of(&pop, len));
    }

    ByzRunRecord {
        problem,
        model: kind,
        p,
        best_true_trace: trace,
        improvements: log.improvements,
        min_entropy,
        evaluations: log.evaluations,
        len,
    }
}

/// Outcome of [`relative_effort`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Effort {
    Ratio(f64),
    /// No run at `p` (or none at the baseline) reached the quality.
    Unreached,
}

impl Effort {
    pub fn ratio(self) -> Option<f64> {
        match self {
            Effort::Ratio(r) => Some(r),
            Effort::Unreached => None,
        }
    }
}

/// Mean evaluations-to-quality at `p` over the mean at the baseline, each
/// over the runs that reached the quality.
pub fn relative_effort(
    at_p: &[ByzRunRecord],
    baseline: &[ByzRunRecord],
    quality: f64,
) -> Result<Effort, ByzantineError> {
    if !(quality > 0.0 && quality <= 1.0) {
        return Err(ByzantineError::QualityOutOfRange(quality));
    }
    if at_p.is_empty() || baseline.is_empty() {
        return Err(ByzantineError::NoRecords);
    }
    let mean_evals = |rs: &[ByzRunRecord]| {
        let hits: Vec<f64> = rs
            .iter()
            .filter_map(|r| r.evals_to_quality(quality))
            .map(|e| e as f64)
            .collect();
        stats::mean(&hits)
    };
    Ok(match (mean_evals(at_p), mean_evals(baseline)) {
        (Some(a), Some(b)) => Effort::Ratio(a / b),
        _ => Effort::Unreached,
    })
}

fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ByzantineParams {
    pub problems: Vec<Problem>,
    pub models: Vec<CorruptionKind>,
    pub p: Vec<f64>,
    pub mu: usize,
    pub len: usize,
    pub px: f64,
    pub budget: u64,
}

impl Default for ByzantineParams {
    fn default() -> Self {
        let s = GaSettings::default();
        ByzantineParams {
            problems: Problem::ALL.to_vec(),
            models: vec![CorruptionKind::Inverter, CorruptionKind::Randomizer],
            p: default_p_grid(),
            mu: s.mu,
            len: s.len,
            px: s.px,
            budget: s.budget,
        }
    }
}

impl ByzantineParams {
    pub fn settings(&self) -> GaSettings {
        GaSettings {
            mu: self.mu,
            len: self.len,
            px: self.px,
            budget: self.budget,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.problems.is_empty() {
            return Err(HarnessError::out_of_range(
                "problems",
                "[]",
                "must be non-empty",
            ));
        }
        if self.models.is_empty() {
            return Err(HarnessError::out_of_range(
                "models",
                "[]",
                "must be non-empty",
            ));
        }
        if self.p.is_empty() {
            return Err(HarnessError::out_of_range("p", "[]", "must be non-empty"));
        }
        if let Some(bad) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(HarnessError::out_of_range("p", bad, "must lie in [0, 1]"));
        }
        if self.mu < 2 || self.mu % 2 == 1 {
            return Err(HarnessError::out_of_range(
                "mu",
                self.mu,
                "must be even and >= 2",
            ));
        }
        if self.len < 2 {
            return Err(HarnessError::out_of_range("len", self.len, "must be >= 2"));
        }
        if !(0.0..=1.0).contains(&self.px) {
            return Err(HarnessError::out_of_range(
                "px",
                self.px,
                "must lie in [0, 1]",
            ));
        }
        if self.budget < self.mu as u64 {
            return Err(HarnessError::out_of_range(
                "budget",
                self.budget,
                "must be >= mu",
            ));
        }
        Ok(())
    }
}

/// All runs of one (problem, model, p) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ByzCell {
    pub problem: Problem,
    pub model: CorruptionKind,
    pub p: f64,
    /// `(global run index, seed, record)`. Per-generation traces are dropped
    /// to bound memory.
    pub runs: Vec<(u64, u64, ByzRunRecord)>,
}

impl ByzCell {
    pub fn records(&self) -> Vec<ByzRunRecord> {
        self.runs.iter().map(|(_, _, r)| r.clone()).collect()
    }

    pub fn final_best(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|(_, _, r)| f64::from(r.final_best_true()))
            .collect()
    }

    pub fn mean_final_best(&self) -> f64 {
        stats::mean(&self.final_best()).unwrap_or(f64::NAN)
    }

    pub fn mean_min_entropy(&self) -> f64 {
        let e: Vec<f64> = self.runs.iter().map(|(_, _, r)| r.min_entropy).collect();
        stats::mean(&e).unwrap_or(f64::NAN)
    }

    pub fn optimum_hits(&self) -> usize {
        self.runs
            .iter()
            .filter(|(_, _, r)| r.final_best_true() as usize == r.len)
            .count()
    }
}

/// Seed of replicate `r` in a cell. It depends on the cell's problem, model
/// and `p` rather than its position in the grid, so a sub-grid reproduces
/// the matching cells of a full sweep.
pub fn cell_seed(master_seed: u64, problem: Problem, kind: CorruptionKind, p: f64, r: u64) -> u64 {
    let p_code = (p * 1e6).round() as u64;
    derive_path_seed(master_seed, &[problem.code(), kind.code(), p_code, r])
}

/// Full sweep over problems × models × p, `runs` replicates per cell.
pub fn byzantine_experiment(
    params: &ByzantineParams,
    runs: u64,
    master_seed: u64,
    workers: usize,
) -> Vec<ByzCell> {
    let settings = params.settings();
    let mut cells = Vec::new();
    for &problem in &params.problems {
        for &model in &params.models {
            for &p in &params.p {
                cells.push((problem, model, p));
            }
        }
    }
    let total = cells.len() as u64 * runs;
    let all = run_indexed(total, workers, |i| {
        let (problem, model, p) = cells[(i / runs) as usize];
        let seed = cell_seed(master_seed, problem, model, p, i % runs);
        let mut rec = evolve_byzantine_run(problem, model, p, &settings, &mut rng_from_seed(seed));
        rec.best_true_trace = Vec::new();
        (i, seed, rec)
    });
    let mut it = all.into_iter();
    cells
        .into_iter()
        .map(|(problem, model, p)| ByzCell {
            problem,
            model,
            p,
            runs: it.by_ref().take(runs as usize).collect(),
        })
        .collect()
}

fn opt_value(v: Option<u64>) -> Value {
    v.map_or(Value::Missing, Value::from)
}

pub fn run_experiment(
    params: &ByzantineParams,
    runs: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ExperimentOutput, HarnessError> {
    params.validate()?;
    let cells = byzantine_experiment(params, runs, master_seed, workers);
    let mut records = Vec::new();
    for c in &cells {
        for (i, seed, r) in &c.runs {
            let mut payload: Vec<Value> = vec![
                c.problem.as_str().into(),
                c.model.as_str().into(),
                c.p.into(),
                (*i).into(),
                Value::Text(seed.to_string()),
                u64::from(r.final_best_true()).into(),
            ];
            payload.extend(QUALITIES.iter().map(|&q| opt_value(r.evals_to_quality(q))));
            payload.push(r.min_entropy.into());
            records.push(RunRecord {
                experiment: ExperimentId::Byzantine,
                run_index: *i,
                derived_seed: *seed,
                payload,
            });
        }
    }

    let mut summary = Table::new(SUMMARY_COLUMNS);
    let mut notes = Vec::new();
    for c in &cells {
        let baseline = cells
            .iter()
            .find(|b| b.problem == c.problem && b.model == c.model && b.p == 0.0)
            .map(ByzCell::records);
        let mut row: Vec<Value> = vec![
            c.problem.as_str().into(),
            c.model.as_str().into(),
            c.p.into(),
            c.runs.len().into(),
            c.mean_final_best().into(),
            c.optimum_hits().into(),
            c.mean_min_entropy().into(),
        ];
        for q in QUALITIES {
            let effort = baseline
                .as_ref()
                .and_then(|b| relative_effort(&c.records(), b, q).ok())
                .and_then(Effort::ratio);
            row.push(effort.into());
        }
        notes.push(format!(
            "{:<11} {:<10} p={:.2} mean_best={:.2} hits={}/{} min_entropy={:.3}",
            c.problem,
            c.model,
            c.p,
            c.mean_final_best(),
            c.optimum_hits(),
            c.runs.len(),
            c.mean_min_entropy()
        ));
        summary.rows.push(row);
    }
    Ok(ExperimentOutput {
        experiment: ExperimentId::Byzantine,
        records,
        reports: vec![("byzantine_summary.csv".to_string(), summary)],
        notes,
    })
}
