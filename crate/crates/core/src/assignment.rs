//! Random asymmetric cost matrices, an exact Hungarian solver, and the
//! subtour structure of optimal assignments.
//!
//! An optimal assignment is a permutation; reading it as a successor map
//! splits the cities into cycles (subtours). The assignment is also a valid
//! ATSP tour exactly when there is a single cycle.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{
    derive_path_seed, rng_from_seed, run_indexed, ExperimentId, ExperimentOutput, HarnessError,
    RunRecord,
};
use crate::stats;

pub const CSV_COLUMNS: &[&str] = &[
    "rand_max",
    "n",
    "matrices",
    "tour_fraction",
    "mean_subtours",
    "max_subtours",
    "q1_subtours",
    "q3_subtours",
    "mean_subtour_len",
    "q1_len",
    "q3_len",
    "degenerate",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssignmentError {
    #[error("matrix dimension {0} is below 2")]
    TooSmall(usize),
    #[error("rand_max must be at least 1")]
    EmptyRange,
    #[error("cost matrix is empty")]
    Empty,
    #[error("cost matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("not a permutation: {0}")]
    NotBijective(String),
}

/// How `rand_max` bounds the sampled entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueRange {
    /// `0..rand_max`, i.e. `rand_max` distinct values.
    #[default]
    Exclusive,
    /// `0..=rand_max`.
    Inclusive,
}

impl ValueRange {
    fn distinct_values(self, rand_max: u64) -> u64 {
        match self {
            ValueRange::Exclusive => rand_max,
            ValueRange::Inclusive => rand_max + 1,
        }
    }
}

/// How the solver picks among equal-cost optimal assignments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Solve with the columns under a uniformly random relabelling, then map
    /// back, so the choice among optima does not follow index order.
    #[default]
    RandomRelabel,
    /// The solver's own scan order (lowest column index first).
    ScanOrder,
}

/// Square matrix of non-negative integer costs, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<u64>,
}

impl CostMatrix {
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self, AssignmentError> {
        let n = rows.len();
        if n == 0 {
            return Err(AssignmentError::Empty);
        }
        let mut entries = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(AssignmentError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
            entries.extend_from_slice(r);
        }
        Ok(CostMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.n + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.entries[row * self.n..(row + 1) * self.n]
    }

    pub fn add_to_row(&mut self, row: usize, c: u64) {
        let n = self.n;
        for e in &mut self.entries[row * n..(row + 1) * n] {
            *e += c;
        }
    }

    pub fn cost_of(&self, assignment: &[usize]) -> u64 {
        assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| self.get(i, j))
            .sum()
    }
}

/// Fills an `n × n` matrix, diagonal included, with independent uniform
/// draws from the configured value range.
pub fn gen_cost_matrix<R: Rng + ?Sized>(
    n: usize,
    rand_max: u64,
    range: ValueRange,
    rng: &mut R,
) -> Result<CostMatrix, AssignmentError> {
    if n < 2 {
        return Err(AssignmentError::TooSmall(n));
    }
    if rand_max < 1 {
        return Err(AssignmentError::EmptyRange);
    }
    let bound = range.distinct_values(rand_max);
    let entries = (0..n * n).map(|_| rng.random_range(0..bound)).collect();
    Ok(CostMatrix { n, entries })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApSolution {
    /// `assignment[i]` is the column chosen in row `i`.
    pub assignment: Vec<usize>,
    pub cost: u64,
}

/// Exact minimum-cost assignment by the O(n³) shortest-augmenting-path form
/// of the Hungarian method with row/column potentials.
///
/// Among equal-cost optima the result is whichever the column scan order
/// (lowest index wins on ties) reaches first.
pub fn hungarian_solve(m: &CostMatrix) -> Result<ApSolution, AssignmentError> {
    let n = m.n();
    if n == 0 {
        return Err(AssignmentError::Empty);
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based; index 0 is the virtual column/row.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1]; // owner[j] = row matched to column j
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![INF; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = m.row(i0 - 1);
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] as i64 - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    let cost = m.cost_of(&assignment);
    Ok(ApSolution { assignment, cost })
}

/// Solves `m` with the given tie-breaking; `rng` is only drawn from for
/// [`TieBreak::RandomRelabel`].
pub fn solve_with_tie_break<R: Rng + ?Sized>(
    m: &CostMatrix,
    tie_break: TieBreak,
    rng: &mut R,
) -> Result<ApSolution, AssignmentError> {
    match tie_break {
        TieBreak::ScanOrder => hungarian_solve(m),
        TieBreak::RandomRelabel => {
            let n = m.n();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(rng);
            let entries = (0..n)
                .flat_map(|i| perm.iter().map(move |&j| m.get(i, j)))
                .collect();
            let relabelled = CostMatrix { n, entries };
            let sol = hungarian_solve(&relabelled)?;
            let assignment: Vec<usize> = sol.assignment.iter().map(|&j| perm[j]).collect();
            Ok(ApSolution {
                cost: m.cost_of(&assignment),
                assignment,
            })
        }
    }
}

/// Cycle lengths of a permutation, listed by each cycle's smallest element.
pub fn cycle_decompose(assignment: &[usize]) -> Result<Vec<usize>, AssignmentError> {
    let n = assignment.len();
    let mut seen = vec![false; n];
    for (i, &j) in assignment.iter().enumerate() {
        if j >= n {
            return Err(AssignmentError::NotBijective(format!(
                "position {i} maps to {j}, outside 0..{n}"
            )));
        }
        if seen[j] {
            return Err(AssignmentError::NotBijective(format!(
                "value {j} appears more than once"
            )));
        }
        seen[j] = true;
    }
    seen.fill(false);
    let mut lengths = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = assignment[at];
            len += 1;
        }
        lengths.push(len);
    }
    Ok(lengths)
}

/// Aggregate over one subensemble of matrices sharing `rand_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubensembleStats {
    pub rand_max: u64,
    pub n: usize,
    pub matrices: usize,
    /// Share of solutions with exactly one subtour.
    pub tour_fraction: f64,
    pub mean_subtours: f64,
    pub max_subtours: usize,
    pub q1_subtours: f64,
    pub q3_subtours: f64,
    /// Mean over every subtour of every solution in the subensemble.
    pub mean_subtour_len: f64,
    pub q1_len: f64,
    pub q3_len: f64,
    /// Single-value entry domain: every assignment is optimal and the
    /// statistics only reflect solver tie-breaking.
    pub degenerate: bool,
}

fn half_means_or_single(values: &[f64]) -> (f64, f64) {
    match values {
        [v] => (*v, *v),
        _ => stats::half_means(values).expect("at least two values"),
    }
}

impl SubensembleStats {
    fn from_solutions(rand_max: u64, n: usize, range: ValueRange, subtours: &[Vec<usize>]) -> Self {
        let counts: Vec<f64> = subtours.iter().map(|s| s.len() as f64).collect();
        let lengths: Vec<f64> = subtours.iter().flatten().map(|&l| l as f64).collect();
        let tours = subtours.iter().filter(|s| s.len() == 1).count();
        let (q1_subtours, q3_subtours) = half_means_or_single(&counts);
        let (q1_len, q3_len) = half_means_or_single(&lengths);
        SubensembleStats {
            rand_max,
            n,
            matrices: subtours.len(),
            tour_fraction: tours as f64 / subtours.len() as f64,
            mean_subtours: stats::mean(&counts).unwrap_or(0.0),
            max_subtours: subtours.iter().map(Vec::len).max().unwrap_or(0),
            q1_subtours,
            q3_subtours,
            mean_subtour_len: stats::mean(&lengths).unwrap_or(0.0),
            q1_len,
            q3_len,
            degenerate: range.distinct_values(rand_max) == 1,
        }
    }

    pub fn to_record(&self, run_index: u64, derived_seed: u64) -> RunRecord {
        RunRecord {
            experiment: ExperimentId::ApAtsp,
            run_index,
            derived_seed,
            payload: vec![
                self.rand_max.into(),
                self.n.into(),
                self.matrices.into(),
                self.tour_fraction.into(),
                self.mean_subtours.into(),
                self.max_subtours.into(),
                self.q1_subtours.into(),
                self.q3_subtours.into(),
                self.mean_subtour_len.into(),
                self.q1_len.into(),
                self.q3_len.into(),
                self.degenerate.into(),
            ],
        }
    }
}

/// The randMax ladder 1..9, 10..90, …, 10^7..9·10^7 (72 values).
pub fn paper_rand_max_ladder() -> Vec<u64> {
    (0..8)
        .flat_map(|decade| (1..=9).map(move |k| k * 10u64.pow(decade)))
        .collect()
}

/// Solves `matrices_per_subensemble` random matrices for every `rand_max`
/// and aggregates their subtour statistics.
///
/// Matrix `k` of subensemble `rand_max` is drawn from the seed
/// `derive_path_seed(master_seed, [rand_max, k])`, so a value's results do
/// not depend on which other values share the sweep.
pub fn ap_atsp_ensemble(
    n: usize,
    rand_max_list: &[u64],
    matrices_per_subensemble: usize,
    range: ValueRange,
    tie_break: TieBreak,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<SubensembleStats>, AssignmentError> {
    if n < 2 {
        return Err(AssignmentError::TooSmall(n));
    }
    if rand_max_list.contains(&0) {
        return Err(AssignmentError::EmptyRange);
    }
    let per = matrices_per_subensemble.max(1) as u64;
    let total = rand_max_list.len() as u64 * per;
    let solved: Vec<Vec<usize>> = run_indexed(total, workers, |flat| {
        let rand_max = rand_max_list[(flat / per) as usize];
        let seed = derive_path_seed(master_seed, &[rand_max, flat % per]);
        let mut rng = rng_from_seed(seed);
        let m = gen_cost_matrix(n, rand_max, range, &mut rng).expect("validated");
        let sol = solve_with_tie_break(&m, tie_break, &mut rng).expect("square");
        cycle_decompose(&sol.assignment).expect("solver returns a permutation")
    });
    Ok(rand_max_list
        .iter()
        .zip(solved.chunks(per as usize))
        .map(|(&rand_max, chunk)| SubensembleStats::from_solutions(rand_max, n, range, chunk))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApParams {
    pub n: usize,
    pub rand_max: Vec<u64>,
    pub range: ValueRange,
    pub tie_break: TieBreak,
}

impl Default for ApParams {
    fn default() -> Self {
        ApParams {
            n: 100,
            rand_max: paper_rand_max_ladder(),
            range: ValueRange::Exclusive,
            tie_break: TieBreak::RandomRelabel,
        }
    }
}

impl ApParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n < 2 {
            return Err(HarnessError::out_of_range("n", self.n, "must be >= 2"));
        }
        if self.rand_max.is_empty() {
            return Err(HarnessError::out_of_range(
                "rand_max",
                "[]",
                "must be non-empty",
            ));
        }
        if let Some(bad) = self.rand_max.iter().find(|&&r| r < 1) {
            return Err(HarnessError::out_of_range(
                "rand_max",
                bad,
                "entries must be >= 1",
            ));
        }
        Ok(())
    }
}

pub fn run_experiment(
    params: &ApParams,
    matrices: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ExperimentOutput, HarnessError> {
    params.validate()?;
    let stats = ap_atsp_ensemble(
        params.n,
        &params.rand_max,
        matrices as usize,
        params.range,
        params.tie_break,
        master_seed,
        workers,
    )
    .map_err(|e| HarnessError::out_of_range("ap_atsp", "", e.to_string()))?;
    let records = stats
        .iter()
        .enumerate()
        .map(|(i, s)| s.to_record(i as u64, derive_path_seed(master_seed, &[s.rand_max])))
        .collect();
    let notes = stats
        .iter()
        .map(|s| {
            format!(
                "rand_max={:<10} tours={:.2}% subtours={:.3} len={:.2}{}",
                s.rand_max,
                100.0 * s.tour_fraction,
                s.mean_subtours,
                s.mean_subtour_len,
                if s.degenerate { " (degenerate)" } else { "" }
            )
        })
        .collect();
    Ok(ExperimentOutput {
        experiment: ExperimentId::ApAtsp,
        records,
        reports: Vec::new(),
        notes,
    })
}
