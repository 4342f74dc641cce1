//! Random tournament schedules and their constraint violations.
//!
//! A schedule for `n` teams has `2(n-1)` rounds. Every round is a perfect
//! matching of the teams with one home and one away side per game, but
//! nothing else is enforced. Violations of the three tournament constraints
//! are counted from each team's point of view:
//!
//! * double round-robin, for every team `A` and every opponent `B`: `c - 2`
//!   if they meet `c > 2` times, 1 if once, 2 if never, and 1 if they meet
//!   twice but `A` was not home exactly once;
//! * maxStreak, for every team: `L - limit` for each maximal home (or away)
//!   run of length `L > limit`;
//! * noRepeat, for every team `A` and opponent `B`: `L - 1` for each maximal
//!   run of `L` consecutive rounds in which they meet.
//!
//! Because of the per-team view, a pair-level violation of the first or
//! third kind is counted once for each of its two teams.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{
    derive_path_seed, rng_from_seed, run_indexed, ExperimentId, ExperimentOutput, HarnessError,
    RunRecord, Table, Value,
};
use crate::stats::{self, FitResult};

pub const CSV_COLUMNS: &[&str] = &[
    "n_teams",
    "samples",
    "drr_min",
    "drr_mean",
    "drr_max",
    "streak_min",
    "streak_mean",
    "streak_max",
    "norep_min",
    "norep_mean",
    "norep_max",
];

pub const FIT_COLUMNS: &[&str] = &["constraint", "degree", "c2", "c1", "c0", "rmse"];

pub const DEFAULT_MAX_STREAK: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TtpError {
    #[error("team count {0} must be even and at least 4")]
    BadTeamCount(usize),
    #[error("malformed schedule: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Venue {
    Home,
    Away,
}

/// Round-by-team grid of opponents and venues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    n_teams: usize,
    opponent: Vec<u16>,
    home: Vec<bool>,
}

fn check_team_count(n_teams: usize) -> Result<(), TtpError> {
    if n_teams < 4 || n_teams % 2 == 1 || n_teams > u16::MAX as usize {
        Err(TtpError::BadTeamCount(n_teams))
    } else {
        Ok(())
    }
}

impl Schedule {
    /// Builds a schedule from per-round `(opponent, venue)` rows, checking
    /// that every round is a perfect matching with one home side per game.
    pub fn from_rounds(rounds: &[Vec<(usize, Venue)>]) -> Result<Self, TtpError> {
        let n = rounds.first().map_or(0, Vec::len);
        check_team_count(n)?;
        if rounds.len() != 2 * (n - 1) {
            return Err(TtpError::Malformed(format!(
                "{} rounds, expected {}",
                rounds.len(),
                2 * (n - 1)
            )));
        }
        let mut opponent = Vec::with_capacity(rounds.len() * n);
        let mut home = Vec::with_capacity(rounds.len() * n);
        for (r, row) in rounds.iter().enumerate() {
            if row.len() != n {
                return Err(TtpError::Malformed(format!(
                    "round {r} has {} teams",
                    row.len()
                )));
            }
            for &(o, v) in row {
                if o >= n {
                    return Err(TtpError::Malformed(format!(
                        "round {r}: opponent {o} out of range"
                    )));
                }
                opponent.push(o as u16);
                home.push(v == Venue::Home);
            }
        }
        let s = Schedule {
            n_teams: n,
            opponent,
            home,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), TtpError> {
        let n = self.n_teams;
        for r in 0..self.rounds() {
            for t in 0..n {
                let o = self.opponent(r, t);
                if o == t {
                    return Err(TtpError::Malformed(format!(
                        "round {r}: team {t} plays itself"
                    )));
                }
                if self.opponent(r, o) != t {
                    return Err(TtpError::Malformed(format!(
                        "round {r}: {t} plays {o} but {o} plays {}",
                        self.opponent(r, o)
                    )));
                }
                if self.venue(r, t) == self.venue(r, o) {
                    return Err(TtpError::Malformed(format!(
                        "round {r}: {t} and {o} share a venue"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_teams(&self) -> usize {
        self.n_teams
    }

    pub fn rounds(&self) -> usize {
        2 * (self.n_teams - 1)
    }

    #[inline]
    pub fn opponent(&self, round: usize, team: usize) -> usize {
        self.opponent[round * self.n_teams + team] as usize
    }

    #[inline]
    pub fn venue(&self, round: usize, team: usize) -> Venue {
        if self.home[round * self.n_teams + team] {
            Venue::Home
        } else {
            Venue::Away
        }
    }

    pub fn to_rounds(&self) -> Vec<Vec<(usize, Venue)>> {
        (0..self.rounds())
            .map(|r| {
                (0..self.n_teams)
                    .map(|t| (self.opponent(r, t), self.venue(r, t)))
                    .collect()
            })
            .collect()
    }

    /// Same games with team `t` renamed to `perm[t]`.
    pub fn relabel(&self, perm: &[usize]) -> Schedule {
        let n = self.n_teams;
        let mut opponent = vec![0u16; self.opponent.len()];
        let mut home = vec![false; self.home.len()];
        for r in 0..self.rounds() {
            for t in 0..n {
                let idx = r * n + perm[t];
                opponent[idx] = perm[self.opponent(r, t)] as u16;
                home[idx] = self.home[r * n + t];
            }
        }
        Schedule {
            n_teams: n,
            opponent,
            home,
        }
    }

    pub fn reversed(&self) -> Schedule {
        let n = self.n_teams;
        let rows = self.rounds();
        let mut out = self.clone();
        for r in 0..rows {
            let src = (rows - 1 - r) * n;
            out.opponent[r * n..(r + 1) * n].copy_from_slice(&self.opponent[src..src + n]);
            out.home[r * n..(r + 1) * n].copy_from_slice(&self.home[src..src + n]);
        }
        out
    }
}

/// Fills every round independently: teams are visited in ascending index;
/// each team not yet placed draws its opponent uniformly from the remaining
/// unplaced teams, and a fair coin decides which of the two plays at home.
pub fn gen_schedule<R: Rng + ?Sized>(n_teams: usize, rng: &mut R) -> Result<Schedule, TtpError> {
    check_team_count(n_teams)?;
    let n = n_teams;
    let rounds = 2 * (n - 1);
    let mut opponent = vec![0u16; rounds * n];
    let mut home = vec![false; rounds * n];
    let mut pool: Vec<u16> = Vec::with_capacity(n);
    let mut pos = vec![0usize; n];
    for r in 0..rounds {
        pool.clear();
        pool.extend(0..n as u16);
        for (t, p) in pos.iter_mut().enumerate() {
            *p = t;
        }
        let row = r * n;
        for t in 0..n {
            if pos[t] == usize::MAX {
                continue;
            }
            take(&mut pool, &mut pos, t);
            let o = pool[rng.random_range(0..pool.len())] as usize;
            take(&mut pool, &mut pos, o);
            opponent[row + t] = o as u16;
            opponent[row + o] = t as u16;
            let t_home = rng.random_bool(0.5);
            home[row + t] = t_home;
            home[row + o] = !t_home;
        }
    }
    Ok(Schedule {
        n_teams,
        opponent,
        home,
    })
}

/// Removes `team` from the unordered pool in O(1).
#[inline]
fn take(pool: &mut Vec<u16>, pos: &mut [usize], team: usize) {
    let i = pos[team];
    let last = *pool.last().expect("non-empty pool") as usize;
    pool.swap_remove(i);
    if last != team {
        pos[last] = i;
    }
    pos[team] = usize::MAX;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ViolationCounts {
    pub drr: u64,
    pub max_streak: u64,
    pub no_repeat: u64,
}

impl ViolationCounts {
    pub fn total(&self) -> u64 {
        self.drr + self.max_streak + self.no_repeat
    }

    pub fn is_valid(&self) -> bool {
        self.total() == 0
    }
}

/// Reusable scratch space for [`count_violations_with`].
#[derive(Debug, Default)]
pub struct ViolationScratch {
    meetings: Vec<u16>,
    homes: Vec<u16>,
}

pub fn count_violations(s: &Schedule, max_streak_limit: usize) -> ViolationCounts {
    count_violations_with(s, max_streak_limit, &mut ViolationScratch::default())
}

pub fn count_violations_with(
    s: &Schedule,
    max_streak_limit: usize,
    scratch: &mut ViolationScratch,
) -> ViolationCounts {
    let n = s.n_teams;
    let rounds = s.rounds();
    scratch.meetings.clear();
    scratch.meetings.resize(n * n, 0);
    scratch.homes.clear();
    scratch.homes.resize(n * n, 0);

    let mut no_repeat = 0u64;
    for r in 0..rounds {
        let row = r * n;
        for t in 0..n {
            let o = s.opponent[row + t] as usize;
            scratch.meetings[t * n + o] += 1;
            scratch.homes[t * n + o] += s.home[row + t] as u16;
            if r > 0 && s.opponent[row - n + t] as usize == o {
                no_repeat += 1;
            }
        }
    }

    let mut drr = 0u64;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let c = scratch.meetings[a * n + b];
            drr += match c {
                0 => 2,
                1 => 1,
                2 => u64::from(scratch.homes[a * n + b] != 1),
                c => u64::from(c - 2),
            };
        }
    }

    let mut max_streak = 0u64;
    for t in 0..n {
        let mut run = 0usize;
        let mut prev = None;
        for r in 0..rounds {
            let h = s.home[r * n + t];
            if prev == Some(h) {
                run += 1;
            } else {
                run = 1;
                prev = Some(h);
            }
            if run > max_streak_limit {
                max_streak += 1;
            }
        }
    }

    ViolationCounts {
        drr,
        max_streak,
        no_repeat,
    }
}

/// Circle-method single round robin followed by its mirror: the same rounds
/// in reverse order with venues swapped. Every pair meets exactly twice, once
/// at each venue; the last round of the first half repeats at the seam.
pub fn oracle_valid_drr_schedule(n_teams: usize) -> Result<Schedule, TtpError> {
    check_team_count(n_teams)?;
    let n = n_teams;
    let m = n - 1;
    let mut first_half: Vec<Vec<(usize, Venue)>> = Vec::with_capacity(m);
    for r in 0..m {
        let mut row = vec![(0usize, Venue::Home); n];
        let mut pair = |a: usize, b: usize, a_home: bool| {
            let (va, vb) = if a_home {
                (Venue::Home, Venue::Away)
            } else {
                (Venue::Away, Venue::Home)
            };
            row[a] = (b, va);
            row[b] = (a, vb);
        };
        pair(m, r, r % 2 == 0);
        for k in 1..n / 2 {
            pair((r + k) % m, (r + m - k) % m, k % 2 == 1);
        }
        first_half.push(row);
    }
    let flip = |v: Venue| match v {
        Venue::Home => Venue::Away,
        Venue::Away => Venue::Home,
    };
    let second_half: Vec<Vec<(usize, Venue)>> = first_half
        .iter()
        .map(|row| row.iter().map(|&(o, v)| (o, flip(v))).collect())
        .collect();
    let rounds: Vec<_> = first_half
        .into_iter()
        .chain(second_half.into_iter().rev())
        .collect();
    Schedule::from_rounds(&rounds)
}

/// Min / mean / max of each violation type over the samples for one team
/// count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtpCellStats {
    pub n_teams: usize,
    pub samples: u64,
    pub min: ViolationCounts,
    pub max: ViolationCounts,
    pub mean_drr: f64,
    pub mean_max_streak: f64,
    pub mean_no_repeat: f64,
    /// Smallest total over any single sampled schedule.
    pub min_total: u64,
}

#[derive(Debug, Clone, Copy)]
struct Accumulator {
    count: u64,
    sum: [u64; 3],
    min: [u64; 3],
    max: [u64; 3],
    min_total: u64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator {
            count: 0,
            sum: [0; 3],
            min: [u64::MAX; 3],
            max: [0; 3],
            min_total: u64::MAX,
        }
    }

    fn push(&mut self, v: ViolationCounts) {
        let a = [v.drr, v.max_streak, v.no_repeat];
        self.count += 1;
        for (k, &x) in a.iter().enumerate() {
            self.sum[k] += x;
            self.min[k] = self.min[k].min(x);
            self.max[k] = self.max[k].max(x);
        }
        self.min_total = self.min_total.min(v.total());
    }

    fn merge(mut self, o: &Accumulator) -> Self {
        self.count += o.count;
        for k in 0..3 {
            self.sum[k] += o.sum[k];
            self.min[k] = self.min[k].min(o.min[k]);
            self.max[k] = self.max[k].max(o.max[k]);
        }
        self.min_total = self.min_total.min(o.min_total);
        self
    }
}

const BLOCK: u64 = 4096;

/// Samples `samples` random schedules for `n_teams` and aggregates their
/// violations. Sample `k` uses seed `derive_path_seed(master_seed, [n_teams, k])`.
pub fn sample_team_count(
    n_teams: usize,
    samples: u64,
    max_streak_limit: usize,
    master_seed: u64,
    workers: usize,
) -> Result<TtpCellStats, TtpError> {
    check_team_count(n_teams)?;
    let samples = samples.max(1);
    let blocks = samples.div_ceil(BLOCK);
    let parts = run_indexed(blocks, workers, |b| {
        let mut acc = Accumulator::new();
        let mut scratch = ViolationScratch::default();
        for k in b * BLOCK..((b + 1) * BLOCK).min(samples) {
            let mut rng = rng_from_seed(derive_path_seed(master_seed, &[n_teams as u64, k]));
            let s = gen_schedule(n_teams, &mut rng).expect("checked");
            acc.push(count_violations_with(&s, max_streak_limit, &mut scratch));
        }
        acc
    });
    let acc = parts.iter().fold(Accumulator::new(), |a, p| a.merge(p));
    let to_counts = |a: [u64; 3]| ViolationCounts {
        drr: a[0],
        max_streak: a[1],
        no_repeat: a[2],
    };
    let c = acc.count as f64;
    Ok(TtpCellStats {
        n_teams,
        samples: acc.count,
        min: to_counts(acc.min),
        max: to_counts(acc.max),
        mean_drr: acc.sum[0] as f64 / c,
        mean_max_streak: acc.sum[1] as f64 / c,
        mean_no_repeat: acc.sum[2] as f64 / c,
        min_total: acc.min_total,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtpFits {
    pub drr: FitResult,
    pub max_streak: FitResult,
    pub no_repeat: FitResult,
}

/// Quadratic fits of mean drr and maxStreak violations and a linear fit of
/// mean noRepeat violations against the team count.
pub fn fit_cells(cells: &[TtpCellStats]) -> Result<TtpFits, stats::StatsError> {
    let pts = |f: fn(&TtpCellStats) -> f64| -> Vec<(f64, f64)> {
        cells.iter().map(|c| (c.n_teams as f64, f(c))).collect()
    };
    Ok(TtpFits {
        drr: stats::polyfit(&pts(|c| c.mean_drr), 2)?,
        max_streak: stats::polyfit(&pts(|c| c.mean_max_streak), 2)?,
        no_repeat: stats::polyfit(&pts(|c| c.mean_no_repeat), 1)?,
    })
}

pub fn ttp_ensemble(
    n_teams_list: &[usize],
    samples_per_n: u64,
    max_streak_limit: usize,
    master_seed: u64,
    workers: usize,
) -> Result<(Vec<TtpCellStats>, Option<TtpFits>), TtpError> {
    let cells = n_teams_list
        .iter()
        .map(|&n| sample_team_count(n, samples_per_n, max_streak_limit, master_seed, workers))
        .collect::<Result<Vec<_>, _>>()?;
    let fits = fit_cells(&cells).ok();
    Ok((cells, fits))
}

impl TtpCellStats {
    pub fn to_record(&self, run_index: u64, derived_seed: u64) -> RunRecord {
        RunRecord {
            experiment: ExperimentId::Ttp,
            run_index,
            derived_seed,
            payload: vec![
                self.n_teams.into(),
                self.samples.into(),
                self.min.drr.into(),
                self.mean_drr.into(),
                self.max.drr.into(),
                self.min.max_streak.into(),
                self.mean_max_streak.into(),
                self.max.max_streak.into(),
                self.min.no_repeat.into(),
                self.mean_no_repeat.into(),
                self.max.no_repeat.into(),
            ],
        }
    }
}

pub fn fits_table(fits: &TtpFits) -> Table {
    let mut t = Table::new(FIT_COLUMNS);
    for (name, fit) in [
        ("drr", &fits.drr),
        ("max_streak", &fits.max_streak),
        ("no_repeat", &fits.no_repeat),
    ] {
        let c2 = if fit.degree >= 2 {
            Value::Real(fit.coefficient(2))
        } else {
            Value::Missing
        };
        t.rows.push(vec![
            name.into(),
            fit.degree.into(),
            c2,
            fit.coefficient(1).into(),
            fit.coefficient(0).into(),
            fit.rmse.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TtpParams {
    pub teams: Vec<usize>,
    pub max_streak: usize,
}

impl Default for TtpParams {
    fn default() -> Self {
        TtpParams {
            teams: (4..=50).step_by(2).collect(),
            max_streak: DEFAULT_MAX_STREAK,
        }
    }
}

impl TtpParams {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.teams.is_empty() {
            return Err(HarnessError::out_of_range(
                "teams",
                "[]",
                "must be non-empty",
            ));
        }
        if let Some(bad) = self.teams.iter().find(|&&n| check_team_count(n).is_err()) {
            return Err(HarnessError::out_of_range(
                "teams",
                bad,
                "must be even and >= 4",
            ));
        }
        Ok(())
    }
}

pub fn run_experiment(
    params: &TtpParams,
    samples: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ExperimentOutput, HarnessError> {
    params.validate()?;
    let (cells, fits) = ttp_ensemble(
        &params.teams,
        samples,
        params.max_streak,
        master_seed,
        workers,
    )
    .map_err(|e| HarnessError::out_of_range("teams", "", e.to_string()))?;
    let records = cells
        .iter()
        .enumerate()
        .map(|(i, c)| c.to_record(i as u64, derive_path_seed(master_seed, &[c.n_teams as u64])))
        .collect();
    let mut notes: Vec<String> = cells
        .iter()
        .map(|c| {
            format!(
                "n={:<3} drr={:.2} streak={:.2} norep={:.2} min_total={}",
                c.n_teams, c.mean_drr, c.mean_max_streak, c.mean_no_repeat, c.min_total
            )
        })
        .collect();
    let mut reports = Vec::new();
    if let Some(f) = &fits {
        for (name, fit) in [
            ("drr", &f.drr),
            ("max_streak", &f.max_streak),
            ("no_repeat", &f.no_repeat),
        ] {
            notes.push(format!(
                "fit {name}: {:?} rmse={:.4}",
                fit.coefficients, fit.rmse
            ));
        }
        reports.push(("ttp_fits.csv".to_string(), fits_table(f)));
    }
    Ok(ExperimentOutput {
        experiment: ExperimentId::Ttp,
        records,
        reports,
        notes,
    })
}
