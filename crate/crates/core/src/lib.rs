//! Seeded, parallel experiment engines for four small empirical studies in
//! evolutionary computation and combinatorial feasibility:
//!
//! * [`assignment`]: random asymmetric cost matrices, an exact O(n³) Hungarian
//!   solver and the subtour structure of optimal assignments.
//! * [`ttp`]: random round-structured tournament schedules and their
//!   double round-robin / maxStreak / noRepeat violation counts.
//! * [`bent`]: tree GP over `{AND, XOR}` searching for bent Boolean functions,
//!   Walsh–Hadamard nonlinearity and four mutation operators.
//! * [`byzantine`]: an elitist generational GA on OneMax / LeadingOnes whose
//!   fitness evaluations are corrupted with probability `p`.
//!
//! [`harness`] owns configuration, seed derivation, the worker pool and CSV
//! output; [`stats`] holds the summaries, the Mann–Whitney U test and
//! least-squares polynomial fits used by every report.

pub mod assignment;
pub mod bent;
pub mod byzantine;
pub mod harness;
pub mod stats;
pub mod ttp;

pub use harness::{
    derive_run_seed, load_config, rng_from_seed, write_records, ExperimentConfig, ExperimentId,
    ExperimentParams, HarnessError, RunRecord, Value,
};
pub use stats::{FitResult, StatsError, Summary};
