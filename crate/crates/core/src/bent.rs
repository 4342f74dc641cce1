//! Tree GP over `{AND, XOR}` for bent Boolean functions.
//!
//! A genome is a binary tree of nodes; each node carries three genes (its
//! operator and two inputs) and each input is either a variable or a child
//! node. The root sits at depth 1 and nodes at the depth limit may only read
//! variables. Fitness is nonlinearity, computed from the Walsh spectrum:
//!
//! ```text
//! W_f(a) = Σ_x (-1)^(f(x) ⊕ a·x)        NL(f) = 2^(n-1) - max_a |W_f(a)| / 2
//! ```
//!
//! The maximum over `|W_f|` (rather than `W_f`) makes complements of linear
//! functions count as affine. For even `n` the covering radius bound
//! `2^(n-1) - 2^(n/2-1)` is reached exactly by bent functions.
//!
//! Truth tables index inputs by integer `x`, with variable `i` being bit `i`
//! of `x`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{
    derive_run_seed, rng_from_seed, run_indexed, ExperimentId, ExperimentOutput, HarnessError,
    RunRecord, Table, Value,
};
use crate::stats;

pub const CSV_COLUMNS: &[&str] = &[
    "operator",
    "run_index",
    "seed",
    "evaluations_used",
    "success",
    "final_nl",
];

pub const REPORT_COLUMNS: &[&str] = &["operator_a", "operator_b", "u", "p"];

pub const SUMMARY_COLUMNS: &[&str] = &["operator", "runs", "successes", "median", "q1", "q3"];

/// Largest supported input count (a 2^20-entry truth table).
pub const MAX_VARS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BentError {
    #[error("truth table length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("mutation rate {0} is outside [0, 1]")]
    RateOutOfRange(String),
}

/// Covering radius bound `2^(n-1) - 2^(n/2-1)` for even `n`.
pub fn bent_bound(n_vars: usize) -> u32 {
    assert!(
        n_vars >= 2 && n_vars.is_multiple_of(2),
        "bent functions need an even input count"
    );
    (1u32 << (n_vars - 1)) - (1u32 << (n_vars / 2 - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    And,
    Xor,
}

impl Op {
    fn flipped(self) -> Op {
        match self {
            Op::And => Op::Xor,
            Op::Xor => Op::And,
        }
    }

    fn random<R: Rng + ?Sized>(rng: &mut R) -> Op {
        if rng.random_bool(0.5) {
            Op::And
        } else {
            Op::Xor
        }
    }

    #[inline]
    fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Op::And => a & b,
            Op::Xor => a ^ b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Input {
    Var(u8),
    Child(Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub op: Op,
    pub inputs: [Input; 2],
}

fn two_distinct_vars<R: Rng + ?Sized>(n_vars: usize, rng: &mut R) -> (u8, u8) {
    let a = rng.random_range(0..n_vars);
    let mut b = rng.random_range(0..n_vars - 1);
    if b >= a {
        b += 1;
    }
    (a as u8, b as u8)
}

impl Node {
    /// Random operator reading two distinct random variables.
    pub fn fresh<R: Rng + ?Sized>(n_vars: usize, rng: &mut R) -> Node {
        let op = Op::random(rng);
        let (a, b) = two_distinct_vars(n_vars, rng);
        Node {
            op,
            inputs: [Input::Var(a), Input::Var(b)],
        }
    }

    pub fn count(&self) -> usize {
        1 + self
            .inputs
            .iter()
            .map(|i| match i {
                Input::Child(c) => c.count(),
                Input::Var(_) => 0,
            })
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .inputs
            .iter()
            .map(|i| match i {
                Input::Child(c) => c.depth(),
                Input::Var(_) => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Value of the subfunction at input `x`, one input at a time.
    pub fn eval_at(&self, x: usize) -> bool {
        let read = |i: &Input| match i {
            Input::Var(v) => (x >> v) & 1 == 1,
            Input::Child(c) => c.eval_at(x),
        };
        self.op.apply(read(&self.inputs[0]), read(&self.inputs[1]))
    }
}

/// Pre-order walk over nodes with their depth (root = 1).
fn walk_nodes(node: &mut Node, depth: usize, f: &mut dyn FnMut(&mut Node, usize)) {
    f(node, depth);
    for input in node.inputs.iter_mut() {
        if let Input::Child(c) = input {
            walk_nodes(c, depth + 1, f);
        }
    }
}

/// Pre-order walk over input genes with the depth of the owning node. The
/// callback runs before the walk descends into the (possibly replaced) input.
fn walk_inputs(node: &mut Node, depth: usize, f: &mut dyn FnMut(&mut Input, usize)) {
    for input in node.inputs.iter_mut() {
        f(input, depth);
        if let Input::Child(c) = input {
            walk_inputs(c, depth + 1, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolGenome {
    n_vars: usize,
    depth_limit: usize,
    root: Node,
}

impl BoolGenome {
    pub fn new(n_vars: usize, depth_limit: usize, root: Node) -> Result<Self, String> {
        let g = BoolGenome {
            n_vars,
            depth_limit,
            root,
        };
        g.check()?;
        Ok(g)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn depth_limit(&self) -> usize {
        self.depth_limit
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn gene_count(&self) -> usize {
        3 * self.node_count()
    }

    /// Checks depth, bottom-layer and variable-range invariants.
    pub fn check(&self) -> Result<(), String> {
        fn go(node: &Node, depth: usize, n_vars: usize, limit: usize) -> Result<(), String> {
            if depth > limit {
                return Err(format!("node at depth {depth} exceeds limit {limit}"));
            }
            for input in &node.inputs {
                match input {
                    Input::Var(v) if (*v as usize) >= n_vars => {
                        return Err(format!("variable {v} out of range"));
                    }
                    Input::Var(_) => {}
                    Input::Child(c) => go(c, depth + 1, n_vars, limit)?,
                }
            }
            Ok(())
        }
        if self.n_vars < 2 || self.n_vars > MAX_VARS {
            return Err(format!("n_vars {} outside 2..={MAX_VARS}", self.n_vars));
        }
        go(&self.root, 1, self.n_vars, self.depth_limit)
    }
}

/// A single root node with a random operator and two distinct variables.
pub fn init_genome<R: Rng + ?Sized>(n_vars: usize, depth_limit: usize, rng: &mut R) -> BoolGenome {
    assert!((2..=MAX_VARS).contains(&n_vars) && depth_limit >= 1);
    BoolGenome {
        n_vars,
        depth_limit,
        root: Node::fresh(n_vars, rng),
    }
}

/// Bit-packed truth table; bit `x` holds `f(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    n_vars: usize,
    words: Vec<u64>,
}

impl TruthTable {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        1 << self.n_vars
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        (self.words[x >> 6] >> (x & 63)) & 1 == 1
    }

    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.len()).map(|x| self.get(x)).collect()
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self, BentError> {
        let len = bits.len();
        if !len.is_power_of_two() {
            return Err(BentError::NotPowerOfTwo(len));
        }
        let n_vars = len.trailing_zeros() as usize;
        let mut words = vec![0u64; len.div_ceil(64)];
        for (x, &b) in bits.iter().enumerate() {
            if b {
                words[x >> 6] |= 1 << (x & 63);
            }
        }
        Ok(TruthTable { n_vars, words })
    }
}

/// In-place Walsh–Hadamard butterfly (unnormalized). Applying it twice
/// multiplies the input by its length.
pub fn fwht(buf: &mut [i64]) {
    let len = buf.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let a = buf[i];
                let b = buf[i + h];
                buf[i] = a + b;
                buf[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn fwht_i32(buf: &mut [i32]) {
    let len = buf.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            let (lo, hi) = buf[block..block + 2 * h].split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshRecord {
    pub truth_table: Vec<bool>,
    pub spectrum: Vec<i64>,
    pub nl: u32,
}

/// Walsh spectrum of the polarity vector `(-1)^f(x)` and the resulting
/// nonlinearity.
pub fn nonlinearity(truth_table: &[bool]) -> Result<WalshRecord, BentError> {
    let len = truth_table.len();
    if !len.is_power_of_two() {
        return Err(BentError::NotPowerOfTwo(len));
    }
    let mut spectrum: Vec<i64> = truth_table
        .iter()
        .map(|&b| if b { -1 } else { 1 })
        .collect();
    fwht(&mut spectrum);
    let max_abs = spectrum.iter().map(|w| w.unsigned_abs()).max().unwrap_or(0);
    let nl = (len as u64 / 2 - max_abs / 2) as u32;
    Ok(WalshRecord {
        truth_table: truth_table.to_vec(),
        spectrum,
        nl,
    })
}

/// Evaluates genomes over all `2^n` inputs and scores them, reusing its
/// buffers between calls.
#[derive(Debug, Clone)]
pub struct Evaluator {
    n_vars: usize,
    words: usize,
    var_tables: Vec<Vec<u64>>,
    scratch: Vec<Vec<u64>>,
    walsh: Vec<i32>,
}

impl Evaluator {
    pub fn new(n_vars: usize) -> Self {
        assert!((1..=MAX_VARS).contains(&n_vars));
        let len = 1usize << n_vars;
        let words = len.div_ceil(64);
        let var_tables = (0..n_vars)
            .map(|v| {
                let mut t = vec![0u64; words];
                for x in 0..len {
                    if (x >> v) & 1 == 1 {
                        t[x >> 6] |= 1 << (x & 63);
                    }
                }
                t
            })
            .collect();
        Evaluator {
            n_vars,
            words,
            var_tables,
            scratch: Vec::new(),
            walsh: vec![0; len],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn eval_into(&mut self, node: &Node, level: usize, out: &mut [u64]) {
        if self.scratch.len() <= level {
            self.scratch
                .resize_with(level + 1, || vec![0u64; self.words]);
        }
        let mut second = std::mem::take(&mut self.scratch[level]);
        self.read_input(&node.inputs[0], level, out);
        self.read_input(&node.inputs[1], level, &mut second);
        match node.op {
            Op::And => out.iter_mut().zip(&second).for_each(|(a, b)| *a &= b),
            Op::Xor => out.iter_mut().zip(&second).for_each(|(a, b)| *a ^= b),
        }
        self.scratch[level] = second;
    }

    fn read_input(&mut self, input: &Input, level: usize, out: &mut [u64]) {
        match input {
            Input::Var(v) => out.copy_from_slice(&self.var_tables[*v as usize]),
            Input::Child(c) => self.eval_into(c, level + 1, out),
        }
    }

    pub fn truth_table(&mut self, node: &Node) -> TruthTable {
        let mut words = vec![0u64; self.words];
        self.eval_into(node, 0, &mut words);
        TruthTable {
            n_vars: self.n_vars,
            words,
        }
    }

    pub fn table_nonlinearity(&mut self, table: &TruthTable) -> u32 {
        let len = 1usize << self.n_vars;
        for (x, w) in self.walsh.iter_mut().enumerate() {
            *w = 1 - 2 * ((table.words[x >> 6] >> (x & 63)) & 1) as i32;
        }
        fwht_i32(&mut self.walsh);
        let max_abs = self
            .walsh
            .iter()
            .map(|w| w.unsigned_abs())
            .max()
            .unwrap_or(0);
        (len as u32) / 2 - max_abs / 2
    }

    pub fn fitness(&mut self, g: &BoolGenome) -> u32 {
        let t = self.truth_table(&g.root);
        self.table_nonlinearity(&t)
    }

    /// Nonlinearity of every node's subfunction over all `n` inputs, in
    /// pre-order (root first).
    pub fn node_nonlinearities(&mut self, g: &BoolGenome) -> Vec<u32> {
        let mut out = Vec::with_capacity(g.node_count());
        self.collect_nl(&g.root, &mut out);
        out
    }

    fn collect_nl(&mut self, node: &Node, out: &mut Vec<u32>) {
        let t = self.truth_table(node);
        out.push(self.table_nonlinearity(&t));
        for input in &node.inputs {
            if let Input::Child(c) = input {
                self.collect_nl(c, out);
            }
        }
    }
}

/// Truth table of the whole genome.
pub fn eval_genome(g: &BoolGenome) -> TruthTable {
    Evaluator::new(g.n_vars).truth_table(&g.root)
}

pub fn node_nonlinearities(g: &BoolGenome) -> Vec<u32> {
    Evaluator::new(g.n_vars).node_nonlinearities(g)
}

/// Changes an input gene to a different valid value: another variable, or
/// (when the owning node is above the depth limit) a freshly spawned node.
/// A child input always becomes a variable, discarding its subtree.
fn mutate_input<R: Rng + ?Sized>(
    input: &mut Input,
    owner_depth: usize,
    n_vars: usize,
    depth_limit: usize,
    rng: &mut R,
) {
    match input {
        Input::Var(v) => {
            let can_spawn = owner_depth < depth_limit;
            let choices = n_vars - 1 + usize::from(can_spawn);
            let k = rng.random_range(0..choices);
            if k < n_vars - 1 {
                let new = if k >= *v as usize { k + 1 } else { k };
                *input = Input::Var(new as u8);
            } else {
                *input = Input::Child(Box::new(Node::fresh(n_vars, rng)));
            }
        }
        Input::Child(_) => {
            *input = Input::Var(rng.random_range(0..n_vars) as u8);
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct MutationTally {
    /// Genes the operator looked at (genes inside discarded subtrees are
    /// never reached).
    visited: usize,
    changed: usize,
    /// Selected genes that vanished with a discarded subtree.
    lost: usize,
}

fn uniform_walk<R: Rng + ?Sized>(
    node: &mut Node,
    depth: usize,
    g: (usize, usize),
    mr: f64,
    rng: &mut R,
    tally: &mut MutationTally,
) {
    let (n_vars, limit) = g;
    tally.visited += 1;
    if rng.random_bool(mr) {
        node.op = node.op.flipped();
        tally.changed += 1;
    }
    for input in node.inputs.iter_mut() {
        tally.visited += 1;
        if rng.random_bool(mr) {
            mutate_input(input, depth, n_vars, limit, rng);
            tally.changed += 1;
        } else if let Input::Child(c) = input {
            uniform_walk(c, depth + 1, g, mr, rng, tally);
        }
    }
}

fn mutate_uniform_tallied<R: Rng + ?Sized>(
    g: &BoolGenome,
    mr: f64,
    rng: &mut R,
) -> Result<(BoolGenome, MutationTally), BentError> {
    if !(0.0..=1.0).contains(&mr) {
        return Err(BentError::RateOutOfRange(mr.to_string()));
    }
    let mut out = g.clone();
    let mut tally = MutationTally::default();
    uniform_walk(
        &mut out.root,
        1,
        (g.n_vars, g.depth_limit),
        mr,
        rng,
        &mut tally,
    );
    Ok((out, tally))
}

/// Mutates every gene independently with probability `mr`.
pub fn mutate_uniform<R: Rng + ?Sized>(
    g: &BoolGenome,
    mr: f64,
    rng: &mut R,
) -> Result<BoolGenome, BentError> {
    mutate_uniform_tallied(g, mr, rng).map(|(g, _)| g)
}

fn point_walk<R: Rng + ?Sized>(
    node: &mut Node,
    depth: usize,
    next_id: &mut usize,
    selected: &[bool],
    g: (usize, usize),
    rng: &mut R,
    tally: &mut MutationTally,
) {
    let (n_vars, limit) = g;
    let id = *next_id;
    *next_id += 1;
    if selected[3 * id] {
        node.op = node.op.flipped();
        tally.changed += 1;
    }
    for (k, input) in node.inputs.iter_mut().enumerate() {
        if selected[3 * id + 1 + k] {
            if let Input::Child(c) = input {
                let skipped = c.count();
                tally.lost += (0..skipped)
                    .map(|j| (0..3).filter(|&q| selected[3 * (*next_id + j) + q]).count())
                    .sum::<usize>();
                *next_id += skipped;
            }
            mutate_input(input, depth, n_vars, limit, rng);
            tally.changed += 1;
        } else if let Input::Child(c) = input {
            point_walk(c, depth + 1, next_id, selected, g, rng, tally);
        }
    }
}

fn mutate_point_tallied<R: Rng + ?Sized>(
    g: &BoolGenome,
    mc: usize,
    rng: &mut R,
) -> (BoolGenome, MutationTally) {
    let genes = g.gene_count();
    let amount = mc.min(genes);
    let mut selected = vec![false; genes];
    for i in index::sample(rng, genes, amount) {
        selected[i] = true;
    }
    let mut out = g.clone();
    let mut tally = MutationTally {
        visited: amount,
        ..Default::default()
    };
    let mut next_id = 0;
    point_walk(
        &mut out.root,
        1,
        &mut next_id,
        &selected,
        (g.n_vars, g.depth_limit),
        rng,
        &mut tally,
    );
    (out, tally)
}

/// Mutates `min(mc, gene count)` distinct genes chosen uniformly. Genes are
/// numbered `3·node + k` with nodes in pre-order and `k` = op, in1, in2.
pub fn mutate_point<R: Rng + ?Sized>(g: &BoolGenome, mc: usize, rng: &mut R) -> BoolGenome {
    mutate_point_tallied(g, mc, rng).0
}

fn mutate_whole_node<R: Rng + ?Sized>(
    node: &mut Node,
    depth: usize,
    n_vars: usize,
    limit: usize,
    rng: &mut R,
) {
    node.op = node.op.flipped();
    for input in node.inputs.iter_mut() {
        mutate_input(input, depth, n_vars, limit, rng);
    }
}

fn single_pick<R: Rng + ?Sized>(g: &BoolGenome, rng: &mut R) -> (BoolGenome, usize) {
    let target = rng.random_range(0..g.node_count());
    let mut out = g.clone();
    let (n_vars, limit) = (g.n_vars, g.depth_limit);
    let mut id = 0;
    let mut hit: Option<(*mut Node, usize)> = None;
    walk_nodes(&mut out.root, 1, &mut |node, depth| {
        if id == target {
            hit = Some((node as *mut Node, depth));
        }
        id += 1;
    });
    let (ptr, depth) = hit.expect("target below node count");
    // SAFETY: `ptr` points into `out.root`, which is alive and not otherwise
    // borrowed once the walk has returned.
    let node = unsafe { &mut *ptr };
    mutate_whole_node(node, depth, n_vars, limit, rng);
    (out, target)
}

/// Picks one node uniformly and mutates all three of its genes.
pub fn mutate_single<R: Rng + ?Sized>(g: &BoolGenome, rng: &mut R) -> BoolGenome {
    single_pick(g, rng).0
}

/// Which branch of the semantic operator ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemanticAction {
    Activate,
    Deactivate,
    ShuffleVariables,
    ShuffleOperators,
}

fn activate<R: Rng + ?Sized>(g: &mut BoolGenome, rng: &mut R) -> bool {
    let limit = g.depth_limit;
    let n_vars = g.n_vars;
    let mut eligible = 0usize;
    walk_inputs(&mut g.root, 1, &mut |input, depth| {
        if matches!(input, Input::Var(_)) && depth < limit {
            eligible += 1;
        }
    });
    if eligible == 0 {
        return false;
    }
    let target = rng.random_range(0..eligible);
    let fresh = Node::fresh(n_vars, rng);
    let mut fresh = Some(fresh);
    let mut seen = 0usize;
    walk_inputs(&mut g.root, 1, &mut |input, depth| {
        if matches!(input, Input::Var(_)) && depth < limit {
            if seen == target {
                if let Some(node) = fresh.take() {
                    *input = Input::Child(Box::new(node));
                }
            }
            seen += 1;
        }
    });
    true
}

fn deactivate<R: Rng + ?Sized>(g: &mut BoolGenome, rng: &mut R) -> bool {
    let non_root = g.node_count() - 1;
    if non_root == 0 {
        return false;
    }
    let target = rng.random_range(0..non_root);
    let var = Input::Var(rng.random_range(0..g.n_vars) as u8);
    let mut var = Some(var);
    let mut seen = 0usize;
    walk_inputs(&mut g.root, 1, &mut |input, _| {
        if matches!(input, Input::Child(_)) {
            if seen == target {
                if let Some(v) = var.take() {
                    *input = v;
                }
            }
            seen += 1;
        }
    });
    true
}

/// Reassigns every variable input in pre-order. Each draw weights variable
/// `v` by `u_max - u_v + 1`, where `u` counts the assignments made so far.
fn shuffle_variables<R: Rng + ?Sized>(g: &mut BoolGenome, rng: &mut R) {
    let n_vars = g.n_vars;
    let mut uses = vec![0u32; n_vars];
    walk_inputs(&mut g.root, 1, &mut |input, _| {
        if let Input::Var(v) = input {
            let u_max = *uses.iter().max().expect("n_vars >= 2");
            let total: u32 = uses.iter().map(|&u| u_max - u + 1).sum();
            let mut pick = rng.random_range(0..total);
            let mut chosen = n_vars - 1;
            for (i, &u) in uses.iter().enumerate() {
                let w = u_max - u + 1;
                if pick < w {
                    chosen = i;
                    break;
                }
                pick -= w;
            }
            uses[chosen] += 1;
            *v = chosen as u8;
        }
    });
}

/// Flips node `i`'s operator with probability `1 - nl_i / bound`, clamped
/// to `[0, 1]`.
fn shuffle_operators<R: Rng + ?Sized>(g: &mut BoolGenome, ev: &mut Evaluator, rng: &mut R) {
    let nls = ev.node_nonlinearities(g);
    let bound = f64::from(bent_bound(g.n_vars));
    let mut i = 0;
    walk_nodes(&mut g.root, 1, &mut |node, _| {
        let p = (1.0 - f64::from(nls[i]) / bound).clamp(0.0, 1.0);
        if rng.random_bool(p) {
            node.op = node.op.flipped();
        }
        i += 1;
    });
}

/// Semantic mutation: a fair coin picks structure or function, a second
/// fair coin picks the action within it.
///
/// Structure: activate (a random variable input above the depth limit
/// becomes a fresh node) or deactivate (a random non-root node becomes a
/// random variable); each falls back to the other when it has no target.
/// Function: reshuffle all variables toward even usage, or flip operators
/// with probability decreasing in each node's own nonlinearity.
pub fn mutate_semantic<R: Rng + ?Sized>(
    g: &BoolGenome,
    ev: &mut Evaluator,
    rng: &mut R,
) -> (BoolGenome, SemanticAction) {
    let mut out = g.clone();
    let structure = rng.random_bool(0.5);
    let first = rng.random_bool(0.5);
    let action = if structure {
        if first {
            if activate(&mut out, rng) {
                SemanticAction::Activate
            } else {
                deactivate(&mut out, rng);
                SemanticAction::Deactivate
            }
        } else if deactivate(&mut out, rng) {
            SemanticAction::Deactivate
        } else {
            activate(&mut out, rng);
            SemanticAction::Activate
        }
    } else if first {
        shuffle_variables(&mut out, rng);
        SemanticAction::ShuffleVariables
    } else {
        shuffle_operators(&mut out, ev, rng);
        SemanticAction::ShuffleOperators
    };
    (out, action)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOperator {
    Uniform,
    Point,
    Single,
    Semantic,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 4] = [
        MutationOperator::Uniform,
        MutationOperator::Point,
        MutationOperator::Single,
        MutationOperator::Semantic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationOperator::Uniform => "uniform",
            MutationOperator::Point => "point",
            MutationOperator::Single => "single",
            MutationOperator::Semantic => "semantic",
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationOperator::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsSettings {
    pub n_vars: usize,
    pub depth: usize,
    pub lambda: usize,
    pub mr: f64,
    pub mc: usize,
    pub budget: u64,
}

impl Default for EsSettings {
    fn default() -> Self {
        EsSettings {
            n_vars: 12,
            depth: 7,
            lambda: 4,
            mr: 0.03,
            mc: 4,
            budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BentRun {
    pub operator: MutationOperator,
    pub evaluations_used: u64,
    pub success: bool,
    /// Parent fitness at the end of the run (the bound on success).
    pub final_nl: u32,
    pub settings: EsSettings,
    /// `(evaluations, best nl)` at every improvement, starting with the
    /// initial genome.
    pub trace: Vec<(u64, u32)>,
}

fn mutate_with<R: Rng + ?Sized>(
    op: MutationOperator,
    g: &BoolGenome,
    s: &EsSettings,
    ev: &mut Evaluator,
    rng: &mut R,
) -> BoolGenome {
    match op {
        MutationOperator::Uniform => mutate_uniform(g, s.mr, rng).expect("validated rate"),
        MutationOperator::Point => mutate_point(g, s.mc, rng),
        MutationOperator::Single => mutate_single(g, rng),
        MutationOperator::Semantic => mutate_semantic(g, ev, rng).0,
    }
}

/// (1+λ) evolution strategy. The initial genome costs one evaluation; each
/// generation evaluates λ mutants of the parent, and the best of them (the
/// latest on ties) replaces the parent when it is at least as fit. The run
/// stops at the first bent genome or when the budget is spent.
pub fn evolve_bent<R: Rng + ?Sized>(
    operator: MutationOperator,
    settings: &EsSettings,
    rng: &mut R,
) -> BentRun {
    let s = *settings;
    let bound = bent_bound(s.n_vars);
    let mut ev = Evaluator::new(s.n_vars);
    let mut parent = init_genome(s.n_vars, s.depth, rng);
    let mut parent_nl = ev.fitness(&parent);
    let mut evals = 1u64;
    let mut trace = vec![(evals, parent_nl)];
    let finish = |evals, success, final_nl, trace| BentRun {
        operator,
        evaluations_used: evals,
        success,
        final_nl,
        settings: s,
        trace,
    };
    if parent_nl == bound {
        return finish(evals, true, parent_nl, trace);
    }
    while evals < s.budget {
        let mut best: Option<(BoolGenome, u32)> = None;
        for _ in 0..s.lambda {
            if evals >= s.budget {
                break;
            }
            let child = mutate_with(operator, &parent, &s, &mut ev, rng);
            let nl = ev.fitness(&child);
            evals += 1;
            if nl == bound {
                trace.push((evals, nl));
                return finish(evals, true, nl, trace);
            }
            if best.as_ref().is_none_or(|(_, b)| nl >= *b) {
                best = Some((child, nl));
            }
        }
        if let Some((child, nl)) = best {
            if nl >= parent_nl {
                if nl > parent_nl {
                    trace.push((evals, nl));
                }
                parent = child;
                parent_nl = nl;
            }
        }
    }
    finish(evals, false, parent_nl, trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BentParams {
    pub n: usize,
    pub depth: usize,
    pub lambda: usize,
    pub mr: f64,
    pub mc: usize,
    pub budget: u64,
    pub operators: Vec<MutationOperator>,
}

impl Default for BentParams {
    fn default() -> Self {
        let s = EsSettings::default();
        BentParams {
            n: s.n_vars,
            depth: s.depth,
            lambda: s.lambda,
            mr: s.mr,
            mc: s.mc,
            budget: s.budget,
            operators: MutationOperator::ALL.to_vec(),
        }
    }
}

impl BentParams {
    pub fn settings(&self) -> EsSettings {
        EsSettings {
            n_vars: self.n,
            depth: self.depth,
            lambda: self.lambda,
            mr: self.mr,
            mc: self.mc,
            budget: self.budget,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n < 2 || self.n % 2 == 1 || self.n > MAX_VARS {
            return Err(HarnessError::out_of_range(
                "n",
                self.n,
                "must be even, 2..=20",
            ));
        }
        if self.depth < 1 {
            return Err(HarnessError::out_of_range(
                "depth",
                self.depth,
                "must be >= 1",
            ));
        }
        if self.lambda < 1 {
            return Err(HarnessError::out_of_range(
                "lambda",
                self.lambda,
                "must be >= 1",
            ));
        }
        if !(0.0..=1.0).contains(&self.mr) {
            return Err(HarnessError::out_of_range(
                "mr",
                self.mr,
                "must lie in [0, 1]",
            ));
        }
        if self.budget < 1 {
            return Err(HarnessError::out_of_range(
                "budget",
                self.budget,
                "must be >= 1",
            ));
        }
        if self.operators.is_empty() {
            return Err(HarnessError::out_of_range(
                "operators",
                "[]",
                "must be non-empty",
            ));
        }
        Ok(())
    }
}

/// Evaluation counts of one operator's successful runs.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSummary {
    pub operator: MutationOperator,
    pub runs: usize,
    pub successes: usize,
    pub summary: Option<stats::Summary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTest {
    pub a: MutationOperator,
    pub b: MutationOperator,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BentComparison {
    /// `(global run index, seed, run)`, grouped by operator in config order.
    pub runs: Vec<(u64, u64, BentRun)>,
    pub summaries: Vec<OperatorSummary>,
    pub pairwise: Vec<PairwiseTest>,
    /// `1 - median(semantic) / median(best other operator)`.
    pub semantic_reduction: Option<f64>,
}

impl BentComparison {
    pub fn summary(&self, op: MutationOperator) -> Option<&OperatorSummary> {
        self.summaries.iter().find(|s| s.operator == op)
    }

    pub fn test(&self, a: MutationOperator, b: MutationOperator) -> Option<&PairwiseTest> {
        self.pairwise
            .iter()
            .find(|t| (t.a == a && t.b == b) || (t.a == b && t.b == a))
    }

    fn successful_evals(&self, op: MutationOperator) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|(_, _, r)| r.operator == op && r.success)
            .map(|(_, _, r)| r.evaluations_used as f64)
            .collect()
    }
}

/// Runs `runs` independent (1+λ) searches per operator. Run `r` of the
/// `k`-th operator has global index `k·runs + r` and seed
/// `derive_run_seed(master_seed, index)`.
pub fn bent_experiment(
    params: &BentParams,
    runs: u64,
    master_seed: u64,
    workers: usize,
) -> BentComparison {
    let settings = params.settings();
    let ops = params.operators.clone();
    let total = ops.len() as u64 * runs;
    let all = run_indexed(total, workers, |i| {
        let op = ops[(i / runs) as usize];
        let seed = derive_run_seed(master_seed, i);
        let mut rng = rng_from_seed(seed);
        (i, seed, evolve_bent(op, &settings, &mut rng))
    });
    let mut cmp = BentComparison {
        runs: all,
        summaries: Vec::new(),
        pairwise: Vec::new(),
        semantic_reduction: None,
    };
    for &op in &ops {
        let evals = cmp.successful_evals(op);
        cmp.summaries.push(OperatorSummary {
            operator: op,
            runs: runs as usize,
            successes: evals.len(),
            summary: stats::descriptive_summary(&evals).ok(),
        });
    }
    for (i, &a) in ops.iter().enumerate() {
        for &b in &ops[i + 1..] {
            if let Ok(t) = stats::mann_whitney_u(&cmp.successful_evals(a), &cmp.successful_evals(b))
            {
                cmp.pairwise.push(PairwiseTest {
                    a,
                    b,
                    u: t.u,
                    p: t.p,
                });
            }
        }
    }
    let median = |op| cmp.summary(op).and_then(|s| s.summary.map(|m| m.median));
    if let Some(sem) = median(MutationOperator::Semantic) {
        let second = ops
            .iter()
            .filter(|&&o| o != MutationOperator::Semantic)
            .filter_map(|&o| median(o))
            .min_by(f64::total_cmp);
        cmp.semantic_reduction = second.map(|s| 1.0 - sem / s);
    }
    cmp
}

pub fn run_experiment(
    params: &BentParams,
    runs: u64,
    master_seed: u64,
    workers: usize,
) -> Result<ExperimentOutput, HarnessError> {
    params.validate()?;
    let cmp = bent_experiment(params, runs, master_seed, workers);
    let records = cmp
        .runs
        .iter()
        .map(|(i, seed, r)| RunRecord {
            experiment: ExperimentId::Bent,
            run_index: *i,
            derived_seed: *seed,
            payload: vec![
                r.operator.as_str().into(),
                (*i).into(),
                Value::Text(seed.to_string()),
                r.evaluations_used.into(),
                r.success.into(),
                u64::from(r.final_nl).into(),
            ],
        })
        .collect();

    let mut report = Table::new(REPORT_COLUMNS);
    for t in &cmp.pairwise {
        report.rows.push(vec![
            t.a.as_str().into(),
            t.b.as_str().into(),
            t.u.into(),
            t.p.into(),
        ]);
    }
    let mut summary = Table::new(SUMMARY_COLUMNS);
    let mut notes = Vec::new();
    for s in &cmp.summaries {
        let (median, q1, q3) = match &s.summary {
            Some(m) => (Value::Real(m.median), Value::Real(m.q1), Value::Real(m.q3)),
            None => (Value::Missing, Value::Missing, Value::Missing),
        };
        notes.push(format!(
            "{:<8} successes={}/{} median={}",
            s.operator, s.successes, s.runs, median
        ));
        if s.successes < s.runs {
            notes.push(format!(
                "warning: {} {} runs exhausted the budget and are excluded from the median",
                s.runs - s.successes,
                s.operator
            ));
        }
        summary.rows.push(vec![
            s.operator.as_str().into(),
            s.runs.into(),
            s.successes.into(),
            median,
            q1,
            q3,
        ]);
    }
    if let Some(r) = cmp.semantic_reduction {
        notes.push(format!(
            "semantic median reduction vs second best: {:.1}%",
            100.0 * r
        ));
    }
    Ok(ExperimentOutput {
        experiment: ExperimentId::Bent,
        records,
        reports: vec![
            ("bent_report.csv".to_string(), report),
            ("bent_summary.csv".to_string(), summary),
        ],
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng_from_seed;

    fn var(v: u8) -> Input {
        Input::Var(v)
    }

    fn node(op: Op, a: Input, b: Input) -> Input {
        Input::Child(Box::new(Node { op, inputs: [a, b] }))
    }

    fn root(op: Op, a: Input, b: Input) -> Node {
        Node { op, inputs: [a, b] }
    }

    /// Ten nodes, depth 4.
    fn ten_node_genome(n_vars: usize) -> BoolGenome {
        let left = node(
            Op::And,
            node(Op::Xor, var(0), node(Op::And, var(1), var(2))),
            node(Op::And, var(3), var(4)),
        );
        let right = node(
            Op::Xor,
            node(Op::And, var(5), var(6)),
            node(
                Op::Xor,
                node(Op::And, var(7), var(8)),
                node(Op::And, var(9), var(10)),
            ),
        );
        BoolGenome::new(n_vars, 7, root(Op::Xor, left, right)).unwrap()
    }

    /// Independent per-input interpreter.
    fn naive_table(g: &BoolGenome) -> Vec<bool> {
        (0..1usize << g.n_vars())
            .map(|x| g.root().eval_at(x))
            .collect()
    }

    /// Minimum Hamming distance to all 2^(n+1) affine functions.
    fn affine_distance(bits: &[bool]) -> u32 {
        let len = bits.len();
        let mut best = u32::MAX;
        for a in 0..len {
            let mut d = 0u32;
            for (x, &b) in bits.iter().enumerate() {
                let lin = (a & x).count_ones() % 2 == 1;
                d += u32::from(b != lin);
            }
            best = best.min(d).min(len as u32 - d);
        }
        best
    }

    fn random_genome<R: Rng>(n_vars: usize, depth: usize, rng: &mut R) -> BoolGenome {
        let mut g = init_genome(n_vars, depth, rng);
        let mut ev = Evaluator::new(n_vars);
        for _ in 0..rng.random_range(0..30) {
            g = mutate_semantic(&g, &mut ev, rng).0;
        }
        g
    }

    #[test]
    fn single_node_tables() {
        let g = BoolGenome::new(2, 1, root(Op::Xor, var(0), var(1))).unwrap();
        assert_eq!(eval_genome(&g).to_bits(), vec![false, true, true, false]);
        let g = BoolGenome::new(2, 1, root(Op::And, var(0), var(1))).unwrap();
        assert_eq!(eval_genome(&g).to_bits(), vec![false, false, false, true]);
    }

    #[test]
    fn packed_evaluation_matches_interpreter() {
        let mut rng = rng_from_seed(12);
        for n in (2..=8).step_by(2) {
            for _ in 0..100 {
                let g = random_genome(n, 5, &mut rng);
                assert_eq!(eval_genome(&g).to_bits(), naive_table(&g), "n={n}");
            }
        }
    }

    #[test]
    fn constant_zero_spectrum() {
        let r = nonlinearity(&[false; 4]).unwrap();
        assert_eq!(r.spectrum, vec![4, 0, 0, 0]);
        assert_eq!(r.nl, 0);
    }

    #[test]
    fn and_of_two_is_bent() {
        let bits = [false, false, false, true];
        assert_eq!(affine_distance(&bits), 1);
        let r = nonlinearity(&bits).unwrap();
        assert!(r.spectrum.iter().all(|w| w.abs() == 2));
        assert_eq!(r.nl, 1);
        assert_eq!(bent_bound(2), 1);
    }

    #[test]
    fn all_four_variable_functions_match_affine_distance() {
        for t in 0u32..1 << 16 {
            let bits: Vec<bool> = (0..16).map(|x| (t >> x) & 1 == 1).collect();
            assert_eq!(
                nonlinearity(&bits).unwrap().nl,
                affine_distance(&bits),
                "table {t:#06x}"
            );
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(nonlinearity(&[true; 6]), Err(BentError::NotPowerOfTwo(6)));
        assert!(TruthTable::from_bits(&[false; 3]).is_err());
    }

    #[test]
    fn bounds() {
        assert_eq!(bent_bound(4), 6);
        assert_eq!(bent_bound(12), 2016);
    }

    #[test]
    fn fwht_twice_scales_by_length() {
        let mut rng = rng_from_seed(44);
        for k in 0..8 {
            let v: Vec<i64> = (0..1usize << k)
                .map(|_| rng.random_range(-1000..1000))
                .collect();
            let mut w = v.clone();
            fwht(&mut w);
            fwht(&mut w);
            let len = v.len() as i64;
            assert!(v.iter().zip(&w).all(|(a, b)| a * len == *b));
        }
    }

    #[test]
    fn parseval_and_packed_fitness_agree() {
        let mut rng = rng_from_seed(3);
        for n in [4, 6, 8] {
            let mut ev = Evaluator::new(n);
            for _ in 0..50 {
                let bits: Vec<bool> = (0..1usize << n).map(|_| rng.random()).collect();
                let r = nonlinearity(&bits).unwrap();
                let energy: i64 = r.spectrum.iter().map(|w| w * w).sum();
                assert_eq!(energy, 1i64 << (2 * n));
                let t = TruthTable::from_bits(&bits).unwrap();
                assert_eq!(ev.table_nonlinearity(&t), r.nl);
                assert!(r.nl <= bent_bound(n));
            }
        }
    }

    #[test]
    fn nl_is_invariant_under_variable_permutation() {
        let mut rng = rng_from_seed(77);
        let n = 6;
        for _ in 0..100 {
            let bits: Vec<bool> = (0..1usize << n).map(|_| rng.random()).collect();
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let permuted: Vec<bool> = (0..1usize << n)
                .map(|x| {
                    let y = (0..n).fold(0, |acc, i| acc | (((x >> i) & 1) << perm[i]));
                    bits[y]
                })
                .collect();
            assert_eq!(
                nonlinearity(&bits).unwrap().nl,
                nonlinearity(&permuted).unwrap().nl
            );
        }
    }

    #[test]
    fn node_nonlinearities_match_subtrees() {
        let mut rng = rng_from_seed(8);
        let g = random_genome(12, 7, &mut rng);
        let nls = node_nonlinearities(&g);
        assert_eq!(nls.len(), g.node_count());
        assert_eq!(nls[0], Evaluator::new(12).fitness(&g));

        // a leaf-level AND inside an n = 12 genome
        let g = BoolGenome::new(
            12,
            7,
            root(
                Op::Xor,
                node(Op::And, var(0), var(1)),
                node(Op::Xor, var(3), var(3)),
            ),
        )
        .unwrap();
        let nls = node_nonlinearities(&g);
        let sub = BoolGenome::new(12, 7, root(Op::And, var(0), var(1))).unwrap();
        let direct = nonlinearity(&eval_genome(&sub).to_bits()).unwrap().nl;
        assert_eq!(nls[1], direct);
        assert_eq!(nls[1], 1024);
        assert_eq!(nls[2], 0);
    }

    #[test]
    fn init_is_one_node_with_distinct_vars() {
        for seed in 0..200 {
            let g = init_genome(12, 7, &mut rng_from_seed(seed));
            assert_eq!(g.node_count(), 1);
            match &g.root().inputs {
                [Input::Var(a), Input::Var(b)] => assert_ne!(a, b),
                other => panic!("{other:?}"),
            }
            assert_eq!(g, init_genome(12, 7, &mut rng_from_seed(seed)));
        }
    }

    #[test]
    fn uniform_extremes() {
        let g = ten_node_genome(12);
        let mut rng = rng_from_seed(1);
        assert_eq!(mutate_uniform(&g, 0.0, &mut rng).unwrap(), g);
        for _ in 0..100 {
            let m = mutate_uniform(&g, 1.0, &mut rng).unwrap();
            // every gene of the root changed: op flipped and both children
            // replaced by variables
            assert_eq!(m.root().op, Op::And);
            assert!(m.root().inputs.iter().all(|i| matches!(i, Input::Var(_))));
            m.check().unwrap();
        }
        let leaf = BoolGenome::new(12, 7, root(Op::And, var(3), var(5))).unwrap();
        for _ in 0..100 {
            let m = mutate_uniform(&leaf, 1.0, &mut rng).unwrap();
            assert_eq!(m.root().op, Op::Xor);
            assert_ne!(m.root().inputs[0], var(3));
            assert_ne!(m.root().inputs[1], var(5));
        }
        assert!(mutate_uniform(&g, 1.5, &mut rng).is_err());
        assert!(mutate_uniform(&g, -0.1, &mut rng).is_err());
    }

    #[test]
    fn uniform_rate_frequency() {
        let g = ten_node_genome(12);
        let mut rng = rng_from_seed(2);
        let (mut visited, mut changed) = (0usize, 0usize);
        for _ in 0..100_000 {
            let (_, t) = mutate_uniform_tallied(&g, 0.03, &mut rng).unwrap();
            visited += t.visited;
            changed += t.changed;
        }
        let p = 0.03;
        let expected = visited as f64 * p;
        let sigma = (visited as f64 * p * (1.0 - p)).sqrt();
        assert!((changed as f64 - expected).abs() < 5.0 * sigma);
        // nearly all 30 genes are reached on average
        assert!(visited as f64 / 100_000.0 > 28.0);
    }

    #[test]
    fn point_mutation_counts() {
        let g = ten_node_genome(12);
        let mut rng = rng_from_seed(3);
        assert_eq!(mutate_point(&g, 0, &mut rng), g);
        for _ in 0..2000 {
            let (m, t) = mutate_point_tallied(&g, 4, &mut rng);
            assert_eq!(t.changed + t.lost, 4);
            m.check().unwrap();
        }
        // clamping: with mc >= 3 × nodes every gene of the root changes
        for _ in 0..100 {
            let (m, t) = mutate_point_tallied(&g, 100, &mut rng);
            assert_eq!(t.changed + t.lost, 30);
            assert_eq!(m.root().op, Op::And);
            assert!(m.root().inputs.iter().all(|i| matches!(i, Input::Var(_))));
        }
    }

    #[test]
    fn single_on_one_node_changes_everything() {
        let g = BoolGenome::new(12, 7, root(Op::And, var(0), var(1))).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let m = mutate_single(&g, &mut rng);
            assert_eq!(m.root().op, Op::Xor);
            assert_ne!(m.root().inputs[0], var(0));
            assert_ne!(m.root().inputs[1], var(1));
            m.check().unwrap();
        }
    }

    #[test]
    fn single_node_choice_is_uniform() {
        let g = BoolGenome::new(
            12,
            7,
            root(
                Op::Xor,
                node(Op::And, var(0), node(Op::And, var(1), var(2))),
                node(Op::And, var(3), node(Op::Xor, var(4), var(5))),
            ),
        )
        .unwrap();
        assert_eq!(g.node_count(), 5);
        let mut rng = rng_from_seed(5);
        let trials = 100_000;
        let mut counts = [0usize; 5];
        for _ in 0..trials {
            let (m, target) = single_pick(&g, &mut rng);
            counts[target] += 1;
            m.check().unwrap();
        }
        let p = 0.2;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - trials as f64 * p).abs() < 5.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn semantic_structure_on_single_node_grows() {
        let g = BoolGenome::new(12, 7, root(Op::And, var(0), var(1))).unwrap();
        let mut ev = Evaluator::new(12);
        let mut rng = rng_from_seed(6);
        let mut grew = 0;
        for _ in 0..400 {
            let (m, action) = mutate_semantic(&g, &mut ev, &mut rng);
            if matches!(
                action,
                SemanticAction::Activate | SemanticAction::Deactivate
            ) {
                assert_eq!(action, SemanticAction::Activate);
                assert_eq!(m.node_count(), 2);
                grew += 1;
            }
        }
        assert!(grew > 100);
    }

    #[test]
    fn activation_respects_depth_limit() {
        // depth limit 1: no variable can become a node, so activation falls
        // back to deactivation, which has nothing to remove either
        let g = BoolGenome::new(4, 1, root(Op::And, var(0), var(1))).unwrap();
        let mut h = g.clone();
        assert!(!activate(&mut h, &mut rng_from_seed(0)));
        assert_eq!(h, g);
    }

    #[test]
    fn shuffle_operators_keeps_bent_nodes() {
        // x0x1 ^ x2x3 is bent for n = 4; its AND nodes have nl 4 < 6, so
        // only check the formula's fixed point with a genome whose every
        // node is at the bound: n = 2, single AND
        let g = BoolGenome::new(2, 3, root(Op::And, var(0), var(1))).unwrap();
        let mut ev = Evaluator::new(2);
        let mut rng = rng_from_seed(9);
        for _ in 0..100 {
            let mut h = g.clone();
            shuffle_operators(&mut h, &mut ev, &mut rng);
            assert_eq!(h, g);
        }
    }

    #[test]
    fn shuffle_variables_spreads_usage() {
        // every input reads x0
        let mut r = root(Op::And, var(0), var(0));
        for _ in 0..5 {
            r = root(Op::Xor, Input::Child(Box::new(r)), var(0));
        }
        let g = BoolGenome::new(12, 7, r).unwrap();
        let mut rng = rng_from_seed(10);
        let trials = 10_000;
        let mut spread = 0;
        for _ in 0..trials {
            let mut h = g.clone();
            shuffle_variables(&mut h, &mut rng);
            let mut used = std::collections::HashSet::new();
            walk_inputs(&mut h.root, 1, &mut |i, _| {
                if let Input::Var(v) = i {
                    used.insert(*v);
                }
            });
            if used.len() > 1 {
                spread += 1;
            }
        }
        assert!(spread as f64 >= 0.99 * trials as f64);
    }

    #[test]
    fn every_operator_preserves_invariants() {
        let mut rng = rng_from_seed(11);
        let mut ev = Evaluator::new(6);
        let mut g = init_genome(6, 4, &mut rng);
        for step in 0..5000 {
            let op = MutationOperator::ALL[step % 4];
            let s = EsSettings {
                n_vars: 6,
                depth: 4,
                mr: 0.2,
                mc: 5,
                ..Default::default()
            };
            g = mutate_with(op, &g, &s, &mut ev, &mut rng);
            g.check().unwrap();
            assert!(g.root().depth() <= 4);
        }
    }

    #[test]
    fn tiny_search_succeeds_quickly() {
        let s = EsSettings {
            n_vars: 2,
            depth: 2,
            budget: 100,
            ..Default::default()
        };
        for op in MutationOperator::ALL {
            let mut ok = 0;
            for seed in 0..100 {
                let run = evolve_bent(op, &s, &mut rng_from_seed(seed));
                if run.success {
                    assert_eq!(run.final_nl, 1);
                    assert!(run.evaluations_used <= 100);
                    ok += 1;
                }
            }
            assert!(ok >= 99, "{op}: {ok}");
        }
    }

    #[test]
    fn trace_is_non_decreasing() {
        let s = EsSettings {
            n_vars: 8,
            depth: 5,
            budget: 3000,
            ..Default::default()
        };
        for op in MutationOperator::ALL {
            let run = evolve_bent(op, &s, &mut rng_from_seed(21));
            assert!(run
                .trace
                .windows(2)
                .all(|w| w[0].1 <= w[1].1 && w[0].0 <= w[1].0));
            assert!(run.final_nl <= bent_bound(8));
            assert!(run.evaluations_used <= 3000);
        }
    }
}
