//! Searching permutations of `[2^n]` for large `#B_n`.
//!
//! Left composition with an invertible GF(2)-linear map leaves `B_n`
//! unchanged, so the pruned search expands one representative per orbit:
//! the table in which every image is either in the span `[2^r]` of the
//! earlier images or equal to `2^r`, the next basis vector. Indices are
//! assigned in order `0, 1, 2, ...`; assigning `j` decides every pair
//! `(k, j-k)`.
//!
//! The search is split into units, the canonical prefixes of a fixed depth
//! in lexicographic order. Units are processed in fixed-size batches and
//! the shared best count only changes between batches, so results and node
//! counts do not depend on the number of worker threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{count_b_images, three_pow};
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: &str = "bsearch-1";
pub const MAX_SEARCH_EXPONENT: u32 = 5;
pub const MAX_EXHAUSTIVE_EXPONENT: u32 = 3;
const MAX_RECORDED_VIOLATIONS: usize = 64;
const TARGET_UNITS: usize = 2048;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchGoal {
    /// Exact maximum and the number of canonical maximizers.
    #[default]
    Maximize,
    /// Only look for tables with `#B > 3^n`; prunes every branch whose
    /// bound is at most `3^n`.
    Verify,
}

/// Upper bound used for undecided pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStrategy {
    /// Each undecided pair counts one.
    #[default]
    Simple,
    /// Pairs `(k, j-k)` with both operands assigned can only hold together
    /// if they share `s(k)^s(j-k)`, and that value must still be free: count
    /// the largest such group per unassigned `j`.
    Fiber,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Pruned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub goal: SearchGoal,
    pub bound: BoundStrategy,
    /// Prefix length of a work unit; `None` picks a depth giving about
    /// two thousand units.
    pub split_depth: Option<usize>,
    pub batch_size: usize,
    /// Stop after this many nodes in this invocation (checked per batch).
    pub max_nodes: Option<u64>,
    pub max_seconds: Option<f64>,
    /// Call the checkpoint hook once at least this many nodes have been
    /// visited since the last call.
    pub checkpoint_interval: Option<u64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            goal: SearchGoal::Maximize,
            bound: BoundStrategy::Simple,
            split_depth: None,
            batch_size: 64,
            max_nodes: None,
            max_seconds: None,
            checkpoint_interval: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCheckpoint {
    pub version: String,
    pub n: u32,
    /// Prefix of the next unit to expand; empty once the search is complete.
    pub prefix: Vec<u32>,
    pub best_count: u64,
    pub witness: Vec<u32>,
    pub nodes_visited: u64,
    /// Index of the next unit.
    pub canonical_class_cursor: u64,
    pub goal: SearchGoal,
    pub bound: BoundStrategy,
    pub split_depth: usize,
    pub batch_size: usize,
    /// Canonical tables attaining `best_count` (Maximize goal only).
    pub witness_count: u64,
    pub classes_covered: u128,
    pub classes_total: u128,
    pub violation_count: u64,
    /// Tables with `#B > 3^n`, at most 64 of them.
    pub violations: Vec<Vec<u32>>,
    pub complete: bool,
}

impl SearchCheckpoint {
    pub fn fresh(n: u32, goal: SearchGoal, bound: BoundStrategy, split_depth: usize, batch_size: usize) -> Result<Self> {
        check_search_exponent(n)?;
        let size = 1usize << n;
        let units = canonical_prefixes(n, split_depth.min(size));
        Ok(SearchCheckpoint {
            version: CHECKPOINT_VERSION.to_string(),
            n,
            prefix: units.first().map(|u| u.iter().map(|&v| v as u32).collect()).unwrap_or_default(),
            best_count: three_pow(n),
            witness: (0..size as u32).collect(),
            nodes_visited: 0,
            canonical_class_cursor: 0,
            goal,
            bound,
            split_depth: split_depth.min(size),
            batch_size: batch_size.max(1),
            witness_count: 0,
            classes_covered: 0,
            classes_total: canonical_class_count(n),
            violation_count: 0,
            violations: Vec::new(),
            complete: false,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("malformed JSON: {e}")))?;
        match value.get("version").and_then(|v| v.as_str()) {
            Some(CHECKPOINT_VERSION) => {}
            Some(other) => return Err(Error::Checkpoint(format!("unsupported version {other:?}"))),
            None => return Err(Error::Checkpoint("missing version".into())),
        }
        // parsed again from text: u128 fields do not survive a Value
        let cp: SearchCheckpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("bad field: {e}")))?;
        cp.validate()?;
        Ok(cp)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Checkpoint(m));
        if self.version != CHECKPOINT_VERSION {
            return bad(format!("unsupported version {:?}", self.version));
        }
        if self.n > MAX_SEARCH_EXPONENT {
            return bad(format!("n = {} exceeds {}", self.n, MAX_SEARCH_EXPONENT));
        }
        let size = 1u64 << self.n;
        if !is_partial_permutation(&self.prefix, size) {
            return bad("prefix entries must be distinct and below 2^n".into());
        }
        if self.witness.len() as u64 != size || !is_partial_permutation(&self.witness, size) {
            return bad("witness is not a permutation of [2^n]".into());
        }
        if self.best_count > 4u64.pow(self.n) {
            return bad("best_count exceeds 4^n".into());
        }
        if self.classes_covered > self.classes_total {
            return bad("classes_covered exceeds classes_total".into());
        }
        Ok(())
    }
}

fn is_partial_permutation(values: &[u32], size: u64) -> bool {
    let mut seen = vec![false; size as usize];
    values.iter().all(|&v| (v as u64) < size && !std::mem::replace(&mut seen[v as usize], true))
}

/// Serialize then parse.
pub fn checkpoint_roundtrip(c: &SearchCheckpoint) -> Result<SearchCheckpoint> {
    SearchCheckpoint::from_json(&c.to_json())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub n: u32,
    pub mode: SearchMode,
    pub goal: Option<SearchGoal>,
    pub max_count: u64,
    pub bound_3n: u64,
    pub conjecture_holds: bool,
    pub nodes_visited: u64,
    pub wall_seconds: f64,
    pub witness: Vec<u32>,
    /// Exhaustive: all maximizers. Pruned maximize: canonical maximizers.
    pub witness_count: u64,
    pub complete: bool,
    pub classes_covered: u128,
    pub classes_total: u128,
    pub coverage: f64,
    pub violations: Vec<Vec<u32>>,
}

impl SearchReport {
    pub fn from_checkpoint(cp: &SearchCheckpoint, wall_seconds: f64) -> Self {
        let bound = three_pow(cp.n);
        SearchReport {
            n: cp.n,
            mode: SearchMode::Pruned,
            goal: Some(cp.goal),
            max_count: cp.best_count,
            bound_3n: bound,
            conjecture_holds: cp.best_count <= bound && cp.violation_count == 0,
            nodes_visited: cp.nodes_visited,
            wall_seconds,
            witness: cp.witness.clone(),
            witness_count: cp.witness_count,
            complete: cp.complete,
            classes_covered: cp.classes_covered,
            classes_total: cp.classes_total,
            coverage: cp.classes_covered as f64 / cp.classes_total as f64,
            violations: cp.violations.clone(),
        }
    }

    pub fn from_exhaustive(result: &ExhaustiveResult, wall_seconds: f64) -> Self {
        let bound = three_pow(result.n);
        let total = (1..=1u128 << result.n).product();
        SearchReport {
            n: result.n,
            mode: SearchMode::Exhaustive,
            goal: None,
            max_count: result.max_count,
            bound_3n: bound,
            conjecture_holds: result.max_count <= bound,
            nodes_visited: result.permutations,
            wall_seconds,
            witness: result.witness.clone(),
            witness_count: result.maximizers.len() as u64,
            complete: true,
            classes_covered: total,
            classes_total: total,
            coverage: 1.0,
            violations: Vec::new(),
        }
    }
}

fn check_search_exponent(n: u32) -> Result<()> {
    if n > MAX_SEARCH_EXPONENT {
        Err(Error::ExponentOutOfRange { n, max: MAX_SEARCH_EXPONENT })
    } else {
        Ok(())
    }
}

/// `|GL(n, 2)|`
pub fn gl_order(n: u32) -> u128 {
    let size = 1u128 << n;
    (0..n).map(|i| size - (1u128 << i)).product()
}

/// Number of left-linear orbits of permutations of `[2^n]`.
pub fn canonical_class_count(n: u32) -> u128 {
    completions(n, 0, 0)
}

/// Canonical completions of a canonical prefix of length `len` whose
/// images span a space of dimension `rank`.
fn completions(n: u32, len: usize, rank: u32) -> u128 {
    let size = 1u128 << n;
    let free: u128 = (1..=size - len as u128).product();
    let stabilizer: u128 = (rank..n).map(|i| size - (1u128 << i)).product();
    free / stabilizer
}

fn prefix_rank(prefix: &[u8]) -> u32 {
    prefix.iter().filter(|&&v| v.is_power_of_two()).fold(0, |r, &v| if v as u32 == 1 << r { r + 1 } else { r })
}

/// Canonical prefixes of length `depth`, in lexicographic order.
pub fn canonical_prefixes(n: u32, depth: usize) -> Vec<Vec<u8>> {
    fn extend(n: u32, depth: usize, current: &mut Vec<u8>, used: u32, rank: u32, out: &mut Vec<Vec<u8>>) {
        if current.len() == depth {
            out.push(current.clone());
            return;
        }
        let top = if rank < n { 1u32 << rank } else { (1u32 << n) - 1 };
        for v in 0..=top {
            if used & (1 << v) != 0 {
                continue;
            }
            current.push(v as u8);
            let next_rank = if rank < n && v == 1 << rank { rank + 1 } else { rank };
            extend(n, depth, current, used | (1 << v), next_rank, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    extend(n, depth.min(1 << n), &mut Vec::new(), 0, 0, &mut out);
    out
}

/// Smallest prefix depth giving at least `TARGET_UNITS` units.
pub fn default_split_depth(n: u32) -> usize {
    let size = 1usize << n;
    (0..=size).find(|&d| d == size || canonical_prefixes(n, d).len() >= TARGET_UNITS).unwrap_or(size)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub n: u32,
    pub max_count: u64,
    /// Every maximizer, in lexicographic order.
    pub maximizers: Vec<Vec<u32>>,
    /// The lexicographically first maximizer.
    pub witness: Vec<u32>,
    pub permutations: u64,
}

/// Every permutation of `[2^n]`, in lexicographic order.
pub fn exhaustive_max_b(n: u32) -> Result<ExhaustiveResult> {
    if n > MAX_EXHAUSTIVE_EXPONENT {
        return Err(Error::TooLargeForExhaustive { n, max: MAX_EXHAUSTIVE_EXPONENT });
    }
    let mut perm: Vec<u32> = (0..1u32 << n).collect();
    let mut max_count = 0;
    let mut maximizers = Vec::new();
    let mut permutations = 0u64;
    loop {
        permutations += 1;
        let count = count_b_images(&perm);
        if count > max_count {
            max_count = count;
            maximizers.clear();
        }
        if count == max_count {
            maximizers.push(perm.clone());
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(ExhaustiveResult { n, max_count, witness: maximizers[0].clone(), maximizers, permutations })
}

fn next_permutation(p: &mut [u32]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Clone, Debug, Default)]
struct UnitOutcome {
    best: u64,
    count: u64,
    witness: Option<Vec<u8>>,
    nodes: u64,
    violation_count: u64,
    violations: Vec<Vec<u8>>,
}

/// Depth-first expansion of one unit.
struct Dfs {
    n: u32,
    size: usize,
    goal: SearchGoal,
    strategy: BoundStrategy,
    bound_3n: u64,
    sigma: [u8; 32],
    used: u32,
    rank: u32,
    satisfied: u64,
    zero_ok: bool,
    /// `targets[j][v]`: decided-operand pairs `(k, j-k)`, `k, j-k >= 1`,
    /// whose `s(k)^s(j-k)` equals `v`; kept for unassigned `j`.
    targets: [[u8; 32]; 32],
    /// Sum over unassigned `j` of pairs `(k, j-k)`, `k, j-k >= 1`, with an
    /// unassigned operand, indexed by the number of assigned indices.
    open_pairs: [u64; 33],
    out: UnitOutcome,
}

impl Dfs {
    fn new(n: u32, goal: SearchGoal, strategy: BoundStrategy, best: u64) -> Self {
        let size = 1usize << n;
        let mut open_pairs = [0u64; 33];
        for (q, slot) in open_pairs.iter_mut().enumerate().take(size + 1) {
            *slot = (q.max(1)..size)
                .map(|j| {
                    let lo = 1.max((j + 1).saturating_sub(q));
                    let hi = (j - 1).min(q.saturating_sub(1));
                    let decided = if hi >= lo { hi - lo + 1 } else { 0 };
                    (j - 1 - decided) as u64
                })
                .sum();
        }
        Dfs {
            n,
            size,
            goal,
            strategy,
            bound_3n: three_pow(n),
            sigma: [0; 32],
            used: 0,
            rank: 0,
            satisfied: 0,
            zero_ok: false,
            targets: [[0; 32]; 32],
            open_pairs,
            out: UnitOutcome { best, ..UnitOutcome::default() },
        }
    }

    fn assign(&mut self, q: usize, v: u8) {
        self.sigma[q] = v;
        self.used |= 1 << v;
        if self.rank < self.n && v as u32 == 1 << self.rank {
            self.rank += 1;
        }
        if q == 0 {
            self.zero_ok = v == 0;
            self.satisfied += self.zero_ok as u64;
            return;
        }
        self.satisfied += self.targets[q][v as usize] as u64 + if self.zero_ok { 2 } else { 0 };
        for j in q + 1..self.size.min(2 * q + 1) {
            let l = j - q;
            if l < q {
                self.targets[j][(v ^ self.sigma[l]) as usize] += 2;
            } else {
                self.targets[j][0] += 1;
            }
        }
    }

    fn unassign(&mut self, q: usize, v: u8) {
        self.used &= !(1 << v);
        if self.rank > 0 && v as u32 == 1 << (self.rank - 1) {
            self.rank -= 1;
        }
        if q == 0 {
            self.satisfied -= self.zero_ok as u64;
            self.zero_ok = false;
            return;
        }
        self.satisfied -= self.targets[q][v as usize] as u64 + if self.zero_ok { 2 } else { 0 };
        for j in q + 1..self.size.min(2 * q + 1) {
            let l = j - q;
            if l < q {
                self.targets[j][(v ^ self.sigma[l]) as usize] -= 2;
            } else {
                self.targets[j][0] -= 1;
            }
        }
    }

    /// Upper bound on `#B` over completions once `q` indices are assigned.
    fn bound(&self, q: usize) -> u64 {
        if q == 0 {
            return 4u64.pow(self.n);
        }
        let mut total = self.satisfied + self.open_pairs[q];
        if self.zero_ok {
            total += 2 * (self.size - q) as u64;
        }
        if self.strategy == BoundStrategy::Simple {
            let all: u64 = (q.max(1)..self.size).map(|j| j as u64 - 1).sum();
            return total - self.open_pairs[q] + all;
        }
        let free = !self.used & ((1u64 << self.size) - 1) as u32;
        for row in &self.targets[q..self.size] {
            let mut best = 0;
            let mut bits = free;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                best = best.max(row[v]);
                bits &= bits - 1;
            }
            total += best as u64;
        }
        total
    }

    fn pruned(&self, q: usize) -> bool {
        let b = self.bound(q);
        match self.goal {
            SearchGoal::Maximize => b < self.out.best,
            SearchGoal::Verify => b <= self.bound_3n,
        }
    }

    fn leaf(&mut self) {
        let count = self.satisfied;
        let table = &self.sigma[..self.size];
        if count > self.bound_3n {
            self.out.violation_count += 1;
            if self.out.violations.len() < MAX_RECORDED_VIOLATIONS {
                self.out.violations.push(table.to_vec());
            }
        }
        if count > self.out.best {
            self.out.best = count;
            self.out.count = 1;
            self.out.witness = Some(table.to_vec());
        } else if count == self.out.best {
            self.out.count += 1;
            if self.out.witness.is_none() {
                self.out.witness = Some(table.to_vec());
            }
        }
    }

    fn descend(&mut self, q: usize) {
        if q == self.size {
            self.leaf();
            return;
        }
        let top = if self.rank < self.n { 1u32 << self.rank } else { self.size as u32 - 1 };
        for v in 0..=top as u8 {
            if self.used & (1 << v) != 0 {
                continue;
            }
            self.assign(q, v);
            self.out.nodes += 1;
            if q + 1 == self.size || !self.pruned(q + 1) {
                self.descend(q + 1);
            }
            self.unassign(q, v);
        }
    }

    fn run(mut self, prefix: &[u8]) -> UnitOutcome {
        for (q, &v) in prefix.iter().enumerate() {
            self.assign(q, v);
        }
        self.out.nodes += 1;
        let q = prefix.len();
        if q == self.size || !self.pruned(q) {
            self.descend(q);
        }
        self.out
    }
}

/// Depth-first branch and bound over canonical tables, resumable from a
/// checkpoint. When resuming, the goal, split depth and batch size stored in
/// the checkpoint take precedence over `config`.
pub fn pruned_search<F>(
    n: u32,
    config: &SearchConfig,
    resume: Option<SearchCheckpoint>,
    mut on_checkpoint: F,
) -> Result<SearchCheckpoint>
where
    F: FnMut(&SearchCheckpoint),
{
    check_search_exponent(n)?;
    let mut cp = match resume {
        Some(cp) => {
            cp.validate()?;
            if cp.n != n {
                return Err(Error::Checkpoint(format!("checkpoint is for n = {}, not {n}", cp.n)));
            }
            cp
        }
        None => SearchCheckpoint::fresh(
            n,
            config.goal,
            config.bound,
            config.split_depth.unwrap_or_else(|| default_split_depth(n)),
            config.batch_size,
        )?,
    };
    let units = canonical_prefixes(n, cp.split_depth);
    let mut cursor = cp.canonical_class_cursor as usize;
    if cursor > units.len() {
        return Err(Error::Checkpoint(format!("cursor {cursor} beyond {} units", units.len())));
    }
    let expected: Vec<u32> = units.get(cursor).map(|u| u.iter().map(|&v| v as u32).collect()).unwrap_or_default();
    if expected != cp.prefix {
        return Err(Error::Checkpoint("prefix does not match the unit at the cursor".into()));
    }

    let start = Instant::now();
    let start_nodes = cp.nodes_visited;
    let mut since_checkpoint = 0u64;
    while cursor < units.len() {
        if config.max_nodes.is_some_and(|limit| cp.nodes_visited - start_nodes >= limit)
            || config.max_seconds.is_some_and(|limit| start.elapsed().as_secs_f64() >= limit)
        {
            break;
        }
        let end = (cursor + cp.batch_size).min(units.len());
        let best = cp.best_count;
        let outcomes: Vec<UnitOutcome> =
            units[cursor..end].par_iter().map(|prefix| Dfs::new(n, cp.goal, cp.bound, best).run(prefix)).collect();
        let nodes_before = cp.nodes_visited;
        for (prefix, outcome) in units[cursor..end].iter().zip(outcomes) {
            merge(&mut cp, outcome);
            cp.classes_covered += completions(n, prefix.len(), prefix_rank(prefix));
        }
        since_checkpoint += cp.nodes_visited - nodes_before;
        cursor = end;
        cp.canonical_class_cursor = cursor as u64;
        cp.prefix = units.get(cursor).map(|u| u.iter().map(|&v| v as u32).collect()).unwrap_or_default();
        cp.complete = cursor == units.len();
        if let Some(interval) = config.checkpoint_interval {
            if since_checkpoint >= interval {
                on_checkpoint(&cp);
                since_checkpoint = 0;
            }
        }
    }
    cp.complete = cursor == units.len();
    Ok(cp)
}

fn merge(cp: &mut SearchCheckpoint, outcome: UnitOutcome) {
    cp.nodes_visited += outcome.nodes;
    cp.violation_count += outcome.violation_count;
    for v in outcome.violations {
        if cp.violations.len() < MAX_RECORDED_VIOLATIONS {
            cp.violations.push(v.into_iter().map(u32::from).collect());
        }
    }
    if outcome.count == 0 {
        return;
    }
    if outcome.best > cp.best_count {
        cp.best_count = outcome.best;
        cp.witness_count = 0;
        cp.witness = outcome.witness.clone().expect("counted leaf has a witness").into_iter().map(u32::from).collect();
    }
    if outcome.best == cp.best_count {
        if cp.witness_count == 0 {
            cp.witness = outcome.witness.expect("counted leaf has a witness").into_iter().map(u32::from).collect();
        }
        cp.witness_count += outcome.count;
    }
}
