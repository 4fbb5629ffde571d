//! Search-space size: how many strings the model rates at least as
//! probable as a threshold.
//!
//! Three routes to the same quantity, with different cost profiles:
//! explicit counting (exact, cost proportional to the count), a memoized
//! discretized count (a deliberate lower bound, cheap enough for spaces
//! around 10^40), and best-first enumeration (yields the strings
//! themselves). The strength of a password is the size of the space at
//! its own probability, so it is the attempt number at which an optimal
//! probability-ordered guesser reaches it.
//!
//! All three share one arithmetic convention: probabilities are natural
//! logs accumulated length-term first, then per character left to right,
//! exactly as the scorer does it. Counting at a threshold equal to some
//! string's score therefore includes that string with no epsilon games.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::atomic::AtomicUsize;

use num::{BigUint, One, Zero};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::markov::{LogProb, MarkovModel, Sym};

/// Unbounded count. Search spaces outgrow u64 in routine use.
pub type BigCount = BigUint;

/// A password's guess rank, or Unreachable when the model can never
/// produce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strength {
    Finite(BigCount),
    Unreachable,
}

impl Strength {
    pub fn is_unreachable(&self) -> bool {
        matches!(self, Strength::Unreachable)
    }

    pub fn finite(&self) -> Option<&BigCount> {
        match self {
            Strength::Finite(n) => Some(n),
            Strength::Unreachable => None,
        }
    }
}

impl PartialOrd for Strength {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Unreachable sorts above every finite strength.
impl Ord for Strength {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Strength::Finite(a), Strength::Finite(b)) => a.cmp(b),
            (Strength::Finite(_), Strength::Unreachable) => Ordering::Less,
            (Strength::Unreachable, Strength::Finite(_)) => Ordering::Greater,
            (Strength::Unreachable, Strength::Unreachable) => Ordering::Equal,
        }
    }
}

/// Which counting route to use where either is legal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    Approx { base: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    ch: char,
    log_nu: f64,
    next: u32,
}

/// The model's transition structure flattened for counting: contexts
/// interned to ids, outgoing edges sorted by character, lengths with
/// their log probabilities.
pub struct CountingEngine {
    edges: Vec<Vec<Edge>>,
    start: u32,
    /// (length, ln lambda), ascending length, positive counts only.
    lengths: Vec<(usize, f64)>,
}

fn intern(contexts: &mut HashMap<Vec<Sym>, u32>, edges: &mut Vec<Vec<Edge>>, ctx: Vec<Sym>) -> u32 {
    if let Some(&id) = contexts.get(&ctx) {
        return id;
    }
    let id = edges.len() as u32;
    contexts.insert(ctx, id);
    edges.push(Vec::new());
    id
}

impl CountingEngine {
    pub fn new(m: &MarkovModel) -> CountingEngine {
        let k = m.order();
        let mut contexts: HashMap<Vec<Sym>, u32> = HashMap::new();
        let mut edges: Vec<Vec<Edge>> = Vec::new();
        let start = intern(&mut contexts, &mut edges, vec![Sym::Boundary; k - 1]);
        let mut grams: Vec<(Vec<Sym>, u64)> = m.grams().map(|(g, c)| (g.to_vec(), c)).collect();
        grams.sort();
        for (gram, count) in grams {
            let ch = match gram[k - 1] {
                Sym::Ch(c) => c,
                Sym::Boundary => continue,
            };
            let den = m.context_total(&gram[..k - 1]);
            let log_nu = (count as f64 / den as f64).ln();
            let ctx = intern(&mut contexts, &mut edges, gram[..k - 1].to_vec());
            let next = intern(&mut contexts, &mut edges, gram[1..].to_vec());
            edges[ctx as usize].push(Edge { ch, log_nu, next });
        }
        for list in &mut edges {
            list.sort_by_key(|a| a.ch);
        }
        let total = m.total();
        let lengths = m
            .length_counts()
            .iter()
            .map(|(&len, &count)| (len, (count as f64 / total as f64).ln()))
            .collect();
        CountingEngine {
            edges,
            start,
            lengths,
        }
    }

    fn count_exact(&self, ctx: u32, rem: usize, acc: f64, ln_t: f64) -> u128 {
        // Every conditional factor is <= 1, so a partial product below the
        // threshold can never recover.
        if acc < ln_t {
            return 0;
        }
        if rem == 0 {
            return 1;
        }
        let mut total = 0u128;
        for e in &self.edges[ctx as usize] {
            total += self.count_exact(e.next, rem - 1, acc + e.log_nu, ln_t);
        }
        total
    }

    /// Number of strings scoring at least `ln_t`, threshold inclusive.
    pub fn size_ln(&self, ln_t: f64) -> BigCount {
        let mut total = 0u128;
        for &(len, ln_lambda) in &self.lengths {
            total += self.count_exact(self.start, len, ln_lambda, ln_t);
        }
        BigCount::from(total)
    }

    /// Like size_ln but gives up once the count would pass `cap`.
    pub fn size_ln_capped(&self, ln_t: f64, cap: u128) -> Option<u128> {
        fn walk(
            engine: &CountingEngine,
            ctx: u32,
            rem: usize,
            acc: f64,
            ln_t: f64,
            left: &mut u128,
        ) -> bool {
            if acc < ln_t {
                return true;
            }
            if rem == 0 {
                if *left == 0 {
                    return false;
                }
                *left -= 1;
                return true;
            }
            for e in &engine.edges[ctx as usize] {
                if !walk(engine, e.next, rem - 1, acc + e.log_nu, ln_t, left) {
                    return false;
                }
            }
            true
        }
        let mut left = cap;
        for &(len, ln_lambda) in &self.lengths {
            if !walk(self, self.start, len, ln_lambda, ln_t, &mut left) {
                return None;
            }
        }
        Some(cap - left)
    }

    /// Best-first stream of every string scoring at least `ln_t`, most
    /// probable first, ties to shorter length then charset order.
    pub fn candidates(&self, ln_t: f64) -> CandidateStream<'_> {
        let mut heap = BinaryHeap::new();
        for &(len, ln_lambda) in &self.lengths {
            if ln_lambda >= ln_t {
                heap.push(Node {
                    acc: ln_lambda,
                    target_len: len,
                    prefix: Vec::new(),
                    ctx: self.start,
                    rem: len,
                });
            }
        }
        CandidateStream {
            engine: self,
            heap,
            ln_t,
        }
    }
}

struct Node {
    acc: f64,
    target_len: usize,
    prefix: Vec<char>,
    ctx: u32,
    rem: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: higher probability pops first, then shorter target
    // length, then lexicographically smaller prefix. A prefix is never
    // lexicographically larger than its own extensions, which keeps the
    // popped finals in exact tie order.
    fn cmp(&self, other: &Self) -> Ordering {
        self.acc
            .total_cmp(&other.acc)
            .then_with(|| other.target_len.cmp(&self.target_len))
            .then_with(|| other.prefix.cmp(&self.prefix))
    }
}

pub struct CandidateStream<'a> {
    engine: &'a CountingEngine,
    heap: BinaryHeap<Node>,
    ln_t: f64,
}

impl Iterator for CandidateStream<'_> {
    type Item = (String, f64);

    fn next(&mut self) -> Option<(String, f64)> {
        while let Some(node) = self.heap.pop() {
            if node.rem == 0 {
                return Some((node.prefix.iter().collect(), node.acc.exp()));
            }
            for e in &self.engine.edges[node.ctx as usize] {
                let acc = node.acc + e.log_nu;
                if acc < self.ln_t {
                    continue;
                }
                let mut prefix = node.prefix.clone();
                prefix.push(e.ch);
                self.heap.push(Node {
                    acc,
                    target_len: node.target_len,
                    prefix,
                    ctx: e.next,
                    rem: node.rem - 1,
                });
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy)]
struct CostEdge {
    cost: u32,
    next: u32,
}

/// Process-wide default memo cap for new engines, stored shifted by one
/// so zero means unset. The CLI sets it from GUESSRANK_CACHE_CAP; calls
/// that build engines internally then honor the bound too.
static DEFAULT_CACHE_CAP: AtomicUsize = AtomicUsize::new(0);

pub fn set_default_cache_cap(cap: Option<usize>) {
    let coded = cap.map_or(0, |c| c.saturating_add(1));
    DEFAULT_CACHE_CAP.store(coded, std::sync::atomic::Ordering::Relaxed);
}

fn default_cache_cap() -> Option<usize> {
    match DEFAULT_CACHE_CAP.load(std::sync::atomic::Ordering::Relaxed) {
        0 => None,
        coded => Some(coded - 1),
    }
}

/// Discretized counter: characters cost whole log-base-b units rounded
/// up, budgets are rounded down, so the count never exceeds the exact
/// one. Memoized on (context, remaining length, remaining budget); a
/// memo entry is threshold-independent, so one engine serves any number
/// of queries.
pub struct ApproxEngine {
    edges: Vec<Vec<CostEdge>>,
    start: u32,
    lengths: Vec<(usize, f64)>,
    ln_base: f64,
    memo: HashMap<(u32, u32, u32), BigCount>,
    cache_cap: Option<usize>,
}

impl ApproxEngine {
    pub fn new(m: &MarkovModel, base: f64) -> Result<ApproxEngine> {
        if !(base.is_finite() && base > 1.0) {
            return Err(Error::InvalidBase);
        }
        let ln_base = base.ln();
        let exact = CountingEngine::new(m);
        let edges = exact
            .edges
            .iter()
            .map(|list| {
                list.iter()
                    .map(|e| {
                        let units = (-e.log_nu / ln_base).ceil();
                        let cost = if units >= u32::MAX as f64 {
                            u32::MAX
                        } else {
                            units as u32
                        };
                        CostEdge { cost, next: e.next }
                    })
                    .collect()
            })
            .collect();
        Ok(ApproxEngine {
            edges,
            start: exact.start,
            lengths: exact.lengths,
            ln_base,
            memo: HashMap::new(),
            cache_cap: default_cache_cap(),
        })
    }

    /// Entry cap for the memo table; over the cap results are still
    /// computed, just not retained.
    pub fn with_cache_cap(mut self, cap: Option<usize>) -> ApproxEngine {
        self.cache_cap = cap;
        self
    }

    pub fn cached_entries(&self) -> usize {
        self.memo.len()
    }

    pub fn size_ln(&mut self, ln_t: f64) -> BigCount {
        let mut total = BigCount::zero();
        for i in 0..self.lengths.len() {
            let (len, ln_lambda) = self.lengths[i];
            let units = (ln_lambda - ln_t) / self.ln_base;
            if units < 0.0 {
                continue;
            }
            let budget = if units >= u32::MAX as f64 {
                u32::MAX
            } else {
                units.floor() as u32
            };
            total += self.count(self.start, len as u32, budget);
        }
        total
    }

    fn count(&mut self, ctx: u32, rem: u32, budget: u32) -> BigCount {
        if rem == 0 {
            return BigCount::one();
        }
        if let Some(hit) = self.memo.get(&(ctx, rem, budget)) {
            return hit.clone();
        }
        let mut total = BigCount::zero();
        for i in 0..self.edges[ctx as usize].len() {
            let e = self.edges[ctx as usize][i];
            if e.cost <= budget {
                total += self.count(e.next, rem - 1, budget - e.cost);
            }
        }
        if self.cache_cap.is_none_or(|cap| self.memo.len() < cap) {
            self.memo.insert((ctx, rem, budget), total.clone());
        }
        total
    }
}

fn ln_threshold(threshold: f64) -> Result<f64> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidThreshold);
    }
    Ok(threshold.ln())
}

/// Exact number of strings with model probability >= threshold.
pub fn exact_size(m: &MarkovModel, threshold: f64) -> Result<BigCount> {
    let ln_t = ln_threshold(threshold)?;
    Ok(CountingEngine::new(m).size_ln(ln_t))
}

/// Discretized lower bound on exact_size; tighter as base approaches 1.
pub fn approx_size(m: &MarkovModel, threshold: f64, base: f64) -> Result<BigCount> {
    let ln_t = ln_threshold(threshold)?;
    Ok(ApproxEngine::new(m, base)?.size_ln(ln_t))
}

/// All strings with probability >= threshold, most probable first.
/// Errors if more than `limit` qualify.
pub fn enumerate_candidates(
    m: &MarkovModel,
    threshold: f64,
    limit: usize,
) -> Result<Vec<(String, f64)>> {
    let ln_t = ln_threshold(threshold)?;
    let engine = CountingEngine::new(m);
    let mut out = Vec::new();
    for item in engine.candidates(ln_t) {
        if out.len() == limit {
            return Err(Error::EnumerationTruncated {
                limit,
                emitted: out.len(),
            });
        }
        out.push(item);
    }
    Ok(out)
}

/// Counts at the probabilities of whole strings rather than at a fixed
/// threshold, reusing engines across calls.
pub struct SizeOracle {
    mode: Mode,
    exact: CountingEngine,
    approx: Option<ApproxEngine>,
}

impl SizeOracle {
    pub fn new(m: &MarkovModel, mode: Mode) -> Result<SizeOracle> {
        let approx = match mode {
            Mode::Exact => None,
            Mode::Approx { base } => Some(ApproxEngine::new(m, base)?),
        };
        Ok(SizeOracle {
            mode,
            exact: CountingEngine::new(m),
            approx,
        })
    }

    pub fn size_at_ln(&mut self, ln_t: f64) -> BigCount {
        match &mut self.approx {
            Some(engine) => engine.size_ln(ln_t),
            None => self.exact.size_ln(ln_t),
        }
    }

    /// Strength at a string's own score. Approximate mode clamps to 1:
    /// the string itself always counts, but rounding can push its own
    /// discretized cost over its own budget.
    pub fn strength_at(&mut self, score: LogProb) -> Strength {
        match score {
            LogProb::Unreachable => Strength::Unreachable,
            LogProb::Finite(ln_p) => {
                let size = self.size_at_ln(ln_p);
                let size = match self.mode {
                    Mode::Approx { .. } if size.is_zero() => BigCount::one(),
                    _ => size,
                };
                Strength::Finite(size)
            }
        }
    }

    pub fn candidates(&self, ln_t: f64) -> CandidateStream<'_> {
        self.exact.candidates(ln_t)
    }
}

/// Guess rank of `s`: the attempt number at which a probability-ordered
/// guesser reaches it. With holdout, both the score and the count run
/// against the model retrained without one occurrence of `s`.
pub fn strength(m: &MarkovModel, s: &str, holdout: bool, mode: Mode) -> Result<Strength> {
    if holdout {
        let residual = m.residual_without(s)?;
        let mut oracle = SizeOracle::new(&residual, mode)?;
        Ok(oracle.strength_at(residual.log_score(s)))
    } else {
        let mut oracle = SizeOracle::new(m, mode)?;
        Ok(oracle.strength_at(m.log_score(s)))
    }
}

/// Σ charset_size^i for i in 0..=max_len: every string a brute-force
/// guesser tries through length max_len, the empty string included.
pub fn brute_force_size(charset_size: u64, max_len: usize) -> BigCount {
    let mut total = BigCount::zero();
    let mut power = BigCount::one();
    for _ in 0..=max_len {
        total += &power;
        power *= charset_size;
    }
    total
}

/// 1-based position of `s` when a brute-force guesser enumerates by
/// length, then lexicographically in charset order.
pub fn brute_force_rank(charset: &[char], s: &str) -> Result<BigCount> {
    let n = charset.len() as u64;
    let chars: Vec<char> = s.chars().collect();
    if chars.is_empty() {
        return Ok(BigCount::one());
    }
    let mut index = BigCount::zero();
    for c in &chars {
        let digit = charset
            .iter()
            .position(|x| x == c)
            .ok_or(Error::ForeignCharacter(*c))? as u64;
        index = index * n + BigCount::from(digit);
    }
    let mut rank = brute_force_size(n, chars.len() - 1);
    rank += index;
    rank += 1u32;
    Ok(rank)
}

#[derive(Debug, Clone)]
pub struct EntryStrength {
    pub entry: String,
    pub len: usize,
    pub mult: u64,
    pub strength: Strength,
}

/// Strength-vs-fraction curve over an evaluation corpus: point (n, f)
/// means a fraction f of accounts falls to the first n guesses.
#[derive(Debug, Clone)]
pub struct GuessCurve {
    pub points: Vec<(BigCount, f64)>,
    pub unguessable: f64,
    pub per_entry: Vec<EntryStrength>,
}

pub fn guess_curve(
    train: &Corpus,
    k: usize,
    eval: &Corpus,
    mode: Mode,
    holdout: bool,
) -> Result<GuessCurve> {
    let model = MarkovModel::train(train, k)?;
    if holdout && train.fingerprint() != eval.fingerprint() {
        return Err(Error::HoldoutMismatch);
    }
    if eval.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut shared = if holdout {
        None
    } else {
        Some(SizeOracle::new(&model, mode)?)
    };
    let mut per_entry = Vec::with_capacity(eval.unique_count());
    for (entry, mult) in eval.entries() {
        let strength = match &mut shared {
            Some(oracle) => oracle.strength_at(model.log_score(entry)),
            None => {
                let residual = model.residual_without(entry)?;
                let mut oracle = SizeOracle::new(&residual, mode)?;
                oracle.strength_at(residual.log_score(entry))
            }
        };
        per_entry.push(EntryStrength {
            entry: entry.to_string(),
            len: entry.chars().count(),
            mult,
            strength,
        });
    }
    let total = eval.total_count();
    let mut finite: Vec<(&BigCount, u64)> = per_entry
        .iter()
        .filter_map(|e| e.strength.finite().map(|n| (n, e.mult)))
        .collect();
    finite.sort_by(|a, b| a.0.cmp(b.0));
    let mut points: Vec<(BigCount, f64)> = Vec::new();
    let mut cum = 0u64;
    for (size, mult) in finite {
        cum += mult;
        let fraction = cum as f64 / total as f64;
        match points.last_mut() {
            Some(last) if last.0 == *size => last.1 = fraction,
            _ => points.push((size.clone(), fraction)),
        }
    }
    let guessable: u64 = per_entry
        .iter()
        .filter(|e| !e.strength.is_unreachable())
        .map(|e| e.mult)
        .sum();
    Ok(GuessCurve {
        points,
        unguessable: (total - guessable) as f64 / total as f64,
        per_entry,
    })
}

/// One row of a threshold sweep: the space size at the threshold and the
/// fraction of the evaluation corpus scoring at or above it.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub ln_threshold: f64,
    pub size: BigCount,
    pub fraction: f64,
}

#[derive(Debug, Clone)]
pub struct ThresholdCurve {
    pub points: Vec<SweepPoint>,
    pub unguessable: f64,
}

/// Sweeps thresholds (given as natural logs) from most to least strict
/// threshold, so sizes and fractions are both non-decreasing.
pub fn threshold_sweep(
    train: &Corpus,
    k: usize,
    eval: &Corpus,
    mode: Mode,
    holdout: bool,
    ln_thresholds: &[f64],
) -> Result<ThresholdCurve> {
    let model = MarkovModel::train(train, k)?;
    if holdout && train.fingerprint() != eval.fingerprint() {
        return Err(Error::HoldoutMismatch);
    }
    if eval.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut scored: Vec<(f64, u64)> = Vec::new();
    let mut guessable = 0u64;
    for (entry, mult) in eval.entries() {
        let score = if holdout {
            model.log_score_holdout(entry)?
        } else {
            model.log_score(entry)
        };
        if let LogProb::Finite(ln_p) = score {
            scored.push((ln_p, mult));
            guessable += mult;
        }
    }
    let total = eval.total_count();
    let mut order: Vec<f64> = ln_thresholds.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));
    let mut oracle = SizeOracle::new(&model, mode)?;
    let mut points = Vec::with_capacity(order.len());
    for ln_t in order {
        let size = oracle.size_at_ln(ln_t);
        let hit: u64 = scored
            .iter()
            .filter(|(ln_p, _)| *ln_p >= ln_t)
            .map(|(_, mult)| mult)
            .sum();
        points.push(SweepPoint {
            ln_threshold: ln_t,
            size,
            fraction: hit as f64 / total as f64,
        });
    }
    Ok(ThresholdCurve {
        points,
        unguessable: (total - guessable) as f64 / total as f64,
    })
}
