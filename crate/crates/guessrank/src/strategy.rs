//! Multi-step attack plans: username, dictionary cascade, then Markov
//! stages of decreasing order.
//!
//! The report mirrors an attacker's ledger: cumulative attempts against
//! cumulative cracked fraction, one row per step. Username and dictionary
//! steps share a tried-set, so a candidate checked by an earlier step adds
//! no attempts later. Markov stages are budgeted candidate counts; their
//! overlap with the dictionaries is not deducted, and a password falls to
//! a Markov stage when its guess rank under that stage's model is within
//! the budget spent on Markov stages so far.

use std::collections::{HashMap, HashSet};

use num::{BigUint, ToPrimitive, Zero};

use crate::corpus::{Corpus, PairList};
use crate::dictattack::Dictionary;
use crate::error::{Error, Result};
use crate::markov::{LogProb, MarkovModel, DEFAULT_MAX_ORDER};
use crate::spacesize::{ApproxEngine, BigCount, CountingEngine};

#[derive(Debug, Clone)]
pub enum MarkovBudget {
    /// Try exactly this many candidates, best first.
    Candidates(BigCount),
    /// Try every string at or above this probability; the attempt count
    /// is the discretized space size, flagged as estimated.
    Threshold(f64),
}

#[derive(Debug, Clone)]
pub enum PlanStep {
    Username,
    Dictionary { label: String, dict: Dictionary },
    Markov { k: usize, budget: MarkovBudget },
}

#[derive(Debug, Clone)]
pub struct PlanOptions {
    /// Maintain the cross-step tried-set (disable to see raw step sizes).
    pub dedup: bool,
    /// Largest cumulative Markov budget checked by explicit counting;
    /// beyond it the crack check uses the discretized estimate.
    pub enum_cap: u64,
    /// Discretization base for estimates.
    pub base: f64,
    pub max_order: usize,
    pub cache_cap: Option<usize>,
}

impl Default for PlanOptions {
    fn default() -> PlanOptions {
        PlanOptions {
            dedup: true,
            enum_cap: 100_000,
            base: 1.01,
            max_order: DEFAULT_MAX_ORDER,
            cache_cap: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StrategyRow {
    pub label: String,
    pub attempts: BigCount,
    pub cracked_fraction: f64,
    pub estimated: bool,
}

#[derive(Debug, Clone)]
pub struct StrategyReport {
    pub rows: Vec<StrategyRow>,
    /// Whether Markov scores were leave-one-out (evaluation corpus is the
    /// training corpus).
    pub holdout: bool,
    pub total_accounts: u64,
}

/// The published Markov cascade: candidate budgets for k = 5 down to 2,
/// then a threshold stage for k = 1 where explicit budgets stop being
/// meaningful integers.
pub fn default_markov_stages() -> Vec<PlanStep> {
    vec![
        PlanStep::Markov {
            k: 5,
            budget: MarkovBudget::Candidates(BigCount::from(500_000u64)),
        },
        PlanStep::Markov {
            k: 4,
            budget: MarkovBudget::Candidates(BigCount::from(7_000_000u64)),
        },
        PlanStep::Markov {
            k: 3,
            budget: MarkovBudget::Candidates(BigCount::from(700_000_000u64)),
        },
        PlanStep::Markov {
            k: 2,
            budget: MarkovBudget::Candidates(BigCount::from(70_000_000_000_000_000u64)),
        },
        PlanStep::Markov {
            k: 1,
            budget: MarkovBudget::Threshold(4e-46),
        },
    ]
}

struct KState {
    model: MarkovModel,
    exact: CountingEngine,
    approx: ApproxEngine,
}

struct Account {
    username: Option<String>,
    password: String,
    cracked: bool,
}

pub fn run_plan(
    plan: &[PlanStep],
    eval: &Corpus,
    usernames: Option<&PairList>,
    training: &Corpus,
    opts: &PlanOptions,
) -> Result<StrategyReport> {
    if plan.is_empty() {
        return Err(Error::EmptyPlan);
    }
    if eval.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for step in plan {
        match step {
            PlanStep::Username if usernames.is_none() => return Err(Error::MissingUsernames),
            PlanStep::Markov { budget, .. } => match budget {
                MarkovBudget::Candidates(n) if n.is_zero() => return Err(Error::ZeroBudget),
                MarkovBudget::Threshold(t) if !(t.is_finite() && *t > 0.0) => {
                    return Err(Error::InvalidThreshold)
                }
                _ => {}
            },
            _ => {}
        }
    }

    let mut accounts: Vec<Account> = match usernames {
        Some(pairs) => {
            use crate::corpus::DedupPolicy;
            if pairs.passwords(DedupPolicy::KeepMultiset).fingerprint() != eval.fingerprint() {
                return Err(Error::PairsDoNotMatchEval);
            }
            pairs
                .pairs
                .iter()
                .map(|(u, p)| Account {
                    username: Some(u.clone()),
                    password: p.clone(),
                    cracked: false,
                })
                .collect()
        }
        None => {
            let mut out = Vec::with_capacity(eval.total_count() as usize);
            for (entry, mult) in eval.entries() {
                for _ in 0..mult {
                    out.push(Account {
                        username: None,
                        password: entry.to_string(),
                        cracked: false,
                    });
                }
            }
            out
        }
    };
    let total = accounts.len() as u64;
    let holdout = training.fingerprint() == eval.fingerprint();

    let mut models: HashMap<usize, KState> = HashMap::new();
    let mut tried: HashSet<String> = HashSet::new();
    let mut attempts = BigCount::zero();
    let mut markov_spent = BigCount::zero();
    let mut cracked = 0u64;
    let mut estimated = false;
    let mut rows = Vec::with_capacity(plan.len());

    for step in plan {
        let label;
        match step {
            PlanStep::Username => {
                label = "username".to_string();
                attempts += 1u32;
                for account in &mut accounts {
                    if !account.cracked && account.username.as_deref() == Some(&account.password) {
                        account.cracked = true;
                        cracked += 1;
                    }
                }
            }
            PlanStep::Dictionary { label: name, dict } => {
                label = name.clone();
                if opts.dedup {
                    let mut fresh = 0u64;
                    for word in dict.words() {
                        if tried.insert(word.clone()) {
                            fresh += 1;
                        }
                    }
                    attempts += fresh;
                } else {
                    attempts += dict.len() as u64;
                }
                for account in &mut accounts {
                    if !account.cracked && dict.contains(&account.password) {
                        account.cracked = true;
                        cracked += 1;
                    }
                }
            }
            PlanStep::Markov { k, budget } => {
                label = format!("markov k={k}");
                let state = match models.entry(*k) {
                    std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                    std::collections::hash_map::Entry::Vacant(slot) => {
                        let model = MarkovModel::train_with_max_order(training, *k, opts.max_order)?;
                        let exact = CountingEngine::new(&model);
                        let mut approx = ApproxEngine::new(&model, opts.base)?;
                        if opts.cache_cap.is_some() {
                            approx = approx.with_cache_cap(opts.cache_cap);
                        }
                        slot.insert(KState {
                            model,
                            exact,
                            approx,
                        })
                    }
                };
                let spent = match budget {
                    MarkovBudget::Candidates(n) => n.clone(),
                    MarkovBudget::Threshold(t) => {
                        estimated = true;
                        state.approx.size_ln(t.ln())
                    }
                };
                attempts += spent.clone();
                markov_spent += spent;

                // One verdict per distinct password, then applied to every
                // account still standing with that password.
                let mut verdicts: HashMap<&str, bool> = HashMap::new();
                let mut hits: Vec<usize> = Vec::new();
                for (idx, account) in accounts.iter().enumerate() {
                    if account.cracked {
                        continue;
                    }
                    let password = account.password.as_str();
                    let verdict = match verdicts.get(password) {
                        Some(&v) => v,
                        None => {
                            let v = markov_cracks(
                                state,
                                password,
                                holdout,
                                &markov_spent,
                                opts,
                            )?;
                            verdicts.insert(password, v);
                            v
                        }
                    };
                    if verdict {
                        hits.push(idx);
                    }
                }
                for idx in hits {
                    accounts[idx].cracked = true;
                    cracked += 1;
                }
            }
        }
        rows.push(StrategyRow {
            label,
            attempts: attempts.clone(),
            cracked_fraction: cracked as f64 / total as f64,
            estimated,
        });
    }
    Ok(StrategyReport {
        rows,
        holdout,
        total_accounts: total,
    })
}

/// Does this password's guess rank under the stage model fall within the
/// Markov budget spent so far?
fn markov_cracks(
    state: &mut KState,
    password: &str,
    holdout: bool,
    budget: &BigCount,
    opts: &PlanOptions,
) -> Result<bool> {
    let explicit = budget <= &BigCount::from(opts.enum_cap);
    if holdout {
        let residual = match state.model.residual_without(password) {
            Ok(m) => m,
            // The corpus fingerprints match, so in-practice this means the
            // password is residual-unreachable territory anyway; but the
            // membership check is count-based and conservative.
            Err(Error::NotInTrainingCorpus) => return Ok(false),
            Err(e) => return Err(e),
        };
        let ln_p = match residual.log_score(password) {
            LogProb::Finite(v) => v,
            LogProb::Unreachable => return Ok(false),
        };
        if explicit {
            let cap = budget.to_u128().expect("within enum_cap");
            Ok(CountingEngine::new(&residual)
                .size_ln_capped(ln_p, cap)
                .is_some())
        } else {
            let mut approx = ApproxEngine::new(&residual, opts.base)?;
            let mut rank = approx.size_ln(ln_p);
            if rank.is_zero() {
                rank = BigCount::from(1u32);
            }
            Ok(&rank <= budget)
        }
    } else {
        let ln_p = match state.model.log_score(password) {
            LogProb::Finite(v) => v,
            LogProb::Unreachable => return Ok(false),
        };
        if explicit {
            let cap = budget.to_u128().expect("within enum_cap");
            Ok(state.exact.size_ln_capped(ln_p, cap).is_some())
        } else {
            let mut rank = state.approx.size_ln(ln_p);
            if rank.is_zero() {
                rank = BigCount::from(1u32);
            }
            Ok(&rank <= budget)
        }
    }
}

/// One line of a plan file, before dictionary files are read.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanDirective {
    Username,
    Dictionary { label: String, path: String },
    Markov { k: usize, budget: ParsedBudget },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParsedBudget {
    Candidates(BigUint),
    Threshold(f64),
}

/// Plan file grammar, one directive per line:
///   username
///   dict <label> <path>
///   markov k=<k> budget=<int>
///   markov k=<k> threshold=<float>
/// Blank lines and # comments are skipped. Budgets take an optional
/// integer scientific form (7e16) since the interesting ones are large.
pub fn parse_plan(text: &str) -> Result<Vec<PlanDirective>> {
    let fail = |line: usize, message: &str| Error::PlanFormat {
        line,
        message: message.to_string(),
    };
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "username" {
            out.push(PlanDirective::Username);
            continue;
        }
        if let Some(rest) = line.strip_prefix("dict ") {
            let (label, path) = rest
                .split_once(' ')
                .ok_or_else(|| fail(lineno, "expected `dict <label> <path>`"))?;
            if label.is_empty() || path.is_empty() {
                return Err(fail(lineno, "expected `dict <label> <path>`"));
            }
            out.push(PlanDirective::Dictionary {
                label: label.to_string(),
                path: path.to_string(),
            });
            continue;
        }
        if let Some(rest) = line.strip_prefix("markov ") {
            let mut k = None;
            let mut budget = None;
            for field in rest.split_whitespace() {
                if let Some(v) = field.strip_prefix("k=") {
                    k = Some(
                        v.parse::<usize>()
                            .map_err(|_| fail(lineno, "bad k value"))?,
                    );
                } else if let Some(v) = field.strip_prefix("budget=") {
                    budget = Some(ParsedBudget::Candidates(parse_big_int(v).ok_or_else(
                        || fail(lineno, "budget must be a plain or scientific integer"),
                    )?));
                } else if let Some(v) = field.strip_prefix("threshold=") {
                    let t = v
                        .parse::<f64>()
                        .map_err(|_| fail(lineno, "bad threshold value"))?;
                    budget = Some(ParsedBudget::Threshold(t));
                } else {
                    return Err(fail(lineno, "unknown markov field"));
                }
            }
            let k = k.ok_or_else(|| fail(lineno, "markov needs k=<k>"))?;
            let budget =
                budget.ok_or_else(|| fail(lineno, "markov needs budget=<int> or threshold=<p>"))?;
            out.push(PlanDirective::Markov { k, budget });
            continue;
        }
        return Err(fail(lineno, "unrecognized directive"));
    }
    if out.is_empty() {
        return Err(Error::EmptyPlan);
    }
    Ok(out)
}

/// Integers as digits ("500000") or integer scientific form ("7e16").
fn parse_big_int(text: &str) -> Option<BigUint> {
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<u32>().ok()?),
        None => (text, 0),
    };
    if mantissa.is_empty() || !mantissa.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let base: BigUint = mantissa.parse().ok()?;
    Some(base * BigUint::from(10u32).pow(exp))
}
