//! Shared scaffolding for the integration suites: an exhaustive oracle
//! that scores every producible string, seeded random generators for
//! corpora and plans, and a structured synthetic wordlist.
#![allow(dead_code)]

use guessrank::corpus::{Corpus, DedupPolicy};
use guessrank::dictattack::Dictionary;
use guessrank::markov::{LogProb, MarkovModel};
use guessrank::spacesize::BigCount;
use guessrank::strategy::{MarkovBudget, PlanStep};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus_of(lines: &[&str]) -> Corpus {
    Corpus::from_lines(lines.iter().copied(), DedupPolicy::KeepMultiset)
}

/// Random corpus: `entries` strings of length 0..=max_len over `alphabet`.
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    entries: usize,
    max_len: usize,
    alphabet: &[char],
) -> Corpus {
    let lines: Vec<String> = (0..entries)
        .map(|_| {
            let len = rng.random_range(0..=max_len);
            (0..len)
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect()
        })
        .collect();
    Corpus::from_lines(lines, DedupPolicy::KeepMultiset)
}

/// Every string over the model's charset whose length the model observed,
/// with its finite log score. Exhaustive: the ground truth that counting
/// and enumeration must reproduce.
pub fn oracle_entries(model: &MarkovModel) -> Vec<(String, f64)> {
    let charset: Vec<char> = model.charset().collect();
    let mut out = Vec::new();
    for &len in model.length_counts().keys() {
        let mut level: Vec<String> = vec![String::new()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(level.len() * charset.len());
            for prefix in &level {
                for &c in &charset {
                    let mut s = prefix.clone();
                    s.push(c);
                    next.push(s);
                }
            }
            level = next;
        }
        for s in level {
            if let LogProb::Finite(ln) = model.log_score(&s) {
                out.push((s, ln));
            }
        }
    }
    out
}

/// How many oracle strings score at or above the threshold. The oracle
/// scores come from log_score, the same arithmetic the counters replay,
/// so the comparison is exact even at a string's own score.
pub fn oracle_count(entries: &[(String, f64)], ln_t: f64) -> BigCount {
    BigCount::from(entries.iter().filter(|(_, ln)| *ln >= ln_t).count())
}

/// Deterministic pronounceable wordlist: 2-4 consonant-vowel syllables,
/// then 0-3 digits. Duplicates happen, like in real leaks.
pub fn synthetic_wordlist(n: usize, seed: u64) -> Vec<String> {
    let mut rng = seeded(seed);
    let consonants: Vec<char> = "bcdfgklmnprst".chars().collect();
    let vowels: Vec<char> = "aeiou".chars().collect();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut word = String::new();
        for _ in 0..rng.random_range(2..=4usize) {
            word.push(consonants[rng.random_range(0..consonants.len())]);
            word.push(vowels[rng.random_range(0..vowels.len())]);
        }
        for _ in 0..rng.random_range(0..=3usize) {
            word.push(char::from(b'0' + rng.random_range(0..10u8)));
        }
        out.push(word);
    }
    out
}

/// One sizing check: a corpus plus a model order. Suites that compare
/// counting engines against the oracle and against each other build
/// from the same seed so their cases line up.
pub struct SizingCase {
    pub corpus: Corpus,
    pub k: usize,
    pub case_seed: u64,
}

/// `corpora` random corpora (alphabet size rotating through 2/3/4,
/// 2..=8 entries, lengths 0..=5), each paired with k = 1..=3.
pub fn sizing_cases(corpora: usize, seed: u64) -> Vec<SizingCase> {
    let alphabets: [&[char]; 3] = [&['a', 'b'], &['a', 'b', 'c'], &['a', 'b', 'c', 'd']];
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(corpora * 3);
    for i in 0..corpora {
        let entries = rng.random_range(2..=8usize);
        let corpus = random_corpus(&mut rng, entries, 5, alphabets[i % 3]);
        for k in 1..=3usize {
            let mix = (i as u64 * 3 + k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            out.push(SizingCase {
                corpus: corpus.clone(),
                k,
                case_seed: seed ^ mix,
            });
        }
    }
    out
}

/// Twenty thresholds for one case: ten anchored exactly at observed
/// scores (the tie-inclusive boundary the counters must honor) and ten
/// drawn uniformly from just below the weakest score to just above the
/// strongest.
pub fn case_thresholds(entries: &[(String, f64)], case_seed: u64) -> (Vec<f64>, Vec<f64>) {
    let anchored: Vec<f64> = (0..10)
        .map(|i| entries[(i * 7919) % entries.len()].1)
        .collect();
    let lo = entries.iter().map(|e| e.1).fold(f64::INFINITY, f64::min) - 1.0;
    let hi = entries.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max) + 0.5;
    let mut rng = seeded(case_seed);
    let random = (0..10).map(|_| rng.random_range(lo..hi)).collect();
    (anchored, random)
}

/// Random word for dictionaries and corpora in plan tests.
fn random_word(rng: &mut ChaCha8Rng, alphabet: &[char], max_len: usize) -> String {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
        .collect()
}

/// Random plan over a small alphabet: dictionary steps and modest Markov
/// stages, in random order.
pub fn random_plan(rng: &mut ChaCha8Rng, alphabet: &[char]) -> Vec<PlanStep> {
    let steps = rng.random_range(1..=6usize);
    let mut plan = Vec::with_capacity(steps);
    for idx in 0..steps {
        if rng.random_range(0..3u8) == 0 {
            plan.push(PlanStep::Markov {
                k: rng.random_range(1..=2usize),
                budget: MarkovBudget::Candidates(BigCount::from(rng.random_range(1..=50u64))),
            });
        } else {
            let words: Vec<String> = (0..rng.random_range(1..=6usize))
                .map(|_| random_word(rng, alphabet, 3))
                .collect();
            plan.push(PlanStep::Dictionary {
                label: format!("d{idx}"),
                dict: Dictionary::from_words(&format!("d{idx}"), words),
            });
        }
    }
    plan
}
