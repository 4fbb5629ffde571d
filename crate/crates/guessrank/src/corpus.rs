//! Password corpora and their descriptive statistics.
//!
//! A corpus is a multiset of UTF-8 strings. Entries are stored as
//! (string, multiplicity) pairs; the character set is derived from the
//! entries, never assumed. The empty string is a legal entry, so an empty
//! line in an input file is an empty password, not a separator.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;

use num::rational::BigRational;
use num::{BigInt, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// How to treat repeated lines when loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DedupPolicy {
    /// Keep full multiplicities.
    KeepMultiset,
    /// Force every multiplicity to 1.
    UniqueOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    /// Unique entries with multiplicity >= 1, keyed in code-point order.
    entries: BTreeMap<String, u64>,
    /// Distinct characters observed across all entries, ascending code point.
    charset: BTreeSet<char>,
    /// Sum of multiplicities.
    total: u64,
}

/// Splits raw bytes into password lines: LF separators, one trailing CR per
/// line stripped, a final newline does not open an extra empty entry.
pub(crate) fn split_lines(bytes: &[u8]) -> Vec<&[u8]> {
    let mut lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        lines.pop();
    }
    lines
        .into_iter()
        .map(|line| line.strip_suffix(b"\r").unwrap_or(line))
        .collect()
}

impl Corpus {
    pub fn from_lines<I, S>(lines: I, policy: DedupPolicy) -> Corpus
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut entries: BTreeMap<String, u64> = BTreeMap::new();
        for line in lines {
            let line = line.into();
            let slot = entries.entry(line).or_insert(0);
            *slot = match policy {
                DedupPolicy::KeepMultiset => *slot + 1,
                DedupPolicy::UniqueOnly => 1,
            };
        }
        let mut charset = BTreeSet::new();
        let mut total = 0u64;
        for (entry, mult) in &entries {
            charset.extend(entry.chars());
            total += mult;
        }
        Corpus {
            entries,
            charset,
            total,
        }
    }

    pub fn load(reader: &mut dyn Read, source_name: &str, policy: DedupPolicy) -> Result<Corpus> {
        let mut bytes = Vec::new();
        reader.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, source_name, policy)
    }

    pub fn from_bytes(bytes: &[u8], source_name: &str, policy: DedupPolicy) -> Result<Corpus> {
        let mut lines = Vec::new();
        for (idx, raw) in split_lines(bytes).into_iter().enumerate() {
            let line = std::str::from_utf8(raw).map_err(|_| Error::InvalidUtf8 {
                source_name: source_name.to_string(),
                line: idx + 1,
            })?;
            lines.push(line.to_string());
        }
        Ok(Self::from_lines(lines, policy))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(s, &m)| (s.as_str(), m))
    }

    pub fn multiplicity(&self, entry: &str) -> u64 {
        self.entries.get(entry).copied().unwrap_or(0)
    }

    pub fn contains(&self, entry: &str) -> bool {
        self.entries.contains_key(entry)
    }

    pub fn unique_count(&self) -> usize {
        self.entries.len()
    }

    pub fn total_count(&self) -> u64 {
        self.total
    }

    pub fn charset(&self) -> impl Iterator<Item = char> + '_ {
        self.charset.iter().copied()
    }

    pub fn charset_size(&self) -> usize {
        self.charset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Stable digest of the entry multiset; stored in models to record what
    /// they were trained from.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for (entry, mult) in &self.entries {
            hasher.update(entry.as_bytes());
            hasher.update([0xFF]);
            hasher.update(mult.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn length_histogram(&self) -> Result<LengthHistogram> {
        if self.total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        let mut weighted_sum = BigInt::zero();
        for (entry, &mult) in &self.entries {
            let len = entry.chars().count();
            *counts.entry(len).or_insert(0) += mult;
            weighted_sum += BigInt::from(len as u64) * BigInt::from(mult);
        }
        let mean = BigRational::new(weighted_sum, BigInt::from(self.total));
        Ok(LengthHistogram {
            counts,
            total: self.total,
            mean,
        })
    }

    pub fn char_distribution(&self) -> Result<Vec<CharFrequency>> {
        let mut counts: BTreeMap<char, u64> = BTreeMap::new();
        let mut total_chars = 0u64;
        for (entry, &mult) in &self.entries {
            for c in entry.chars() {
                *counts.entry(c).or_insert(0) += mult;
                total_chars += mult;
            }
        }
        if total_chars == 0 {
            return Err(Error::NoCharacters);
        }
        let mut rows: Vec<CharFrequency> = counts
            .into_iter()
            .map(|(ch, count)| CharFrequency {
                ch,
                count,
                fraction: count as f64 / total_chars as f64,
            })
            .collect();
        rows.sort_by(|a, b| b.count.cmp(&a.count).then(a.ch.cmp(&b.ch)));
        Ok(rows)
    }

    /// Fraction of entries (multiplicity weighted) whose whole text matches
    /// each pattern. Patterns are anchored; `[a-z]+` means the entire entry
    /// is lowercase letters.
    pub fn regex_profile(&self, patterns: &[&str]) -> Result<Vec<(String, f64)>> {
        if self.total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut out = Vec::with_capacity(patterns.len());
        for &pattern in patterns {
            let anchored = format!("^(?:{pattern})$");
            let re = regex::Regex::new(&anchored).map_err(|e| Error::InvalidPattern {
                pattern: pattern.to_string(),
                message: e.to_string(),
            })?;
            let mut matched = 0u64;
            for (entry, &mult) in &self.entries {
                if re.is_match(entry) {
                    matched += mult;
                }
            }
            out.push((pattern.to_string(), matched as f64 / self.total as f64));
        }
        Ok(out)
    }
}

/// The nine structural patterns reported by `stats --table regex` when no
/// explicit pattern list is given.
pub const DEFAULT_PATTERNS: [&str; 9] = [
    "[a-z]+",
    "[A-Z]+",
    "[A-Za-z]+",
    "[0-9]+",
    "[a-zA-Z0-9]+",
    "[a-z]+[0-9]+",
    "[a-zA-Z]+[0-9]+",
    "[0-9]+[a-zA-Z]+",
    "[0-9]+[a-z]+",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthHistogram {
    pub counts: BTreeMap<usize, u64>,
    pub total: u64,
    /// Exact mean length, Σ len·mult / total.
    pub mean: BigRational,
}

impl LengthHistogram {
    pub fn fraction(&self, len: usize) -> f64 {
        self.counts.get(&len).copied().unwrap_or(0) as f64 / self.total as f64
    }

    pub fn mean_f64(&self) -> f64 {
        self.mean.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharFrequency {
    pub ch: char,
    pub count: u64,
    pub fraction: f64,
}

/// Username/password pairs for the same-string overlap statistic and the
/// username attack step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairList {
    pub pairs: Vec<(String, String)>,
}

impl PairList {
    /// Parses two-column TSV: username, tab, password. The password keeps
    /// any further tabs verbatim.
    pub fn from_bytes(bytes: &[u8], source_name: &str) -> Result<PairList> {
        let mut pairs = Vec::new();
        for (idx, raw) in split_lines(bytes).into_iter().enumerate() {
            let line = std::str::from_utf8(raw).map_err(|_| Error::InvalidUtf8 {
                source_name: source_name.to_string(),
                line: idx + 1,
            })?;
            let (user, pass) = line
                .split_once('\t')
                .ok_or(Error::MalformedPair { line: idx + 1 })?;
            pairs.push((user.to_string(), pass.to_string()));
        }
        Ok(PairList { pairs })
    }

    pub fn passwords(&self, policy: DedupPolicy) -> Corpus {
        Corpus::from_lines(self.pairs.iter().map(|(_, p)| p.clone()), policy)
    }

    pub fn usernames(&self, policy: DedupPolicy) -> Corpus {
        Corpus::from_lines(self.pairs.iter().map(|(u, _)| u.clone()), policy)
    }
}

/// Fraction of pairs whose username and password are the same string.
pub fn username_password_overlap(pairs: &PairList) -> Result<f64> {
    if pairs.pairs.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let same = pairs.pairs.iter().filter(|(u, p)| u == p).count();
    Ok(same as f64 / pairs.pairs.len() as f64)
}

/// Expands a corpus back to one line per account, sorted; used by tests to
/// check that loading loses nothing.
pub fn expanded_lines(c: &Corpus) -> Vec<String> {
    let mut out = Vec::with_capacity(c.total_count() as usize);
    for (entry, mult) in c.entries() {
        for _ in 0..mult {
            out.push(entry.to_string());
        }
    }
    out
}

/// Distinct characters across several corpora, ascending code point.
pub fn merged_charset(corpora: &[&Corpus]) -> Vec<char> {
    let mut set = BTreeSet::new();
    for c in corpora {
        set.extend(c.charset());
    }
    set.into_iter().collect()
}

/// First-occurrence set membership helper shared by dictionary loading.
pub fn push_unique(words: &mut Vec<String>, seen: &mut HashSet<String>, word: String) {
    if seen.insert(word.clone()) {
        words.push(word);
    }
}
