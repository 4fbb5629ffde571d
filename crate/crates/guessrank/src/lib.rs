//! Password guessability analysis.
//!
//! Trains order-k character Markov models on password corpora, counts how
//! many strings an optimal probability-ordered guesser tries before any
//! given password (its guess rank, exactly or as a cheap lower bound),
//! enumerates those guesses, simulates dictionary attacks with mangling
//! rules, and evaluates multi-step attack plans that chain all of the
//! above. The `cli` module exposes every operation as a subcommand of one
//! binary with machine-readable TSV output.

pub mod cli;
pub mod corpus;
pub mod dictattack;
pub mod error;
pub mod escape;
pub mod markov;
pub mod spacesize;
pub mod strategy;

pub use error::{Error, Result};
pub use corpus::{Corpus, DedupPolicy, PairList};
pub use markov::{LogProb, MarkovModel};
pub use spacesize::{BigCount, Mode, Strength};
