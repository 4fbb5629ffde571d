//! One binary, nine subcommands, every library operation reachable.
//!
//! Output contract: machine format (the default) writes TSV data rows to
//! stdout, trailing `# key=value` comment lines carry scalars that are
//! not rows; diagnostics go to stderr. Exit codes: 0 success, 1 usage
//! error, 2 data error (unreadable file, malformed input, impossible
//! request). Output is byte-identical across runs for identical inputs.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{self, Corpus, DedupPolicy, PairList, DEFAULT_PATTERNS};
use crate::dictattack::{
    apply_mangling, dictionary_attack, Dictionary, MangleOptions, MangleRule, Weighting,
};
use crate::error::Error;
use crate::escape::{escape_str, unescape_syms};
use crate::markov::{LogProb, MarkovModel, DEFAULT_MAX_ORDER};
use crate::spacesize::{
    self, approx_size, brute_force_rank, brute_force_size, enumerate_candidates, exact_size,
    guess_curve, strength, threshold_sweep, Mode, SizeOracle, Strength,
};
use crate::strategy::{
    default_markov_stages, parse_plan, run_plan, MarkovBudget, ParsedBudget, PlanDirective,
    PlanOptions, PlanStep,
};

const VERSION_TEXT: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (model format ",
    "MKPW 1",
    ")"
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_command<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let mut text = e.render().to_string();
            if !text.ends_with('\n') {
                text.push('\n');
            }
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CommandResult {
                    exit_code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => CommandResult {
                    exit_code: 1,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match dispatch(cli) {
        Ok(output) => CommandResult {
            exit_code: 0,
            stdout: output.stdout,
            stderr: output.stderr,
        },
        Err(Failure::Usage(message)) => CommandResult {
            exit_code: 1,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        },
        Err(Failure::Data(message)) => CommandResult {
            exit_code: 2,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        },
    }
}

#[derive(Parser)]
#[command(
    name = "guessrank",
    version = VERSION_TEXT,
    about = "Password guessability: Markov models, guess ranks, dictionary attacks, attack plans",
    disable_help_subcommand = true
)]
struct Cli {
    /// Output style: tsv for machines, pretty for reading.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Tsv)]
    format: OutputFormat,
    /// Fixed seed for anything that samples; no current subcommand does,
    /// the flag is reserved so callers can pin it uniformly.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread bound; evaluation is serial today, results never
    /// depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Tsv,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus statistics: length histogram, character frequencies,
    /// structural pattern profile, username/password overlap.
    Stats(StatsArgs),
    /// Train a Markov model and write it to a model file.
    Train(TrainArgs),
    /// Score passwords, grams, or lengths under a trained model.
    Score(ScoreArgs),
    /// Search-space size at a threshold, or the guess rank of one password.
    Size(SizeArgs),
    /// Guessability curves over an evaluation corpus.
    Curve(CurveArgs),
    /// List every string at or above a probability threshold, best first.
    #[command(name = "enum")]
    Enumerate(EnumArgs),
    /// Simulate dictionary attacks against an evaluation corpus.
    Dict(DictArgs),
    /// Evaluate a multi-step attack plan.
    Plan(PlanArgs),
    /// Brute-force baseline sizes and ranks.
    Bruteforce(BruteforceArgs),
}

#[derive(Args)]
struct StatsArgs {
    /// Password corpus, one entry per line.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = StatsTable::Length)]
    table: StatsTable,
    /// Username/password pairs (two-column TSV); required for --table overlap.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Pattern for --table regex, repeatable; defaults to the built-in nine.
    #[arg(long = "pattern")]
    patterns: Vec<String>,
    /// Count each distinct password once instead of per account.
    #[arg(long)]
    unique: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsTable {
    Length,
    Chars,
    Regex,
    Overlap,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Model order: probability of each character conditions on the k-1
    /// previous ones.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
    #[arg(long)]
    unique: bool,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    /// Score one password (log10 probability, or `unreachable`).
    #[arg(long, allow_hyphen_values = true)]
    password: Option<String>,
    /// Score every line of a file, in file order.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Leave-one-occurrence-out scoring; the password must be in the
    /// training corpus.
    #[arg(long)]
    holdout: bool,
    /// Conditional probability of one escaped k-gram (`\B` = boundary).
    #[arg(long, allow_hyphen_values = true)]
    gram: Option<String>,
    /// Probability that a password has this length.
    #[arg(long)]
    length: Option<usize>,
}

#[derive(Args)]
struct SizeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Linear probability threshold, e.g. 1e-6.
    #[arg(long)]
    threshold: Option<f64>,
    /// Threshold as a log10, e.g. -6.
    #[arg(long, allow_hyphen_values = true)]
    log10_threshold: Option<f64>,
    /// Report the guess rank of this password instead of a threshold size.
    #[arg(long, allow_hyphen_values = true)]
    password: Option<String>,
    #[arg(long)]
    holdout: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Discretization base for --mode approx; closer to 1 is tighter.
    #[arg(long, default_value_t = 1.01)]
    base: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Approx,
}

#[derive(Args)]
struct CurveArgs {
    /// Training corpus.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    k: usize,
    /// Evaluation corpus; with --holdout it must equal the training one.
    #[arg(long)]
    eval: PathBuf,
    #[arg(long)]
    holdout: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1.01)]
    base: f64,
    #[arg(long, value_enum, default_value_t = CurveTable::Curve)]
    table: CurveTable,
    /// Sweep these probability thresholds instead of per-entry strengths.
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
    /// Sweep thresholds given as log10 values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    log10_thresholds: Vec<f64>,
    #[arg(long)]
    unique: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveTable {
    /// size, cumulative cracked fraction.
    Curve,
    /// strength, password length, one row per account.
    Lengths,
}

#[derive(Args)]
struct EnumArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    log10_threshold: Option<f64>,
    /// Refuse to enumerate more than this many candidates.
    #[arg(long, default_value_t = 1_000_000)]
    limit: usize,
}

#[derive(Args)]
struct DictArgs {
    /// Dictionary as label=path; repeatable. Two or more get an `all`
    /// union row.
    #[arg(long = "dict", required = true)]
    dicts: Vec<String>,
    #[arg(long)]
    eval: PathBuf,
    /// Comma-separated mangling rules applied to every dictionary:
    /// identity, append-digit, prepend-digit, capitalize-first,
    /// uppercase-all, append-two-digits, juxtapose-pairs.
    #[arg(long, value_delimiter = ',')]
    mangle: Vec<String>,
    #[arg(long, value_enum, default_value_t = WeightingArg::Accounts)]
    weighting: WeightingArg,
    /// Let juxtapose-pairs glue a word to itself.
    #[arg(long)]
    include_self_pairs: bool,
    /// Word-count ceiling for juxtapose-pairs.
    #[arg(long, default_value_t = 2000)]
    juxtapose_cap: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightingArg {
    /// Repeated passwords count once per account.
    Accounts,
    /// Each distinct password counts once.
    Unique,
}

#[derive(Args)]
struct PlanArgs {
    /// Plan file: `username`, `dict <label> <path>`,
    /// `markov k=<k> budget=<int>` or `markov k=<k> threshold=<p>`.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long)]
    eval: PathBuf,
    /// Username/password pairs; required for a `username` step.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Training corpus; required for markov steps.
    #[arg(long)]
    train: Option<PathBuf>,
    /// Append the published Markov cascade (k=5..1) to the plan.
    #[arg(long)]
    default_markov: bool,
    #[arg(long, default_value_t = 1.01)]
    base: f64,
    /// Largest cumulative Markov budget checked by explicit counting.
    #[arg(long, default_value_t = 100_000)]
    enum_cap: u64,
    /// Count every dictionary word even when an earlier step tried it.
    #[arg(long)]
    no_dedup: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    max_order: usize,
}

#[derive(Args)]
struct BruteforceArgs {
    /// Alphabet size for a size query.
    #[arg(long)]
    charset_size: Option<u64>,
    /// Longest length a size query covers (the empty string counts).
    #[arg(long)]
    max_len: Option<usize>,
    /// Explicit alphabet, in guessing order, for a rank query.
    #[arg(long)]
    charset: Option<String>,
    /// Password whose brute-force rank to report.
    #[arg(long, allow_hyphen_values = true)]
    password: Option<String>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Data(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Output {
    stdout: String,
    stderr: String,
}

impl Output {
    fn stdout(text: String) -> Output {
        Output {
            stdout: text,
            stderr: String::new(),
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<Output> {
    if cli.threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".to_string()));
    }
    let _ = cli.seed;
    apply_cache_cap_env()?;
    let format = cli.format;
    match cli.command {
        Command::Stats(args) => cmd_stats(args, format),
        Command::Train(args) => cmd_train(args),
        Command::Score(args) => cmd_score(args, format),
        Command::Size(args) => cmd_size(args),
        Command::Curve(args) => cmd_curve(args, format),
        Command::Enumerate(args) => cmd_enum(args, format),
        Command::Dict(args) => cmd_dict(args, format),
        Command::Plan(args) => cmd_plan(args, format),
        Command::Bruteforce(args) => cmd_bruteforce(args),
    }
}

/// GUESSRANK_CACHE_CAP bounds the approximate counter's memo table for
/// every engine this invocation builds, however deep in the call tree.
fn apply_cache_cap_env() -> CliResult<()> {
    match std::env::var("GUESSRANK_CACHE_CAP") {
        Ok(text) => {
            let cap: usize = text.trim().parse().map_err(|_| {
                Failure::Usage(format!(
                    "GUESSRANK_CACHE_CAP must be a nonnegative integer, got {text:?}"
                ))
            })?;
            spacesize::set_default_cache_cap(Some(cap));
        }
        Err(std::env::VarError::NotPresent) => spacesize::set_default_cache_cap(None),
        Err(e) => return Err(Failure::Usage(format!("GUESSRANK_CACHE_CAP: {e}"))),
    }
    Ok(())
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn load_corpus(path: &Path, unique: bool) -> CliResult<Corpus> {
    let policy = if unique {
        DedupPolicy::UniqueOnly
    } else {
        DedupPolicy::KeepMultiset
    };
    let bytes = read_file(path)?;
    Ok(Corpus::from_bytes(
        &bytes,
        &path.display().to_string(),
        policy,
    )?)
}

fn load_model(path: &Path) -> CliResult<MarkovModel> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Data(format!("{}: model file is not UTF-8", path.display())))?;
    Ok(MarkovModel::parse(&text)?)
}

fn load_pairs(path: &Path) -> CliResult<PairList> {
    let bytes = read_file(path)?;
    Ok(PairList::from_bytes(&bytes, &path.display().to_string())?)
}

fn render(
    header: &[&str],
    rows: &[Vec<String>],
    comments: &[String],
    format: OutputFormat,
) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Tsv => {
            for row in rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        OutputFormat::Pretty => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in rows {
                for (i, cell) in row.iter().enumerate() {
                    widths[i] = widths[i].max(cell.chars().count());
                }
            }
            let mut emit = |cells: &[String]| {
                let mut line = String::new();
                for (i, cell) in cells.iter().enumerate() {
                    if i > 0 {
                        line.push_str("  ");
                    }
                    line.push_str(cell);
                    if i + 1 < cells.len() {
                        for _ in cell.chars().count()..widths[i] {
                            line.push(' ');
                        }
                    }
                }
                out.push_str(&line);
                out.push('\n');
            };
            emit(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
            for row in rows {
                emit(row);
            }
        }
    }
    for comment in comments {
        out.push_str("# ");
        out.push_str(comment);
        out.push('\n');
    }
    out
}

fn pct(fraction: f64) -> String {
    format!("{:.2}", fraction * 100.0)
}

fn f64_str(v: f64) -> String {
    format!("{v}")
}

fn log_prob_str(p: LogProb) -> String {
    match p {
        LogProb::Finite(ln) => f64_str(ln / std::f64::consts::LN_10),
        LogProb::Unreachable => "unreachable".to_string(),
    }
}

fn strength_str(s: &Strength) -> String {
    match s {
        Strength::Finite(n) => n.to_string(),
        Strength::Unreachable => "unreachable".to_string(),
    }
}

/// Exactly one way of naming the threshold, converted to a natural log.
fn ln_threshold_arg(threshold: Option<f64>, log10: Option<f64>) -> CliResult<f64> {
    match (threshold, log10) {
        (Some(p), None) => {
            if !(p.is_finite() && p > 0.0) {
                return Err(Failure::Data(Error::InvalidThreshold.to_string()));
            }
            Ok(p.ln())
        }
        (None, Some(x)) => {
            if !x.is_finite() {
                return Err(Failure::Data(Error::InvalidThreshold.to_string()));
            }
            Ok(x * std::f64::consts::LN_10)
        }
        _ => Err(Failure::Usage(
            "give exactly one of --threshold and --log10-threshold".to_string(),
        )),
    }
}

fn mode_arg(mode: ModeArg, base: f64) -> Mode {
    match mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Approx => Mode::Approx { base },
    }
}

fn cmd_stats(args: StatsArgs, format: OutputFormat) -> CliResult<Output> {
    if args.table == StatsTable::Overlap {
        let path = args.pairs.ok_or_else(|| {
            Failure::Usage("--table overlap needs --pairs <file>".to_string())
        })?;
        let pairs = load_pairs(&path)?;
        let fraction = corpus::username_password_overlap(&pairs)?;
        let count = (fraction * pairs.pairs.len() as f64).round() as u64;
        let rows = vec![vec![
            "username_equals_password".to_string(),
            count.to_string(),
            pct(fraction),
        ]];
        return Ok(Output::stdout(render(
            &["name", "count", "percent"],
            &rows,
            &[],
            format,
        )));
    }

    let path = args
        .input
        .ok_or_else(|| Failure::Usage("stats needs --in <corpus>".to_string()))?;
    let corpus = load_corpus(&path, args.unique)?;
    match args.table {
        StatsTable::Length => {
            let hist = corpus.length_histogram()?;
            let rows: Vec<Vec<String>> = hist
                .counts
                .iter()
                .map(|(&len, &count)| {
                    vec![
                        len.to_string(),
                        count.to_string(),
                        pct(count as f64 / hist.total as f64),
                    ]
                })
                .collect();
            let comments = vec![
                format!("total={}", hist.total),
                format!("mean={}", f64_str(hist.mean_f64())),
            ];
            Ok(Output::stdout(render(
                &["length", "count", "percent"],
                &rows,
                &comments,
                format,
            )))
        }
        StatsTable::Chars => {
            let rows: Vec<Vec<String>> = corpus
                .char_distribution()?
                .into_iter()
                .map(|cf| {
                    vec![
                        escape_str(&cf.ch.to_string()),
                        cf.count.to_string(),
                        pct(cf.fraction),
                    ]
                })
                .collect();
            Ok(Output::stdout(render(
                &["char", "count", "percent"],
                &rows,
                &[],
                format,
            )))
        }
        StatsTable::Regex => {
            let patterns: Vec<&str> = if args.patterns.is_empty() {
                DEFAULT_PATTERNS.to_vec()
            } else {
                args.patterns.iter().map(|s| s.as_str()).collect()
            };
            let total = corpus.total_count();
            let rows: Vec<Vec<String>> = corpus
                .regex_profile(&patterns)?
                .into_iter()
                .map(|(pattern, fraction)| {
                    let count = (fraction * total as f64).round() as u64;
                    vec![pattern, count.to_string(), pct(fraction)]
                })
                .collect();
            Ok(Output::stdout(render(
                &["pattern", "count", "percent"],
                &rows,
                &[],
                format,
            )))
        }
        StatsTable::Overlap => unreachable!("handled above"),
    }
}

fn cmd_train(args: TrainArgs) -> CliResult<Output> {
    let corpus = load_corpus(&args.input, args.unique)?;
    let model = MarkovModel::train_with_max_order(&corpus, args.k, args.max_order)?;
    let text = model.to_text();
    std::fs::write(&args.out, &text)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.out.display())))?;
    Ok(Output {
        stdout: String::new(),
        stderr: format!(
            "wrote {} (k={}, strings={}, charset={})\n",
            args.out.display(),
            model.order(),
            model.total(),
            model.charset_size(),
        ),
    })
}

fn cmd_score(args: ScoreArgs, format: OutputFormat) -> CliResult<Output> {
    let model = load_model(&args.model)?;
    let selectors = [
        args.password.is_some(),
        args.input.is_some(),
        args.gram.is_some(),
        args.length.is_some(),
    ];
    if selectors.iter().filter(|&&s| s).count() != 1 {
        return Err(Failure::Usage(
            "give exactly one of --password, --in, --gram, --length".to_string(),
        ));
    }
    if args.holdout && (args.gram.is_some() || args.length.is_some()) {
        return Err(Failure::Usage(
            "--holdout applies only to --password and --in".to_string(),
        ));
    }

    if let Some(gram) = args.gram {
        let syms = unescape_syms(&gram)?;
        let value = model.cond_prob(&syms)?;
        return Ok(Output::stdout(format!("{}\n", f64_str(value))));
    }
    if let Some(length) = args.length {
        return Ok(Output::stdout(format!(
            "{}\n",
            f64_str(model.length_prob(length))
        )));
    }
    if let Some(password) = args.password {
        let score = if args.holdout {
            model.log_score_holdout(&password)?
        } else {
            model.log_score(&password)
        };
        return Ok(Output::stdout(format!("{}\n", log_prob_str(score))));
    }

    let path = args.input.expect("selector checked");
    let bytes = read_file(&path)?;
    let mut rows = Vec::new();
    for (idx, raw) in corpus::split_lines(&bytes).into_iter().enumerate() {
        let line = std::str::from_utf8(raw).map_err(|_| {
            Failure::Data(format!("{}: invalid UTF-8 on line {}", path.display(), idx + 1))
        })?;
        let score = if args.holdout {
            model.log_score_holdout(line).map_err(|e| {
                Failure::Data(format!("{}: line {}: {e}", path.display(), idx + 1))
            })?
        } else {
            model.log_score(line)
        };
        rows.push(vec![escape_str(line), log_prob_str(score)]);
    }
    Ok(Output::stdout(render(
        &["password", "log10_prob"],
        &rows,
        &[],
        format,
    )))
}

fn cmd_size(args: SizeArgs) -> CliResult<Output> {
    let model = load_model(&args.model)?;
    let mode = mode_arg(args.mode, args.base);

    if let Some(password) = args.password {
        if args.threshold.is_some() || args.log10_threshold.is_some() {
            return Err(Failure::Usage(
                "--password excludes --threshold/--log10-threshold".to_string(),
            ));
        }
        let s = strength(&model, &password, args.holdout, mode)?;
        return Ok(Output::stdout(format!("{}\n", strength_str(&s))));
    }
    if args.holdout {
        return Err(Failure::Usage(
            "--holdout applies only to --password".to_string(),
        ));
    }
    let size = match (args.threshold, args.log10_threshold) {
        (Some(p), None) => match mode {
            Mode::Exact => exact_size(&model, p)?,
            Mode::Approx { base } => approx_size(&model, p, base)?,
        },
        _ => {
            let ln_t = ln_threshold_arg(args.threshold, args.log10_threshold)?;
            SizeOracle::new(&model, mode)?.size_at_ln(ln_t)
        }
    };
    Ok(Output::stdout(format!("{size}\n")))
}

fn cmd_curve(args: CurveArgs, format: OutputFormat) -> CliResult<Output> {
    let train = load_corpus(&args.train, args.unique)?;
    let eval = load_corpus(&args.eval, args.unique)?;
    let mode = mode_arg(args.mode, args.base);

    let sweeping = !(args.thresholds.is_empty() && args.log10_thresholds.is_empty());
    if sweeping {
        if args.table == CurveTable::Lengths {
            return Err(Failure::Usage(
                "--table lengths reports per-entry strengths; drop the threshold list".to_string(),
            ));
        }
        if !args.thresholds.is_empty() && !args.log10_thresholds.is_empty() {
            return Err(Failure::Usage(
                "give only one of --thresholds and --log10-thresholds".to_string(),
            ));
        }
        let ln_thresholds: Vec<f64> = if args.thresholds.is_empty() {
            for &x in &args.log10_thresholds {
                if !x.is_finite() {
                    return Err(Failure::Data(Error::InvalidThreshold.to_string()));
                }
            }
            args.log10_thresholds
                .iter()
                .map(|&x| x * std::f64::consts::LN_10)
                .collect()
        } else {
            for &p in &args.thresholds {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Failure::Data(Error::InvalidThreshold.to_string()));
                }
            }
            args.thresholds.iter().map(|&p| p.ln()).collect()
        };
        let curve = threshold_sweep(&train, args.k, &eval, mode, args.holdout, &ln_thresholds)?;
        let rows: Vec<Vec<String>> = curve
            .points
            .iter()
            .map(|p| vec![p.size.to_string(), f64_str(p.fraction)])
            .collect();
        let comments = vec![format!("unreachable={}", f64_str(curve.unguessable))];
        return Ok(Output::stdout(render(
            &["size", "fraction"],
            &rows,
            &comments,
            format,
        )));
    }

    let curve = guess_curve(&train, args.k, &eval, mode, args.holdout)?;
    match args.table {
        CurveTable::Curve => {
            let rows: Vec<Vec<String>> = curve
                .points
                .iter()
                .map(|(size, fraction)| vec![size.to_string(), f64_str(*fraction)])
                .collect();
            let comments = vec![format!("unreachable={}", f64_str(curve.unguessable))];
            Ok(Output::stdout(render(
                &["size", "fraction"],
                &rows,
                &comments,
                format,
            )))
        }
        CurveTable::Lengths => {
            let mut rows = Vec::new();
            for entry in &curve.per_entry {
                let row = vec![strength_str(&entry.strength), entry.len.to_string()];
                for _ in 0..entry.mult {
                    rows.push(row.clone());
                }
            }
            Ok(Output::stdout(render(
                &["strength", "length"],
                &rows,
                &[],
                format,
            )))
        }
    }
}

fn cmd_enum(args: EnumArgs, format: OutputFormat) -> CliResult<Output> {
    let model = load_model(&args.model)?;
    let threshold = match (args.threshold, args.log10_threshold) {
        (Some(p), None) => p,
        (None, Some(x)) if x.is_finite() => 10f64.powf(x),
        (None, Some(_)) => return Err(Failure::Data(Error::InvalidThreshold.to_string())),
        _ => {
            return Err(Failure::Usage(
                "give exactly one of --threshold and --log10-threshold".to_string(),
            ))
        }
    };
    let candidates = enumerate_candidates(&model, threshold, args.limit)?;
    let rows: Vec<Vec<String>> = candidates
        .into_iter()
        .map(|(s, p)| vec![escape_str(&s), f64_str(p)])
        .collect();
    Ok(Output::stdout(render(
        &["candidate", "probability"],
        &rows,
        &[],
        format,
    )))
}

fn cmd_dict(args: DictArgs, format: OutputFormat) -> CliResult<Output> {
    let mut named: Vec<(String, Dictionary)> = Vec::new();
    for spec in &args.dicts {
        let (label, path) = spec.split_once('=').ok_or_else(|| {
            Failure::Usage(format!("--dict wants label=path, got {spec:?}"))
        })?;
        if label.is_empty() || path.is_empty() {
            return Err(Failure::Usage(format!(
                "--dict wants label=path, got {spec:?}"
            )));
        }
        if named.iter().any(|(l, _)| l == label) {
            return Err(Failure::Usage(format!("duplicate dictionary label {label:?}")));
        }
        let bytes = read_file(Path::new(path))?;
        let dict = Dictionary::from_sources(&[(label.to_string(), bytes)])?;
        named.push((label.to_string(), dict));
    }

    let rules: Vec<MangleRule> = args
        .mangle
        .iter()
        .map(|name| {
            MangleRule::parse(name)
                .ok_or_else(|| Failure::Usage(format!("unknown mangling rule {name:?}")))
        })
        .collect::<CliResult<_>>()?;
    if !rules.is_empty() {
        let opts = MangleOptions {
            include_self_pairs: args.include_self_pairs,
            juxtapose_cap: args.juxtapose_cap,
        };
        for (_, dict) in &mut named {
            *dict = apply_mangling(dict, &rules, &opts)?;
        }
    }

    let eval = load_corpus(&args.eval, false)?;
    let weighting = match args.weighting {
        WeightingArg::Accounts => Weighting::Accounts,
        WeightingArg::Unique => Weighting::UniquePasswords,
    };
    let mut rows = Vec::new();
    let mut emit = |label: &str, dict: &Dictionary| -> CliResult<()> {
        let report = dictionary_attack(dict, label, &eval, weighting)?;
        rows.push(vec![
            escape_str(label),
            report.size.to_string(),
            pct(report.found_fraction_f64()),
            format!("{:.2e}", report.guess_probability_f64()),
        ]);
        Ok(())
    };
    for (label, dict) in &named {
        emit(label, dict)?;
    }
    if named.len() >= 2 {
        let parts: Vec<&Dictionary> = named.iter().map(|(_, d)| d).collect();
        let union = Dictionary::union(&parts);
        emit("all", &union)?;
    }
    Ok(Output::stdout(render(
        &["label", "size", "found%", "guess_prob"],
        &rows,
        &[],
        format,
    )))
}

fn cmd_plan(args: PlanArgs, format: OutputFormat) -> CliResult<Output> {
    let mut steps: Vec<PlanStep> = Vec::new();
    if let Some(plan_path) = &args.plan {
        let bytes = read_file(plan_path)?;
        let text = String::from_utf8(bytes).map_err(|_| {
            Failure::Data(format!("{}: plan file is not UTF-8", plan_path.display()))
        })?;
        for directive in parse_plan(&text)? {
            match directive {
                PlanDirective::Username => steps.push(PlanStep::Username),
                PlanDirective::Dictionary { label, path } => {
                    let bytes = read_file(Path::new(&path))?;
                    let dict = Dictionary::from_sources(&[(label.clone(), bytes)])?;
                    steps.push(PlanStep::Dictionary { label, dict });
                }
                PlanDirective::Markov { k, budget } => {
                    let budget = match budget {
                        ParsedBudget::Candidates(n) => MarkovBudget::Candidates(n),
                        ParsedBudget::Threshold(t) => MarkovBudget::Threshold(t),
                    };
                    steps.push(PlanStep::Markov { k, budget });
                }
            }
        }
    }
    if args.default_markov {
        steps.extend(default_markov_stages());
    }
    if steps.is_empty() {
        return Err(Failure::Usage(
            "give --plan <file>, --default-markov, or both".to_string(),
        ));
    }

    let has_markov = steps.iter().any(|s| matches!(s, PlanStep::Markov { .. }));
    let eval = load_corpus(&args.eval, false)?;
    let pairs = match &args.pairs {
        Some(path) => Some(load_pairs(path)?),
        None => None,
    };
    let train = match &args.train {
        Some(path) => load_corpus(path, false)?,
        None if has_markov => {
            return Err(Failure::Usage(
                "--train is required when the plan has markov steps".to_string(),
            ))
        }
        None => Corpus::from_lines(std::iter::empty::<String>(), DedupPolicy::KeepMultiset),
    };
    let opts = PlanOptions {
        dedup: !args.no_dedup,
        enum_cap: args.enum_cap,
        base: args.base,
        max_order: args.max_order,
        cache_cap: None,
    };
    let report = run_plan(&steps, &eval, pairs.as_ref(), &train, &opts)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|row| {
            let attempts = if row.estimated {
                format!("~{}", row.attempts)
            } else {
                row.attempts.to_string()
            };
            vec![escape_str(&row.label), attempts, pct(row.cracked_fraction)]
        })
        .collect();
    let comments = vec![
        format!("accounts={}", report.total_accounts),
        format!("holdout={}", report.holdout),
    ];
    Ok(Output::stdout(render(
        &["step", "attempts", "cracked%"],
        &rows,
        &comments,
        format,
    )))
}

fn cmd_bruteforce(args: BruteforceArgs) -> CliResult<Output> {
    match (args.charset_size, args.max_len, &args.charset, &args.password) {
        (Some(n), Some(max_len), None, None) => {
            Ok(Output::stdout(format!("{}\n", brute_force_size(n, max_len))))
        }
        (None, None, Some(charset), Some(password)) => {
            let chars: Vec<char> = charset.chars().collect();
            let mut seen = std::collections::BTreeSet::new();
            for &c in &chars {
                if !seen.insert(c) {
                    return Err(Failure::Usage(format!(
                        "--charset repeats {:?}",
                        c.to_string()
                    )));
                }
            }
            Ok(Output::stdout(format!(
                "{}\n",
                brute_force_rank(&chars, password)?
            )))
        }
        _ => Err(Failure::Usage(
            "give --charset-size with --max-len, or --charset with --password".to_string(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::MODEL_FORMAT;
    use std::io::Write as _;

    fn run(args: &[&str]) -> CommandResult {
        run_command(args.iter().copied())
    }

    fn write_temp(dir: &tempfile::TempDir, name: &str, content: &str) -> String {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path.display().to_string()
    }

    #[test]
    fn version_names_the_model_format() {
        let result = run(&["guessrank", "--version"]);
        assert_eq!(result.exit_code, 0);
        assert!(result.stdout.contains(MODEL_FORMAT));
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let result = run(&["guessrank", "conquer"]);
        assert_eq!(result.exit_code, 1);
        assert!(result.stdout.is_empty());
        assert!(!result.stderr.is_empty());
    }

    #[test]
    fn unreadable_file_is_data_error() {
        let result = run(&["guessrank", "stats", "--in", "/no/such/file"]);
        assert_eq!(result.exit_code, 2);
        assert!(result.stderr.starts_with("error: "));
    }

    #[test]
    fn stats_length_table_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\nabc\n");
        let result = run(&["guessrank", "stats", "--in", &corpus, "--table", "length"]);
        assert_eq!(result.exit_code, 0, "{}", result.stderr);
        assert_eq!(
            result.stdout,
            "2\t2\t66.67\n3\t1\t33.33\n# total=3\n# mean=2.3333333333333335\n"
        );
    }

    #[test]
    fn stats_runs_are_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "b\na\na\n");
        let first = run(&["guessrank", "stats", "--in", &corpus, "--table", "chars"]);
        let second = run(&["guessrank", "stats", "--in", &corpus, "--table", "chars"]);
        assert_eq!(first, second);
        assert_eq!(first.stdout, "a\t2\t66.67\nb\t1\t33.33\n");
    }

    #[test]
    fn train_score_size_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\n");
        let model = dir.path().join("m.mkpw").display().to_string();
        let trained = run(&[
            "guessrank", "train", "--in", &corpus, "--k", "1", "--out", &model,
        ]);
        assert_eq!(trained.exit_code, 0, "{}", trained.stderr);
        assert!(trained.stdout.is_empty());

        // log10 P("aa") = log10(0.5625)
        let scored = run(&["guessrank", "score", "--model", &model, "--password", "aa"]);
        assert_eq!(scored.exit_code, 0, "{}", scored.stderr);
        let value: f64 = scored.stdout.trim().parse().unwrap();
        assert!((value - 0.5625f64.log10()).abs() < 1e-12);

        let sized = run(&[
            "guessrank", "size", "--model", &model, "--threshold", "0.15",
        ]);
        assert_eq!(sized.stdout, "3\n");

        let ranked = run(&[
            "guessrank", "size", "--model", &model, "--password", "aa", "--holdout",
        ]);
        assert_eq!(ranked.stdout, "4\n");
    }

    #[test]
    fn score_unreachable_keyword() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\n");
        let model = dir.path().join("m.mkpw").display().to_string();
        run(&["guessrank", "train", "--in", &corpus, "--k", "1", "--out", &model]);
        let result = run(&["guessrank", "score", "--model", &model, "--password", "zz"]);
        assert_eq!(result.stdout, "unreachable\n");
    }

    #[test]
    fn enum_lists_best_first() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\n");
        let model = dir.path().join("m.mkpw").display().to_string();
        run(&["guessrank", "train", "--in", &corpus, "--k", "1", "--out", &model]);
        let result = run(&[
            "guessrank", "enum", "--model", &model, "--threshold", "0.15",
        ]);
        assert_eq!(result.exit_code, 0);
        let lines: Vec<&str> = result.stdout.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("aa\t"));
        assert!(lines[1].starts_with("ab\t") || lines[1].starts_with("ba\t"));
    }

    #[test]
    fn enum_truncation_is_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\n");
        let model = dir.path().join("m.mkpw").display().to_string();
        run(&["guessrank", "train", "--in", &corpus, "--k", "1", "--out", &model]);
        let result = run(&[
            "guessrank", "enum", "--model", &model, "--threshold", "0.15", "--limit", "2",
        ]);
        assert_eq!(result.exit_code, 2);
        assert!(result.stdout.is_empty());
    }

    #[test]
    fn curve_emits_unreachable_comment() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\n");
        let result = run(&[
            "guessrank", "curve", "--train", &corpus, "--k", "1", "--eval", &corpus,
            "--holdout",
        ]);
        assert_eq!(result.exit_code, 0, "{}", result.stderr);
        assert_eq!(result.stdout, "4\t0.5\n# unreachable=0.5\n");
    }

    #[test]
    fn dict_reports_each_and_union() {
        let dir = tempfile::tempdir().unwrap();
        let eval = write_temp(&dir, "eval.txt", "a\nc\n");
        let d1 = write_temp(&dir, "d1.txt", "a\nb\n");
        let d2 = write_temp(&dir, "d2.txt", "b\nc\n");
        let result = run(&[
            "guessrank",
            "dict",
            "--dict",
            &format!("one={d1}"),
            "--dict",
            &format!("two={d2}"),
            "--eval",
            &eval,
        ]);
        assert_eq!(result.exit_code, 0, "{}", result.stderr);
        let lines: Vec<&str> = result.stdout.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "one\t2\t50.00\t2.50e-1");
        assert_eq!(lines[1], "two\t2\t50.00\t2.50e-1");
        assert_eq!(lines[2], "all\t3\t100.00\t3.33e-1");
    }

    #[test]
    fn plan_rows_mirror_the_dedup_trace() {
        let dir = tempfile::tempdir().unwrap();
        let eval = write_temp(&dir, "eval.txt", "a\nc\n");
        let d1 = write_temp(&dir, "d1.txt", "a\nb\n");
        let d2 = write_temp(&dir, "d2.txt", "b\nc\n");
        let plan = write_temp(
            &dir,
            "plan.txt",
            &format!("dict one {d1}\ndict two {d2}\n"),
        );
        let result = run(&[
            "guessrank", "plan", "--plan", &plan, "--eval", &eval,
        ]);
        assert_eq!(result.exit_code, 0, "{}", result.stderr);
        assert_eq!(
            result.stdout,
            "one\t2\t50.00\ntwo\t3\t100.00\n# accounts=2\n# holdout=false\n"
        );
    }

    #[test]
    fn bruteforce_size_and_rank() {
        let size = run(&["guessrank", "bruteforce", "--charset-size", "2", "--max-len", "2"]);
        assert_eq!(size.stdout, "7\n");
        let rank = run(&["guessrank", "bruteforce", "--charset", "ab", "--password", "ba"]);
        assert_eq!(rank.stdout, "6\n");
    }

    #[test]
    fn pretty_format_aligns_columns() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = write_temp(&dir, "pw.txt", "aa\nab\nabc\n");
        let result = run(&[
            "guessrank", "stats", "--in", &corpus, "--format", "pretty",
        ]);
        assert_eq!(result.exit_code, 0);
        assert!(result.stdout.starts_with("length  count  percent\n"));
        assert!(result.stdout.contains("\n2       2      66.67\n"));
    }

    #[test]
    fn threads_zero_is_usage_error() {
        let result = run(&["guessrank", "stats", "--in", "x", "--threads", "0"]);
        assert_eq!(result.exit_code, 1);
    }
}
