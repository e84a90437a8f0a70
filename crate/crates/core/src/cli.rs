//! The `parikh` command line.
//!
//! Exit codes: 0 success, 1 a negative answer (`member` false, `verify`
//! mismatch), 2 parse or validation error, 3 budget exceeded.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::enumeration::{build_catalog, DEFAULT_MAX_TREES};
use crate::grammar::{oracle_parikh_vectors, parse_grammar, reduce_grammar, Grammar, ParikhVector};
use crate::pipeline::{compute_image, Budgets, DEFAULT_MAX_SUPPORTS};
use crate::semilinear::SemilinearSet;
use crate::BudgetExceeded;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Cap on vectors returned by bounded enumeration during `verify`.
const ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
    Sexpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Image,
    Member,
    Verify,
    Trees,
}

/// A fully validated invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub command: Command,
    pub grammar_path: PathBuf,
    pub format: Format,
    pub vector: Option<Vec<u64>>,
    pub max_len: Option<usize>,
    pub max_trees: usize,
    pub max_supports: usize,
}

#[derive(Debug, Parser)]
#[command(
    name = "parikh",
    version,
    about = "Semilinear Parikh images of context-free grammars"
)]
pub struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    /// Maximum number of minimal trees in the catalog.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_TREES,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    max_trees: usize,
    /// Maximum number of well-formed supports.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SUPPORTS,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    max_supports: usize,
}

#[derive(Debug, Args)]
struct FormatArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with_all = ["format", "text", "dot", "sexpr"])]
    json: bool,
    /// Shorthand for `--format text`.
    #[arg(long, conflicts_with_all = ["format", "dot", "sexpr"])]
    text: bool,
    /// Shorthand for `--format dot`.
    #[arg(long, conflicts_with_all = ["format", "sexpr"])]
    dot: bool,
    /// Shorthand for `--format sexpr`.
    #[arg(long, conflicts_with = "format")]
    sexpr: bool,
}

impl FormatArgs {
    fn resolve(&self, default: Format) -> Format {
        if let Some(f) = self.format {
            return f;
        }
        match (self.json, self.text, self.dot, self.sexpr) {
            (true, ..) => Format::Json,
            (_, true, ..) => Format::Text,
            (_, _, true, _) => Format::Dot,
            (.., true) => Format::Sexpr,
            _ => default,
        }
    }
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Print a semilinear representation of the Parikh image.
    Image {
        grammar: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Decide whether a vector belongs to the Parikh image.
    Member {
        grammar: PathBuf,
        /// Comma-separated counts in alphabet order, e.g. `3,3`.
        #[arg(long)]
        vector: String,
    },
    /// Compare the image with a brute-force oracle up to a word length.
    Verify {
        grammar: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
    /// Dump the catalog of minimal trees.
    Trees {
        grammar: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
    },
}

/// Error raised while running a command, tagged with the failing stage.
#[derive(Debug)]
pub enum CliError {
    Invalid {
        stage: &'static str,
        message: String,
    },
    Budget {
        stage: &'static str,
        source: BudgetExceeded,
    },
}

impl CliError {
    fn invalid(stage: &'static str, message: impl ToString) -> Self {
        CliError::Invalid {
            stage,
            message: message.to_string(),
        }
    }

    fn budget(stage: &'static str) -> impl FnOnce(BudgetExceeded) -> Self {
        move |source| CliError::Budget { stage, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => EXIT_INVALID,
            CliError::Budget { .. } => EXIT_BUDGET,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid { stage, message } => write!(f, "error [{stage}]: {message}"),
            CliError::Budget { stage, source } => write!(f, "error [{stage}]: {source}"),
        }
    }
}

fn parse_vector(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|c| c.trim().parse::<u64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::invalid("arguments", format!("bad --vector `{s}`: {e}")))
}

impl CliConfig {
    pub fn from_cli(cli: Cli) -> Result<CliConfig, CliError> {
        let base = |command, grammar_path, format| CliConfig {
            command,
            grammar_path,
            format,
            vector: None,
            max_len: None,
            max_trees: cli.max_trees,
            max_supports: cli.max_supports,
        };
        let config = match cli.command {
            CliCommand::Image { grammar, format } => {
                let f = format.resolve(Format::Json);
                if !matches!(f, Format::Json | Format::Text) {
                    return Err(CliError::invalid(
                        "arguments",
                        "image supports json or text",
                    ));
                }
                base(Command::Image, grammar, f)
            }
            CliCommand::Member {
                grammar,
                ref vector,
            } => CliConfig {
                vector: Some(parse_vector(vector)?),
                ..base(Command::Member, grammar, Format::Text)
            },
            CliCommand::Verify { grammar, max_len } => CliConfig {
                max_len: Some(max_len),
                ..base(Command::Verify, grammar, Format::Text)
            },
            CliCommand::Trees { grammar, format } => {
                let f = format.resolve(Format::Sexpr);
                if !matches!(f, Format::Sexpr | Format::Dot) {
                    return Err(CliError::invalid(
                        "arguments",
                        "trees supports sexpr or dot",
                    ));
                }
                base(Command::Trees, grammar, f)
            }
        };
        Ok(config)
    }

    fn budgets(&self) -> Budgets {
        Budgets {
            max_trees: self.max_trees,
            max_supports: self.max_supports,
        }
    }
}

fn load_grammar(path: &PathBuf) -> Result<Grammar, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid("read", format!("{}: {e}", path.display())))?;
    parse_grammar(&text).map_err(|e| CliError::invalid("parse", e))
}

fn image_of(config: &CliConfig, g: &Grammar) -> Result<SemilinearSet, CliError> {
    compute_image(g, &config.budgets()).map_err(|e| CliError::Budget {
        stage: if e.what == "support" {
            "supports"
        } else {
            "catalog"
        },
        source: e,
    })
}

/// Executes one command, writing results to `out`. Returns the exit code
/// on success paths; errors are returned for the caller to report.
pub fn execute(config: &CliConfig, out: &mut dyn Write) -> Result<i32, CliError> {
    let g = load_grammar(&config.grammar_path)?;
    let io = |e: std::io::Error| CliError::invalid("output", e);
    match config.command {
        Command::Image => {
            let image = image_of(config, &g)?;
            match config.format {
                Format::Text => write!(out, "{}", image.to_text(g.alphabet())).map_err(io)?,
                _ => {
                    let json = serde_json::to_string(&image.to_json(g.alphabet()))
                        .expect("image serializes");
                    writeln!(out, "{json}").map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Member => {
            let v = ParikhVector::from(config.vector.clone().expect("member has a vector"));
            let image = image_of(config, &g)?;
            let found = image
                .contains(&v)
                .map_err(|e| CliError::invalid("arguments", e))?;
            writeln!(out, "{found}").map_err(io)?;
            Ok(if found { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Verify => {
            let n = config.max_len.expect("verify has max_len");
            let image = image_of(config, &g)?;
            let ours = image
                .enumerate_bounded(n as u64, ENUMERATION_CAP)
                .map_err(CliError::budget("enumerate"))?;
            let oracle = oracle_parikh_vectors(&g, n).map_err(CliError::budget("oracle"))?;
            match first_difference(&ours, &oracle) {
                None => {
                    writeln!(out, "equal up to length {n}").map_err(io)?;
                    Ok(EXIT_OK)
                }
                Some((v, in_image)) => {
                    let (has, lacks) = if in_image {
                        ("image", "oracle")
                    } else {
                        ("oracle", "image")
                    };
                    writeln!(out, "mismatch at {v}: in {has}, not in {lacks}").map_err(io)?;
                    Ok(EXIT_NEGATIVE)
                }
            }
        }
        Command::Trees => {
            let reduced = reduce_grammar(&g);
            let catalog =
                build_catalog(&reduced, config.max_trees).map_err(CliError::budget("catalog"))?;
            for (i, t) in catalog.iter().enumerate() {
                match config.format {
                    Format::Dot => write!(out, "{}", t.to_dot(&reduced, &format!("tree{i}"))),
                    _ => writeln!(out, "{}", t.to_sexpr(&reduced)),
                }
                .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// Smallest vector in the symmetric difference, flagged with whether it is
/// on the `left` side.
fn first_difference(
    left: &BTreeSet<ParikhVector>,
    right: &BTreeSet<ParikhVector>,
) -> Option<(ParikhVector, bool)> {
    let l = left.difference(right).next();
    let r = right.difference(left).next();
    match (l, r) {
        (Some(a), Some(b)) if b < a => Some((b.clone(), false)),
        (Some(a), _) => Some((a.clone(), true)),
        (None, Some(b)) => Some((b.clone(), false)),
        (None, None) => None,
    }
}

/// Runs a validated configuration, reporting errors to `err`.
pub fn run(config: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(config, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

/// Entry point shared by the binary: parses `args`, runs, returns the exit
/// code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            if e.use_stderr() {
                let _ = write!(err, "{e}");
            } else {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    match CliConfig::from_cli(cli) {
        Ok(config) => run(&config, out, err),
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
