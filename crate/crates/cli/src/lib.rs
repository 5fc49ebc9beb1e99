//! The `strata` command line. [`run`] is the whole program minus process
//! exit, so tests can drive it in-process.

mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::Code;
use output::finish;

#[derive(Parser, Debug)]
#[command(name = "strata", version, about = "Stratified epistemic arithmetic toolkit")]
pub struct Cli {
    /// Output format: human-readable text or one JSON record per line.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

/// A formula given inline or read from a file.
#[derive(Args, Debug, Clone)]
pub struct FormulaInput {
    /// Formula text.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    pub formula: Option<String>,
    /// Read the formula from a file instead; `#` starts a comment.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

/// Several formulas, inline and/or one per line of a file.
#[derive(Args, Debug, Clone)]
pub struct FormulaList {
    pub formulas: Vec<String>,
    /// File with one formula per line; `#` starts a comment.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BudgetArg {
    /// Prover step budget.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a formula and print its canonical rendering.
    Parse(FormulaInput),
    /// Print the operator-nesting depth.
    Depth(FormulaInput),
    /// Print the set of superscripts.
    Onset(FormulaInput),
    /// Stratify an L_EA formula along a stratifier.
    Stratify {
        /// Stratifier, e.g. `tail:limits-from(1)` or `seed:[w] tail:all-from(w*2)`.
        #[arg(long)]
        x: String,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Erase superscripts.
    Destratify {
        /// Accept plain operators and mixed formulas.
        #[arg(long)]
        lenient: bool,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Rewrite superscripts along an order-preserving map.
    Maph {
        /// Pairs such as `0:w,1:w*2`.
        #[arg(long)]
        h: String,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Print the collapse map of a superscript set below w*n.
    Collapse {
        #[arg(long)]
        n: u64,
        /// Comma-separated ordinals.
        #[arg(long)]
        supers: String,
    },
    /// Decide whether a formula is the image of a stratifier.
    Recognize(FormulaInput),
    /// Instantiate an axiom schema.
    Schema(SchemaCmd),
    /// Keep the members of a stratified fragment below a level.
    Restrict {
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        members: FormulaList,
    },
    /// Check a stratified fragment for uniformity over an ordinal pool.
    Uniform {
        /// Comma-separated ordinals.
        #[arg(long)]
        pool: String,
        /// Print the uniform closure instead of the violations.
        #[arg(long)]
        close: bool,
        #[command(flatten)]
        members: FormulaList,
    },
    /// Replace operator applications by fresh predicates.
    Abstract(FormulaInput),
    /// Prove or refute a formula within a budget.
    Prove {
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Decide whether a theory entails a formula.
    Entails {
        /// Theory file.
        #[arg(long)]
        theory: PathBuf,
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Compare `T |= phi` with its stratified image.
    Upward {
        #[arg(long)]
        x: String,
        /// Theory file; the empty theory when absent.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArg,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Evaluate a formula in a finite structure.
    Eval {
        /// Structure file.
        #[arg(long)]
        model: PathBuf,
        /// Values for free variables, e.g. `x:0,y:1`.
        #[arg(long, default_value = "")]
        assign: String,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Search small finite structures for a countermodel.
    Countermodel {
        #[arg(long, default_value_t = 3)]
        max_universe: u32,
        /// Oracle keys the search may fix.
        #[arg(long, default_value_t = 20_000)]
        oracle_budget: usize,
        #[command(flatten)]
        input: FormulaInput,
    },
    /// Run the E2 counterexample in the bounded intended structure.
    E2Demo {
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Check every sampled member of the stratified theory level by level.
    InductionWalk {
        #[arg(long)]
        alpha_max: String,
        /// Theory file; `{0=0}` with E3 and K-closure 2 when absent.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Args, Debug)]
pub struct SchemaCmd {
    /// Schema name: E1, E2, E2prime, E3, E4, AssignedValidity, Mechanicalness, EAInduction, PAAxiom.
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub phi: Option<String>,
    #[arg(long)]
    pub psi: Option<String>,
    /// Assignment such as `x:1,y:0`.
    #[arg(long)]
    pub assign: Option<String>,
    /// Closure order, e.g. `x,y`.
    #[arg(long)]
    pub closure: Option<String>,
    #[arg(long)]
    pub var: Option<String>,
    #[arg(long)]
    pub witness: Option<String>,
    #[arg(long)]
    pub index: Option<usize>,
    /// Require E1 and AssignedValidity operands to be proved valid.
    #[arg(long)]
    pub check_validity: bool,
    #[command(flatten)]
    pub budget: BudgetArg,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Parse(_) => "parse",
            Command::Depth(_) => "depth",
            Command::Onset(_) => "onset",
            Command::Stratify { .. } => "stratify",
            Command::Destratify { .. } => "destratify",
            Command::Maph { .. } => "maph",
            Command::Collapse { .. } => "collapse",
            Command::Recognize(_) => "recognize",
            Command::Schema(_) => "schema",
            Command::Restrict { .. } => "restrict",
            Command::Uniform { .. } => "uniform",
            Command::Abstract(_) => "abstract",
            Command::Prove { .. } => "prove",
            Command::Entails { .. } => "entails",
            Command::Upward { .. } => "upward",
            Command::Eval { .. } => "eval",
            Command::Countermodel { .. } => "countermodel",
            Command::E2Demo { .. } => "e2-demo",
            Command::InductionWalk { .. } => "induction-walk",
        }
    }
}

/// What the process prints and returns.
#[derive(Debug)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(argv: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution { code: Code::Usage as i32, stdout: String::new(), stderr: text }
            } else {
                Execution { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let name = cli.command.name();
    let json = cli.format == Format::Json;
    match commands::dispatch(&cli.command) {
        Ok(outcome) => {
            let lines = if json { finish(name, &outcome) } else { outcome.lines.clone() };
            Execution { code: outcome.code as i32, stdout: join(lines), stderr: String::new() }
        }
        Err(f) => Execution {
            code: f.code as i32,
            stdout: if json { join(vec![f.record(name).to_string()]) } else { String::new() },
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn join(lines: Vec<String>) -> String {
    lines.into_iter().map(|l| l + "\n").collect()
}
