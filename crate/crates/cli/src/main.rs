//! `modelprob`: count models of finite first-order theories and turn two counts
//! into a probability.
//!
//! Exit codes: 0 ok, 1 usage or I/O error, 2 parse error, 3 semantic or
//! grounding error, 4 no possible models, 5 corpus or oracle mismatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use modelprob::corpus::{run_corpus, CorpusSource, ProbabilityReport};
use modelprob::{
    brute_force_count, count_models, enumerate, merge_theories, parse_theory, solve_puzzle, Interpretation,
    ModelCount, ModelLimit, OracleBudget, OracleError, ProbabilityError, SourceFile, Theory,
};

#[derive(Parser)]
#[command(name = "modelprob", version, about = "Finite model counting for probability puzzles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Count the models of a theory.
    Count {
        theory: PathBuf,
        /// Also count with the brute-force oracle and require agreement.
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Count possible and favorable models and report the probability.
    Solve {
        #[arg(long)]
        possible: PathBuf,
        #[arg(long)]
        favorable: PathBuf,
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List the models of a theory, one per line.
    Models {
        theory: PathBuf,
        /// Stop after this many models (default: the theory's max_models).
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Run the bundled puzzle corpus against its expected counts.
    Corpus {
        /// Read the corpus files from this directory instead of the bundled copies.
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(String),
    Semantic(String),
    ZeroPossible(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Semantic(_) => 3,
            Failure::ZeroPossible(_) => 4,
            Failure::Mismatch(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Semantic(m) | Failure::ZeroPossible(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<ProbabilityError> for Failure {
    fn from(e: ProbabilityError) -> Self {
        match e {
            ProbabilityError::ZeroPossibleModels => Failure::ZeroPossible(e.to_string()),
            other => Failure::Semantic(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("modelprob: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Count { theory, oracle, format } => run_count(&theory, oracle, format),
        Command::Solve { possible, favorable, oracle, format } => run_solve(&possible, &favorable, oracle, format),
        Command::Models { theory, limit } => run_models(&theory, limit),
        Command::Corpus { dir, format } => run_corpus_command(dir, format),
    }
}

fn load(path: &Path) -> Result<Theory, Failure> {
    let src = SourceFile::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_theory(&src).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(|d| format!("{}:{d}", src.origin_name())).collect();
        Failure::Parse(lines.join("\n"))
    })
}

fn count(th: &Theory) -> Result<ModelCount, Failure> {
    count_models(th).map_err(|e| Failure::Semantic(e.to_string()))
}

fn cross_check(th: &Theory, counted: &ModelCount, what: &str) -> Result<(), Failure> {
    match brute_force_count(th, OracleBudget::default()) {
        Ok(brute) if brute == *counted => Ok(()),
        Ok(brute) => Err(Failure::Mismatch(format!("{what}: solver counted {counted}, oracle counted {brute}"))),
        Err(e @ OracleError::BudgetExceeded { .. }) => Err(Failure::Semantic(format!("{what}: {e}"))),
        Err(e) => Err(Failure::Semantic(format!("{what}: {e}"))),
    }
}

fn json_count(c: &ModelCount) -> serde_json::Value {
    match u64::try_from(&c.count) {
        Ok(v) => v.into(),
        Err(_) => c.count.to_string().into(),
    }
}

fn run_count(path: &Path, oracle: bool, format: Format) -> Result<(), Failure> {
    let th = load(path)?;
    let counted = count(&th)?;
    if oracle {
        cross_check(&th, &counted, &path.display().to_string())?;
    }
    match format {
        Format::Text => println!("{counted}"),
        Format::Json => {
            let value = serde_json::json!({
                "file": path.display().to_string(),
                "count": json_count(&counted),
                "exhausted": counted.exhausted,
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        }
    }
    Ok(())
}

fn run_solve(possible: &Path, favorable: &Path, oracle: bool, format: Format) -> Result<(), Failure> {
    let base = load(possible)?;
    let extra = load(favorable)?;
    let outcome = solve_puzzle(&base, &extra)?;
    if oracle {
        let merged = merge_theories(&base, &extra).map_err(|e| Failure::Semantic(e.to_string()))?;
        cross_check(&base, &outcome.possible, "possible")?;
        cross_check(&merged, &outcome.favorable, "favorable")?;
    }
    match format {
        Format::Text => {
            println!("possible models:  {}", outcome.possible.count);
            println!("favorable models: {}", outcome.favorable.count);
            println!("probability:      {outcome}");
        }
        Format::Json => {
            let value = serde_json::json!({
                "possible": json_count(&outcome.possible),
                "favorable": json_count(&outcome.favorable),
                "probability": ProbabilityReport::from(&outcome),
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
        }
    }
    Ok(())
}

fn format_model(m: &Interpretation) -> String {
    let parts: Vec<String> = m
        .tables()
        .map(|(name, t)| {
            let values: Vec<String> = t.values.iter().map(u32::to_string).collect();
            format!("{name} = {}", values.join(" "))
        })
        .collect();
    parts.join("; ")
}

fn run_models(path: &Path, limit: Option<u64>) -> Result<(), Failure> {
    let th = load(path)?;
    let limit = match limit {
        Some(0) => return Err(Failure::Usage("--limit must be positive".into())),
        Some(l) => ModelLimit::AtMost(l),
        None => th.limit(),
    };
    let mut models = enumerate(&th, limit).map_err(|e| Failure::Semantic(e.to_string()))?;
    let mut shown = 0u64;
    for model in models.by_ref() {
        let model = model.map_err(|e| Failure::Semantic(e.to_string()))?;
        shown += 1;
        println!("model {shown}: {}", format_model(&model));
    }
    if models.truncated().map_err(|e| Failure::Semantic(e.to_string()))? {
        println!("stopped after {shown} models; more exist");
    } else {
        println!("{shown} models");
    }
    Ok(())
}

fn run_corpus_command(dir: Option<PathBuf>, format: Format) -> Result<(), Failure> {
    let source = dir.map_or(CorpusSource::Bundled, CorpusSource::Dir);
    let report = run_corpus(&source, OracleBudget::default());
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} of {} corpus cases failed", report.total - report.passed, report.total)))
    }
}
